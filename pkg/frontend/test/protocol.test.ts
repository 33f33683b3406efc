import { describe, expect, it } from "vitest"

import { decodeRaster, grayToRGBA, parseServerMessage } from "../src/protocol.js"

describe("raster decoding", () => {
  it("round-trips a known byte pattern", () => {
    const bytes = new Uint8Array([0, 17, 128, 255, 64, 3])
    const b64 = btoa(String.fromCharCode(...bytes))
    const out = decodeRaster(b64, 2, 3)
    expect(Array.from(out)).toEqual(Array.from(bytes))
  })

  it("rejects a size mismatch", () => {
    const b64 = btoa("abcd")
    expect(() => decodeRaster(b64, 3, 3)).toThrow(/expected 3x3/)
  })

  it("expands gray to opaque RGBA", () => {
    const rgba = grayToRGBA(new Uint8Array([7, 200]))
    expect(Array.from(rgba)).toEqual([7, 7, 7, 255, 200, 200, 200, 255])
  })
})

describe("server message parsing", () => {
  it("parses hello frames", () => {
    const msg = parseServerMessage(
      JSON.stringify({
        type: "hello",
        task: "wipe",
        dt: 0.02,
        cameras: [{ name: "top", h: 64, w: 64 }],
        v_max: 1.6,
        w_max: 2.0,
        n_joints: 6,
        data_dir: "/tmp/demos",
      }),
    )
    expect(msg.type).toBe("hello")
    if (msg.type === "hello") expect(msg.cameras[0].name).toBe("top")
  })

  it("parses state frames with rasters and subtasks", () => {
    const msg = parseServerMessage(
      JSON.stringify({
        type: "frame",
        t: 41,
        seq_applied: 40,
        coalesced: 1,
        recording: true,
        n_recorded: 2,
        episode_path: null,
        base_pose: [0, 0, 0],
        proprio: new Array(14).fill(0),
        objects: [{ name: "glass", x: 0.1, y: 0.5, radius: 0.05, attached: null, zone: false }],
        subtasks: { grasp_towel: false },
        rasters: { top: "" },
      }),
    )
    expect(msg.type).toBe("frame")
    if (msg.type === "frame") {
      expect(msg.t).toBe(41)
      expect(msg.subtasks.grasp_towel).toBe(false)
    }
  })

  it("rejects unknown message types", () => {
    expect(() => parseServerMessage('{"type":"nope"}')).toThrow(/unknown message type/)
  })
})
