// Whole-body input sampling.  Keys and pointer drags mutate the sampler's
// state; once per control tick `sample()` drains it into a single
// TeleopCommand, so simultaneous base keys and arm drags always travel
// together rather than as separate modal messages.

import { ArmCommand, TeleopCommand } from "./protocol.js"

export const BINDINGS = {
  forward: "w",
  back: "s",
  turnLeft: "a",
  turnRight: "d",
  gripLeft: "q",
  gripRight: "e",
  record: "r",
} as const

// pointer drag gain, meters of EE motion per pixel of drag
export const DRAG_GAIN = 0.004

export type Side = "left" | "right"

interface DragState {
  dx: number
  dy: number
}

export class InputSampler {
  private keys = new Set<string>()
  private drags: Record<Side, DragState> = {
    left: { dx: 0, dy: 0 },
    right: { dx: 0, dy: 0 },
  }
  private gripEdges: Record<Side, boolean> = { left: false, right: false }
  private recordEdge = false
  private seq = 0

  keyDown(key: string) {
    const k = key.toLowerCase()
    // gripper and record act on the press edge, not while held
    if (k === BINDINGS.gripLeft && !this.keys.has(k)) this.gripEdges.left = true
    if (k === BINDINGS.gripRight && !this.keys.has(k)) this.gripEdges.right = true
    if (k === BINDINGS.record && !this.keys.has(k)) this.recordEdge = true
    this.keys.add(k)
  }

  keyUp(key: string) {
    this.keys.delete(key.toLowerCase())
  }

  releaseAll() {
    this.keys.clear()
  }

  // pointer deltas accumulate between ticks; left button drives the left
  // arm, right button the right arm
  drag(side: Side, dxPx: number, dyPx: number) {
    this.drags[side].dx += dxPx * DRAG_GAIN
    // screen y grows downward, world y upward
    this.drags[side].dy -= dyPx * DRAG_GAIN
  }

  // `recording` is the latest server-reported state; the record key always
  // requests the opposite transition so the UI never invents its own state
  sample(vMax: number, wMax: number, recording: boolean): TeleopCommand {
    let v = 0
    let w = 0
    if (this.keys.has(BINDINGS.forward)) v += vMax
    if (this.keys.has(BINDINGS.back)) v -= vMax
    if (this.keys.has(BINDINGS.turnLeft)) w += wMax
    if (this.keys.has(BINDINGS.turnRight)) w -= wMax

    const arm = (side: Side): ArmCommand => {
      const d = this.drags[side]
      const cmd: ArmCommand = {
        dx: d.dx,
        dy: d.dy,
        joint_deltas: null,
        grip_toggle: this.gripEdges[side],
      }
      d.dx = 0
      d.dy = 0
      this.gripEdges[side] = false
      return cmd
    }

    let record: boolean | null = null
    if (this.recordEdge) {
      record = !recording
      this.recordEdge = false
    }

    return {
      seq: this.seq++,
      v,
      w,
      left: arm("left"),
      right: arm("right"),
      record,
    }
  }
}

export function isIdle(cmd: TeleopCommand): boolean {
  const armIdle = (a: ArmCommand) =>
    a.dx === 0 && a.dy === 0 && a.joint_deltas === null && !a.grip_toggle
  return (
    cmd.v === 0 && cmd.w === 0 && armIdle(cmd.left) && armIdle(cmd.right) && cmd.record === null
  )
}
