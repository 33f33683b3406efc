// Message shapes for the teleop WebSocket session.  Field names mirror the
// server's JSON exactly; everything the UI displays comes from these frames.

export interface ArmCommand {
  dx: number
  dy: number
  joint_deltas: number[] | null
  grip_toggle: boolean
}

export interface TeleopCommand {
  seq: number
  v: number
  w: number
  left: ArmCommand
  right: ArmCommand
  record: boolean | null
}

export interface CameraMeta {
  name: string
  h: number
  w: number
}

export interface Hello {
  type: "hello"
  task: string
  dt: number
  cameras: CameraMeta[]
  v_max: number
  w_max: number
  n_joints: number
  data_dir: string
}

export interface ObjectState {
  name: string
  x: number
  y: number
  radius: number
  attached: string | null
  zone: boolean
}

export interface StateFrame {
  type: "frame"
  t: number
  seq_applied: number | null
  coalesced: number
  recording: boolean
  n_recorded: number
  episode_path: string | null
  base_pose: number[]
  proprio: number[]
  objects: ObjectState[]
  subtasks: Record<string, boolean>
  rasters: Record<string, string>
}

export interface ErrorMessage {
  type: "error"
  detail: string
}

export type ServerMessage = Hello | StateFrame | ErrorMessage

export function parseServerMessage(text: string): ServerMessage {
  const msg = JSON.parse(text)
  if (msg.type !== "hello" && msg.type !== "frame" && msg.type !== "error") {
    throw new Error(`unknown message type: ${msg.type}`)
  }
  return msg as ServerMessage
}

// base64 of row-major uint8 gray pixels -> byte array of length h*w
export function decodeRaster(data: string, h: number, w: number): Uint8Array {
  const bin = atob(data)
  if (bin.length !== h * w) {
    throw new Error(`raster is ${bin.length} bytes, expected ${h}x${w}`)
  }
  const out = new Uint8Array(h * w)
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i)
  return out
}

// gray bytes -> RGBA suitable for ImageData
export function grayToRGBA(gray: Uint8Array): Uint8ClampedArray {
  const rgba = new Uint8ClampedArray(gray.length * 4)
  for (let i = 0; i < gray.length; i++) {
    const g = gray[i]
    rgba[4 * i] = g
    rgba[4 * i + 1] = g
    rgba[4 * i + 2] = g
    rgba[4 * i + 3] = 255
  }
  return rgba
}
