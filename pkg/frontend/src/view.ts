// Canvas rendering of server frames: the three camera rasters, a top-down
// map of reported object/base state, and the status line.  Nothing shown
// here is computed client-side beyond pixel scaling.

import { CameraMeta, StateFrame, decodeRaster, grayToRGBA } from "./protocol.js"

const MAP_HALF_M = 2.2 // world meters shown from the map center

export class CameraView {
  private ctx: CanvasRenderingContext2D
  private off: HTMLCanvasElement

  constructor(private canvas: HTMLCanvasElement, private meta: CameraMeta) {
    this.ctx = canvas.getContext("2d")!
    this.ctx.imageSmoothingEnabled = false
    this.off = document.createElement("canvas")
    this.off.width = meta.w
    this.off.height = meta.h
  }

  draw(b64: string) {
    const gray = decodeRaster(b64, this.meta.h, this.meta.w)
    const octx = this.off.getContext("2d")!
    const img = octx.createImageData(this.meta.w, this.meta.h)
    img.data.set(grayToRGBA(gray))
    octx.putImageData(img, 0, 0)
    this.ctx.imageSmoothingEnabled = false
    this.ctx.drawImage(this.off, 0, 0, this.canvas.width, this.canvas.height)
  }
}

export class MapView {
  private ctx: CanvasRenderingContext2D

  constructor(private canvas: HTMLCanvasElement) {
    this.ctx = canvas.getContext("2d")!
  }

  private toPx(x: number, y: number, cx: number, cy: number): [number, number] {
    const s = this.canvas.width / (2 * MAP_HALF_M)
    return [this.canvas.width / 2 + (x - cx) * s, this.canvas.height / 2 - (y - cy) * s]
  }

  draw(frame: StateFrame) {
    const ctx = this.ctx
    const [bx, by, bth] = frame.base_pose
    const s = this.canvas.width / (2 * MAP_HALF_M)
    ctx.fillStyle = "#111"
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height)

    for (const o of frame.objects) {
      const [px, py] = this.toPx(o.x, o.y, bx, by)
      ctx.beginPath()
      ctx.arc(px, py, Math.max(2, o.radius * s), 0, 2 * Math.PI)
      if (o.zone) {
        ctx.strokeStyle = "#557"
        ctx.stroke()
      } else {
        ctx.fillStyle = o.attached ? "#fc6" : "#9ab"
        ctx.fill()
      }
    }

    // base marker: circle plus heading tick
    const [px, py] = this.toPx(bx, by, bx, by)
    ctx.beginPath()
    ctx.arc(px, py, 0.16 * s, 0, 2 * Math.PI)
    ctx.strokeStyle = "#6d6"
    ctx.stroke()
    ctx.beginPath()
    ctx.moveTo(px, py)
    ctx.lineTo(px + 0.25 * s * Math.cos(bth), py - 0.25 * s * Math.sin(bth))
    ctx.stroke()
  }
}

export interface Hud {
  status: HTMLElement
  step: HTMLElement
  recording: HTMLElement
  episodes: HTMLElement
  coalesced: HTMLElement
  subtasks: HTMLElement
  lastFile: HTMLElement
}

export function drawHud(hud: Hud, frame: StateFrame) {
  hud.step.textContent = String(frame.t)
  hud.recording.textContent = frame.recording ? "REC" : "idle"
  hud.recording.className = frame.recording ? "rec on" : "rec"
  hud.episodes.textContent = String(frame.n_recorded)
  hud.coalesced.textContent = String(frame.coalesced)
  if (frame.episode_path) hud.lastFile.textContent = frame.episode_path
  const parts: string[] = []
  for (const [name, on] of Object.entries(frame.subtasks)) {
    parts.push(`<span class="chip ${on ? "on" : ""}">${name}</span>`)
  }
  hud.subtasks.innerHTML = parts.join(" ")
}
