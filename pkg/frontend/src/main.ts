// Page wiring: one session, a 50 Hz command tick independent of the render
// loop, pointer capture per arm, and a reconnect banner.

import { BINDINGS, InputSampler } from "./input.js"
import { Session, endpointFromLocation } from "./net.js"
import { Hello, StateFrame } from "./protocol.js"
import { CameraView, Hud, MapView, drawHud } from "./view.js"

const TICK_MS = 20 // 50 Hz command clock

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing #${id}`)
  return node as T
}

function main() {
  const sampler = new InputSampler()
  const banner = el<HTMLDivElement>("banner")
  const hud: Hud = {
    status: el("status"),
    step: el("step"),
    recording: el("recording"),
    episodes: el("episodes"),
    coalesced: el("coalesced"),
    subtasks: el("subtasks"),
    lastFile: el("lastfile"),
  }

  let hello: Hello | null = null
  let latest: StateFrame | null = null
  let cams: Record<string, CameraView> = {}
  const map = new MapView(el<HTMLCanvasElement>("map"))

  const session = new Session(endpointFromLocation(window.location), {
    onHello(h) {
      hello = h
      banner.style.display = "none"
      hud.status.textContent = `${h.task} @ ${(1 / h.dt).toFixed(0)} Hz`
      cams = {}
      for (const meta of h.cameras) {
        const canvas = el<HTMLCanvasElement>(`cam-${meta.name}`)
        cams[meta.name] = new CameraView(canvas, meta)
      }
    },
    onFrame(f) {
      latest = f
    },
    onError(detail) {
      hud.status.textContent = `error: ${detail}`
    },
    onStatus(s) {
      if (s === "open") banner.style.display = "none"
      if (s === "closed") {
        hello = null
        banner.style.display = "flex"
      }
      if (s === "connecting") hud.status.textContent = "connecting..."
    },
  })
  session.connect()
  el<HTMLButtonElement>("reconnect").onclick = () => session.connect()

  // keyboard
  window.addEventListener("keydown", (e) => {
    if (e.repeat) return
    const keys: string[] = Object.values(BINDINGS)
    if (keys.includes(e.key.toLowerCase())) e.preventDefault()
    sampler.keyDown(e.key)
  })
  window.addEventListener("keyup", (e) => sampler.keyUp(e.key))
  window.addEventListener("blur", () => sampler.releaseAll())

  // pointer: left button drags the left arm, right button the right arm
  const stage = el<HTMLDivElement>("stage")
  stage.addEventListener("contextmenu", (e) => e.preventDefault())
  let dragging: { side: "left" | "right"; x: number; y: number } | null = null
  stage.addEventListener("pointerdown", (e) => {
    const side = e.button === 2 ? "right" : "left"
    dragging = { side, x: e.clientX, y: e.clientY }
    stage.setPointerCapture(e.pointerId)
  })
  stage.addEventListener("pointermove", (e) => {
    if (!dragging) return
    sampler.drag(dragging.side, e.clientX - dragging.x, e.clientY - dragging.y)
    dragging.x = e.clientX
    dragging.y = e.clientY
  })
  const endDrag = () => {
    dragging = null
  }
  stage.addEventListener("pointerup", endDrag)
  stage.addEventListener("pointercancel", endDrag)

  // fixed-rate command tick; sends whatever accumulated since the last one
  setInterval(() => {
    if (!hello || !session.connected) return
    const cmd = sampler.sample(hello.v_max, hello.w_max, latest?.recording ?? false)
    session.send(cmd)
  }, TICK_MS)

  // render loop runs at display rate, drawing the newest frame only
  function render() {
    if (latest) {
      for (const [name, view] of Object.entries(cams)) {
        const b64 = latest.rasters[name]
        if (b64) view.draw(b64)
      }
      map.draw(latest)
      drawHud(hud, latest)
    }
    requestAnimationFrame(render)
  }
  requestAnimationFrame(render)
}

main()
