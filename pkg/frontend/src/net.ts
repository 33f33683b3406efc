// WebSocket session wrapper.  Owns one connection at a time, parses server
// messages, and reports connection state changes; the socket constructor is
// injectable so the logic runs under test without a browser.

import { Hello, StateFrame, parseServerMessage, TeleopCommand } from "./protocol.js"

export type SocketLike = {
  readyState: number
  send(data: string): void
  close(): void
  onopen: ((ev?: unknown) => void) | null
  onclose: ((ev?: unknown) => void) | null
  onmessage: ((ev: { data: string }) => void) | null
}

export type SocketFactory = (url: string) => SocketLike

export interface SessionHooks {
  onHello(h: Hello): void
  onFrame(f: StateFrame): void
  onError(detail: string): void
  onStatus(s: "connecting" | "open" | "closed"): void
}

const OPEN = 1

export class Session {
  private ws: SocketLike | null = null
  hello: Hello | null = null
  framesSeen = 0

  constructor(
    private url: string,
    private hooks: SessionHooks,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect() {
    if (this.ws) this.ws.close()
    this.hello = null
    this.hooks.onStatus("connecting")
    const ws = this.factory(this.url)
    this.ws = ws
    ws.onopen = () => this.hooks.onStatus("open")
    ws.onclose = () => {
      if (this.ws === ws) {
        this.ws = null
        this.hooks.onStatus("closed")
      }
    }
    ws.onmessage = (ev) => this.handle(ev.data)
  }

  private handle(text: string) {
    let msg
    try {
      msg = parseServerMessage(text)
    } catch (e) {
      this.hooks.onError(String(e))
      return
    }
    if (msg.type === "hello") {
      this.hello = msg
      this.hooks.onHello(msg)
    } else if (msg.type === "frame") {
      this.framesSeen++
      this.hooks.onFrame(msg)
    } else {
      this.hooks.onError(msg.detail)
    }
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === OPEN && this.hello !== null
  }

  send(cmd: TeleopCommand): boolean {
    if (!this.ws || this.ws.readyState !== OPEN) return false
    this.ws.send(JSON.stringify(cmd))
    return true
  }

  close() {
    if (this.ws) this.ws.close()
    this.ws = null
  }
}

// endpoint selection: explicit ?server=ws://... query parameter wins,
// otherwise the session lives on the page's own origin at /session
export function endpointFromLocation(loc: { search: string; host: string; protocol: string }): string {
  const q = new URLSearchParams(loc.search).get("server")
  if (q) return q
  const scheme = loc.protocol === "https:" ? "wss" : "ws"
  return `${scheme}://${loc.host}/session`
}
