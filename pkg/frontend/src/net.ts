// WebSocket session with a latest-frame slot and visible reconnect state.
//
// The render loop polls takeFrame(); frames arriving faster than rendering
// simply overwrite the slot (old frames dropped, never queued).

import { ClientFrame, parseFrame } from "./protocol.js";

export type SessionStatus = "connecting" | "open" | "reconnecting" | "closed";

export interface SessionHooks {
  onStatus?: (s: SessionStatus) => void;
  onError?: (message: string) => void;
  makeSocket?: (url: string) => WebSocket; // test seam
}

export class Session {
  private url: string;
  private hooks: SessionHooks;
  private ws: WebSocket | null = null;
  private slot: ClientFrame | null = null;
  private closed = false;
  private retryMs = 500;
  framesReceived = 0;
  framesDropped = 0;

  constructor(url: string, hooks: SessionHooks = {}) {
    this.url = url;
    this.hooks = hooks;
    this.open("connecting");
  }

  private open(status: SessionStatus): void {
    this.hooks.onStatus?.(status);
    const make = this.hooks.makeSocket ?? ((u: string) => new WebSocket(u));
    const ws = make(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 500;
      this.hooks.onStatus?.("open");
    };
    ws.onmessage = (ev: MessageEvent) => this.handleMessage(String(ev.data));
    ws.onclose = () => this.scheduleReconnect();
    ws.onerror = () => { /* onclose follows */ };
  }

  handleMessage(text: string): void {
    let frame: ClientFrame;
    try {
      frame = parseFrame(text);
    } catch (err) {
      // malformed message: drop it, keep the session alive
      this.hooks.onError?.(`dropped message: ${err}`);
      console.warn("viewer: dropped malformed message:", err);
      return;
    }
    if (this.slot !== null) this.framesDropped++;
    this.slot = frame;
    this.framesReceived++;
  }

  /** Latest frame, or null; the slot empties so each frame renders once. */
  takeFrame(): ClientFrame | null {
    const f = this.slot;
    this.slot = null;
    return f;
  }

  send(obj: unknown): boolean {
    if (this.ws && this.ws.readyState === 1 /* OPEN */) {
      this.ws.send(JSON.stringify(obj));
      return true;
    }
    return false;
  }

  private scheduleReconnect(): void {
    if (this.closed) {
      this.hooks.onStatus?.("closed");
      return;
    }
    this.hooks.onStatus?.("reconnecting");
    setTimeout(() => {
      if (!this.closed) this.open("reconnecting");
    }, this.retryMs);
    this.retryMs = Math.min(this.retryMs * 2, 5000);
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
    this.hooks.onStatus?.("closed");
  }
}
