// Keyboard steering: W/S map to thrust, A/D to rudder, sent at a fixed poll
// interval while the session is open.

import { InputMessage, makeInput } from "./protocol.js";

export class KeyState {
  private down = new Set<string>();

  press(code: string): void {
    this.down.add(code.toLowerCase());
  }

  release(code: string): void {
    this.down.delete(code.toLowerCase());
  }

  thrust(): number {
    return (this.down.has("w") ? 1 : 0) - (this.down.has("s") ? 1 : 0);
  }

  rudder(): number {
    // A steers left (positive yaw), D right
    return (this.down.has("a") ? 1 : 0) - (this.down.has("d") ? 1 : 0);
  }

  message(bodyId: number): InputMessage {
    return makeInput(bodyId, this.thrust(), this.rudder());
  }
}

export interface InputLoopHandle {
  stop(): void;
}

export function startInputLoop(
  keys: KeyState,
  send: (msg: InputMessage) => void,
  bodyId = 0,
  pollMs = 100,
): InputLoopHandle {
  let last = "";
  const timer = setInterval(() => {
    const msg = keys.message(bodyId);
    const key = `${msg.thrust}|${msg.rudder}`;
    // always send while any control is active; send one zero message on release
    if (msg.thrust !== 0 || msg.rudder !== 0 || key !== last) {
      send(msg);
    }
    last = key;
  }, pollMs);
  return { stop: () => clearInterval(timer) };
}

export function attachKeyboard(keys: KeyState, target: {
  addEventListener(type: string, fn: (ev: KeyboardEvent) => void): void;
}): void {
  target.addEventListener("keydown", (ev) => keys.press(ev.key));
  target.addEventListener("keyup", (ev) => keys.release(ev.key));
}
