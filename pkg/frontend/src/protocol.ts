// Wire protocol: JSON text messages over WebSocket.
//
// server -> client frame:
//   {"type":"frame","t":..,"res":[w,h],"origin":[x,y],"spacing":..,
//    "heights":"<base64 float32 row-major>","bodies":[{"id","pos":[x,y,z],"yaw"}],
//    "particles": n}
// client -> server input:
//   {"type":"input","id":..,"thrust":..,"rudder":..}

export interface BodyPose {
  id: number;
  pos: [number, number, number];
  yaw: number;
}

export interface ClientFrame {
  t: number;
  res: [number, number];
  origin: [number, number];
  spacing: number;
  heights: Float32Array; // row-major, res[0] * res[1]
  bodies: BodyPose[];
  particles?: number;
}

export interface InputMessage {
  type: "input";
  id: number;
  thrust: number;
  rudder: number;
}

export function decodeHeights(b64: string, count: number): Float32Array {
  const bin = atob(b64);
  if (bin.length !== count * 4) {
    throw new Error(`heights payload is ${bin.length} bytes, expected ${count * 4}`);
  }
  const bytes = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
  // float32 little-endian
  return new Float32Array(bytes.buffer);
}

export function encodeHeights(heights: Float32Array): string {
  const bytes = new Uint8Array(heights.buffer, heights.byteOffset, heights.byteLength);
  let bin = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    bin += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(bin);
}

function isFiniteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

/** Parse and validate one frame message; throws on anything malformed. */
export function parseFrame(text: string): ClientFrame {
  const msg = JSON.parse(text);
  if (msg.type !== "frame") throw new Error(`unexpected message type ${msg.type}`);
  if (!Array.isArray(msg.res) || msg.res.length !== 2) throw new Error("bad res");
  const [w, h] = msg.res;
  if (!Number.isInteger(w) || !Number.isInteger(h) || w < 2 || h < 2) {
    throw new Error("bad res values");
  }
  if (!Array.isArray(msg.origin) || msg.origin.length !== 2
      || !msg.origin.every(isFiniteNumber)) {
    throw new Error("bad origin");
  }
  if (!isFiniteNumber(msg.spacing) || msg.spacing <= 0) throw new Error("bad spacing");
  if (!isFiniteNumber(msg.t)) throw new Error("bad t");
  if (typeof msg.heights !== "string") throw new Error("missing heights");
  const heights = decodeHeights(msg.heights, w * h);
  for (let i = 0; i < heights.length; i++) {
    if (!Number.isFinite(heights[i])) throw new Error(`non-finite height at ${i}`);
  }
  const bodies: BodyPose[] = [];
  if (msg.bodies !== undefined) {
    if (!Array.isArray(msg.bodies)) throw new Error("bad bodies");
    for (const b of msg.bodies) {
      if (!Number.isInteger(b.id) || !Array.isArray(b.pos) || b.pos.length !== 3
          || !b.pos.every(isFiniteNumber) || !isFiniteNumber(b.yaw)) {
        throw new Error("bad body pose");
      }
      bodies.push({ id: b.id, pos: [b.pos[0], b.pos[1], b.pos[2]], yaw: b.yaw });
    }
  }
  const frame: ClientFrame = {
    t: msg.t, res: [w, h], origin: [msg.origin[0], msg.origin[1]],
    spacing: msg.spacing, heights, bodies,
  };
  if (isFiniteNumber(msg.particles)) frame.particles = msg.particles;
  return frame;
}

export function makeInput(id: number, thrust: number, rudder: number): InputMessage {
  const clamp = (x: number) => Math.max(-1, Math.min(1, x));
  return { type: "input", id, thrust: clamp(thrust), rudder: clamp(rudder) };
}
