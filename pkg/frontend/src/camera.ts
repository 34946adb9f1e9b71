// Orbit camera: spherical coordinates around a target point, plus the
// view-projection matrix assembly (column-major, WebGL convention).

export interface Orbit {
  target: [number, number, number];
  distance: number;
  azimuth: number;  // radians around +z
  elevation: number; // radians above the horizon
}

export function defaultOrbit(): Orbit {
  return { target: [0, 0, 0], distance: 120, azimuth: -Math.PI / 2, elevation: 0.5 };
}

export function rotate(o: Orbit, dAz: number, dEl: number): Orbit {
  const el = Math.max(0.05, Math.min(Math.PI / 2 - 0.01, o.elevation + dEl));
  return { ...o, azimuth: o.azimuth + dAz, elevation: el };
}

export function zoom(o: Orbit, factor: number): Orbit {
  return { ...o, distance: Math.max(5, Math.min(2000, o.distance * factor)) };
}

export function eyePosition(o: Orbit): [number, number, number] {
  const ce = Math.cos(o.elevation);
  return [
    o.target[0] + o.distance * ce * Math.cos(o.azimuth),
    o.target[1] + o.distance * ce * Math.sin(o.azimuth),
    o.target[2] + o.distance * Math.sin(o.elevation),
  ];
}

type Vec3 = [number, number, number];

function sub(a: Vec3, b: Vec3): Vec3 { return [a[0] - b[0], a[1] - b[1], a[2] - b[2]]; }
function cross(a: Vec3, b: Vec3): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}
function norm(a: Vec3): Vec3 {
  const n = Math.hypot(a[0], a[1], a[2]) || 1;
  return [a[0] / n, a[1] / n, a[2] / n];
}
function dot(a: Vec3, b: Vec3): number { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

export function lookAt(eye: Vec3, target: Vec3, up: Vec3 = [0, 0, 1]): Float32Array {
  const f = norm(sub(target, eye));
  const s = norm(cross(f, up));
  const u = cross(s, f);
  return new Float32Array([
    s[0], u[0], -f[0], 0,
    s[1], u[1], -f[1], 0,
    s[2], u[2], -f[2], 0,
    -dot(s, eye), -dot(u, eye), dot(f, eye), 1,
  ]);
}

export function perspective(fovY: number, aspect: number, near: number,
                            far: number): Float32Array {
  const f = 1 / Math.tan(fovY / 2);
  const nf = 1 / (near - far);
  return new Float32Array([
    f / aspect, 0, 0, 0,
    0, f, 0, 0,
    0, 0, (far + near) * nf, -1,
    0, 0, 2 * far * near * nf, 0,
  ]);
}

export function multiply(a: Float32Array, b: Float32Array): Float32Array {
  const out = new Float32Array(16);
  for (let c = 0; c < 4; c++) {
    for (let r = 0; r < 4; r++) {
      let acc = 0;
      for (let k = 0; k < 4; k++) acc += a[k * 4 + r] * b[c * 4 + k];
      out[c * 4 + r] = acc;
    }
  }
  return out;
}

export function viewProjection(o: Orbit, aspect: number): Float32Array {
  const proj = perspective(Math.PI / 4, aspect, 0.5, 5000);
  const view = lookAt(eyePosition(o), o.target);
  return multiply(proj, view);
}
