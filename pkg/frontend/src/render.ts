// WebGL2 height-field renderer.
//
// The grid mesh is static; per-frame heights upload into an R32F texture and
// the vertex shader displaces vertices and recomputes normals from the
// neighboring texels, so all per-vertex work stays on the GPU.

import { Orbit, viewProjection } from "./camera.js";
import { BodyPose, ClientFrame } from "./protocol.js";

const VERT = `#version 300 es
precision highp float;
uniform sampler2D uHeights;
uniform mat4 uViewProj;
uniform vec2 uOrigin;
uniform float uSpacing;
uniform ivec2 uRes;
out vec3 vNormal;
out vec3 vWorld;

float tap(ivec2 ij) {
  ij = clamp(ij, ivec2(0), uRes - 1);
  return texelFetch(uHeights, ij, 0).r;
}

void main() {
  int i = gl_VertexID / uRes.y;
  int j = gl_VertexID % uRes.y;
  float h = tap(ivec2(i, j));
  float hx = (tap(ivec2(i + 1, j)) - tap(ivec2(i - 1, j))) / (2.0 * uSpacing);
  float hy = (tap(ivec2(i, j + 1)) - tap(ivec2(i, j - 1))) / (2.0 * uSpacing);
  vNormal = normalize(vec3(-hx, -hy, 1.0));
  vec3 world = vec3(uOrigin + vec2(float(i), float(j)) * uSpacing, h);
  vWorld = world;
  gl_Position = uViewProj * vec4(world, 1.0);
}`;

const FRAG = `#version 300 es
precision highp float;
in vec3 vNormal;
in vec3 vWorld;
uniform vec3 uEye;
out vec4 outColor;

void main() {
  vec3 n = normalize(vNormal);
  vec3 sun = normalize(vec3(0.4, 0.25, 0.87));
  float diffuse = max(dot(n, sun), 0.0);
  vec3 view = normalize(uEye - vWorld);
  float spec = pow(max(dot(reflect(-sun, n), view), 0.0), 48.0);
  float fresnel = pow(1.0 - max(dot(n, view), 0.0), 3.0);
  vec3 deep = vec3(0.02, 0.12, 0.22);
  vec3 sky = vec3(0.55, 0.7, 0.85);
  vec3 color = mix(deep, sky, 0.25 * fresnel + 0.15 * diffuse) + spec * 0.6;
  outColor = vec4(color, 1.0);
}`;

const BODY_VERT = `#version 300 es
precision highp float;
in vec3 aPos;
uniform mat4 uViewProj;
uniform vec3 uBodyPos;
uniform float uYaw;
void main() {
  float c = cos(uYaw), s = sin(uYaw);
  vec3 p = vec3(c * aPos.x - s * aPos.y, s * aPos.x + c * aPos.y, aPos.z);
  gl_Position = uViewProj * vec4(p + uBodyPos, 1.0);
}`;

const BODY_FRAG = `#version 300 es
precision highp float;
out vec4 outColor;
void main() { outColor = vec4(0.9, 0.35, 0.1, 1.0); }`;

function compile(gl: WebGL2RenderingContext, type: number, src: string): WebGLShader {
  const sh = gl.createShader(type)!;
  gl.shaderSource(sh, src);
  gl.compileShader(sh);
  if (!gl.getShaderParameter(sh, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(sh)}`);
  }
  return sh;
}

function link(gl: WebGL2RenderingContext, vs: string, fs: string): WebGLProgram {
  const prog = gl.createProgram()!;
  gl.attachShader(prog, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(prog, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(prog);
  if (!gl.getProgramParameter(prog, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(prog)}`);
  }
  return prog;
}

export class Renderer {
  private gl: WebGL2RenderingContext;
  private surface: WebGLProgram;
  private body: WebGLProgram;
  private tex: WebGLTexture;
  private indexCount = 0;
  private res: [number, number] = [0, 0];
  private bodyVao: WebGLVertexArrayObject;
  private surfaceVao: WebGLVertexArrayObject;
  private bodyVerts = 0;

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl2");
    if (!gl) throw new Error("WebGL2 required");
    this.gl = gl;
    if (!gl.getExtension("EXT_color_buffer_float")) {
      // R32F sampling works without it; keep going
    }
    this.surface = link(gl, VERT, FRAG);
    this.body = link(gl, BODY_VERT, BODY_FRAG);
    this.tex = gl.createTexture()!;
    this.surfaceVao = gl.createVertexArray()!;
    this.bodyVao = this.makeBoat();
    gl.enable(gl.DEPTH_TEST);
    gl.clearColor(0.06, 0.09, 0.13, 1.0);
  }

  private makeBoat(): WebGLVertexArrayObject {
    const gl = this.gl;
    // elongated hull wedge: 2 triangles deck + bow triangle sides
    const v = new Float32Array([
      -1.5, -0.8, 0.4, 1.5, 0, 0.4, -1.5, 0.8, 0.4,
      -1.5, -0.8, 0.4, -1.5, 0.8, 0.4, -1.5, 0, -0.4,
      1.5, 0, 0.4, -1.5, -0.8, 0.4, -1.5, 0, -0.4,
      1.5, 0, 0.4, -1.5, 0, -0.4, -1.5, 0.8, 0.4,
    ]);
    this.bodyVerts = v.length / 3;
    const vao = gl.createVertexArray()!;
    gl.bindVertexArray(vao);
    const buf = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, buf);
    gl.bufferData(gl.ARRAY_BUFFER, v, gl.STATIC_DRAW);
    const loc = gl.getAttribLocation(this.body, "aPos");
    gl.enableVertexAttribArray(loc);
    gl.vertexAttribPointer(loc, 3, gl.FLOAT, false, 0, 0);
    gl.bindVertexArray(null);
    return vao;
  }

  private rebuildIndices(w: number, h: number): void {
    const gl = this.gl;
    const idx = new Uint32Array((w - 1) * (h - 1) * 6);
    let k = 0;
    for (let i = 0; i < w - 1; i++) {
      for (let j = 0; j < h - 1; j++) {
        const a = i * h + j;
        idx[k++] = a; idx[k++] = a + h; idx[k++] = a + 1;
        idx[k++] = a + 1; idx[k++] = a + h; idx[k++] = a + h + 1;
      }
    }
    gl.bindVertexArray(this.surfaceVao);
    const ebo = gl.createBuffer()!;
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, ebo);
    gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, idx, gl.STATIC_DRAW);
    gl.bindVertexArray(null);
    this.indexCount = idx.length;
    this.res = [w, h];
  }

  draw(frame: ClientFrame, orbit: Orbit): void {
    const gl = this.gl;
    const [w, h] = frame.res;
    if (w !== this.res[0] || h !== this.res[1]) this.rebuildIndices(w, h);

    gl.bindTexture(gl.TEXTURE_2D, this.tex);
    gl.pixelStorei(gl.UNPACK_ALIGNMENT, 1);
    gl.texImage2D(gl.TEXTURE_2D, 0, gl.R32F, h, w, 0, gl.RED, gl.FLOAT,
                  frame.heights);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.NEAREST);

    const dpr = window.devicePixelRatio || 1;
    const cw = Math.floor(this.canvas.clientWidth * dpr);
    const ch = Math.floor(this.canvas.clientHeight * dpr);
    if (this.canvas.width !== cw || this.canvas.height !== ch) {
      this.canvas.width = cw;
      this.canvas.height = ch;
    }
    gl.viewport(0, 0, cw, ch);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);

    const vp = viewProjection(orbit, cw / Math.max(ch, 1));
    gl.useProgram(this.surface);
    gl.bindVertexArray(this.surfaceVao);
    gl.uniformMatrix4fv(gl.getUniformLocation(this.surface, "uViewProj"), false, vp);
    gl.uniform2f(gl.getUniformLocation(this.surface, "uOrigin"),
                 frame.origin[0], frame.origin[1]);
    gl.uniform1f(gl.getUniformLocation(this.surface, "uSpacing"), frame.spacing);
    gl.uniform2i(gl.getUniformLocation(this.surface, "uRes"), w, h);
    gl.uniform1i(gl.getUniformLocation(this.surface, "uHeights"), 0);
    const eyeLoc = gl.getUniformLocation(this.surface, "uEye");
    const eye = [orbit.target[0], orbit.target[1], orbit.target[2] + orbit.distance];
    gl.uniform3f(eyeLoc, eye[0], eye[1], eye[2]);
    gl.drawElements(gl.TRIANGLES, this.indexCount, gl.UNSIGNED_INT, 0);

    gl.useProgram(this.body);
    gl.bindVertexArray(this.bodyVao);
    gl.uniformMatrix4fv(gl.getUniformLocation(this.body, "uViewProj"), false, vp);
    for (const b of frame.bodies) {
      gl.uniform3f(gl.getUniformLocation(this.body, "uBodyPos"),
                   b.pos[0], b.pos[1], b.pos[2]);
      gl.uniform1f(gl.getUniformLocation(this.body, "uYaw"), b.yaw);
      gl.drawArrays(gl.TRIANGLES, 0, this.bodyVerts);
    }
    gl.bindVertexArray(null);
  }

  static boatTarget(frame: ClientFrame): [number, number, number] | null {
    const b: BodyPose | undefined = frame.bodies[0];
    return b ? [b.pos[0], b.pos[1], 0] : null;
  }
}
