// Viewer wiring: session -> latest-frame slot -> render loop; keyboard -> input
// messages; HUD with connection state, render FPS, and particle count.

import { defaultOrbit, rotate, zoom, Orbit } from "./camera.js";
import { KeyState, attachKeyboard, startInputLoop } from "./input.js";
import { Session, SessionStatus } from "./net.js";
import { Renderer } from "./render.js";
import { ClientFrame } from "./protocol.js";

function hud(): HTMLElement {
  const el = document.createElement("div");
  el.style.cssText = "position:fixed;top:8px;left:8px;color:#cfe;"
    + "font:13px monospace;background:rgba(0,0,0,0.55);padding:6px 10px;"
    + "border-radius:4px;white-space:pre;pointer-events:none";
  document.body.appendChild(el);
  return el;
}

export function start(url: string): void {
  const canvas = document.createElement("canvas");
  canvas.style.cssText = "position:fixed;inset:0;width:100%;height:100%";
  document.body.style.margin = "0";
  document.body.appendChild(canvas);
  const overlay = hud();

  let status: SessionStatus = "connecting";
  const session = new Session(url, {
    onStatus: (s) => { status = s; },
    onError: (m) => console.warn(m),
  });

  const keys = new KeyState();
  attachKeyboard(keys, window as unknown as {
    addEventListener(type: string, fn: (ev: KeyboardEvent) => void): void;
  });
  startInputLoop(keys, (msg) => session.send(msg), 0, 100);

  let orbit: Orbit = defaultOrbit();
  let dragging = false;
  let lastX = 0, lastY = 0;
  canvas.addEventListener("mousedown", (ev) => {
    dragging = true; lastX = ev.clientX; lastY = ev.clientY;
  });
  window.addEventListener("mouseup", () => { dragging = false; });
  window.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    orbit = rotate(orbit, -(ev.clientX - lastX) * 0.005, (ev.clientY - lastY) * 0.005);
    lastX = ev.clientX; lastY = ev.clientY;
  });
  canvas.addEventListener("wheel", (ev) => {
    orbit = zoom(orbit, Math.exp(ev.deltaY * 0.001));
    ev.preventDefault();
  }, { passive: false });

  const renderer = new Renderer(canvas);
  let lastFrame: ClientFrame | null = null;
  let fps = 0;
  let frames = 0;
  let fpsStamp = performance.now();

  function tick(): void {
    const fresh = session.takeFrame();
    if (fresh) lastFrame = fresh;
    if (lastFrame) {
      const boat = Renderer.boatTarget(lastFrame);
      if (boat) orbit = { ...orbit, target: boat };
      renderer.draw(lastFrame, orbit);
      frames++;
    }
    const now = performance.now();
    if (now - fpsStamp > 500) {
      fps = frames * 1000 / (now - fpsStamp);
      frames = 0;
      fpsStamp = now;
    }
    const particles = lastFrame?.particles !== undefined
      ? `\nparticles ${lastFrame.particles}` : "";
    const simT = lastFrame ? `\nsim t ${lastFrame.t.toFixed(1)} s` : "";
    overlay.textContent =
      `${status}${status !== "open" ? " ..." : ""}\nrender ${fps.toFixed(0)} fps`
      + simT + particles + `\nWASD steer, drag orbit, wheel zoom`;
    requestAnimationFrame(tick);
  }
  requestAnimationFrame(tick);
}

const params = new URLSearchParams(window.location.search);
const defaultUrl = `ws://${window.location.hostname || "127.0.0.1"}:8765`;
start(params.get("ws") ?? defaultUrl);
