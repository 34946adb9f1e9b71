// End-to-end against a real simulator process: frames decode, steering input
// reaches the physics loop, and a moving boat raises the particle count.
// Skipped when the simulator package is not importable in python3.

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { makeInput, parseFrame, ClientFrame } from "../src/protocol.js";

const E2E_CFG = `
spectrum.n_omega = 8
spectrum.n_theta = 8
sim.dt = 0.05
sim.frames = 0
fft.n = 64
patch.0.origin = 200,200
patch.0.size = 100,100
patch.0.res = 65
patch.0.margin = 10
patch.0.track_body = 0
body.0.position = 250,250,0
body.0.size = 2,2,1
body.0.density = 400
body.0.max_thrust = 9000
output.write_frames = false
stream.rate = 1000
stream.res = 24
stream.window = 80
`;

const probe = spawnSync("python3", ["-c", "import hybridsea"], { timeout: 20000 });
const haveSim = probe.status === 0;

function startServer(): Promise<{ proc: ChildProcess; port: number }> {
  const dir = mkdtempSync(join(tmpdir(), "hybridsea-e2e-"));
  const cfgPath = join(dir, "e2e.cfg");
  writeFileSync(cfgPath, E2E_CFG);
  const proc = spawn("python3", ["-m", "hybridsea", "serve", cfgPath,
                                 "--port", "0", "--frames", "2400"]);
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error("server did not start")), 30000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const m = buffer.match(/streaming on ws:\/\/[\d.]+:(\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve({ proc, port: Number(m[1]) });
      }
    });
    proc.stderr!.on("data", () => { /* config errors surface via timeout */ });
    proc.on("exit", (code) => reject(new Error(`server exited early: ${code}`)));
  });
}

describe.skipIf(!haveSim)("live server round-trip", () => {
  let proc: ChildProcess;
  let port = 0;
  let ws: WebSocket;
  const frames: ClientFrame[] = [];

  beforeAll(async () => {
    ({ proc, port } = await startServer());
    ws = new WebSocket(`ws://127.0.0.1:${port}`);
    ws.on("message", (data) => {
      try {
        frames.push(parseFrame(data.toString()));
      } catch {
        // counted implicitly: valid frames must still arrive
      }
    });
    await new Promise<void>((resolve, reject) => {
      ws.once("open", () => resolve());
      ws.once("error", (e) => reject(e));
    });
  }, 60000);

  afterAll(() => {
    ws?.close();
    proc?.kill();
  });

  async function waitForFrames(count: number, timeoutMs = 30000): Promise<void> {
    const t0 = Date.now();
    while (frames.length < count) {
      if (Date.now() - t0 > timeoutMs) throw new Error("timed out waiting for frames");
      await new Promise((r) => setTimeout(r, 50));
    }
  }

  it("streams frames that decode cleanly with exact field names", async () => {
    await waitForFrames(3);
    const f = frames[frames.length - 1];
    expect(f.res).toEqual([24, 24]);
    expect(f.heights.length).toBe(24 * 24);
    expect(f.bodies[0].id).toBe(0);
    expect(typeof f.particles).toBe("number");
  }, 60000);

  it("applies steering input and the moving boat sheds wake particles", async () => {
    await waitForFrames(5);
    const before = frames[frames.length - 1];
    // hold full thrust: one input message per poll interval (here: manual)
    const push = setInterval(() => {
      ws.send(JSON.stringify(makeInput(0, 1, 0)));
    }, 100);
    try {
      const start = frames.length;
      await waitForFrames(start + 60, 60000);
    } finally {
      clearInterval(push);
    }
    const after = frames[frames.length - 1];
    expect(after.bodies[0].pos[0]).toBeGreaterThan(before.bodies[0].pos[0] + 0.3);
    expect(after.particles!).toBeGreaterThan(before.particles!);
  }, 120000);
});
