/**
 * End-to-end loopback: spawn the Python service, connect like the browser
 * does, steer with a scripted synthetic mouse drag, hold the trigger on the
 * seam, and watch the putty tube grow and the string colors change.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { rgbToHex, tensionColor } from "../src/colormap";
import { parseServerMessage } from "../src/protocol";
import type { FrameMessage, SceneMessage } from "../src/protocol";
import { ViewState } from "../src/state";
import { SteeringController } from "../src/steering";

let proc: ChildProcess;
let wsPort = 0;
let ws: WebSocket;
const state = new ViewState();
const frames: FrameMessage[] = [];
let clock = 0;

function makeConfig(): string {
  const dir = mkdtempSync(join(tmpdir(), "shwsim-e2e-"));
  writeFileSync(join(dir, "seam.txt"),
    "-0.08 0.0 0.0\n0.08 0.0 0.0\n");
  writeFileSync(join(dir, "scene.json"), JSON.stringify({
    mesh: { generator: "plate", size: [0.8, 0.8], divisions: 2 },
    seam: "seam.txt",
    slip_tolerance: 0.005,
  }));
  const cfg = join(dir, "service.json");
  writeFileSync(cfg, JSON.stringify({
    scene: "scene.json",
    dt: [1, 1000],
    udp_port: 0,
    ws_port: 0,
    publish_interval_ms: 16,
    start_pose: { position: [0.0, 0.0, 0.25] },
  }));
  return cfg;
}

function startService(): Promise<void> {
  return new Promise((resolve, reject) => {
    proc = spawn("python3", ["-m", "shwsim.cli", "serve", "--config", makeConfig()],
      { stdio: ["ignore", "pipe", "pipe"] });
    let buf = "";
    const timer = setTimeout(
      () => reject(new Error(`service did not start: ${buf}`)), 90_000);
    proc.stdout!.on("data", (chunk) => {
      buf += String(chunk);
      const m = buf.match(/serving udp=(\d+) ws=(\d+)/);
      if (m) {
        wsPort = Number(m[2]);
        clearTimeout(timer);
        resolve();
      }
    });
    proc.stderr!.on("data", (chunk) => { buf += String(chunk); });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early (${code}): ${buf}`));
    });
  });
}

function connect(): Promise<void> {
  return new Promise((resolve, reject) => {
    ws = new WebSocket(`ws://127.0.0.1:${wsPort}`);
    const timer = setTimeout(() => reject(new Error("no scene message")), 30_000);
    ws.on("message", (data) => {
      let msg;
      try {
        msg = parseServerMessage(String(data));
      } catch {
        state.parseFailures += 1;
        return;
      }
      if (msg.type === "scene") {
        state.applyScene(msg);
        clearTimeout(timer);
        resolve();
      } else {
        if (state.applyFrame(msg, clock)) {
          clock += 16;
          frames.push(msg);
        }
      }
    });
    ws.on("error", reject);
  });
}

function waitFrames(n: number, timeoutMs = 15_000): Promise<void> {
  const start = frames.length;
  const t0 = Date.now();
  return new Promise((resolve, reject) => {
    const poll = setInterval(() => {
      if (frames.length >= start + n) {
        clearInterval(poll);
        resolve();
      } else if (Date.now() - t0 > timeoutMs) {
        clearInterval(poll);
        reject(new Error(`only ${frames.length - start} of ${n} frames arrived`));
      }
    }, 5);
  });
}

async function waitFor(pred: () => boolean, what: string, timeoutMs = 20_000) {
  const t0 = Date.now();
  while (!pred()) {
    if (Date.now() - t0 > timeoutMs) throw new Error(`timeout waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 10));
  }
}

function stringColors(scene: SceneMessage, f: FrameMessage): number[] {
  return f.tensions.map((t) =>
    rgbToHex(tensionColor(t, scene.tension_bounds[0], scene.tension_bounds[1])));
}

describe("viewer end-to-end loopback", () => {
  let steering: SteeringController;

  beforeAll(async () => {
    await startService();
    await connect();
    await waitFrames(3);
    // straight-down camera 1 m above the grip: right=+x, up=+y, forward=-z
    steering = new SteeringController(
      (text) => ws.send(text),
      { right: [1, 0, 0], up: [0, 1, 0], forward: [0, 0, -1],
        distance: 1.0, fovY: Math.PI / 4, viewportHeight: 800 },
      { position: state.frame!.position, orientation: [1, 0, 0, 0] },
      { wheelMetersPerUnit: 1e-4 },
    );
  }, 120_000);

  afterAll(() => {
    ws?.close();
    proc?.kill("SIGKILL");
  });

  it("receives the scene and ordered frames", () => {
    expect(state.connected).toBe(true);
    expect(state.scene!.motors).toHaveLength(8);
    expect(state.outOfOrder).toBe(0);
    const ticks = frames.map((f) => f.tick);
    for (let i = 1; i < ticks.length; i++) {
      expect(ticks[i]).toBeGreaterThan(ticks[i - 1]);
    }
  });

  it("synthetic mouse drag moves the rendered prop", async () => {
    const startX = state.frame!.position[0];
    const mpp = steering.metersPerPixel();
    const targetMeters = -0.08 - startX;          // drag to the seam start
    const pixels = targetMeters / mpp;
    let now = 1_000_000;
    steering.pointerDown(400, 300);
    const steps = 40;
    for (let i = 1; i <= steps; i++) {
      now += 16;
      steering.pointerMove(400 + (pixels * i) / steps, 300, now);
    }
    steering.maybeSend((now += 16));
    steering.pointerUp();
    await waitFor(
      () => state.frame !== null && Math.abs(state.frame.position[0] - (-0.08)) < 2e-3,
      "prop to follow the drag");
    expect(state.frame!.position[0]).toBeCloseTo(-0.08, 2);
  }, 30_000);

  it("holding the trigger on the seam grows the putty tube within 2 frames", async () => {
    // descend until the tip (0.16 m below the grip) hovers 2 mm over the plate
    let now = 2_000_000;
    const targetZ = 0.162;
    const dz = targetZ - steering.gripPosition[2];
    const wheelUnits = dz / 1e-4;                 // forward is -z: positive deltaY descends
    for (let i = 0; i < 20; i++) {
      now += 16;
      steering.wheel(-wheelUnits / 20, now);
    }
    steering.maybeSend((now += 16));
    await waitFor(
      () => state.frame !== null && Math.abs(state.frame.position[2] - targetZ) < 1e-3,
      "descent to the seam");

    const before = state.tubeVertexCount();
    const framesBeforeTrigger = frames.length;
    steering.setTrigger(true, (now += 16));
    // drag along the seam while extruding
    steering.pointerDown(400, 300);
    for (let i = 0; i < 30; i++) {
      now += 16;
      steering.pointerMove(400 + i * 6, 300, now);
      steering.maybeSend(now);
    }
    await waitFor(() => {
      const triggered = frames.slice(framesBeforeTrigger).findIndex((f) => f.trigger);
      if (triggered < 0) return false;
      const within = frames.slice(framesBeforeTrigger + triggered,
        framesBeforeTrigger + triggered + 3);
      return within.some((f) => f.bead_delta.length > 0);
    }, "bead growth within 2 frames of the trigger");
    expect(state.tubeVertexCount()).toBeGreaterThan(before);
    steering.setTrigger(false, (now += 16));
    steering.pointerUp();
  }, 40_000);

  it("string colors change on contact", async () => {
    const scene = state.scene!;
    const idleColors = stringColors(scene, state.frame!);
    // press well into the plate: the commanded tip goes below the surface
    let now = 3_000_000;
    for (let i = 0; i < 25; i++) {
      now += 16;
      steering.wheel(60, now);                    // descend 6 mm per step
      steering.maybeSend(now);
    }
    await waitFor(
      () => state.frame !== null && state.frame.contacts.length > 0,
      "a contact frame");
    const pressedColors = stringColors(scene, state.frame!);
    expect(pressedColors).not.toEqual(idleColors);
    // the swept-tip contact reports depth 0 at the clamp; the proximity
    // contacts behind it carry the actual penetration
    const maxDepth = Math.max(...state.frame!.contacts.map((c) => c.depth));
    expect(maxDepth).toBeGreaterThan(0);
    // retreat
    for (let i = 0; i < 25; i++) {
      now += 16;
      steering.wheel(-60, now);
      steering.maybeSend(now);
    }
  }, 40_000);

  it("never mutated simulation truth client-side", () => {
    // every displayed quantity originated from frames; steering only sent
    // commands with strictly increasing sequence numbers
    expect(steering.seq).toBeGreaterThan(0);
    expect(state.parseFailures).toBe(0);
    expect(state.outOfOrder).toBe(0);
  });
});
