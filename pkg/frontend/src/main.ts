/**
 * Browser entry: connect to the bridge, render the scene, steer with the
 * mouse (drag = camera-plane translation, wheel = depth, Space = trigger).
 */

import * as THREE from "three";

import { rgbToCss, tensionColor } from "./colormap.js";
import { parseServerMessage } from "./protocol.js";
import { WorkbenchScene } from "./scene3d.js";
import { ViewState } from "./state.js";
import { SteeringController, SteeringCamera } from "./steering.js";

const params = new URLSearchParams(location.search);
const wsUrl = params.get("ws")
  ?? `ws://${location.hostname || "127.0.0.1"}:${params.get("wsport") ?? "47501"}`;

const canvas = document.getElementById("view") as HTMLCanvasElement;
const statusEl = document.getElementById("status")!;
const gaugesEl = document.getElementById("gauges")!;
const readoutEl = document.getElementById("readout")!;

const state = new ViewState();
const bench = new WorkbenchScene();

const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
const camera = new THREE.PerspectiveCamera(50, 1, 0.01, 20);
camera.up.set(0, 0, 1);
camera.position.set(0.55, -0.75, 0.55);
camera.lookAt(0, 0, -0.05);

function resize() {
  const w = canvas.clientWidth || window.innerWidth;
  const h = canvas.clientHeight || window.innerHeight;
  renderer.setSize(w, h, false);
  camera.aspect = w / h;
  camera.updateProjectionMatrix();
}
window.addEventListener("resize", resize);
resize();

function steeringCamera(): SteeringCamera {
  const right = new THREE.Vector3();
  const up = new THREE.Vector3();
  const forward = new THREE.Vector3();
  camera.matrixWorld.extractBasis(right, up, forward);
  forward.multiplyScalar(-1);   // three cameras look down -z
  const gripDistance = state.frame
    ? camera.position.distanceTo(new THREE.Vector3(...state.frame.position))
    : camera.position.length();
  return {
    right: right.toArray() as [number, number, number],
    up: up.toArray() as [number, number, number],
    forward: forward.toArray() as [number, number, number],
    distance: gripDistance,
    fovY: (camera.fov * Math.PI) / 180,
    viewportHeight: canvas.clientHeight || window.innerHeight,
  };
}

let steering: SteeringController | null = null;
const socket = new WebSocket(wsUrl);

socket.onopen = () => { statusEl.textContent = `connected to ${wsUrl}`; };
socket.onclose = () => {
  statusEl.textContent = "disconnected";
  state.connected = false;
};
socket.onmessage = (ev) => {
  let msg;
  try {
    msg = parseServerMessage(String(ev.data));
  } catch (e) {
    state.parseFailures += 1;
    console.warn("skipped malformed message:", e);
    return;
  }
  if (msg.type === "scene") {
    state.applyScene(msg);
    bench.build(msg);
    buildGauges(msg.tension_bounds);
  } else {
    const first = state.frame === null;
    state.applyFrame(msg, Date.now());
    if (first && steering === null) {
      steering = new SteeringController(
        (text) => { if (socket.readyState === WebSocket.OPEN) socket.send(text); },
        steeringCamera(),
        { position: msg.position, orientation: msg.quaternion },
      );
    }
  }
};

// ---- input ----
canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  steering?.pointerDown(e.clientX, e.clientY);
});
canvas.addEventListener("pointermove", (e) => {
  steering?.setCamera(steeringCamera());
  steering?.pointerMove(e.clientX, e.clientY, performance.now());
});
canvas.addEventListener("pointerup", () => steering?.pointerUp());
canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  steering?.setCamera(steeringCamera());
  steering?.wheel(e.deltaY, performance.now());
}, { passive: false });
window.addEventListener("keydown", (e) => {
  if (e.code === "Space") {
    e.preventDefault();
    steering?.setTrigger(true, performance.now());
  }
});
window.addEventListener("keyup", (e) => {
  if (e.code === "Space") steering?.setTrigger(false, performance.now());
});

// ---- gauges ----
const bars: HTMLDivElement[] = [];

function buildGauges(bounds: [number, number]) {
  gaugesEl.innerHTML = "";
  bars.length = 0;
  for (let i = 0; i < 8; i++) {
    const row = document.createElement("div");
    row.className = "gauge";
    const label = document.createElement("span");
    label.textContent = `s${i}`;
    const track = document.createElement("div");
    track.className = "track";
    const fill = document.createElement("div");
    fill.className = "fill";
    track.appendChild(fill);
    row.append(label, track);
    gaugesEl.appendChild(row);
    bars.push(fill);
  }
  gaugesEl.dataset.tmin = String(bounds[0]);
  gaugesEl.dataset.tmax = String(bounds[1]);
}

function updateGauges() {
  if (!state.frame || bars.length !== 8 || !state.scene) return;
  const [tmin, tmax] = state.scene.tension_bounds;
  state.frame.tensions.forEach((t, i) => {
    const u = Math.min(1, Math.max(0, (t - tmin) / (tmax - tmin)));
    bars[i].style.width = `${(u * 100).toFixed(1)}%`;
    bars[i].style.background = rgbToCss(tensionColor(t, tmin, tmax));
  });
}

// ---- frame loop ----
function animate() {
  requestAnimationFrame(animate);
  steering?.maybeSend(performance.now());
  bench.update(state);
  updateGauges();
  if (state.frame) {
    const f = state.frame;
    const gap = state.junctionGap();
    readoutEl.textContent =
      `tick ${f.tick}  t=${f.sim_time.toFixed(3)} s  ` +
      `status ${["optimal", "scaled", "infeasible"][f.solver_status]}  ` +
      `contacts ${f.contacts.length}  trigger ${f.trigger ? "ON" : "off"}  ` +
      `junction gap ${(gap * 1000).toFixed(1)} mm` +
      (state.isStale(Date.now()) ? "  [STALE]" : "");
  }
  renderer.render(bench.scene, camera);
}
animate();
