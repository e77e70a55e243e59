/**
 * Mouse/keyboard steering: drag moves the grip on a camera-facing plane,
 * the wheel adjusts depth along the camera forward axis, a key holds the
 * trigger. Commands are rate limited (default 120 Hz) with strictly
 * increasing sequence numbers; the controller only emits commands and never
 * touches displayed state.
 *
 * Pixels-to-meters mapping (documented contract): a drag of p pixels moves
 * the grip by p * 2 * d * tan(fovY / 2) / viewportHeight meters, where d is
 * the camera-to-grip distance, along the camera's right/up axes.
 */

import { add, scale } from "./math3.js";
import { commandMessage } from "./protocol.js";
import type { Quat, Vec3 } from "./protocol.js";

export interface SteeringCamera {
  /** Unit right/up/forward axes of the camera in world space. */
  right: Vec3;
  up: Vec3;
  forward: Vec3;
  /** Distance from the camera to the steering plane, meters. */
  distance: number;
  fovY: number;            // radians
  viewportHeight: number;  // pixels
}

export interface SteeringOptions {
  rateHz?: number;
  wheelMetersPerUnit?: number;   // depth per wheel deltaY unit
}

export class SteeringController {
  seq = 0;
  commandsSent = 0;
  gripPosition: Vec3;
  gripOrientation: Quat;
  trigger = false;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;
  private dirty = false;
  private lastSentAt = -Infinity;
  private readonly minIntervalMs: number;
  private readonly wheelScale: number;

  constructor(
    private readonly send: (text: string) => void,
    private camera: SteeringCamera,
    start: { position: Vec3; orientation: Quat },
    opts: SteeringOptions = {},
  ) {
    this.gripPosition = [...start.position] as Vec3;
    this.gripOrientation = [...start.orientation] as Quat;
    this.minIntervalMs = 1000 / (opts.rateHz ?? 120);
    this.wheelScale = opts.wheelMetersPerUnit ?? 1e-4;
  }

  metersPerPixel(): number {
    const c = this.camera;
    return (2 * c.distance * Math.tan(c.fovY / 2)) / c.viewportHeight;
  }

  setCamera(camera: SteeringCamera) {
    this.camera = camera;
  }

  pointerDown(x: number, y: number) {
    this.dragging = true;
    this.lastX = x;
    this.lastY = y;
  }

  pointerUp() {
    this.dragging = false;
  }

  /** Screen y grows downward; dragging up moves along the camera up axis. */
  pointerMove(x: number, y: number, nowMs: number) {
    if (!this.dragging) return;
    const mpp = this.metersPerPixel();
    const dx = (x - this.lastX) * mpp;
    const dy = (this.lastY - y) * mpp;
    this.lastX = x;
    this.lastY = y;
    this.gripPosition = add(this.gripPosition,
      add(scale(this.camera.right, dx), scale(this.camera.up, dy)));
    this.dirty = true;
    this.maybeSend(nowMs);
  }

  wheel(deltaY: number, nowMs: number) {
    this.gripPosition = add(this.gripPosition,
      scale(this.camera.forward, deltaY * this.wheelScale));
    this.dirty = true;
    this.maybeSend(nowMs);
  }

  setTrigger(pressed: boolean, nowMs: number) {
    if (this.trigger !== pressed) {
      this.trigger = pressed;
      this.dirty = true;
      this.maybeSend(nowMs);
    }
  }

  /** Flush a pending command if the rate limit allows; call from the frame loop. */
  maybeSend(nowMs: number) {
    if (!this.dirty) return;
    if (nowMs - this.lastSentAt < this.minIntervalMs) return;
    this.seq += 1;
    this.commandsSent += 1;
    this.lastSentAt = nowMs;
    this.dirty = false;
    this.send(commandMessage(this.seq, this.gripPosition, this.gripOrientation,
      this.trigger));
  }
}
