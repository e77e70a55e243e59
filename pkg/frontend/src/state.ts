/**
 * ViewState: everything the renderer shows. Holds only fully parsed frames,
 * never mutates simulation truth, flags staleness after one second, and
 * accumulates the putty tube from per-frame bead deltas.
 */

import { rotate, sub, norm, transform } from "./math3.js";
import type { FrameMessage, SceneMessage, Vec3 } from "./protocol.js";

export const STALE_AFTER_MS = 1000;

export class ViewState {
  connected = false;
  scene: SceneMessage | null = null;
  frame: FrameMessage | null = null;
  framesSeen = 0;
  outOfOrder = 0;
  parseFailures = 0;
  private lastFrameAt = -Infinity;
  /** Accumulated putty: array of beads, each an array of tip samples. */
  beads: Vec3[][] = [];
  private extrudingLastFrame = false;

  applyScene(msg: SceneMessage) {
    this.scene = msg;
    this.connected = true;
  }

  /** Returns true when the frame was accepted (in order). */
  applyFrame(msg: FrameMessage, nowMs: number): boolean {
    if (this.frame !== null && msg.tick <= this.frame.tick) {
      this.outOfOrder += 1;
      return false;
    }
    this.frame = msg;
    this.framesSeen += 1;
    this.lastFrameAt = nowMs;
    if (msg.bead_delta.length > 0) {
      // a gap in extrusion closes the bead; the next delta starts a new one
      if (!this.extrudingLastFrame || this.beads.length === 0) {
        this.beads.push([]);
      }
      const bead = this.beads[this.beads.length - 1];
      for (const s of msg.bead_delta) bead.push(s);
      this.extrudingLastFrame = true;
    } else if (!msg.trigger) {
      this.extrudingLastFrame = false;
    }
    return true;
  }

  isStale(nowMs: number): boolean {
    return this.frame !== null && nowMs - this.lastFrameAt > STALE_AFTER_MS;
  }

  totalPuttySamples(): number {
    return this.beads.reduce((n, b) => n + b.length, 0);
  }

  /** Tube vertex count under the server's ring convention. */
  tubeVertexCount(ringSegments = 8): number {
    return this.totalPuttySamples() * ringSegments;
  }

  /** World endpoints [attachment, motor] per string, from rig geometry + pose. */
  stringEndpoints(): [Vec3, Vec3][] {
    if (!this.scene || !this.frame) return [];
    const out: [Vec3, Vec3][] = [];
    for (const [motorIdx, attachIdx] of this.scene.string_pairing) {
      const attach = transform(
        this.frame.position, this.frame.quaternion,
        this.scene.attachments[attachIdx]);
      out.push([attach, this.scene.motors[motorIdx]]);
    }
    return out;
  }

  /** Static junction gap implied by the calibration offset (display aid). */
  junctionGap(): number {
    if (!this.scene) return 0;
    const off = this.scene.prop.calibration_offset;
    const root = this.scene.prop.nose_root;
    const moved = rotate(off.rotation, root);
    return norm(sub(
      [moved[0] + off.translation[0], moved[1] + off.translation[1],
       moved[2] + off.translation[2]],
      root));
  }

  tipWorld(): Vec3 | null {
    if (!this.scene || !this.frame) return null;
    return transform(this.frame.position, this.frame.quaternion, this.scene.prop.tip);
  }
}
