/**
 * three.js scene graph for the workbench: car body, seam, strings colored by
 * tension, mixed prop (handle drawn at the replica frame, virtual nose at the
 * true pose), planar shadows, putty tube, wrench arrow. Pure scene-graph
 * math: no renderer here, so it is constructible headless.
 */

import * as THREE from "three";

import { rgbToHex, tensionColor } from "./colormap.js";
import { transform } from "./math3.js";
import type { SceneMessage, Vec3 } from "./protocol.js";
import type { ViewState } from "./state.js";

function v3(v: Vec3): THREE.Vector3 {
  return new THREE.Vector3(v[0], v[1], v[2]);
}

/** Matrix that flattens geometry onto the plane n.x = offset along light l. */
export function planarShadowMatrix(
  normal: Vec3, offset: number, light: Vec3
): THREE.Matrix4 {
  const [nx, ny, nz] = normal;
  const [lx, ly, lz] = light;
  const d = nx * lx + ny * ly + nz * lz;
  // p' = p + ((offset - n.p) / n.l) * l, written as a homogeneous matrix
  const m = new THREE.Matrix4();
  m.set(
    d - lx * nx, -lx * ny, -lx * nz, lx * offset,
    -ly * nx, d - ly * ny, -ly * nz, ly * offset,
    -lz * nx, -lz * ny, d - lz * nz, lz * offset,
    0, 0, 0, d,
  );
  return m;
}

export class WorkbenchScene {
  readonly scene = new THREE.Scene();
  private strings: THREE.Line[] = [];
  private stringMats: THREE.LineBasicMaterial[] = [];
  private prop = new THREE.Group();
  private handle = new THREE.Group();
  private nose = new THREE.Group();
  private shadowGroup = new THREE.Group();
  private shadowSource = new THREE.Group();
  private puttyGroup = new THREE.Group();
  private wrenchArrow: THREE.ArrowHelper | null = null;
  private sceneMsg: SceneMessage | null = null;
  private bodyMaterial = new THREE.MeshLambertMaterial({ color: 0x8899aa });
  private lastTubeSamples = -1;
  puttyTubeVertices = 0;

  constructor() {
    this.scene.background = new THREE.Color(0x10141c);
    const ambient = new THREE.AmbientLight(0xffffff, 0.45);
    const sun = new THREE.DirectionalLight(0xffffff, 1.1);
    sun.position.set(-0.6, -0.4, 1.9);
    this.scene.add(ambient, sun);
    this.scene.add(this.prop, this.shadowGroup, this.puttyGroup);
  }

  /** Build the static part of the scene once the scene message arrives. */
  build(msg: SceneMessage) {
    this.sceneMsg = msg;

    // car body
    const geo = new THREE.BufferGeometry();
    const verts = new Float32Array(msg.mesh.vertices.flat());
    geo.setAttribute("position", new THREE.BufferAttribute(verts, 3));
    geo.setIndex(msg.mesh.triangles.flat());
    geo.computeVertexNormals();
    const body = new THREE.Mesh(geo, this.bodyMaterial);
    body.name = "car-body";
    this.scene.add(body);

    // seam polyline
    const seamGeo = new THREE.BufferGeometry().setFromPoints(
      msg.seam.map((p) => v3(p)));
    const seam = new THREE.Line(seamGeo,
      new THREE.LineBasicMaterial({ color: 0xffcc33 }));
    seam.name = "seam";
    this.scene.add(seam);

    // motors
    const motorGeo = new THREE.SphereGeometry(0.012, 8, 8);
    const motorMat = new THREE.MeshLambertMaterial({ color: 0xcccccc });
    for (const m of msg.motors) {
      const ball = new THREE.Mesh(motorGeo, motorMat);
      ball.position.copy(v3(m));
      this.scene.add(ball);
    }

    // strings, one line each, colored by tension per frame
    this.strings = [];
    this.stringMats = [];
    for (let i = 0; i < 8; i++) {
      const mat = new THREE.LineBasicMaterial({ color: 0xffffff });
      const g = new THREE.BufferGeometry().setFromPoints(
        [new THREE.Vector3(), new THREE.Vector3()]);
      const line = new THREE.Line(g, mat);
      line.name = `string-${i}`;
      this.strings.push(line);
      this.stringMats.push(mat);
      this.scene.add(line);
    }

    // prop: physical handle (rendered at the replica frame) + virtual nose
    this.handle.clear();
    this.nose.clear();
    const handleMesh = new THREE.Mesh(
      new THREE.CylinderGeometry(0.016, 0.02, 0.1, 12),
      new THREE.MeshLambertMaterial({ color: 0x333a44 }));
    handleMesh.rotation.x = Math.PI / 2;
    handleMesh.position.set(0, 0, -0.01);
    const crossbar = new THREE.Mesh(
      new THREE.BoxGeometry(0.21, 0.02, 0.004),
      new THREE.MeshLambertMaterial({ color: 0x9fd5e8, transparent: true, opacity: 0.55 }));
    const crossbar2 = crossbar.clone();
    crossbar2.rotation.z = Math.PI / 2;
    this.handle.add(handleMesh, crossbar, crossbar2);
    const noseMat = new THREE.MeshLambertMaterial({ color: 0xcc7722 });
    for (const prim of msg.prop.nose) {
      if (prim.type === "sphere" && prim.center) {
        const s = new THREE.Mesh(new THREE.SphereGeometry(prim.radius, 10, 10), noseMat);
        s.position.copy(v3(prim.center));
        this.nose.add(s);
      } else if (prim.p0 && prim.p1) {
        const a = v3(prim.p0);
        const b = v3(prim.p1);
        const len = a.distanceTo(b);
        const cyl = new THREE.Mesh(
          new THREE.CapsuleGeometry(prim.radius, len, 4, 10), noseMat);
        cyl.position.copy(a.clone().add(b).multiplyScalar(0.5));
        cyl.quaternion.setFromUnitVectors(
          new THREE.Vector3(0, 1, 0), b.clone().sub(a).normalize());
        this.nose.add(cyl);
      }
    }
    this.prop.add(this.handle, this.nose);

    // shadows: flattened dark copy of the prop driven by the same transforms
    const shadowMat = new THREE.MeshBasicMaterial({
      color: 0x05070a, transparent: true, opacity: 0.55, depthWrite: false,
    });
    this.shadowSource = new THREE.Group();
    for (const part of [this.handle, this.nose]) {
      const copy = part.clone(true);
      copy.traverse((o) => {
        if (o instanceof THREE.Mesh) o.material = shadowMat;
      });
      this.shadowSource.add(copy);
    }
    this.shadowGroup.clear();
    this.shadowGroup.add(this.shadowSource);
    this.shadowGroup.matrixAutoUpdate = false;
    this.shadowGroup.matrix.copy(planarShadowMatrix(
      msg.ground_plane.normal, msg.ground_plane.offset, msg.light_direction));

    // wrench arrow
    this.wrenchArrow = new THREE.ArrowHelper(
      new THREE.Vector3(0, 0, 1), new THREE.Vector3(), 0.1, 0xff5533);
    this.wrenchArrow.visible = false;
    this.scene.add(this.wrenchArrow);
  }

  /** Per-frame update from the view state. */
  update(state: ViewState) {
    const msg = this.sceneMsg;
    const frame = state.frame;
    if (!msg || !frame) return;

    // true pose drives the nose and strings; the replica frame (pose composed
    // with the calibration offset) drives the displayed physical handle
    this.nose.position.copy(v3(frame.position));
    this.nose.quaternion.set(frame.quaternion[1], frame.quaternion[2],
      frame.quaternion[3], frame.quaternion[0]);
    const off = msg.prop.calibration_offset;
    const handlePos = transform(frame.position, frame.quaternion, off.translation);
    this.handle.position.copy(v3(handlePos));
    const q = new THREE.Quaternion(frame.quaternion[1], frame.quaternion[2],
      frame.quaternion[3], frame.quaternion[0]);
    q.multiply(new THREE.Quaternion(off.rotation[1], off.rotation[2],
      off.rotation[3], off.rotation[0]));
    this.handle.quaternion.copy(q);

    // mirror the same transforms into the shadow source
    const shadowHandle = this.shadowSource.children[0];
    const shadowNose = this.shadowSource.children[1];
    if (shadowHandle && shadowNose) {
      shadowHandle.position.copy(this.handle.position);
      shadowHandle.quaternion.copy(this.handle.quaternion);
      shadowNose.position.copy(this.nose.position);
      shadowNose.quaternion.copy(this.nose.quaternion);
    }

    // strings + colors
    const endpoints = state.stringEndpoints();
    const [tmin, tmax] = msg.tension_bounds;
    endpoints.forEach(([attach, motor], i) => {
      const g = this.strings[i].geometry as THREE.BufferGeometry;
      const pos = g.getAttribute("position") as THREE.BufferAttribute;
      pos.setXYZ(0, attach[0], attach[1], attach[2]);
      pos.setXYZ(1, motor[0], motor[1], motor[2]);
      pos.needsUpdate = true;
      this.stringMats[i].color.setHex(
        rgbToHex(tensionColor(frame.tensions[i], tmin, tmax)));
    });

    // wrench glyph anchored at the first contact (or grip when none)
    if (this.wrenchArrow) {
      const f = new THREE.Vector3(frame.wrench[0], frame.wrench[1], frame.wrench[2]);
      if (f.length() > 1e-6) {
        const anchor = frame.contacts.length
          ? v3(frame.contacts[0].point) : v3(frame.position);
        this.wrenchArrow.position.copy(anchor);
        this.wrenchArrow.setDirection(f.clone().normalize());
        this.wrenchArrow.setLength(Math.min(0.3, 0.02 + 0.01 * f.length()));
        this.wrenchArrow.visible = true;
      } else {
        this.wrenchArrow.visible = false;
      }
    }

    // putty tube: rebuild the active bead when it grows
    const totalSamples = state.totalPuttySamples();
    if (totalSamples !== this.lastTubeSamples) {
      this.lastTubeSamples = totalSamples;
      this.rebuildPutty(state);
    }

    // staleness greys the scene
    const stale = state.isStale(Date.now());
    this.bodyMaterial.color.setHex(stale ? 0x555555 : 0x8899aa);
  }

  private rebuildPutty(state: ViewState) {
    this.puttyGroup.clear();
    this.puttyTubeVertices = 0;
    const radius = this.sceneMsg?.putty_radius ?? 0.004;
    const mat = new THREE.MeshLambertMaterial({ color: 0xd8d2c4 });
    for (const bead of state.beads) {
      if (bead.length < 2) {
        if (bead.length === 1) {
          const blob = new THREE.Mesh(
            new THREE.SphereGeometry(radius, 8, 8), mat);
          blob.position.copy(v3(bead[0]));
          this.puttyGroup.add(blob);
          this.puttyTubeVertices += 8;
        }
        continue;
      }
      const curve = new THREE.CatmullRomCurve3(bead.map((p) => v3(p)));
      const tube = new THREE.TubeGeometry(
        curve, Math.max(1, bead.length - 1), radius, 8, false);
      this.puttyGroup.add(new THREE.Mesh(tube, mat));
      this.puttyTubeVertices += tube.getAttribute("position").count;
    }
  }
}
