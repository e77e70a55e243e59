/**
 * Bridge message schema: one "scene" message on connect, then "frame"
 * messages mirroring the binary state packet; commands flow back as JSON.
 * Parsing is strict: malformed messages throw and the caller skips them.
 */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface SceneContact {
  point: Vec3;
  normal: Vec3;
  depth: number;
}

export interface FrameMessage {
  type: "frame";
  tick: number;
  sim_time: number;
  position: Vec3;
  quaternion: Quat;
  wrench: number[];
  tensions: number[];
  solver_status: number;
  trigger: boolean;
  contacts: SceneContact[];
  bead_delta: Vec3[];
}

export interface PropPrimitive {
  type: "sphere" | "capsule";
  center?: Vec3;
  p0?: Vec3;
  p1?: Vec3;
  radius: number;
}

export interface SceneMessage {
  type: "scene";
  motors: Vec3[];
  attachments: Vec3[];
  string_pairing: [number, number][];
  tension_bounds: [number, number];
  mesh: { vertices: Vec3[]; triangles: [number, number, number][] };
  seam: Vec3[];
  prop: {
    nose: PropPrimitive[];
    tip: Vec3;
    nose_root: Vec3;
    calibration_offset: { translation: Vec3; rotation: Quat };
  };
  putty_radius: number;
  light_direction: Vec3;
  ground_plane: { normal: Vec3; offset: number };
  dt: number;
}

export type ServerMessage = SceneMessage | FrameMessage;

function isFiniteArray(x: unknown, n: number): x is number[] {
  return Array.isArray(x) && x.length === n && x.every((v) => Number.isFinite(v));
}

function vec3(x: unknown, what: string): Vec3 {
  if (!isFiniteArray(x, 3)) throw new Error(`bad ${what}`);
  return [x[0], x[1], x[2]];
}

function quatOf(x: unknown, what: string): Quat {
  if (!isFiniteArray(x, 4)) throw new Error(`bad ${what}`);
  return [x[0], x[1], x[2], x[3]];
}

export function parseServerMessage(text: string): ServerMessage {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new Error(`not JSON: ${e}`);
  }
  if (doc === null || typeof doc !== "object") throw new Error("not an object");
  if (doc.type === "frame") return parseFrame(doc);
  if (doc.type === "scene") return parseScene(doc);
  throw new Error(`unknown message type ${doc.type}`);
}

function parseFrame(doc: any): FrameMessage {
  if (!Number.isInteger(doc.tick) || doc.tick < 0) throw new Error("bad tick");
  if (!Number.isFinite(doc.sim_time)) throw new Error("bad sim_time");
  if (!isFiniteArray(doc.wrench, 6)) throw new Error("bad wrench");
  if (!isFiniteArray(doc.tensions, 8)) throw new Error("bad tensions");
  if (![0, 1, 2].includes(doc.solver_status)) throw new Error("bad solver_status");
  if (!Array.isArray(doc.contacts)) throw new Error("bad contacts");
  if (!Array.isArray(doc.bead_delta)) throw new Error("bad bead_delta");
  return {
    type: "frame",
    tick: doc.tick,
    sim_time: doc.sim_time,
    position: vec3(doc.position, "position"),
    quaternion: quatOf(doc.quaternion, "quaternion"),
    wrench: doc.wrench,
    tensions: doc.tensions,
    solver_status: doc.solver_status,
    trigger: Boolean(doc.trigger),
    contacts: doc.contacts.map((c: any, i: number) => ({
      point: vec3(c.point, `contact ${i} point`),
      normal: vec3(c.normal, `contact ${i} normal`),
      depth: Number.isFinite(c.depth) ? c.depth : raise(`contact ${i} depth`),
    })),
    bead_delta: doc.bead_delta.map((s: any, i: number) => vec3(s, `bead sample ${i}`)),
  };
}

function raise(what: string): never {
  throw new Error(`bad ${what}`);
}

function parseScene(doc: any): SceneMessage {
  if (!Array.isArray(doc.motors) || doc.motors.length !== 8) throw new Error("bad motors");
  if (!Array.isArray(doc.attachments) || doc.attachments.length !== 4)
    throw new Error("bad attachments");
  if (!Array.isArray(doc.string_pairing) || doc.string_pairing.length !== 8)
    throw new Error("bad string_pairing");
  if (!isFiniteArray(doc.tension_bounds, 2)) throw new Error("bad tension_bounds");
  if (!doc.mesh || !Array.isArray(doc.mesh.vertices) || !Array.isArray(doc.mesh.triangles))
    throw new Error("bad mesh");
  if (!Array.isArray(doc.seam) || doc.seam.length < 2) throw new Error("bad seam");
  if (!doc.prop || !Array.isArray(doc.prop.nose)) throw new Error("bad prop");
  return {
    type: "scene",
    motors: doc.motors.map((m: any, i: number) => vec3(m, `motor ${i}`)),
    attachments: doc.attachments.map((a: any, i: number) => vec3(a, `attachment ${i}`)),
    string_pairing: doc.string_pairing.map((p: any) => [p[0], p[1]] as [number, number]),
    tension_bounds: [doc.tension_bounds[0], doc.tension_bounds[1]],
    mesh: doc.mesh,
    seam: doc.seam.map((p: any, i: number) => vec3(p, `seam point ${i}`)),
    prop: {
      nose: doc.prop.nose,
      tip: vec3(doc.prop.tip, "prop tip"),
      nose_root: vec3(doc.prop.nose_root, "prop nose_root"),
      calibration_offset: {
        translation: vec3(doc.prop.calibration_offset?.translation ?? [0, 0, 0],
          "offset translation"),
        rotation: quatOf(doc.prop.calibration_offset?.rotation ?? [1, 0, 0, 0],
          "offset rotation"),
      },
    },
    putty_radius: Number.isFinite(doc.putty_radius) ? doc.putty_radius : 0.004,
    light_direction: vec3(doc.light_direction ?? [0.3, 0.2, -0.93], "light"),
    ground_plane: {
      normal: vec3(doc.ground_plane?.normal ?? [0, 0, 1], "plane normal"),
      offset: Number.isFinite(doc.ground_plane?.offset) ? doc.ground_plane.offset : 0,
    },
    dt: Number.isFinite(doc.dt) ? doc.dt : 0.001,
  };
}

export function commandMessage(
  seq: number, position: Vec3, quaternion: Quat, trigger: boolean
): string {
  return JSON.stringify({
    type: "command",
    seq,
    position,
    quaternion,
    trigger,
  });
}
