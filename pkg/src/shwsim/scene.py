"""The virtual environment: mixed prop (physical handle + virtual nose),
proximity contacts, swept-tip continuous collision, penalty wrench, putty
extrusion, seam metrics, and planar shadows.

Contact model: a nose primitive is in contact only when its core (sphere
center / capsule axis) has crossed the surface; the reported depth is
radius - signed core distance, i.e. how far the deepest point of the
primitive sits past the surface along the closest-feature normal.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import quat
from .errors import DegenerateLight, ParseError
from .mesh import TriMesh, generate_mesh, load_mesh
from .rig import GripPose

DEFAULT_STIFFNESS = 2000.0     # N/m
DEFAULT_DAMPING = 5.0          # N*s/m
DEFAULT_PUTTY_RADIUS = 0.004   # m
DEFAULT_SAMPLE_SPACING = 0.002  # m
DEFAULT_RING_SEGMENTS = 8
DEFAULT_SLIP_TOLERANCE = 0.005  # m


# ---- prop ----

@dataclass
class SpherePrimitive:
    center: np.ndarray         # handle-local, m
    radius: float

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(3)
        self.radius = float(self.radius)


@dataclass
class CapsulePrimitive:
    p0: np.ndarray             # handle-local axis endpoints, m
    p1: np.ndarray
    radius: float

    def __post_init__(self):
        self.p0 = np.asarray(self.p0, dtype=float).reshape(3)
        self.p1 = np.asarray(self.p1, dtype=float).reshape(3)
        self.radius = float(self.radius)


@dataclass
class RigidOffset:
    """Small rigid transform modeling real-vs-virtual misregistration."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())

    def __post_init__(self):
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)
        self.rotation = quat.normalize(self.rotation)

    def apply(self, point):
        return quat.rotate(self.rotation, point) + self.translation

    @property
    def is_identity(self):
        return (np.all(self.translation == 0.0)
                and abs(abs(self.rotation[0]) - 1.0) < 1e-15)


@dataclass
class MixedProp:
    """Putty-gun style mixed prop: tracked physical handle, virtual nose.

    nose primitives and the tip point live in the handle frame. The
    calibration offset affects only the displayed replica and the reported
    junction gap, never the collision path.
    """

    nose: list
    tip: np.ndarray
    nose_root: np.ndarray = field(default_factory=lambda: np.zeros(3))
    calibration_offset: RigidOffset = field(default_factory=RigidOffset)
    trigger: bool = False

    def __post_init__(self):
        self.tip = np.asarray(self.tip, dtype=float).reshape(3)
        self.nose_root = np.asarray(self.nose_root, dtype=float).reshape(3)
        if not self.nose:
            raise ValueError("a mixed prop needs at least one nose primitive")

    def tip_world(self, pose):
        return pose.transform(self.tip)


def default_putty_gun():
    """Nose along -z of the grip: a shaft capsule and a tip sphere whose
    surface touches the designated tip point."""
    tip = np.array([0.0, 0.0, -0.16])
    return MixedProp(
        nose=[
            CapsulePrimitive(p0=[0.0, 0.0, -0.04], p1=[0.0, 0.0, -0.13], radius=0.012),
            SpherePrimitive(center=[0.0, 0.0, -0.152], radius=0.008),
        ],
        tip=tip,
        nose_root=np.array([0.0, 0.0, -0.04]),
    )


# ---- contacts ----

@dataclass
class Contact:
    point: np.ndarray          # on the mesh surface, m
    normal: np.ndarray         # unit, outward from the mesh
    depth: float               # m, >= 0
    primitive: int             # index into prop.nose; -1 for the swept tip
    time_of_impact: float = None

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float).reshape(3)
        self.normal = np.asarray(self.normal, dtype=float).reshape(3)


def query_contacts(mesh, prop, pose):
    """Deepest penetration per nose primitive, as at most one Contact each.

    The calibration offset is deliberately not applied anywhere here.
    """
    R = pose.rotation_matrix()
    p = pose.position
    contacts = []
    for i, prim in enumerate(prop.nose):
        if isinstance(prim, SpherePrimitive):
            sp = mesh.signed_distance(R @ prim.center + p)
            sd = sp.distance
        else:
            sd, _, sp = mesh.segment_min_signed_distance(
                R @ prim.p0 + p, R @ prim.p1 + p)
        if sd < 0.0:
            contacts.append(Contact(point=sp.point, normal=sp.normal,
                                    depth=prim.radius - sd, primitive=i))
    return contacts


def sweep_tip(mesh, tip_start, tip_end):
    """Earliest crossing of the moving tip point with the mesh over a tick.

    A start point already behind the surface reports time_of_impact 0 with
    the local pushing-out contact; otherwise the first front-face crossing.
    Returns a Contact or None.
    """
    tip_start = np.asarray(tip_start, dtype=float)
    tip_end = np.asarray(tip_end, dtype=float)
    sp = mesh.signed_distance(tip_start)
    if sp.distance < 0.0:
        return Contact(point=sp.point, normal=sp.normal, depth=-sp.distance,
                       primitive=-1, time_of_impact=0.0)
    hit = mesh.segment_hit(tip_start, tip_end, cull_backfaces=True)
    if hit is None:
        return None
    t, tri = hit
    point = tip_start + t * (tip_end - tip_start)
    return Contact(point=point, normal=mesh.face_normals[tri].copy(), depth=0.0,
                   primitive=-1, time_of_impact=t)


def contact_wrench(contacts, pose, velocity, stiffness=DEFAULT_STIFFNESS,
                   damping=DEFAULT_DAMPING):
    """Penalty wrench about the grip origin.

    Per contact the normal force is stiffness*depth minus damping times the
    contact-point approach speed, clamped to be non-adhesive; torque arm is
    taken from the grip position.
    """
    if stiffness <= 0.0:
        raise ValueError("stiffness must be > 0")
    if damping < 0.0:
        raise ValueError("damping must be >= 0")
    velocity = np.asarray(velocity, dtype=float).reshape(6)
    w = np.zeros(6)
    for c in contacts:
        v_point = velocity[:3] + np.cross(velocity[3:], c.point - pose.position)
        vn = float(v_point @ c.normal)
        fn = stiffness * c.depth - damping * vn
        if fn <= 0.0:
            continue
        f = fn * c.normal
        w[:3] += f
        w[3:] += np.cross(c.point - pose.position, f)
    return w


# ---- putty ----

@dataclass
class PuttyBead:
    """One extruded bead: tip samples plus the generated tube mesh."""

    radius: float = DEFAULT_PUTTY_RADIUS
    min_spacing: float = DEFAULT_SAMPLE_SPACING
    ring_segments: int = DEFAULT_RING_SEGMENTS
    samples: list = field(default_factory=list)       # np arrays (3,)
    timestamps: list = field(default_factory=list)
    closed: bool = False

    def add_sample(self, point, timestamp):
        """Append a sample if it clears the minimum spacing; returns True if added."""
        point = np.asarray(point, dtype=float).reshape(3)
        if self.closed:
            return False
        if (self.samples and np.linalg.norm(point - self.samples[-1])
                < self.min_spacing - 1e-12):
            return False
        self.samples.append(point.copy())
        self.timestamps.append(float(timestamp))
        return True

    def close(self, final_point=None, timestamp=0.0):
        """Close the bead; a final tip sample is captured (exempt from the
        spacing rule) so the tube ends where extrusion stopped."""
        if final_point is not None and not self.closed and self.samples:
            final_point = np.asarray(final_point, dtype=float).reshape(3)
            if np.linalg.norm(final_point - self.samples[-1]) > 1e-9:
                self.samples.append(final_point.copy())
                self.timestamps.append(float(timestamp))
        self.closed = True

    @property
    def arc_length(self):
        if len(self.samples) < 2:
            return 0.0
        pts = np.asarray(self.samples)
        return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())

    def tube_mesh(self):
        """Tube vertices and triangles; ring_segments vertices per sample."""
        pts = np.asarray(self.samples, dtype=float)
        n = len(pts)
        seg = self.ring_segments
        if n == 0:
            return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64)
        # tangents by central differences, parallel-transported frames
        if n == 1:
            tangents = np.array([[0.0, 0.0, 1.0]])
        else:
            tangents = np.gradient(pts, axis=0)
            norms = np.linalg.norm(tangents, axis=1)
            norms[norms == 0.0] = 1.0
            tangents /= norms[:, None]
        ref = np.array([1.0, 0.0, 0.0])
        if abs(tangents[0] @ ref) > 0.9:
            ref = np.array([0.0, 1.0, 0.0])
        n1 = np.cross(tangents[0], ref)
        n1 /= np.linalg.norm(n1)
        verts = np.empty((n * seg, 3))
        phis = 2.0 * np.pi * np.arange(seg) / seg
        for i in range(n):
            if i > 0:
                # transport n1 across the tangent change
                t_prev, t_cur = tangents[i - 1], tangents[i]
                axis = np.cross(t_prev, t_cur)
                s = np.linalg.norm(axis)
                c = float(t_prev @ t_cur)
                if s > 1e-12:
                    n1 = quat.rotate(quat.from_rotvec(axis / s * np.arctan2(s, c)), n1)
            n2 = np.cross(tangents[i], n1)
            ring = (pts[i][None, :] + self.radius * (np.cos(phis)[:, None] * n1[None, :]
                    + np.sin(phis)[:, None] * n2[None, :]))
            verts[i * seg:(i + 1) * seg] = ring
        tris = []
        for i in range(n - 1):
            for j in range(seg):
                a = i * seg + j
                b = i * seg + (j + 1) % seg
                c2 = (i + 1) * seg + j
                d = (i + 1) * seg + (j + 1) % seg
                tris.append([a, c2, b])
                tris.append([b, c2, d])
        return verts, np.asarray(tris, dtype=np.int64) if tris else np.zeros((0, 3), dtype=np.int64)


class PuttyTrail:
    """Bead lifecycle across trigger presses: release closes the current bead,
    the next press starts a new one."""

    def __init__(self, radius=DEFAULT_PUTTY_RADIUS, min_spacing=DEFAULT_SAMPLE_SPACING,
                 ring_segments=DEFAULT_RING_SEGMENTS):
        self.radius = radius
        self.min_spacing = min_spacing
        self.ring_segments = ring_segments
        self.beads = []
        self._active = None

    def update(self, tip_point, timestamp, trigger):
        """Advance one tick; returns the list of samples appended this tick."""
        if not trigger:
            if self._active is not None:
                before = len(self._active.samples)
                self._active.close(final_point=tip_point, timestamp=timestamp)
                appended = [np.asarray(s, dtype=float).copy()
                            for s in self._active.samples[before:]]
                self._active = None
                return appended
            return []
        if self._active is None:
            self._active = PuttyBead(radius=self.radius, min_spacing=self.min_spacing,
                                     ring_segments=self.ring_segments)
            self.beads.append(self._active)
        if self._active.add_sample(tip_point, timestamp):
            return [np.asarray(tip_point, dtype=float).copy()]
        return []

    @property
    def total_samples(self):
        return sum(len(b.samples) for b in self.beads)


def extrude_putty(bead, tip_point, timestamp, trigger):
    """Single-bead extrusion step per the bead lifecycle rules.

    Returns (bead, appended) where bead is a fresh one when a new press
    follows a close.
    """
    if not trigger:
        bead.close()
        return bead, False
    if bead.closed:
        bead = PuttyBead(radius=bead.radius, min_spacing=bead.min_spacing,
                         ring_segments=bead.ring_segments)
    return bead, bead.add_sample(tip_point, timestamp)


# ---- seam ----

@dataclass
class SeamPath:
    """Polyline on the car body along which putty must be laid."""

    points: np.ndarray
    slip_tolerance: float = DEFAULT_SLIP_TOLERANCE

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 3 or len(self.points) < 2:
            raise ValueError("a seam needs at least two 3-d points")
        if np.any(np.linalg.norm(np.diff(self.points, axis=0), axis=1) == 0.0):
            raise ValueError("consecutive seam points must be distinct")

    @property
    def arc_length(self):
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())

    def resample(self, spacing):
        """Points spaced `spacing` apart along the polyline (arc length)."""
        segs = np.diff(self.points, axis=0)
        lens = np.linalg.norm(segs, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        total = cum[-1]
        n = max(2, int(np.ceil(total / spacing)) + 1)
        s = np.linspace(0.0, total, n)
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(lens) - 1)
        frac = (s - cum[idx]) / lens[idx]
        return self.points[idx] + frac[:, None] * segs[idx]


def load_seam(path, slip_tolerance=DEFAULT_SLIP_TOLERANCE):
    """Seam file: one point per line, three decimal fields, meters; # comments."""
    pts = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            body = line.split("#")[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise ParseError(f"{path}:{ln}: expected three decimal fields")
            try:
                pts.append([float(x) for x in parts])
            except ValueError as e:
                raise ParseError(f"{path}:{ln}: bad coordinate: {e}") from e
    if len(pts) < 2:
        raise ParseError(f"{path}: a seam needs at least two points")
    return SeamPath(points=np.array(pts), slip_tolerance=slip_tolerance)


def save_seam(seam, path):
    with open(path, "w") as fh:
        for p in seam.points:
            fh.write(f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f}\n")


def _point_polyline_distances(points, polyline):
    """Distance of each point to a polyline, exact over segments."""
    a = polyline[:-1]
    seg = polyline[1:] - a
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    seg_len2[seg_len2 == 0.0] = 1.0
    out = np.empty(len(points))
    for i, p in enumerate(points):
        t = np.clip(((p - a) * seg).sum(axis=1) / seg_len2, 0.0, 1.0)
        proj = a + t[:, None] * seg
        out[i] = np.sqrt(((proj - p) ** 2).sum(axis=1).min())
    return out


def seam_metrics(bead_or_beads, seam, coverage_quantum=5e-4):
    """(coverage in [0,1], max_deviation m, slip_events).

    coverage: fraction of seam arc length whose nearest bead sample is within
    the slip tolerance. max_deviation: worst bead-sample distance to the seam
    polyline. slip_events: maximal contiguous off-tolerance runs of bead
    samples, counted per bead.
    """
    if isinstance(bead_or_beads, PuttyBead):
        beads = [bead_or_beads]
    elif isinstance(bead_or_beads, PuttyTrail):
        beads = bead_or_beads.beads
    else:
        beads = list(bead_or_beads)
    all_samples = [np.asarray(b.samples) for b in beads if len(b.samples)]
    if not all_samples:
        return 0.0, 0.0, 0
    dense = seam.resample(coverage_quantum)
    tree = cKDTree(np.vstack(all_samples))
    nearest, _ = tree.query(dense)
    coverage = float(np.mean(nearest <= seam.slip_tolerance))

    max_dev = 0.0
    slip_events = 0
    for pts in all_samples:
        dev = _point_polyline_distances(pts, seam.points)
        max_dev = max(max_dev, float(dev.max()))
        off = dev > seam.slip_tolerance
        slip_events += int(np.sum(off[1:] & ~off[:-1]) + (1 if off[0] else 0))
    return coverage, max_dev, slip_events


# ---- shadows ----

def project_shadow(vertices, light_direction, plane_normal, plane_offset):
    """Project vertices along the light direction onto the plane
    {x : plane_normal . x = plane_offset}."""
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    ell = np.asarray(light_direction, dtype=float).reshape(3)
    n = np.asarray(plane_normal, dtype=float).reshape(3)
    denom = float(n @ ell)
    if abs(denom) <= 1e-6:
        raise DegenerateLight("light direction is parallel to the plane")
    s = (plane_offset - v @ n) / denom
    out = v + s[:, None] * ell[None, :]
    return out if np.asarray(vertices).ndim == 2 else out[0]


# ---- replica / junction ----

def handle_replica_state(prop, pose):
    """Replica frame for display/shadow and the junction gap.

    The replica composes the calibration offset in the grip frame; the gap is
    the displacement of the nose-root point between the true and replica
    frames. Collision never sees the offset.
    """
    off = prop.calibration_offset
    if off.is_identity:
        return pose, 0.0
    replica = GripPose(
        pose.transform(off.translation),
        quat.multiply(pose.orientation, off.rotation),
    )
    root_true = pose.transform(prop.nose_root)
    root_replica = replica.transform(prop.nose_root)
    gap = float(np.linalg.norm(root_true - root_replica))
    return replica, gap


# ---- scene model ----

@dataclass
class SceneModel:
    """Everything the loop collides with and measures against."""

    mesh: TriMesh
    seam: SeamPath
    prop: MixedProp
    stiffness: float = DEFAULT_STIFFNESS
    damping: float = DEFAULT_DAMPING
    putty_radius: float = DEFAULT_PUTTY_RADIUS
    sample_spacing: float = DEFAULT_SAMPLE_SPACING
    ring_segments: int = DEFAULT_RING_SEGMENTS
    prop_bounding_size: float = 0.0     # m; 0 means derive from the prop

    def effective_prop_size(self):
        if self.prop_bounding_size > 0.0:
            return self.prop_bounding_size
        pts = [np.zeros(3), self.prop.tip, self.prop.nose_root]
        for prim in self.prop.nose:
            if isinstance(prim, SpherePrimitive):
                pts.append(prim.center)
            else:
                pts.append(prim.p0)
                pts.append(prim.p1)
        pts = np.asarray(pts)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def check_prop_circle_ratio(rig, scene):
    """Advisory: the attachment circle should stay in the range of the prop
    size, at most doubling it. Warns, never fails."""
    import warnings
    size = scene.effective_prop_size()
    if size > 0.0 and rig.circle_diameter > 2.0 * size:
        warnings.warn(
            f"attachment circle diameter {rig.circle_diameter:.3f} m is more "
            f"than double the prop bounding size {size:.3f} m",
            stacklevel=2,
        )


def load_scene(path):
    """Scene config (JSON): mesh (file or generator), seam file, prop, gains."""
    import os
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid scene file: {e}") from e
    try:
        mesh_spec = doc["mesh"]
        if isinstance(mesh_spec, str):
            mesh = load_mesh(resolve(mesh_spec),
                             flip_winding=bool(doc.get("flip_winding", False)))
        else:
            mesh = generate_mesh(mesh_spec)
        seam = load_seam(resolve(doc["seam"]),
                         slip_tolerance=float(doc.get("slip_tolerance",
                                                      DEFAULT_SLIP_TOLERANCE)))
        prop_doc = doc.get("prop")
        if prop_doc is None:
            prop = default_putty_gun()
        else:
            nose = []
            for prim in prop_doc["nose"]:
                if prim["type"] == "sphere":
                    nose.append(SpherePrimitive(center=prim["center"],
                                                radius=prim["radius"]))
                elif prim["type"] == "capsule":
                    nose.append(CapsulePrimitive(p0=prim["p0"], p1=prim["p1"],
                                                 radius=prim["radius"]))
                else:
                    raise ParseError(f"{path}: unknown primitive {prim['type']!r}")
            prop = MixedProp(nose=nose, tip=prop_doc["tip"],
                             nose_root=prop_doc.get("nose_root", [0, 0, 0]))
        offset_doc = doc.get("calibration_offset")
        if offset_doc:
            prop.calibration_offset = RigidOffset(
                translation=offset_doc.get("translation", [0, 0, 0]),
                rotation=offset_doc.get("rotation", [1, 0, 0, 0]),
            )
        return SceneModel(
            mesh=mesh,
            seam=seam,
            prop=prop,
            stiffness=float(doc.get("stiffness", DEFAULT_STIFFNESS)),
            damping=float(doc.get("damping", DEFAULT_DAMPING)),
            putty_radius=float(doc.get("putty_radius", DEFAULT_PUTTY_RADIUS)),
            sample_spacing=float(doc.get("sample_spacing", DEFAULT_SAMPLE_SPACING)),
            ring_segments=int(doc.get("ring_segments", DEFAULT_RING_SEGMENTS)),
            prop_bounding_size=float(doc.get("prop_bounding_size", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"{path}: invalid scene file: {e}") from e
