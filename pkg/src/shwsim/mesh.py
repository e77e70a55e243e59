"""Triangle meshes: loading (OBJ subset, binary STL), cleanup, a flattened
AABB tree, and the queries the haptic loop needs (closest point, signed
distance, ray, swept segment, capsule-axis penetration).

Sign convention: signed distance is negative behind the surface, where
"behind" is decided by the angle-weighted pseudo-normal of the closest
feature; exact for watertight meshes with consistent outward winding.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from . import _meshkernels as mk
from .errors import EmptyMesh, ParseError

MIN_TRIANGLE_AREA = 1e-12     # m^2; smaller triangles are dropped at load
_LEAF_SIZE = 4


@dataclass
class SurfacePoint:
    """Result of a proximity query against a mesh."""

    distance: float            # signed, m
    point: np.ndarray          # closest point on the surface
    normal: np.ndarray         # outward pseudo-normal at the closest feature
    triangle: int


class TriMesh:
    """Indexed triangle mesh with precomputed normals and a BVH."""

    def __init__(self, vertices, triangles, warnings=None):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ParseError("vertices must be (n, 3)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ParseError("triangles must be (m, 3)")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise ParseError("triangle indices out of range")
        self.warnings = list(warnings or [])
        triangles = self._drop_degenerate(vertices, triangles)
        if len(triangles) == 0:
            raise EmptyMesh("no usable triangles after cleanup")
        self.vertices = vertices
        self.triangles = triangles
        self._build_normals()
        self._build_bvh()

    def _drop_degenerate(self, vertices, triangles):
        if not len(triangles):
            return triangles
        a = vertices[triangles[:, 0]]
        areas = 0.5 * np.linalg.norm(
            np.cross(vertices[triangles[:, 1]] - a, vertices[triangles[:, 2]] - a),
            axis=1)
        keep = areas > MIN_TRIANGLE_AREA
        dropped = int((~keep).sum())
        if dropped:
            self.warnings.append(f"dropped {dropped} degenerate triangle(s)")
        return triangles[keep]

    def _build_normals(self):
        tri = self.triangles
        v = self.vertices
        self.tv0 = np.ascontiguousarray(v[tri[:, 0]])
        self.tv1 = np.ascontiguousarray(v[tri[:, 1]])
        self.tv2 = np.ascontiguousarray(v[tri[:, 2]])
        e1 = self.tv1 - self.tv0
        e2 = self.tv2 - self.tv0
        n = np.cross(e1, e2)
        self.face_normals = np.ascontiguousarray(n / np.linalg.norm(n, axis=1)[:, None])

        # angle-weighted vertex pseudo-normals
        vertex_normals = np.zeros_like(v)
        corners = (self.tv0, self.tv1, self.tv2)
        for j in range(3):
            p = corners[j]
            q = corners[(j + 1) % 3] - p
            r = corners[(j + 2) % 3] - p
            qn = q / np.linalg.norm(q, axis=1)[:, None]
            rn = r / np.linalg.norm(r, axis=1)[:, None]
            ang = np.arccos(np.clip(np.sum(qn * rn, axis=1), -1.0, 1.0))
            np.add.at(vertex_normals, tri[:, j], ang[:, None] * self.face_normals)
        norms = np.linalg.norm(vertex_normals, axis=1)
        norms[norms == 0.0] = 1.0
        self.vertex_normals = np.ascontiguousarray(vertex_normals / norms[:, None])

        # per-face per-edge pseudo-normals (sum over the faces sharing the edge)
        edge_sum = {}
        for f in range(len(tri)):
            for j in range(3):
                key = (min(tri[f, j], tri[f, (j + 1) % 3]),
                       max(tri[f, j], tri[f, (j + 1) % 3]))
                if key in edge_sum:
                    edge_sum[key] = edge_sum[key] + self.face_normals[f]
                else:
                    edge_sum[key] = self.face_normals[f].copy()
        edge_normals = np.empty((len(tri), 3, 3))
        for f in range(len(tri)):
            for j in range(3):
                key = (min(tri[f, j], tri[f, (j + 1) % 3]),
                       max(tri[f, j], tri[f, (j + 1) % 3]))
                n = edge_sum[key]
                nrm = np.linalg.norm(n)
                edge_normals[f, j] = n / nrm if nrm > 0 else self.face_normals[f]
        self.edge_normals = np.ascontiguousarray(edge_normals)

    def _build_bvh(self):
        tmin = np.minimum(np.minimum(self.tv0, self.tv1), self.tv2)
        tmax = np.maximum(np.maximum(self.tv0, self.tv1), self.tv2)
        centroids = (self.tv0 + self.tv1 + self.tv2) / 3.0
        m = len(self.triangles)
        node_min, node_max, node_left, node_right = [], [], [], []
        node_start, node_count = [], []
        order = np.arange(m, dtype=np.int64)
        out_order = np.empty(m, dtype=np.int32)
        cursor = 0

        # (index slice lo, hi, node id); nodes appended breadth-agnostic
        stack = [(0, m, 0)]
        node_min.append(None)
        node_max.append(None)
        node_left.append(0)
        node_right.append(0)
        node_start.append(0)
        node_count.append(0)
        while stack:
            lo, hi, nid = stack.pop()
            idx = order[lo:hi]
            node_min[nid] = tmin[idx].min(axis=0)
            node_max[nid] = tmax[idx].max(axis=0)
            if hi - lo <= _LEAF_SIZE:
                node_left[nid] = -1
                node_right[nid] = -1
                node_start[nid] = cursor
                node_count[nid] = hi - lo
                out_order[cursor:cursor + hi - lo] = idx
                cursor += hi - lo
                continue
            c = centroids[idx]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            half = (hi - lo) // 2
            part = np.argsort(c[:, axis], kind="stable")
            order[lo:hi] = idx[part]
            left_id = len(node_left)
            for _ in range(2):
                node_min.append(None)
                node_max.append(None)
                node_left.append(0)
                node_right.append(0)
                node_start.append(0)
                node_count.append(0)
            node_left[nid] = left_id
            node_right[nid] = left_id + 1
            stack.append((lo, lo + half, left_id))
            stack.append((lo + half, hi, left_id + 1))

        self.node_min = np.ascontiguousarray(np.array(node_min))
        self.node_max = np.ascontiguousarray(np.array(node_max))
        self.node_left = np.array(node_left, dtype=np.int32)
        self.node_right = np.array(node_right, dtype=np.int32)
        self.node_start = np.array(node_start, dtype=np.int32)
        self.node_count = np.array(node_count, dtype=np.int32)
        self.tri_order = np.ascontiguousarray(out_order)

    # ---- queries ----

    def _bvh_args(self):
        return (self.node_min, self.node_max, self.node_left, self.node_right,
                self.node_start, self.node_count, self.tri_order,
                self.tv0, self.tv1, self.tv2)

    def _normal_args(self):
        return (self.triangles, self.face_normals, self.edge_normals,
                self.vertex_normals)

    def closest_point(self, p):
        """Closest surface point; returns (distance, point, triangle index)."""
        p = np.asarray(p, dtype=float)
        d2, qx, qy, qz, tri, _, _, _ = mk.bvh_closest_point(
            p[0], p[1], p[2], *self._bvh_args())
        return float(np.sqrt(d2)), np.array([qx, qy, qz]), int(tri)

    def signed_distance(self, p):
        """Signed closest-feature query; returns a SurfacePoint."""
        p = np.asarray(p, dtype=float)
        sd, qx, qy, qz, nx, ny, nz, tri = mk.bvh_signed_distance(
            p[0], p[1], p[2], *self._bvh_args(), *self._normal_args())
        return SurfacePoint(distance=float(sd), point=np.array([qx, qy, qz]),
                            normal=np.array([nx, ny, nz]), triangle=int(tri))

    def segment_hit(self, p0, p1, cull_backfaces=True):
        """Earliest crossing of the segment with the surface.

        Returns (t, triangle) with t in [0, 1], or None. With culling only
        front-side approaches count.
        """
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        t, tri = mk.bvh_segment_hit(p0[0], p0[1], p0[2], p1[0], p1[1], p1[2],
                                    cull_backfaces, *self._bvh_args())
        if tri < 0:
            return None
        return float(t), int(tri)

    def raycast(self, origin, direction):
        """First hit along an infinite ray; returns (t, triangle) or None."""
        o = np.asarray(origin, dtype=float)
        d = np.asarray(direction, dtype=float)
        t, tri = mk.bvh_raycast(o[0], o[1], o[2], d[0], d[1], d[2],
                                *self._bvh_args())
        if tri < 0:
            return None
        return float(t), int(tri)

    def segment_min_signed_distance(self, p0, p1, resolution=1e-6):
        """Deepest point of a segment: minimum signed distance over p0..p1.

        Returns (sd_min, t_at_min, SurfacePoint at the minimizer).
        """
        p0 = np.ascontiguousarray(p0, dtype=float)
        p1 = np.ascontiguousarray(p1, dtype=float)
        sd, t, qx, qy, qz, nx, ny, nz, tri = mk.segment_min_signed_distance(
            p0, p1, resolution, *self._bvh_args(), *self._normal_args())
        sp = SurfacePoint(distance=float(sd), point=np.array([qx, qy, qz]),
                          normal=np.array([nx, ny, nz]), triangle=int(tri))
        return float(sd), float(t), sp

    # ---- reference (oracle) paths, brute force over all triangles ----

    def closest_point_brute(self, p):
        p = np.asarray(p, dtype=float)
        best = (np.inf, None, -1)
        for t in range(len(self.triangles)):
            qx, qy, qz, _, _, _ = mk._closest_point_tri(
                p[0], p[1], p[2],
                self.tv0[t, 0], self.tv0[t, 1], self.tv0[t, 2],
                self.tv1[t, 0], self.tv1[t, 1], self.tv1[t, 2],
                self.tv2[t, 0], self.tv2[t, 1], self.tv2[t, 2])
            d = np.sqrt((p[0] - qx) ** 2 + (p[1] - qy) ** 2 + (p[2] - qz) ** 2)
            if d < best[0]:
                best = (d, np.array([qx, qy, qz]), t)
        return best

    def segment_hit_brute(self, p0, p1, cull_backfaces=True):
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        d = p1 - p0
        best = None
        for t in range(len(self.triangles)):
            hit = mk._mt_intersect(p0[0], p0[1], p0[2], d[0], d[1], d[2],
                                   self.tv0[t, 0], self.tv0[t, 1], self.tv0[t, 2],
                                   self.tv1[t, 0], self.tv1[t, 1], self.tv1[t, 2],
                                   self.tv2[t, 0], self.tv2[t, 1], self.tv2[t, 2],
                                   cull_backfaces)
            if 0.0 <= hit <= 1.0 and (best is None or hit < best[0]):
                best = (hit, t)
        return best

    @property
    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def __repr__(self):
        return (f"TriMesh({len(self.vertices)} vertices, "
                f"{len(self.triangles)} triangles)")


# ---- file loading ----

def load_obj(path, flip_winding=False):
    vertices = []
    faces = []
    with open(path, errors="replace") as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ParseError(f"{path}:{ln}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as e:
                    raise ParseError(f"{path}:{ln}: bad vertex: {e}") from e
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise ParseError(f"{path}:{ln}: only triangles are supported")
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError as e:
                        raise ParseError(f"{path}:{ln}: bad face index: {e}") from e
                    if i < 0:
                        raise ParseError(f"{path}:{ln}: negative indices unsupported")
                    idx.append(i - 1)
                faces.append(idx)
            # all other record types (vn, vt, o, g, s, usemtl, ...) are ignored
    if not faces:
        raise EmptyMesh(f"{path}: no faces")
    tri = np.array(faces, dtype=np.int64)
    if tri.min() < 0 or tri.max() >= len(vertices):
        raise ParseError(f"{path}: face index out of range")
    if flip_winding:
        tri = tri[:, [0, 2, 1]]
    return TriMesh(np.array(vertices, dtype=float), tri)


def load_stl(path, flip_winding=False):
    with open(path, "rb") as fh:
        header = fh.read(80)
        if header[:5] == b"solid" and b"facet" in header + fh.peek(200)[:200]:
            raise ParseError(f"{path}: ASCII STL not supported, use binary STL")
        count_bytes = fh.read(4)
        if len(count_bytes) < 4:
            raise ParseError(f"{path}: truncated STL header")
        (count,) = struct.unpack("<I", count_bytes)
        payload = fh.read(50 * count)
        if len(payload) != 50 * count:
            raise ParseError(f"{path}: truncated STL payload "
                             f"({len(payload)} of {50 * count} bytes)")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(count, 50)
    coords = raw[:, 12:48].copy().view("<f4").reshape(count, 3, 3).astype(np.float64)
    flat = coords.reshape(-1, 3)
    vertices, inverse = np.unique(flat, axis=0, return_inverse=True)
    tri = inverse.reshape(count, 3).astype(np.int64)
    if flip_winding:
        tri = tri[:, [0, 2, 1]]
    return TriMesh(vertices, tri)


def load_mesh(path, flip_winding=False):
    """Load an ASCII OBJ (v/f triangles) or binary STL by extension."""
    p = str(path)
    if p.lower().endswith(".obj"):
        return load_obj(p, flip_winding)
    if p.lower().endswith(".stl"):
        return load_stl(p, flip_winding)
    raise ParseError(f"{p}: unsupported mesh format (use .obj or .stl)")


def save_obj(mesh_or_arrays, path):
    if isinstance(mesh_or_arrays, TriMesh):
        vertices, triangles = mesh_or_arrays.vertices, mesh_or_arrays.triangles
    else:
        vertices, triangles = mesh_or_arrays
    with open(path, "w") as fh:
        for v in vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for t in triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


# ---- procedural meshes ----

def make_plate(size=(1.0, 1.0), center=(0.0, 0.0, 0.0), divisions=1):
    """Flat rectangular plate in the z = center_z plane, +z normals."""
    sx, sy = size
    n = divisions
    xs = np.linspace(-0.5 * sx, 0.5 * sx, n + 1) + center[0]
    ys = np.linspace(-0.5 * sy, 0.5 * sy, n + 1) + center[1]
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, center[2])])
    tris = []
    for i in range(n):
        for j in range(n):
            a = i * (n + 1) + j
            b = (i + 1) * (n + 1) + j
            tris.append([a, b, a + 1])
            tris.append([a + 1, b, b + 1])
    return TriMesh(verts, np.array(tris, dtype=np.int64))


def make_icosphere(radius=1.0, subdivisions=2, center=(0.0, 0.0, 0.0)):
    """Geodesic sphere with outward winding."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [v for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                cache[key] = len(verts)
                verts.append(m)
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.array(verts) * radius + np.asarray(center, dtype=float)
    return TriMesh(v, np.array(faces, dtype=np.int64))


def car_body_height(x, y):
    """Height field of the demo car body panel: a hood dome rising toward a
    windshield ridge; gentle curvature keeps facet error tiny."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hood = 0.05 * np.exp(-((x + 0.10) ** 2) / 0.045 - (y ** 2) / 0.10)
    ridge = 0.035 / (1.0 + np.exp(-(x - 0.18) / 0.035))
    return -0.12 + hood + ridge


def make_car_body(nx=72, ny=72, x_range=(-0.42, 0.42), y_range=(-0.30, 0.30)):
    """Car-body panel heightfield, about 2*(nx-1)*(ny-1) triangles, +z normals."""
    xs = np.linspace(*x_range, nx)
    ys = np.linspace(*y_range, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gz = car_body_height(gx, gy)
    verts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    tris = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = (i + 1) * ny + j
            tris.append([a, b, a + 1])
            tris.append([a + 1, b, b + 1])
    return TriMesh(verts, np.array(tris, dtype=np.int64))


def generate_mesh(spec_dict):
    """Build a procedural mesh from a config dict: {"generator": name, ...}."""
    kind = spec_dict.get("generator")
    if kind == "plate":
        return make_plate(size=tuple(spec_dict.get("size", (1.0, 1.0))),
                          center=tuple(spec_dict.get("center", (0, 0, 0))),
                          divisions=int(spec_dict.get("divisions", 1)))
    if kind == "icosphere":
        return make_icosphere(radius=float(spec_dict.get("radius", 1.0)),
                              subdivisions=int(spec_dict.get("subdivisions", 2)),
                              center=tuple(spec_dict.get("center", (0, 0, 0))))
    if kind == "car_body":
        return make_car_body(nx=int(spec_dict.get("nx", 72)),
                             ny=int(spec_dict.get("ny", 72)))
    raise ParseError(f"unknown mesh generator {kind!r}")
