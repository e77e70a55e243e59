"""numba kernels for BVH mesh queries.

The flattened BVH layout: per node an AABB (node_min/node_max), node_left < 0
marks a leaf whose triangles are tri_order[node_start : node_start + node_count];
internal nodes store child indices in node_left/node_right. All traversals use
explicit stacks; fastmath stays off so replays are bit-reproducible.
"""

import numpy as np
from numba import njit

_STACK = 256


@njit(cache=True)
def _closest_point_tri(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz):
    """Closest point on triangle abc to p, plus barycentric (u, v, w) of the result."""
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay, az, 1.0, 0.0, 0.0
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bx, by, bz, 0.0, 1.0, 0.0
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return ax + v * abx, ay + v * aby, az + v * abz, 1.0 - v, v, 0.0
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cx, cy, cz, 0.0, 0.0, 1.0
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return ax + w * acx, ay + w * acy, az + w * acz, 1.0 - w, 0.0, w
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return (bx + w * (cx - bx), by + w * (cy - by), bz + w * (cz - bz),
                0.0, 1.0 - w, w)
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return (ax + abx * v + acx * w, ay + aby * v + acy * w, az + abz * v + acz * w,
            1.0 - v - w, v, w)


@njit(cache=True)
def _aabb_dist2(px, py, pz, lox, loy, loz, hix, hiy, hiz):
    d = 0.0
    if px < lox:
        d += (lox - px) ** 2
    elif px > hix:
        d += (px - hix) ** 2
    if py < loy:
        d += (loy - py) ** 2
    elif py > hiy:
        d += (py - hiy) ** 2
    if pz < loz:
        d += (loz - pz) ** 2
    elif pz > hiz:
        d += (pz - hiz) ** 2
    return d


@njit(cache=True)
def bvh_closest_point(px, py, pz,
                      node_min, node_max, node_left, node_right,
                      node_start, node_count, tri_order,
                      v0, v1, v2):
    """Returns (dist2, qx, qy, qz, tri_index, u, v, w)."""
    best = 1e300
    bq = (0.0, 0.0, 0.0)
    btri = -1
    bu = 0.0
    bv = 0.0
    bw = 0.0
    stack = np.empty(_STACK, dtype=np.int32)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _aabb_dist2(px, py, pz,
                       node_min[node, 0], node_min[node, 1], node_min[node, 2],
                       node_max[node, 0], node_max[node, 1], node_max[node, 2]) >= best:
            continue
        if node_left[node] < 0:
            for k in range(node_start[node], node_start[node] + node_count[node]):
                t = tri_order[k]
                qx, qy, qz, u, v, w = _closest_point_tri(
                    px, py, pz,
                    v0[t, 0], v0[t, 1], v0[t, 2],
                    v1[t, 0], v1[t, 1], v1[t, 2],
                    v2[t, 0], v2[t, 1], v2[t, 2])
                d2 = (px - qx) ** 2 + (py - qy) ** 2 + (pz - qz) ** 2
                if d2 < best:
                    best = d2
                    bq = (qx, qy, qz)
                    btri = t
                    bu, bv, bw = u, v, w
        else:
            l = node_left[node]
            r = node_right[node]
            dl = _aabb_dist2(px, py, pz, node_min[l, 0], node_min[l, 1], node_min[l, 2],
                             node_max[l, 0], node_max[l, 1], node_max[l, 2])
            dr = _aabb_dist2(px, py, pz, node_min[r, 0], node_min[r, 1], node_min[r, 2],
                             node_max[r, 0], node_max[r, 1], node_max[r, 2])
            # push the farther child first so the nearer is visited next
            if dl <= dr:
                if dr < best:
                    stack[top] = r
                    top += 1
                if dl < best:
                    stack[top] = l
                    top += 1
            else:
                if dl < best:
                    stack[top] = l
                    top += 1
                if dr < best:
                    stack[top] = r
                    top += 1
    return best, bq[0], bq[1], bq[2], btri, bu, bv, bw


@njit(cache=True)
def _feature_normal(tri, u, v, w,
                    triangles, face_normals, edge_normals, vertex_normals):
    """Pseudo-normal of the closest feature identified by barycentrics."""
    eps = 1e-9
    iu = u > eps
    iv = v > eps
    iw = w > eps
    if iu and iv and iw:
        nx = face_normals[tri, 0]
        ny = face_normals[tri, 1]
        nz = face_normals[tri, 2]
    elif iu and iv:
        nx = edge_normals[tri, 0, 0]
        ny = edge_normals[tri, 0, 1]
        nz = edge_normals[tri, 0, 2]
    elif iv and iw:
        nx = edge_normals[tri, 1, 0]
        ny = edge_normals[tri, 1, 1]
        nz = edge_normals[tri, 1, 2]
    elif iw and iu:
        nx = edge_normals[tri, 2, 0]
        ny = edge_normals[tri, 2, 1]
        nz = edge_normals[tri, 2, 2]
    elif iu:
        vid = triangles[tri, 0]
        nx = vertex_normals[vid, 0]
        ny = vertex_normals[vid, 1]
        nz = vertex_normals[vid, 2]
    elif iv:
        vid = triangles[tri, 1]
        nx = vertex_normals[vid, 0]
        ny = vertex_normals[vid, 1]
        nz = vertex_normals[vid, 2]
    else:
        vid = triangles[tri, 2]
        nx = vertex_normals[vid, 0]
        ny = vertex_normals[vid, 1]
        nz = vertex_normals[vid, 2]
    return nx, ny, nz


@njit(cache=True)
def bvh_signed_distance(px, py, pz,
                        node_min, node_max, node_left, node_right,
                        node_start, node_count, tri_order,
                        v0, v1, v2,
                        triangles, face_normals, edge_normals, vertex_normals):
    """Signed distance to the surface (negative behind/inside), with the
    closest point, outward feature normal, and triangle index.

    Returns (sd, qx, qy, qz, nx, ny, nz, tri).
    """
    d2, qx, qy, qz, tri, u, v, w = bvh_closest_point(
        px, py, pz, node_min, node_max, node_left, node_right,
        node_start, node_count, tri_order, v0, v1, v2)
    nx, ny, nz = _feature_normal(tri, u, v, w, triangles, face_normals,
                                 edge_normals, vertex_normals)
    dist = np.sqrt(d2)
    s = (px - qx) * nx + (py - qy) * ny + (pz - qz) * nz
    if s < 0.0:
        return -dist, qx, qy, qz, nx, ny, nz, tri
    return dist, qx, qy, qz, nx, ny, nz, tri


@njit(cache=True)
def _seg_aabb_hit(p0x, p0y, p0z, dx, dy, dz, t_lo, t_hi,
                  lox, loy, loz, hix, hiy, hiz):
    """Slab test of segment p0 + t d, t in [t_lo, t_hi]."""
    tmin = t_lo
    tmax = t_hi
    for axis in range(3):
        if axis == 0:
            o, d, lo, hi = p0x, dx, lox, hix
        elif axis == 1:
            o, d, lo, hi = p0y, dy, loy, hiy
        else:
            o, d, lo, hi = p0z, dz, loz, hiz
        if abs(d) < 1e-300:
            if o < lo or o > hi:
                return False
        else:
            inv = 1.0 / d
            t1 = (lo - o) * inv
            t2 = (hi - o) * inv
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > tmin:
                tmin = t1
            if t2 < tmax:
                tmax = t2
            if tmin > tmax:
                return False
    return True


@njit(cache=True)
def _mt_intersect(p0x, p0y, p0z, dx, dy, dz,
                  ax, ay, az, bx, by, bz, cx, cy, cz, cull):
    """Moller-Trumbore; returns t >= 0 or -1. cull skips back-face hits."""
    e1x, e1y, e1z = bx - ax, by - ay, bz - az
    e2x, e2y, e2z = cx - ax, cy - ay, cz - az
    pvx = dy * e2z - dz * e2y
    pvy = dz * e2x - dx * e2z
    pvz = dx * e2y - dy * e2x
    det = e1x * pvx + e1y * pvy + e1z * pvz
    eps = 1e-13
    if cull:
        if det <= eps:
            return -1.0
    elif abs(det) <= eps:
        return -1.0
    inv = 1.0 / det
    tvx, tvy, tvz = p0x - ax, p0y - ay, p0z - az
    u = (tvx * pvx + tvy * pvy + tvz * pvz) * inv
    if u < -1e-12 or u > 1.0 + 1e-12:
        return -1.0
    qvx = tvy * e1z - tvz * e1y
    qvy = tvz * e1x - tvx * e1z
    qvz = tvx * e1y - tvy * e1x
    v = (dx * qvx + dy * qvy + dz * qvz) * inv
    if v < -1e-12 or u + v > 1.0 + 1e-12:
        return -1.0
    t = (e2x * qvx + e2y * qvy + e2z * qvz) * inv
    if t < 0.0:
        return -1.0
    return t


@njit(cache=True)
def bvh_segment_hit(p0x, p0y, p0z, p1x, p1y, p1z, cull,
                    node_min, node_max, node_left, node_right,
                    node_start, node_count, tri_order,
                    v0, v1, v2):
    """Earliest parametric hit of the segment against the mesh.

    Returns (t in [0, 1] or -1, triangle index or -1).
    """
    dx, dy, dz = p1x - p0x, p1y - p0y, p1z - p0z
    best_t = 2.0
    best_tri = -1
    stack = np.empty(_STACK, dtype=np.int32)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if not _seg_aabb_hit(p0x, p0y, p0z, dx, dy, dz, 0.0, min(best_t, 1.0),
                             node_min[node, 0], node_min[node, 1], node_min[node, 2],
                             node_max[node, 0], node_max[node, 1], node_max[node, 2]):
            continue
        if node_left[node] < 0:
            for k in range(node_start[node], node_start[node] + node_count[node]):
                tri = tri_order[k]
                t = _mt_intersect(p0x, p0y, p0z, dx, dy, dz,
                                  v0[tri, 0], v0[tri, 1], v0[tri, 2],
                                  v1[tri, 0], v1[tri, 1], v1[tri, 2],
                                  v2[tri, 0], v2[tri, 1], v2[tri, 2], cull)
                if 0.0 <= t <= 1.0 and t < best_t:
                    best_t = t
                    best_tri = tri
        else:
            stack[top] = node_left[node]
            top += 1
            stack[top] = node_right[node]
            top += 1
    if best_tri < 0:
        return -1.0, -1
    return best_t, best_tri


@njit(cache=True)
def bvh_raycast(p0x, p0y, p0z, dx, dy, dz,
                node_min, node_max, node_left, node_right,
                node_start, node_count, tri_order,
                v0, v1, v2):
    """First hit along an infinite ray; returns (t or -1, tri or -1)."""
    best_t = 1e300
    best_tri = -1
    stack = np.empty(_STACK, dtype=np.int32)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if not _seg_aabb_hit(p0x, p0y, p0z, dx, dy, dz, 0.0, best_t,
                             node_min[node, 0], node_min[node, 1], node_min[node, 2],
                             node_max[node, 0], node_max[node, 1], node_max[node, 2]):
            continue
        if node_left[node] < 0:
            for k in range(node_start[node], node_start[node] + node_count[node]):
                tri = tri_order[k]
                t = _mt_intersect(p0x, p0y, p0z, dx, dy, dz,
                                  v0[tri, 0], v0[tri, 1], v0[tri, 2],
                                  v1[tri, 0], v1[tri, 1], v1[tri, 2],
                                  v2[tri, 0], v2[tri, 1], v2[tri, 2], False)
                if 0.0 <= t < best_t:
                    best_t = t
                    best_tri = tri
        else:
            stack[top] = node_left[node]
            top += 1
            stack[top] = node_right[node]
            top += 1
    if best_tri < 0:
        return -1.0, -1
    return best_t, best_tri


@njit(cache=True)
def segment_min_signed_distance(p0, p1, resolution,
                                node_min, node_max, node_left, node_right,
                                node_start, node_count, tri_order,
                                v0, v1, v2,
                                triangles, face_normals, edge_normals,
                                vertex_normals):
    """Minimum signed distance over points of the segment p0..p1.

    Branch-and-bound using the 1-Lipschitz property of the distance field
    along arc length; certified to `resolution` meters. Returns
    (sd_min, t_at_min, qx, qy, qz, nx, ny, nz, tri).
    """
    seg = np.empty(3)
    seg[0] = p1[0] - p0[0]
    seg[1] = p1[1] - p0[1]
    seg[2] = p1[2] - p0[2]
    seg_len = np.sqrt(seg[0] ** 2 + seg[1] ** 2 + seg[2] ** 2)

    def eval_at(t):
        return bvh_signed_distance(
            p0[0] + t * seg[0], p0[1] + t * seg[1], p0[2] + t * seg[2],
            node_min, node_max, node_left, node_right,
            node_start, node_count, tri_order, v0, v1, v2,
            triangles, face_normals, edge_normals, vertex_normals)

    best = eval_at(0.0)
    best_t = 0.0
    cand = eval_at(1.0)
    if cand[0] < best[0]:
        best = cand
        best_t = 1.0
    if seg_len > 0.0:
        lo_stack = np.empty(_STACK)
        hi_stack = np.empty(_STACK)
        lo_stack[0] = 0.0
        hi_stack[0] = 1.0
        top = 1
        while top > 0:
            top -= 1
            a = lo_stack[top]
            b = hi_stack[top]
            m = 0.5 * (a + b)
            cand = eval_at(m)
            if cand[0] < best[0]:
                best = cand
                best_t = m
            half_span = 0.5 * (b - a) * seg_len
            # no point of [a, b] can beat best by more than the Lipschitz bound
            if cand[0] - half_span >= best[0] - resolution:
                continue
            if half_span <= resolution:
                continue
            if top + 2 >= _STACK:
                continue
            lo_stack[top] = a
            hi_stack[top] = m
            top += 1
            lo_stack[top] = m
            hi_stack[top] = b
            top += 1
    return best[0], best_t, best[1], best[2], best[3], best[4], best[5], best[6], best[7]
