"""Unit-quaternion helpers, (w, x, y, z) component order throughout.

The wire protocol and every pose in the simulator use scalar-first
quaternions; keeping one tiny module avoids the scalar-last convention
mismatch with scipy.spatial.transform.
"""

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion cannot be normalized")
    return q / n


def multiply(a, b):
    """Hamilton product a*b: rotation b followed by rotation a (frames compose right to left)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotate(q, v):
    """Rotate vector(s) v by q; v may be (3,) or (n, 3)."""
    return np.asarray(v, dtype=float) @ to_matrix(q).T


def from_rotvec(r):
    """Quaternion for a rotation of |r| radians about r."""
    r = np.asarray(r, dtype=float)
    angle = np.linalg.norm(r)
    if angle < 1e-12:
        # second-order small-angle expansion keeps this C1 near zero
        half = 0.5 * r
        return normalize(np.array([1.0, half[0], half[1], half[2]]))
    axis = r / angle
    s = np.sin(0.5 * angle)
    return np.array([np.cos(0.5 * angle), s * axis[0], s * axis[1], s * axis[2]])


def to_rotvec(q):
    """Rotation vector of q (angle * axis), angle in [0, pi]."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0.0:
        q = -q
    sin_half = np.linalg.norm(q[1:])
    if sin_half < 1e-12:
        return 2.0 * q[1:]
    angle = 2.0 * np.arctan2(sin_half, q[0])
    return (angle / sin_half) * q[1:]


def angle_between(a, b):
    """Geodesic angle between two unit quaternions, in [0, pi]."""
    d = abs(float(np.dot(a, b)))
    return 2.0 * np.arccos(min(1.0, d))


def slerp(a, b, t):
    """Spherical interpolation from a (t=0) to b (t=1), shortest arc."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(np.dot(a, b))
    if d < 0.0:
        b = -b
        d = -d
    if d > 1.0 - 1e-12:
        return normalize(a + t * (b - a))
    theta = np.arccos(d)
    s = np.sin(theta)
    return (np.sin((1.0 - t) * theta) / s) * a + (np.sin(t * theta) / s) * b


def nlerp(a, b, t):
    """Normalized linear interpolation, shortest arc; cheap slerp substitute."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if float(np.dot(a, b)) < 0.0:
        b = -b
    return normalize(a + t * (b - a))
