"""String rig geometry: motor placement, grip attachment circle, string lengths,
and the 6x8 structure matrix mapping tensions to a wrench on the grip.

Conventions: world frame in meters, torque about the grip origin (the center of
the attachment circle), quaternions (w, x, y, z).
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .errors import DegenerateString, ParseError

DIAMETER_GOOD_RANGE = (0.10, 0.30)
MIN_STRING_LENGTH = 1e-6

# default motor box, meters (width x depth x height, centered at the origin);
# sized so the default rig keeps wrench closure over the central 0.6x0.4x0.4 m
DEFAULT_BOX = (1.4, 1.0, 1.2)
DEFAULT_DIAMETER = 0.20
DEFAULT_TENSION_MIN = 0.5
DEFAULT_TENSION_MAX = 30.0


@dataclass
class GripPose:
    """Rigid pose of the grip: position (m) and unit quaternion (w, x, y, z).

    The quaternion is renormalized on construction; a norm further than 1e-9
    from 1 is still accepted (renormalized), a zero quaternion is not.
    """

    position: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.orientation = quat.normalize(self.orientation)

    def rotation_matrix(self):
        return quat.to_matrix(self.orientation)

    def transform(self, points):
        """Map grip-local point(s) to world."""
        return quat.rotate(self.orientation, points) + self.position

    @staticmethod
    def identity():
        return GripPose(np.zeros(3))


def _attachment_offsets(circle_diameter):
    r = 0.5 * circle_diameter
    return np.array([
        [r, 0.0, 0.0],
        [0.0, r, 0.0],
        [-r, 0.0, 0.0],
        [0.0, -r, 0.0],
    ])


@dataclass
class RigConfig:
    """Static description of the 8-string rig.

    string_pairing[i] = (motor index, attachment index) for string i. The four
    attachment points sit on a circle of the given diameter at 0/90/180/270
    degrees in the grip's local XY plane.
    """

    motor_positions: np.ndarray
    circle_diameter: float = DEFAULT_DIAMETER
    string_pairing: tuple = tuple((i, i % 4) for i in range(8))
    tension_min: float = DEFAULT_TENSION_MIN
    tension_max: float = DEFAULT_TENSION_MAX

    def __post_init__(self):
        self.motor_positions = np.asarray(self.motor_positions, dtype=float)
        if self.motor_positions.shape != (8, 3):
            raise ValueError("motor_positions must be 8 points in 3-space")
        self.string_pairing = tuple((int(m), int(a)) for m, a in self.string_pairing)
        if len(self.string_pairing) != 8:
            raise ValueError("exactly 8 strings required")
        motors = [m for m, _ in self.string_pairing]
        attaches = [a for _, a in self.string_pairing]
        if sorted(motors) != list(range(8)):
            raise ValueError("each motor must carry exactly one string")
        if any(attaches.count(j) != 2 for j in range(4)):
            raise ValueError("each attachment point must carry exactly two strings")
        if self.circle_diameter < 0.0:
            raise ValueError("circle_diameter must be >= 0")
        if not 0.0 < self.tension_min < self.tension_max:
            raise ValueError("require 0 < tension_min < tension_max")
        spans = self.motor_positions.max(axis=0) - self.motor_positions.min(axis=0)
        if np.prod(spans) <= 0.0:
            raise ValueError("motor positions must form a nondegenerate hexahedron")
        if len(np.unique(self.motor_positions, axis=0)) != 8:
            raise ValueError("motor positions must be distinct")
        lo, hi = DIAMETER_GOOD_RANGE
        if self.circle_diameter != 0.0 and not lo <= self.circle_diameter <= hi:
            warnings.warn(
                f"circle_diameter {self.circle_diameter:.3f} m outside the "
                f"recommended [{lo:.2f}, {hi:.2f}] m range",
                stacklevel=2,
            )

    @property
    def attachment_offsets(self):
        """Grip-local attachment points, (4, 3)."""
        return _attachment_offsets(self.circle_diameter)

    @property
    def tension_bounds(self):
        return (self.tension_min, self.tension_max)

    def with_diameter(self, circle_diameter):
        return RigConfig(
            motor_positions=self.motor_positions.copy(),
            circle_diameter=circle_diameter,
            string_pairing=self.string_pairing,
            tension_min=self.tension_min,
            tension_max=self.tension_max,
        )

    @property
    def _pairing_arrays(self):
        cached = getattr(self, "_pairing_cache", None)
        if cached is None:
            motor_idx = np.array([m for m, _ in self.string_pairing])
            attach_idx = np.array([a for _, a in self.string_pairing])
            cached = (motor_idx, attach_idx)
            object.__setattr__(self, "_pairing_cache", cached)
        return cached

    def string_endpoints(self, pose):
        """Per-string (motor point, attachment point in world), each (8, 3)."""
        motor_idx, attach_idx = self._pairing_arrays
        world_attach = pose.transform(self.attachment_offsets)
        return self.motor_positions[motor_idx], world_attach[attach_idx]


@dataclass
class StructureMatrix:
    """6x8 matrix A with column i = [u_i ; (R r_i) x u_i]; wrench = A @ tensions."""

    A: np.ndarray
    pose: GripPose = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.shape != (6, 8):
            raise ValueError("structure matrix must be 6x8")
        norms = np.linalg.norm(self.A[:3], axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("top sub-columns of a structure matrix must be unit")

    def wrench(self, tensions):
        return self.A @ np.asarray(tensions, dtype=float)


def default_rig(circle_diameter=DEFAULT_DIAMETER, box=DEFAULT_BOX,
                tension_min=DEFAULT_TENSION_MIN, tension_max=DEFAULT_TENSION_MAX):
    """Rig with motors at the vertices of an axis-aligned box centered at the origin.

    The default pairing sends attachment point j to two motors mirrored across
    the rig's symmetry planes, so equal tensions at the centered identity pose
    produce exactly zero wrench.
    """
    x, y, z = 0.5 * box[0], 0.5 * box[1], 0.5 * box[2]
    motors = np.array([
        [+x, +y, +z],   # string 0 -> attachment 0 (+X)
        [+x, -y, +z],   # string 1 -> attachment 1 (+Y)
        [-x, +y, -z],   # string 2 -> attachment 2 (-X)
        [+x, +y, -z],   # string 3 -> attachment 3 (-Y)
        [+x, -y, -z],   # string 4 -> attachment 0
        [-x, -y, -z],   # string 5 -> attachment 1
        [-x, -y, +z],   # string 6 -> attachment 2
        [-x, +y, +z],   # string 7 -> attachment 3
    ])
    return RigConfig(
        motor_positions=motors,
        circle_diameter=circle_diameter,
        string_pairing=tuple((i, i % 4) for i in range(8)),
        tension_min=tension_min,
        tension_max=tension_max,
    )


def string_vectors(rig, pose):
    """(motor - attachment) per string plus lengths; raises on degenerate strings."""
    motors, attach = rig.string_endpoints(pose)
    d = motors - attach
    lengths = np.linalg.norm(d, axis=1)
    if np.any(lengths <= MIN_STRING_LENGTH):
        bad = int(np.argmin(lengths))
        raise DegenerateString(
            f"string {bad}: attachment point coincides with its motor "
            f"(distance {lengths[bad]:.3e} m)"
        )
    return d, lengths


def string_lengths(rig, pose):
    """Lengths of the 8 strings at the given pose, meters."""
    _, lengths = string_vectors(rig, pose)
    return lengths


def build_structure_matrix(rig, pose):
    """Structure matrix at a pose: wrench on the grip = A @ tensions."""
    d, lengths = string_vectors(rig, pose)
    u = d / lengths[:, None]
    _, attach_idx = rig._pairing_arrays
    lever = quat.rotate(pose.orientation, rig.attachment_offsets)[attach_idx]
    A = np.empty((6, 8))
    A[:3] = u.T
    A[3:] = np.cross(lever, u).T
    return StructureMatrix(A=A, pose=pose)


def save_rig(rig, path):
    doc = {
        "motor_positions": rig.motor_positions.tolist(),
        "circle_diameter": rig.circle_diameter,
        "string_pairing": [list(p) for p in rig.string_pairing],
        "tension_min": rig.tension_min,
        "tension_max": rig.tension_max,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_rig(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid rig file: {e}") from e
    try:
        return RigConfig(
            motor_positions=np.asarray(doc["motor_positions"], dtype=float),
            circle_diameter=float(doc["circle_diameter"]),
            string_pairing=tuple(tuple(p) for p in doc["string_pairing"]),
            tension_min=float(doc.get("tension_min", DEFAULT_TENSION_MIN)),
            tension_max=float(doc.get("tension_max", DEFAULT_TENSION_MAX)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: invalid rig file: {e}") from e
