"""Scenario scripts: timestamped (pose, trigger) commands with hold or linear
interpolation, plus generators for the bundled scenarios.

Script file format, one command per line:

    mode linear            # or hold; optional, first non-comment line
    t  x y z  qw qx qy qz  trigger

Timestamps nondecreasing, quaternions unit (renormalized within 1e-6),
trigger 0 or 1; '#' starts a comment.
"""

import numpy as np

from .. import quat
from ..errors import ScriptError
from ..rig import GripPose

MODE_HOLD = "hold"
MODE_LINEAR = "linear"


class ScenarioScript:
    def __init__(self, times, positions, quaternions, triggers, mode=MODE_LINEAR):
        self.times = np.asarray(times, dtype=float)
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        self.quaternions = np.asarray(quaternions, dtype=float).reshape(-1, 4)
        self.triggers = np.asarray(triggers, dtype=bool)
        self.mode = mode
        n = len(self.times)
        if not (len(self.positions) == len(self.quaternions) == len(self.triggers) == n):
            raise ScriptError("mismatched script column lengths")
        if n == 0:
            return
        if np.any(np.diff(self.times) < 0):
            raise ScriptError("timestamps must be nondecreasing")
        norms = np.linalg.norm(self.quaternions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ScriptError("quaternions must be unit")
        self.quaternions = self.quaternions / norms[:, None]

    def __len__(self):
        return len(self.times)

    @property
    def duration(self):
        return float(self.times[-1]) if len(self.times) else 0.0

    def sample(self, t):
        """Command at time t: (GripPose, trigger)."""
        if len(self.times) == 0:
            raise ScriptError("empty script cannot be sampled")
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        if i < 0:
            i = 0
        if self.mode == MODE_HOLD or i >= len(self.times) - 1 or t <= self.times[0]:
            return (GripPose(self.positions[i], self.quaternions[i]),
                    bool(self.triggers[i]))
        t0, t1 = self.times[i], self.times[i + 1]
        u = 0.0 if t1 <= t0 else min(1.0, (t - t0) / (t1 - t0))
        pos = (1 - u) * self.positions[i] + u * self.positions[i + 1]
        q = quat.nlerp(self.quaternions[i], self.quaternions[i + 1], u)
        return GripPose(pos, q), bool(self.triggers[i])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"mode {self.mode}\n")
            for t, p, q, trig in zip(self.times, self.positions,
                                     self.quaternions, self.triggers):
                fh.write(f"{float(t)!r} {float(p[0])!r} {float(p[1])!r} {float(p[2])!r} "
                         f"{float(q[0])!r} {float(q[1])!r} {float(q[2])!r} {float(q[3])!r} "
                         f"{1 if trig else 0}\n")


def load_script(path):
    times, positions, quaternions, triggers = [], [], [], []
    mode = MODE_LINEAR
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            body = line.split("#")[0].strip()
            if not body:
                continue
            parts = body.split()
            if parts[0] == "mode":
                if len(parts) != 2 or parts[1] not in (MODE_HOLD, MODE_LINEAR):
                    raise ScriptError("mode must be 'hold' or 'linear'", line=ln)
                mode = parts[1]
                continue
            if len(parts) != 9:
                raise ScriptError("expected: t x y z qw qx qy qz trigger", line=ln)
            try:
                vals = [float(x) for x in parts[:8]]
                trig = int(parts[8])
            except ValueError as e:
                raise ScriptError(str(e), line=ln) from e
            if trig not in (0, 1):
                raise ScriptError("trigger must be 0 or 1", line=ln)
            if times and vals[0] < times[-1]:
                raise ScriptError("timestamps must be nondecreasing", line=ln)
            q = np.array(vals[4:8])
            if abs(np.linalg.norm(q) - 1.0) > 1e-6:
                raise ScriptError("quaternion must be unit", line=ln)
            times.append(vals[0])
            positions.append(vals[1:4])
            quaternions.append(q)
            triggers.append(bool(trig))
    return ScenarioScript(times, positions, quaternions, triggers, mode=mode)


# ---- generators for the bundled scenarios ----
#
# Generators are written in tip space: waypoints describe where the prop TIP
# should be, and the grip position is back-computed from the prop's tip offset
# (tip_local) under the script's fixed orientation.

def _grip_for_tip(tip_points, tip_local, orientation):
    offset = quat.rotate(orientation, np.asarray(tip_local, dtype=float))
    return np.atleast_2d(tip_points) - offset


def seam_follow_script(seam, tip_local, hover=0.0025, speed=0.05, lead_in=0.25,
                       orientation=None):
    """Trace the seam at constant speed, tip hovering `hover` above it,
    trigger held during the trace."""
    if orientation is None:
        orientation = quat.IDENTITY.copy()
    pts = seam.resample(0.01)
    segs = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(segs)])
    lift = np.array([0.0, 0.0, hover])
    high = np.array([0.0, 0.0, hover + 0.05])
    tips, times, triggers = [], [], []
    times.append(0.0)
    tips.append(pts[0] + high)
    triggers.append(False)
    times.append(lead_in)
    tips.append(pts[0] + lift)
    triggers.append(False)
    for si, p in zip(s, pts):
        times.append(lead_in + 0.05 + si / speed)
        tips.append(p + lift)
        triggers.append(True)
    t_end = times[-1]
    times.append(t_end + 0.05)
    tips.append(pts[-1] + lift)
    triggers.append(False)
    times.append(t_end + 0.3)
    tips.append(pts[-1] + high)
    triggers.append(False)
    positions = _grip_for_tip(np.asarray(tips), tip_local, orientation)
    quaternions = [orientation] * len(times)
    return ScenarioScript(times, positions, quaternions, triggers, mode=MODE_LINEAR)


def half_slip_script(seam, tip_local, offset=0.010, hover=0.0025, speed=0.05,
                     orientation=None):
    """First half on the seam, second half offset sideways by 2x tolerance.

    The offset is applied perpendicular to the seam's local direction (in the
    horizontal plane), so the second half genuinely leaves the seam.
    """
    if orientation is None:
        orientation = quat.IDENTITY.copy()
    pts = seam.resample(0.005)
    half = len(pts) // 2
    tangents = np.gradient(pts, axis=0)
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]
    lateral = np.cross(tangents, np.array([0.0, 0.0, 1.0]))
    norms = np.linalg.norm(lateral, axis=1)
    norms[norms < 1e-9] = 1.0
    lateral /= norms[:, None]
    shifted = pts.copy()
    shifted[half:] += offset * lateral[half:]
    segs = np.linalg.norm(np.diff(shifted, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(segs)])
    lift = np.array([0.0, 0.0, hover])
    tips, times, triggers = [], [], []
    times.append(0.0)
    tips.append(shifted[0] + np.array([0.0, 0.0, hover + 0.05]))
    triggers.append(False)
    for si, p in zip(s, shifted):
        times.append(0.25 + si / speed)
        tips.append(p + lift)
        triggers.append(True)
    times.append(times[-1] + 0.1)
    tips.append(tips[-1])
    triggers.append(False)
    positions = _grip_for_tip(np.asarray(tips), tip_local, orientation)
    quaternions = [orientation] * len(times)
    return ScenarioScript(times, positions, quaternions, triggers, mode=MODE_LINEAR)


def descent_script(tip_local, x=0.0, y=0.0, z_start=0.08, z_end=-0.02,
                   duration=1.0, settle=0.3):
    """Straight vertical tip descent onto a surface, then hold; trigger off."""
    tips = np.array([[x, y, z_start], [x, y, z_end], [x, y, z_end]])
    times = [0.0, duration, duration + settle]
    positions = _grip_for_tip(tips, tip_local, quat.IDENTITY)
    quaternions = [quat.IDENTITY.copy()] * 3
    triggers = [False, False, False]
    return ScenarioScript(times, positions, quaternions, triggers, mode=MODE_LINEAR)
