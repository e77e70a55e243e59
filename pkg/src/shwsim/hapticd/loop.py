"""The fixed-rate haptic controller loop.

Phase order per tick (fixed): (1) velocity by finite difference of the
commanded pose against the previous actual pose; (2) tip sweep from the
previous actual tip to the commanded tip, clamping the motion at
time-of-impact (with a 1e-9 m backoff) when a front-face crossing is found;
(3) proximity contacts; (4) penalty wrench; (5) tension solve on the negated
wrench, with radial bisection scaling to the capability boundary when
infeasible; (6) putty extrusion when the trigger is held and the actual tip
is within the putty radius of the mesh; (7) frame emission.

Contacts and the wrench are evaluated at the commanded pose (the device-side
pose the hand actually holds); the emitted frame pose and the putty path use
the motion-clamped pose, so the rendered tip never tunnels. The dynamic
engine and haptic controller are merged into this single loop.

Replay (run_scenario) is single-threaded and wall-clock free: sim_time is
tick * dt with dt rational, so identical inputs give bit-identical logs.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import quat
from ..rig import GripPose, build_structure_matrix
from ..scene import PuttyTrail, contact_wrench, handle_replica_state, query_contacts, sweep_tip
from ..tension import INFEASIBLE, solve_tensions
from . import protocol
from .frames import FrameLog, HapticFrame

SWEEP_BACKOFF = 1e-9          # m pulled back from the impact point
SCALE_BISECT_ITERS = 30


@dataclass
class LoopParams:
    dt: Fraction = Fraction(1, 1000)
    start_pose: GripPose = field(default_factory=GripPose.identity)

    def __post_init__(self):
        if not isinstance(self.dt, Fraction):
            self.dt = Fraction(self.dt).limit_denominator(10 ** 9)
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def dt_float(self):
        return self.dt.numerator / self.dt.denominator

    def sim_time(self, tick):
        return tick * self.dt.numerator / self.dt.denominator


# ---- pose sources ----

class ScriptedPoseSource:
    def __init__(self, script):
        self.script = script

    def sample(self, sim_time):
        return self.script.sample(sim_time)


class ConstantPoseSource:
    def __init__(self, pose, trigger=False):
        self.pose = pose
        self.trigger = trigger

    def sample(self, sim_time):
        return self.pose, self.trigger


class MailboxPoseSource:
    """Single-slot newest-wins mailbox fed by network ingress."""

    def __init__(self, initial_pose, trigger=False):
        self._slot = (initial_pose, trigger)

    def put(self, pose, trigger):
        self._slot = (pose, trigger)      # atomic reference swap

    def sample(self, sim_time):
        return self._slot


class HapticLoop:
    """Owns all mutable simulation state; step() is the only mutator."""

    def __init__(self, rig, scene, params=None):
        self.rig = rig
        self.scene = scene
        self.params = params or LoopParams()
        self.tick = 0
        self.pose = self.params.start_pose
        self.commanded = self.params.start_pose
        self.trail = PuttyTrail(radius=scene.putty_radius,
                                min_spacing=scene.sample_spacing,
                                ring_segments=scene.ring_segments)
        self._tip_local = scene.prop.tip
        self._bounds = rig.tension_bounds

    def _clamped_pose(self, cmd_pose, tip_prev, tip_cmd, sweep_contact):
        toi = sweep_contact.time_of_impact
        seg = tip_cmd - tip_prev
        seg_len = float(np.linalg.norm(seg))
        if toi <= 0.0:
            # started at/behind the surface: allow motion that pulls out
            sd_end = self.scene.mesh.signed_distance(tip_cmd).distance
            if sd_end >= -sweep_contact.depth:
                return cmd_pose
            frac = 0.0
        elif seg_len > 0.0:
            frac = max(0.0, toi - SWEEP_BACKOFF / seg_len)
        else:
            frac = 0.0
        if frac >= 1.0:
            return cmd_pose
        q = quat.slerp(self.pose.orientation, cmd_pose.orientation, frac)
        # place the orientation-clamped pose so the tip lands exactly on the
        # clamped swept segment: no-tunneling must hold for the tip itself
        tip_target = tip_prev + frac * seg
        pos = tip_target - quat.rotate(q, self._tip_local)
        return GripPose(pos, q)

    def step(self, commanded_pose, trigger):
        """Advance one tick; returns the emitted HapticFrame."""
        t_start = time.perf_counter()
        scene = self.scene
        dt = self.params.dt_float
        sim_time = self.params.sim_time(self.tick)

        # (1) velocity: finite difference of the commanded (device-side) poses
        v = np.empty(6)
        v[:3] = (commanded_pose.position - self.commanded.position) / dt
        q_rel = quat.multiply(commanded_pose.orientation,
                              quat.conjugate(self.commanded.orientation))
        v[3:] = quat.to_rotvec(q_rel) / dt

        # (2) swept tip, motion clamp
        tip_prev = self.pose.transform(self._tip_local)
        tip_cmd = commanded_pose.transform(self._tip_local)
        sweep_contact = sweep_tip(scene.mesh, tip_prev, tip_cmd)
        if sweep_contact is not None:
            actual_pose = self._clamped_pose(commanded_pose, tip_prev, tip_cmd,
                                             sweep_contact)
        else:
            actual_pose = commanded_pose
        actual_tip = actual_pose.transform(self._tip_local)

        # (3) contacts at the commanded (device-side) pose
        contacts = query_contacts(scene.mesh, scene.prop, commanded_pose)

        # (4) penalty wrench
        wrench = contact_wrench(contacts, commanded_pose, v,
                                stiffness=scene.stiffness, damping=scene.damping)

        # (5) tensions for the negated wrench; scale to capability if needed
        A = build_structure_matrix(self.rig, commanded_pose)
        target = -wrench
        report = solve_tensions(A, target, self._bounds)
        status = protocol.STATUS_OPTIMAL
        scale = 1.0
        if report.status == INFEASIBLE:
            lo, hi = 0.0, 1.0
            lo_report = solve_tensions(A, np.zeros(6), self._bounds)
            if lo_report.status == INFEASIBLE:
                status = protocol.STATUS_INFEASIBLE
                report = lo_report
                scale = 0.0
            else:
                for _ in range(SCALE_BISECT_ITERS):
                    mid = 0.5 * (lo + hi)
                    cand = solve_tensions(A, mid * target, self._bounds)
                    if cand.status == INFEASIBLE:
                        hi = mid
                    else:
                        lo = mid
                        lo_report = cand
                status = protocol.STATUS_SCALED
                report = lo_report
                scale = lo
        tensions = (report.tensions if report.status != INFEASIBLE
                    else np.zeros(8))

        # (6) putty from the actual (clamped) tip
        tip_distance, _, _ = scene.mesh.closest_point(actual_tip)
        extruding = bool(trigger) and tip_distance <= scene.putty_radius
        bead_delta = self.trail.update(actual_tip, sim_time, extruding)

        # (7) frame
        _, junction_gap = handle_replica_state(scene.prop, actual_pose)
        all_contacts = ([sweep_contact] if sweep_contact is not None else []) + contacts
        frame = HapticFrame(
            tick=self.tick,
            sim_time=sim_time,
            pose=actual_pose,
            velocity=v,
            contacts=all_contacts,
            wrench=wrench,
            tensions=tensions,
            solver_status=status,
            trigger=bool(trigger),
            bead_delta=bead_delta,
            junction_gap=junction_gap,
            wrench_scale=scale,
            step_compute_time=0.0,
        )
        self.pose = actual_pose
        self.commanded = commanded_pose
        self.tick += 1
        frame.step_compute_time = time.perf_counter() - t_start
        return frame


@dataclass
class RunResult:
    log: FrameLog
    coverage: float
    max_deviation: float
    slip_events: int
    summary: dict
    frames: list = None


def run_scenario(script, scene, rig, params=None, keep_frames=False):
    """Replay a scenario deterministically; returns a RunResult.

    The summary carries max wrench (inf norm), the count of ticks whose wrench
    had to be scaled or dropped, seam metrics, compute-time percentiles, and
    the log digest.
    """
    from ..scene import seam_metrics

    params = params or LoopParams()
    log = FrameLog()
    frames = [] if keep_frames else None
    if len(script) == 0:
        summary = {"ticks": 0, "max_wrench": 0.0, "infeasible_ticks": 0,
                   "coverage": 0.0, "max_deviation": 0.0, "slip_events": 0,
                   "median_step_ms": 0.0, "p99_step_ms": 0.0,
                   "digest": log.digest()}
        return RunResult(log=log, coverage=0.0, max_deviation=0.0,
                         slip_events=0, summary=summary)

    start_pose, _ = script.sample(0.0)
    loop = HapticLoop(rig, scene, LoopParams(dt=params.dt, start_pose=start_pose))
    n_ticks = int(script.duration / params.dt_float) + 1
    max_wrench = 0.0
    infeasible_ticks = 0
    times = np.empty(n_ticks)
    for k in range(n_ticks):
        cmd_pose, trigger = script.sample(loop.params.sim_time(k))
        frame = loop.step(cmd_pose, trigger)
        log.append(frame)
        if frames is not None:
            frames.append(frame)
        max_wrench = max(max_wrench, float(np.abs(frame.wrench).max()))
        if frame.solver_status != protocol.STATUS_OPTIMAL:
            infeasible_ticks += 1
        times[k] = frame.step_compute_time
    coverage, max_dev, slips = seam_metrics(loop.trail, scene.seam)
    summary = {
        "ticks": n_ticks,
        "max_wrench": max_wrench,
        "infeasible_ticks": infeasible_ticks,
        "coverage": coverage,
        "max_deviation": max_dev,
        "slip_events": slips,
        "median_step_ms": float(np.median(times) * 1e3),
        "p99_step_ms": float(np.percentile(times, 99) * 1e3),
        "digest": log.digest(),
    }
    return RunResult(log=log, coverage=coverage, max_deviation=max_dev,
                     slip_events=slips, summary=summary, frames=frames)
