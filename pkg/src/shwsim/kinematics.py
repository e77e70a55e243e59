"""Forward pose estimation: recover the grip pose from the 8 measured string
lengths, the sensing path of the real device.

Damped nonlinear least squares on the length residuals. Orientation is
parameterized by a local 3-vector rotation increment composed onto the
quaternion each accepted step, so the quaternion never drifts from unit norm.
"""

from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import NoConvergence, RankDeficient
from .rig import GripPose

MAX_ITERATIONS = 100
STEP_TOL = 1e-10
COST_TOL = 1e-12
STALL_RESIDUAL = 1e-4      # m, rms; stalling above this is a failure
LAMBDA_INIT = 1e-3
LAMBDA_MAX = 1e12
RANK_RTOL = 1e-7


@dataclass
class PoseEstimate:
    pose: GripPose
    residual_rms: float
    iterations: int

    def __iter__(self):
        yield self.pose
        yield self.residual_rms
        yield self.iterations


def _skew(v):
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _residuals_jacobian(rig, p, q, lengths):
    """Length residuals f_i = |m_i - a_i| - l_i and the 8x6 Jacobian in
    [position, local rotation increment] coordinates."""
    R = quat.to_matrix(q)
    offsets = rig.attachment_offsets
    f = np.empty(8)
    J = np.empty((8, 6))
    for i, (mi, ai) in enumerate(rig.string_pairing):
        r_local = offsets[ai]
        a = p + R @ r_local
        g = rig.motor_positions[mi] - a
        L = np.linalg.norm(g)
        u = g / L
        f[i] = L - lengths[i]
        J[i, :3] = -u
        # a(delta) = p + R exp([delta]x) r  =>  da/ddelta|_0 = -R [r]x
        J[i, 3:] = u @ (R @ _skew(r_local))
    return f, J


def estimate_pose(rig, lengths, initial_guess):
    """Estimate the grip pose from 8 string lengths.

    Returns PoseEstimate(pose, residual_rms, iterations); iterable as a
    3-tuple. Raises NoConvergence when the iteration cap is reached or the
    damping stalls with residual_rms above 1e-4 m, RankDeficient when the
    Jacobian at the solution has numerical rank below 6 (ambiguous pose, e.g.
    a zero-diameter attachment circle).
    """
    lengths = np.asarray(lengths, dtype=float).reshape(8)
    if np.any(lengths <= 0.0):
        raise ValueError("string lengths must be positive")
    p = initial_guess.position.copy()
    q = initial_guess.orientation.copy()

    f, J = _residuals_jacobian(rig, p, q, lengths)
    cost = float(f @ f)
    lam = LAMBDA_INIT
    iterations = 0
    converged = False

    while iterations < MAX_ITERATIONS:
        iterations += 1
        H = J.T @ J + lam * np.eye(6)
        g = J.T @ f
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        p_new = p + step[:3]
        q_new = quat.multiply(q, quat.from_rotvec(step[3:]))
        f_new, J_new = _residuals_jacobian(rig, p_new, q_new, lengths)
        cost_new = float(f_new @ f_new)
        if cost_new < cost:
            improvement = cost - cost_new
            p, q, f, J, cost = p_new, q_new, f_new, J_new, cost_new
            lam = max(lam / 10.0, 1e-12)
            if np.linalg.norm(step) < STEP_TOL or improvement < COST_TOL:
                converged = True
                break
        else:
            lam *= 10.0
            if lam > LAMBDA_MAX:
                # stalled; acceptable only if already at a good fit
                if np.sqrt(cost / 8.0) <= STALL_RESIDUAL:
                    converged = True
                    break
                raise NoConvergence(
                    "damping stalled away from a solution",
                    residual_rms=float(np.sqrt(cost / 8.0)),
                    iterations=iterations,
                )

    residual_rms = float(np.sqrt(cost / 8.0))
    if not converged:
        raise NoConvergence(
            "iteration cap reached",
            residual_rms=residual_rms,
            iterations=iterations,
        )
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= RANK_RTOL * max(1.0, sv[0]):
        raise RankDeficient(
            f"length Jacobian rank deficient at solution "
            f"(singular values {sv[0]:.3e} .. {sv[-1]:.3e})"
        )
    return PoseEstimate(pose=GripPose(p, q), residual_rms=residual_rms,
                        iterations=iterations)
