"""Tension distribution: map a desired wrench to 8 bounded, pull-only string
tensions, and quantify the wrench capability of a pose.

solve_tensions minimizes ||t - t_mid||^2 subject to A t = w and
tension_min <= t <= tension_max, where t_mid is the midpoint of the bounds:
the solution stays pretensioned and away from slack. The solver is a dual
active-set method (Goldfarb-Idnani scheme specialized to an identity Hessian):
it starts at the unconstrained optimum t_mid, adds the equality rows first
(redundant rows are skipped, inconsistent ones report infeasibility, which
covers rank-deficient structure matrices), then adds violated bounds one at a
time, dropping blocking constraints via the dual ratio test. Finite, exact at
termination, and needs no phase-1 feasible point.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_FEAS_TOL = 1e-9          # constraint violation considered zero
_DEP_TOL = 1e-11          # projected normal considered dependent
_MAX_ITER = 300


@dataclass
class TensionSolveReport:
    """Outcome of one tension solve.

    residual_norm is the infinity norm of A t - w; objective is
    ||t - t_mid||^2 (N^2). status is OPTIMAL or INFEASIBLE; tensions are
    meaningful only when OPTIMAL.
    """

    tensions: np.ndarray
    residual_norm: float
    objective: float
    status: str
    iterations: int

    @property
    def feasible(self):
        return self.status == OPTIMAL


def _as_matrix(A):
    M = A.A if hasattr(A, "A") else np.asarray(A, dtype=float)
    if M.shape != (6, 8):
        raise ValueError("expected a 6x8 structure matrix")
    return M


def _dual_active_set(A, b, lo, hi):
    """min 1/2||x||^2 s.t. A x = b, lo <= x_i <= hi. Returns (x, status, iters).

    Normals of active constraints are kept as columns of N; x is always the
    minimum-norm point satisfying the active set exactly (via QR of N).
    """
    n = 8
    x = np.zeros(n)
    N = np.zeros((n, 0))
    u = np.zeros(0)           # multipliers, aligned with columns of N
    is_eq = np.zeros(0, dtype=bool)
    iters = 0

    def refresh_qr():
        if N.shape[1] == 0:
            return None, None
        return np.linalg.qr(N)

    Q, R = refresh_qr()

    def directions(nplus):
        if N.shape[1] == 0:
            return nplus.copy(), np.zeros(0)
        qn = Q.T @ nplus
        z = nplus - Q @ qn
        # R is upper triangular and small; solve directly
        r = np.linalg.solve(R, qn)
        return z, r

    def add_constraint(nplus, bplus, eq):
        nonlocal x, N, u, is_eq, Q, R, iters
        s = float(nplus @ x - bplus)
        if eq and s > 0.0:
            nplus = -nplus
            bplus = -bplus
            s = -s
        uplus = 0.0
        while True:
            iters += 1
            if iters > _MAX_ITER:
                raise NumericalFailure(
                    "tension solve exceeded iteration cap",
                    condition=float(np.linalg.cond(A)),
                )
            z, r = directions(nplus)
            zz = float(z @ z)
            if zz > _DEP_TOL:
                t2 = -s / zz
            elif eq and abs(s) <= _FEAS_TOL:
                return True      # dependent but consistent equality: skip
            else:
                t2 = np.inf
            t1 = np.inf
            k1 = -1
            for j in range(N.shape[1]):
                if not is_eq[j] and r[j] > _DEP_TOL:
                    cand = u[j] / r[j]
                    if cand < t1:
                        t1 = cand
                        k1 = j
            t = min(t1, t2)
            if not np.isfinite(t):
                return False     # no step renders it feasible
            if t2 < np.inf:
                x = x + t * z
            if N.shape[1]:
                u -= t * r
            uplus += t
            if t == t2:
                N = np.hstack([N, nplus[:, None]])
                u = np.append(u, uplus)
                is_eq = np.append(is_eq, eq)
                Q, R = refresh_qr()
                return True
            # blocking constraint: drop it and retry
            N = np.delete(N, k1, axis=1)
            u = np.delete(u, k1)
            is_eq = np.delete(is_eq, k1)
            Q, R = refresh_qr()
            s = float(nplus @ x - bplus)

    # equality rows first, normalized; zero rows are consistency checks only
    row_scale = max(1.0, float(np.abs(A).max()))
    b_scale = max(1.0, float(np.abs(b).max()))
    for k in range(6):
        row = A[k]
        nrm = float(np.linalg.norm(row))
        if nrm <= 1e-13 * row_scale:
            if abs(b[k]) > _FEAS_TOL * b_scale:
                return x, INFEASIBLE, iters
            continue
        if not add_constraint(row / nrm, b[k] / nrm, True):
            return x, INFEASIBLE, iters

    # bounds
    ident = np.eye(n)
    while True:
        s_lo = x - lo
        s_hi = hi - x
        worst = np.concatenate([s_lo, s_hi])
        j = int(np.argmin(worst))
        if worst[j] >= -_FEAS_TOL:
            return x, OPTIMAL, iters
        if j < n:
            ok = add_constraint(ident[j], lo, False)
        else:
            ok = add_constraint(-ident[j - n], -hi, False)
        if not ok:
            return x, INFEASIBLE, iters


def _polish(A, w, tmin, tmax, t):
    """Re-solve the free variables exactly for the bound pattern of t.

    Falls back to the unpolished vector whenever the re-solve does not keep
    the equality residual at least as small.
    """
    mid = 0.5 * (tmin + tmax)
    snap = 1e-7 * (tmax - tmin)
    at_lo = t <= tmin + snap
    at_hi = t >= tmax - snap
    free = ~(at_lo | at_hi)
    out = np.where(at_lo, tmin, np.where(at_hi, tmax, 0.0))
    if free.any():
        Af = A[:, free]
        rhs = w - A @ np.where(free, 0.0, out)
        # minimum-norm deviation from mid over the free set
        sol, *_ = np.linalg.lstsq(Af, rhs - Af @ np.full(int(free.sum()), mid), rcond=None)
        tf = mid + sol
        if np.any(tf < tmin - snap) or np.any(tf > tmax + snap):
            return t
        out[free] = np.clip(tf, tmin, tmax)
    old_res = float(np.abs(A @ t - w).max())
    new_res = float(np.abs(A @ out - w).max())
    return out if new_res <= max(old_res, 1e-12) else t


def solve_tensions(A, w, bounds):
    """Distribute a wrench over the 8 strings.

    Returns a TensionSolveReport; status INFEASIBLE means no bounded tension
    vector reproduces w (the wrench exceeds the rig's capability at this pose).
    """
    M = _as_matrix(A)
    w = np.asarray(w, dtype=float).reshape(6)
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(w))):
        raise NumericalFailure("non-finite structure matrix or wrench")
    tmin, tmax = float(bounds[0]), float(bounds[1])
    if not 0.0 < tmin < tmax:
        raise ValueError("require 0 < tension_min < tension_max")
    mid = 0.5 * (tmin + tmax)
    half = 0.5 * (tmax - tmin)

    b = w - M @ np.full(8, mid)

    # fast path: the minimum-norm equality solution needs no active-set work
    # when it already respects the bounds (KKT holds with no active bounds)
    try:
        y = np.linalg.solve(M @ M.T, b)
        x_eq = M.T @ y
    except np.linalg.LinAlgError:
        x_eq = None
    if (x_eq is not None
            and float(np.abs(M @ x_eq - b).max()) <= 1e-9 * max(1.0, float(np.abs(b).max()))
            and float(np.abs(x_eq).max()) <= half):
        t = mid + x_eq
        residual = float(np.abs(M @ t - w).max())
        return TensionSolveReport(
            tensions=t,
            residual_norm=residual,
            objective=float(x_eq @ x_eq),
            status=OPTIMAL,
            iterations=0,
        )

    x, status, iters = _dual_active_set(M, b, -half, half)
    if status == INFEASIBLE:
        return TensionSolveReport(
            tensions=np.full(8, np.nan),
            residual_norm=float("inf"),
            objective=float("inf"),
            status=INFEASIBLE,
            iterations=iters,
        )
    t = _polish(M, w, tmin, tmax, mid + x)
    residual = float(np.abs(M @ t - w).max())
    if residual > 1e-7 * max(1.0, float(np.abs(w).max())):
        raise NumericalFailure(
            f"tension solve residual {residual:.3e} out of tolerance",
            condition=float(np.linalg.cond(M)),
        )
    objective = float(np.sum((t - mid) ** 2))
    return TensionSolveReport(
        tensions=t,
        residual_norm=residual,
        objective=objective,
        status=OPTIMAL,
        iterations=iters,
    )


def pretension(A, bounds):
    """Taut-at-rest solve: tensions for zero wrench. INFEASIBLE means the pose
    has lost wrench closure."""
    return solve_tensions(A, np.zeros(6), bounds)


def wrench_capability(A, bounds, direction):
    """Largest s such that s * direction is a feasible wrench, via one LP.

    direction must be a unit 6-vector. Returns 0.0 when even the zero wrench
    is infeasible (no pretension exists).
    """
    M = _as_matrix(A)
    d = np.asarray(direction, dtype=float).reshape(6)
    nrm = np.linalg.norm(d)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("direction must have unit norm")
    tmin, tmax = float(bounds[0]), float(bounds[1])
    c = np.zeros(9)
    c[8] = -1.0
    A_eq = np.hstack([M, -d[:, None]])
    b_eq = np.zeros(6)
    res = linprog(
        c,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(tmin, tmax)] * 8 + [(0.0, None)],
        method="highs",
    )
    if res.status == 2:       # infeasible: not even pretension exists
        return 0.0
    if res.status != 0:
        raise NumericalFailure(f"capability LP failed: {res.message}")
    return float(res.x[8])
