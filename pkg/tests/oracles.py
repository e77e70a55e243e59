"""Independent oracles used across the test suite.

These deliberately avoid the library's own solution paths: the tension oracle
enumerates every bound-activity pattern; the capability oracle bisects on
solver feasibility; mesh oracles brute-force all triangles (see test_mesh).
"""

import numpy as np

from shwsim.tension import solve_tensions


def qp_enumeration_oracle(A, w, tmin, tmax, feas_tol=1e-8):
    """Global optimum of min ||t - mid||^2 s.t. A t = w, bounds, by enumerating
    all 3^8 free/at-min/at-max patterns and keeping primal-feasible candidates.

    Every feasible candidate's objective is >= the optimum and the optimum's
    own pattern always yields it, so the minimum over feasible candidates is
    exact. Returns (objective, t) or None when no pattern is feasible.
    """
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    mid = 0.5 * (tmin + tmax)
    n = 8
    best_obj = None
    best_t = None
    for free_bits in range(2 ** n):
        free = np.array([(free_bits >> i) & 1 for i in range(n)], dtype=bool)
        k = int((~free).sum())
        fixed_idx = np.where(~free)[0]
        # all min/max assignments of the fixed variables
        if k:
            combos = np.array(
                [[(c >> j) & 1 for j in range(k)] for c in range(2 ** k)],
                dtype=float,
            )
            V = np.where(combos > 0.5, tmax, tmin)        # (2^k, k)
            rhs = w[None, :] - V @ A[:, fixed_idx].T      # (2^k, 6)
        else:
            V = np.zeros((1, 0))
            rhs = w[None, :]
        if free.any():
            Af = A[:, free]
            pinv = np.linalg.pinv(Af)
            base = Af @ np.full(int(free.sum()), mid)
            Tf = mid + (rhs - base[None, :]) @ pinv.T     # (2^k, f)
            ok = np.abs(Tf @ Af.T - rhs).max(axis=1) <= feas_tol
            ok &= (Tf >= tmin - feas_tol).all(axis=1)
            ok &= (Tf <= tmax + feas_tol).all(axis=1)
            if not ok.any():
                continue
            obj = ((Tf - mid) ** 2).sum(axis=1) + ((V - mid) ** 2).sum(axis=1)
            obj = np.where(ok, obj, np.inf)
            j = int(np.argmin(obj))
            if best_obj is None or obj[j] < best_obj:
                best_obj = float(obj[j])
                t = np.empty(n)
                t[free] = Tf[j]
                t[~free] = V[j]
                best_t = t
        else:
            ok = np.abs(rhs).max(axis=1) <= feas_tol
            if not ok.any():
                continue
            obj = ((V - mid) ** 2).sum(axis=1)
            obj = np.where(ok, obj, np.inf)
            j = int(np.argmin(obj))
            if best_obj is None or obj[j] < best_obj:
                best_obj = float(obj[j])
                t = np.empty(n)
                t[~free] = V[j]
                best_t = t
    if best_obj is None:
        return None
    return best_obj, best_t


def capability_bisection_oracle(A, bounds, direction, rel_tol=1e-5, s_max=1e4):
    """Capability along a unit direction by bisecting solver feasibility."""
    d = np.asarray(direction, dtype=float)

    def feasible(s):
        return solve_tensions(A, s * d, bounds).feasible

    if not feasible(0.0):
        return 0.0
    hi = 1.0
    grow = 0
    while feasible(hi):
        hi *= 2.0
        grow += 1
        if hi > s_max:
            return hi
    lo = 0.0 if grow == 0 else hi / 2.0
    while hi - lo > rel_tol * max(1.0, hi):
        midpoint = 0.5 * (lo + hi)
        if feasible(midpoint):
            lo = midpoint
        else:
            hi = midpoint
    return lo
