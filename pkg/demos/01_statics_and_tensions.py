"""Rig statics walkthrough: the structure matrix, pretension, and how a
desired wrench turns into 8 bounded string tensions.

Run:  python3 demos/01_statics_and_tensions.py
"""

import numpy as np

from shwsim import (
    GripPose,
    build_structure_matrix,
    default_rig,
    pretension,
    solve_tensions,
    string_lengths,
    wrench_capability,
)

rig = default_rig()
print("default rig: motors at the corners of a "
      f"{rig.motor_positions.max(0) - rig.motor_positions.min(0)} m box, "
      f"attachment circle {rig.circle_diameter * 100:.0f} cm, "
      f"tensions in [{rig.tension_min}, {rig.tension_max}] N\n")

# At the centered identity pose the geometry is symmetric: the two strings of
# each attachment point have exactly equal lengths.
center = GripPose.identity()
lengths = string_lengths(rig, center)
print("string lengths at center [m]:", np.round(lengths, 4))

S = build_structure_matrix(rig, center)
print("\nstructure matrix (6x8), columns = [string direction; lever x direction]:")
print(np.round(S.A, 3))
sv = np.linalg.svd(S.A, compute_uv=False)
print(f"rank {np.sum(sv > 1e-9)}, condition number {sv[0] / sv[-1]:.1f}")

# Equal tensions cancel exactly at the center: the pretension solve returns
# the bound midpoint on every string.
rep = pretension(S, rig.tension_bounds)
print(f"\npretension: {rep.status}, tensions {np.round(rep.tensions, 3)} N")

# Ask the rig to push the grip along +x with 5 N while twisting 0.2 N*m
# about z. Strings can only pull, so the solver balances all 8 tensions.
w = np.array([5.0, 0.0, 0.0, 0.0, 0.0, 0.2])
rep = solve_tensions(S, w, rig.tension_bounds)
print(f"\nwrench {w} ->")
print(f"  status {rep.status}, residual {rep.residual_norm:.1e} N, "
      f"iterations {rep.iterations}")
print(f"  tensions {np.round(rep.tensions, 3)} N")
print(f"  check A @ t = {np.round(S.A @ rep.tensions, 6)}")

# Capability: the largest feasible magnitude along each axis.
print("\nper-axis capability at the center pose:")
for name, axis in [("force +x", 0), ("force +z", 2), ("torque +z", 5)]:
    d = np.zeros(6)
    d[axis] = 1.0
    cap = wrench_capability(S, rig.tension_bounds, d)
    unit = "N" if axis < 3 else "N*m"
    print(f"  {name}: {cap:.2f} {unit}")

# Overdemand is reported, never silently scaled.
rep = solve_tensions(S, np.array([500.0, 0, 0, 0, 0, 0]), rig.tension_bounds)
print(f"\n500 N along +x -> {rep.status}")
