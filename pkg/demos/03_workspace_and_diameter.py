"""Why the attachment circle matters: torque capability versus circle
diameter, and the usable workspace volume.

Run:  python3 demos/03_workspace_and_diameter.py
"""

import warnings

import numpy as np

from shwsim import GridSpec, analyze_workspace, default_rig, diameter_sweep

rig = default_rig()

# Sweep the circle diameter with everything else fixed. With no circle there
# is no lever arm at all: zero torque authority. Larger circles buy torque
# and better conditioning.
print("diameter sweep at the rig center:")
print("  diameter [m]   cond(A)     torque capability [N*m]")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")       # small diameters warn by design
    rows = diameter_sweep(rig, [0.0, 0.05, 0.10, 0.20, 0.30])
for r in rows:
    cond = r["condition_number"]
    cond_s = f"{cond:9.1f}" if np.isfinite(cond) else "      inf"
    print(f"    {r['diameter_m']:.2f}       {cond_s}        "
          f"{r['torque_capability_Nm']:.4f}")

# Workspace scan over the central volume: wrench closure (can the strings
# hold the grip against any small wrench?), conditioning, and worst-case
# capabilities per cell.
grid = GridSpec(bounds=((-0.3, 0.3), (-0.2, 0.2), (-0.2, 0.2)),
                resolution=(5, 5, 5))
report = analyze_workspace(rig, grid)
print(f"\nworkspace grid {grid.resolution}, "
      f"{report.closure.size} cells over the central 0.6 x 0.4 x 0.4 m:")
print(f"  wrench-closed fraction: {report.feasible_fraction:.2f}")
print(f"  force capability [N]: min {report.force_capability.min():.2f}, "
      f"max {report.force_capability.max():.2f}")
print(f"  torque capability [N*m]: min {report.torque_capability.min():.3f}, "
      f"max {report.torque_capability.max():.3f}")
print(f"  condition number: best {report.condition.min():.1f}, "
      f"worst {report.condition.max():.1f}")

report.to_csv("workspace_report.csv")
report.save_summary("workspace_summary.json")
print("\nwrote workspace_report.csv and workspace_summary.json")
