"""shwsim: a desk-scale simulator of an 8-string 6-dof haptic workbench.

Library layout mirrors the subsystems: rig geometry and statics (rig),
tension distribution (tension), pose estimation from string lengths
(kinematics), workspace analysis (workspace), the virtual scene with mesh
collision and the putty task (mesh, scene), and the 1 kHz control loop plus
its frame-stream service (hapticd).
"""

from .kinematics import estimate_pose
from .rig import (
    GripPose,
    RigConfig,
    StructureMatrix,
    build_structure_matrix,
    default_rig,
    load_rig,
    save_rig,
    string_lengths,
)
from .tension import (
    INFEASIBLE,
    OPTIMAL,
    TensionSolveReport,
    pretension,
    solve_tensions,
    wrench_capability,
)
from .workspace import GridSpec, WorkspaceReport, analyze_workspace, diameter_sweep

__version__ = "0.1.0"

__all__ = [
    "GripPose",
    "RigConfig",
    "StructureMatrix",
    "build_structure_matrix",
    "default_rig",
    "load_rig",
    "save_rig",
    "string_lengths",
    "TensionSolveReport",
    "solve_tensions",
    "pretension",
    "wrench_capability",
    "OPTIMAL",
    "INFEASIBLE",
    "estimate_pose",
    "GridSpec",
    "WorkspaceReport",
    "analyze_workspace",
    "diameter_sweep",
]
