from .frames import FrameLog, HapticFrame
from .loop import (
    ConstantPoseSource,
    HapticLoop,
    LoopParams,
    MailboxPoseSource,
    RunResult,
    ScriptedPoseSource,
    run_scenario,
)
from .protocol import (
    CommandPacket,
    StatePacket,
    encode_command,
    encode_state,
    parse_command,
    parse_packet,
    parse_state,
)
from .scenario import (
    ScenarioScript,
    descent_script,
    half_slip_script,
    load_script,
    seam_follow_script,
)
from .service import HapticService, ServiceConfig, serve

__all__ = [
    "FrameLog", "HapticFrame", "HapticLoop", "LoopParams", "RunResult",
    "run_scenario", "ScriptedPoseSource", "ConstantPoseSource",
    "MailboxPoseSource", "CommandPacket", "StatePacket", "encode_command",
    "encode_state", "parse_command", "parse_state", "parse_packet",
    "ScenarioScript", "load_script", "seam_follow_script", "half_slip_script",
    "descent_script", "HapticService", "ServiceConfig", "serve",
]
