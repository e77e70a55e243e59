"""Service/replay configuration files (JSON).

Schema:
{
  "rig": "rig_default.json" | null,        # null -> shipped default rig
  "scene": "scene_car.json",
  "dt": [1, 1000],                         # rational seconds per tick
  "udp_port": 47500, "ws_port": 47501,
  "http_port": 0, "http_root": "",
  "host": "127.0.0.1",
  "publish_interval_ms": 16,
  "start_pose": {"position": [x,y,z], "quaternion": [w,x,y,z]}
}
Relative paths resolve against the config file's directory.
"""

import json
import os
from fractions import Fraction
from importlib import resources

from .errors import ParseError
from .rig import GripPose, default_rig, load_rig
from .scene import check_prop_circle_ratio, load_scene


def data_path(name):
    """Path of a bundled data file."""
    return str(resources.files("shwsim").joinpath("data", name))


def load_service_config(path):
    from .hapticd.service import ServiceConfig

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid config: {e}") from e
    try:
        rig_ref = doc.get("rig")
        rig = load_rig(resolve(rig_ref)) if rig_ref else default_rig()
        scene = load_scene(resolve(doc["scene"]))
        check_prop_circle_ratio(rig, scene)
        dt_doc = doc.get("dt", [1, 1000])
        dt = Fraction(int(dt_doc[0]), int(dt_doc[1]))
        pose_doc = doc.get("start_pose")
        if pose_doc:
            start_pose = GripPose(pose_doc["position"],
                                  pose_doc.get("quaternion", [1, 0, 0, 0]))
        else:
            start_pose = GripPose.identity()
        return ServiceConfig(
            rig=rig,
            scene=scene,
            dt=dt,
            udp_port=int(doc.get("udp_port", 47500)),
            ws_port=int(doc.get("ws_port", 47501)),
            http_port=int(doc.get("http_port", 0)),
            http_root=resolve(doc["http_root"]) if doc.get("http_root") else "",
            host=str(doc.get("host", "127.0.0.1")),
            publish_interval=float(doc.get("publish_interval_ms", 16)) / 1e3,
            start_pose=start_pose,
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"{path}: invalid config: {e}") from e
