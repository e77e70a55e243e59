import numpy as np
import pytest

from shwsim import quat
from shwsim.errors import ScriptError
from shwsim.hapticd.scenario import (
    MODE_HOLD,
    ScenarioScript,
    descent_script,
    load_script,
    seam_follow_script,
)
from shwsim.scene import SeamPath

TIP = np.array([0.0, 0.0, -0.16])


def test_script_file_round_trip(tmp_path):
    script = descent_script(TIP, z_start=0.1, z_end=0.0)
    path = tmp_path / "s.txt"
    script.save(path)
    loaded = load_script(path)
    assert len(loaded) == len(script)
    assert np.array_equal(loaded.times, script.times)
    assert np.array_equal(loaded.positions, script.positions)
    assert loaded.mode == script.mode


def test_script_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("mode linear\n0.0 0 0 0 1 0 0 0 0\nnot a line\n")
    with pytest.raises(ScriptError) as e:
        load_script(path)
    assert e.value.line == 3
    path.write_text("0.5 0 0 0 1 0 0 0 0\n0.1 0 0 0 1 0 0 0 0\n")
    with pytest.raises(ScriptError) as e:
        load_script(path)
    assert e.value.line == 2
    path.write_text("0.0 0 0 0 0 0 0 0 1\n")   # zero quaternion
    with pytest.raises(ScriptError) as e:
        load_script(path)
    assert e.value.line == 1
    path.write_text("0.0 0 0 0 1 0 0 0 5\n")   # bad trigger
    with pytest.raises(ScriptError):
        load_script(path)


def test_linear_interpolation():
    script = ScenarioScript(
        [0.0, 1.0],
        [[0, 0, 0], [1.0, 0, 0]],
        [quat.IDENTITY, quat.from_rotvec([0, 0, 0.4])],
        [False, True],
    )
    pose, trig = script.sample(0.5)
    assert np.allclose(pose.position, [0.5, 0, 0])
    assert quat.angle_between(pose.orientation, quat.from_rotvec([0, 0, 0.2])) < 1e-3
    assert trig is False          # trigger holds from the left entry
    pose, trig = script.sample(2.0)
    assert np.allclose(pose.position, [1.0, 0, 0])
    assert trig is True


def test_hold_interpolation():
    script = ScenarioScript(
        [0.0, 1.0], [[0, 0, 0], [1.0, 0, 0]],
        [quat.IDENTITY, quat.IDENTITY], [False, True], mode=MODE_HOLD)
    pose, trig = script.sample(0.99)
    assert np.allclose(pose.position, [0, 0, 0])
    assert trig is False


def test_seam_follow_tip_tracks_seam():
    seam = SeamPath(points=np.array([[-0.1, 0.0, -0.05], [0.1, 0.0, -0.05]]))
    script = seam_follow_script(seam, TIP, hover=0.003, speed=0.1)
    R = np.eye(3)
    # during the traced portion, the implied tip is 3 mm above the seam
    mid_t = script.duration / 2
    pose, trig = script.sample(mid_t)
    tip = pose.position + R @ TIP
    assert trig is True
    assert tip[2] == pytest.approx(-0.05 + 0.003, abs=1e-9)
    assert abs(tip[1]) < 1e-9
    assert -0.1 <= tip[0] <= 0.1
