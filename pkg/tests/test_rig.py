import numpy as np
import pytest

from shwsim import quat
from shwsim.errors import DegenerateString, ParseError
from shwsim.rig import (
    GripPose,
    RigConfig,
    StructureMatrix,
    build_structure_matrix,
    default_rig,
    load_rig,
    save_rig,
    string_lengths,
)


def random_pose(rng, pos_scale=0.2, rot_scale=0.4):
    return GripPose(rng.uniform(-pos_scale, pos_scale, 3),
                    quat.from_rotvec(rng.uniform(-rot_scale, rot_scale, 3)))


def test_center_pose_symmetric_lengths():
    rig = default_rig()
    lengths = string_lengths(rig, GripPose.identity())
    # the two strings of each attachment point are mirror images: exact equality
    for j in range(4):
        assert lengths[j] == lengths[j + 4]


def test_zero_diameter_lengths_are_motor_distances():
    rig = default_rig(circle_diameter=0.0)
    p = np.array([0.05, -0.02, 0.1])
    lengths = string_lengths(rig, GripPose(p))
    for i, (m, _) in enumerate(rig.string_pairing):
        assert lengths[i] == pytest.approx(
            np.linalg.norm(rig.motor_positions[m] - p), abs=0)


def test_lengths_match_direct_recomputation():
    rig = default_rig()
    rng = np.random.default_rng(7)
    for _ in range(25):
        pose = random_pose(rng)
        lengths = string_lengths(rig, pose)
        R = pose.rotation_matrix()
        for i, (m, a) in enumerate(rig.string_pairing):
            attach = pose.position + R @ rig.attachment_offsets[a]
            expect = np.linalg.norm(rig.motor_positions[m] - attach)
            assert abs(lengths[i] - expect) < 1e-12


def test_degenerate_string_raises():
    rig = default_rig()
    # place attachment point 0 exactly on its motor
    pos = rig.motor_positions[0] - rig.attachment_offsets[0]
    with pytest.raises(DegenerateString):
        string_lengths(rig, GripPose(pos))


def test_zero_diameter_structure_matrix_torque_rows_zero():
    rig = default_rig(circle_diameter=0.0)
    S = build_structure_matrix(rig, GripPose(np.array([0.1, 0.0, -0.05])))
    assert np.all(S.A[3:] == 0.0)


def test_symmetric_rig_equal_tensions_zero_wrench():
    rig = default_rig()
    S = build_structure_matrix(rig, GripPose.identity())
    w = S.A @ np.full(8, 3.7)
    assert np.abs(w).max() < 1e-12


def test_top_rows_are_negative_length_gradient():
    rig = default_rig()
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(20):
        pose = random_pose(rng)
        S = build_structure_matrix(rig, pose)
        grad = np.empty((3, 8))
        for k in range(3):
            dp = np.zeros(3)
            dp[k] = h
            lp = string_lengths(rig, GripPose(pose.position + dp, pose.orientation))
            lm = string_lengths(rig, GripPose(pose.position - dp, pose.orientation))
            grad[k] = (lp - lm) / (2 * h)
        assert np.allclose(S.A[:3], -grad, rtol=1e-5, atol=1e-7)


def test_frame_covariance_under_translation():
    rig = default_rig()
    rng = np.random.default_rng(13)
    pose = random_pose(rng)
    S1 = build_structure_matrix(rig, pose)
    shift = np.array([0.31, -0.12, 0.55])
    shifted = RigConfig(
        motor_positions=rig.motor_positions + shift,
        circle_diameter=rig.circle_diameter,
        string_pairing=rig.string_pairing,
        tension_min=rig.tension_min,
        tension_max=rig.tension_max,
    )
    S2 = build_structure_matrix(shifted, GripPose(pose.position + shift, pose.orientation))
    assert np.abs(S1.A - S2.A).max() < 1e-12


def test_rank_six_over_central_volume_and_diameters():
    rng = np.random.default_rng(17)
    for d in (0.10, 0.20, 0.30):
        rig = default_rig(circle_diameter=d)
        for _ in range(20):
            # central 50% of the motor box volume
            pose = GripPose(rng.uniform(-1, 1, 3) * np.array([0.35, 0.2, 0.25]) * 0.5,
                            quat.from_rotvec(rng.uniform(-0.2, 0.2, 3)))
            sv = np.linalg.svd(build_structure_matrix(rig, pose).A, compute_uv=False)
            assert sv[-1] > 1e-6


def test_zero_diameter_rank_at_most_three():
    rig = default_rig(circle_diameter=0.0)
    sv = np.linalg.svd(build_structure_matrix(rig, GripPose.identity()).A,
                       compute_uv=False)
    assert np.sum(sv > 1e-12) <= 3


def test_structure_matrix_validates_unit_columns():
    A = np.zeros((6, 8))
    with pytest.raises(ValueError):
        StructureMatrix(A=A)


def test_config_validation():
    rig = default_rig()
    with pytest.raises(ValueError):
        RigConfig(motor_positions=rig.motor_positions[:7])
    with pytest.raises(ValueError):
        RigConfig(motor_positions=rig.motor_positions,
                  string_pairing=tuple((0, i % 4) for i in range(8)))
    with pytest.raises(ValueError):
        RigConfig(motor_positions=rig.motor_positions,
                  string_pairing=tuple((i, 0) for i in range(8)))
    with pytest.raises(ValueError):
        RigConfig(motor_positions=rig.motor_positions, tension_min=0.0)
    flat = rig.motor_positions.copy()
    flat[:, 2] = 0.0
    with pytest.raises(ValueError):
        RigConfig(motor_positions=flat)


def test_diameter_warning_outside_good_range():
    with pytest.warns(UserWarning):
        default_rig(circle_diameter=0.05)
    with pytest.warns(UserWarning):
        default_rig(circle_diameter=0.5)


def test_rig_file_round_trip(tmp_path):
    rig = default_rig(circle_diameter=0.24)
    path = tmp_path / "rig.json"
    save_rig(rig, path)
    loaded = load_rig(path)
    assert np.array_equal(loaded.motor_positions, rig.motor_positions)
    assert loaded.circle_diameter == rig.circle_diameter
    assert loaded.string_pairing == rig.string_pairing
    assert loaded.tension_bounds == rig.tension_bounds


def test_rig_file_parse_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("not json {")
    with pytest.raises(ParseError):
        load_rig(path)
    path.write_text('{"circle_diameter": 0.2}')
    with pytest.raises(ParseError):
        load_rig(path)
