import numpy as np
import pytest

from shwsim.errors import ParseError
from shwsim.scene import (
    PuttyBead,
    PuttyTrail,
    SeamPath,
    extrude_putty,
    load_seam,
    save_seam,
    seam_metrics,
)


def straight_bead(length=0.1, spacing=0.002, y=0.0, z=0.0):
    bead = PuttyBead(min_spacing=spacing)
    for x in np.arange(0.0, length + spacing / 2, spacing):
        bead.add_sample([x, y, z], x)
    return bead


def test_straight_path_sample_count_and_arc_length():
    bead = straight_bead(length=0.1, spacing=0.002)
    assert len(bead.samples) == 51
    assert bead.arc_length == pytest.approx(0.1, abs=1e-9)


def test_trigger_never_pressed_keeps_bead_empty():
    trail = PuttyTrail()
    for i in range(100):
        trail.update([i * 0.001, 0, 0], i * 0.001, trigger=False)
    assert trail.total_samples == 0
    assert trail.beads == []


def test_quarter_circle_tube_length():
    r = 0.05
    trail = PuttyTrail(min_spacing=0.002)
    # drive along the arc in steps well under the sample spacing
    thetas = np.linspace(0, np.pi / 2, 2000)
    for theta in thetas:
        trail.update([r * np.cos(theta), r * np.sin(theta), 0.0], theta, True)
    trail.update([r * np.cos(thetas[-1]), r * np.sin(thetas[-1]), 0.0],
                 float(thetas[-1]), False)   # release captures the endpoint
    arc = np.pi * r / 2
    assert trail.beads[0].arc_length == pytest.approx(arc, rel=0.005)


def test_min_spacing_respected():
    bead = PuttyBead(min_spacing=0.002)
    assert bead.add_sample([0, 0, 0], 0.0)
    assert not bead.add_sample([0.0005, 0, 0], 0.001)
    assert bead.add_sample([0.0021, 0, 0], 0.002)


def test_release_closes_and_new_press_starts_new_bead():
    trail = PuttyTrail()
    trail.update([0.0, 0, 0], 0.0, True)
    trail.update([0.01, 0, 0], 0.1, True)
    trail.update([0.02, 0, 0], 0.2, False)
    assert len(trail.beads) == 1 and trail.beads[0].closed
    trail.update([0.05, 0, 0], 0.3, True)
    assert len(trail.beads) == 2
    assert len(trail.beads[1].samples) == 1


def test_extrude_putty_single_bead_semantics():
    bead = PuttyBead()
    bead, added = extrude_putty(bead, [0, 0, 0], 0.0, True)
    assert added
    bead, added = extrude_putty(bead, [0.01, 0, 0], 0.1, True)
    assert added
    bead2, _ = extrude_putty(bead, [0.02, 0, 0], 0.2, False)
    assert bead2.closed
    bead3, added = extrude_putty(bead2, [0.05, 0, 0], 0.3, True)
    assert added and bead3 is not bead2 and len(bead3.samples) == 1


def test_tube_mesh_vertex_count_invariant():
    bead = straight_bead(length=0.05)
    verts, tris = bead.tube_mesh()
    assert len(verts) == bead.ring_segments * len(bead.samples)
    assert len(tris) == 2 * bead.ring_segments * (len(bead.samples) - 1)
    # ring radius holds
    d = np.linalg.norm(verts[:8] - np.array([0.0, 0, 0]), axis=1)
    assert np.allclose(d, bead.radius, atol=1e-12)


def seam_line(y=0.0, z=0.0, length=0.1):
    return SeamPath(points=np.array([[0.0, y, z], [length, y, z]]),
                    slip_tolerance=0.005)


def test_bead_identical_to_seam():
    seam = seam_line()
    bead = straight_bead(length=0.1)
    coverage, max_dev, slips = seam_metrics(bead, seam)
    assert coverage == 1.0
    assert max_dev < 1e-12
    assert slips == 0


def test_bead_offset_double_tolerance():
    seam = seam_line()
    bead = straight_bead(length=0.1, y=0.010)   # 2x the 5 mm tolerance
    coverage, max_dev, slips = seam_metrics(bead, seam)
    assert coverage == 0.0
    assert max_dev == pytest.approx(0.010, abs=1e-12)
    assert slips == 1


def test_half_on_half_off():
    seam = seam_line(length=0.2)
    bead = PuttyBead(min_spacing=0.002)
    for x in np.arange(0.0, 0.1, 0.002):
        bead.add_sample([x, 0.0, 0.0], x)
    for x in np.arange(0.1, 0.2 + 1e-9, 0.002):
        bead.add_sample([x, 0.015, 0.0], x)   # 3x tolerance off
    coverage, _, slips = seam_metrics(bead, seam)
    assert coverage == pytest.approx(0.5, abs=0.02)
    assert slips == 1


def test_metrics_invariant_under_bead_resampling():
    seam = seam_line()
    coarse = straight_bead(length=0.1, spacing=0.0025)
    fine = straight_bead(length=0.1, spacing=0.00125)
    c1, _, s1 = seam_metrics(coarse, seam)
    c2, _, s2 = seam_metrics(fine, seam)
    assert c1 == c2 == 1.0
    assert s1 == s2 == 0
    off_coarse = straight_bead(length=0.1, spacing=0.0025, y=0.010)
    off_fine = straight_bead(length=0.1, spacing=0.00125, y=0.010)
    c1, _, s1 = seam_metrics(off_coarse, seam)
    c2, _, s2 = seam_metrics(off_fine, seam)
    assert c1 == c2 == 0.0
    assert s1 == s2 == 1


def test_empty_bead_metrics():
    seam = seam_line()
    coverage, max_dev, slips = seam_metrics(PuttyBead(), seam)
    assert coverage == 0.0 and max_dev == 0.0 and slips == 0


def test_seam_validation():
    with pytest.raises(ValueError):
        SeamPath(points=np.array([[0, 0, 0]]))
    with pytest.raises(ValueError):
        SeamPath(points=np.array([[0, 0, 0], [0, 0, 0]]))


def test_seam_file_round_trip(tmp_path):
    seam = SeamPath(points=np.array([[0, 0, 0], [0.05, 0.01, 0.0], [0.1, 0, 0]]))
    path = tmp_path / "seam.txt"
    save_seam(seam, path)
    loaded = load_seam(path)
    assert np.allclose(loaded.points, seam.points, atol=1e-6)


def test_seam_file_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0.0 0.0\n")
    with pytest.raises(ParseError):
        load_seam(path)
    path.write_text("0 0 0\n")
    with pytest.raises(ParseError):
        load_seam(path)
    path.write_text("a b c\n0 0 0\n")
    with pytest.raises(ParseError):
        load_seam(path)
