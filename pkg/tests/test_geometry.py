import math

import numpy as np
import pytest
from dataclasses import replace

from rismimo.config import ScenarioConfig
from rismimo.errors import DegenerateGeometryError, InvalidDimensionError
from rismimo.geometry import (
    SPEED_OF_LIGHT,
    build_array,
    half_wavelength,
    pairwise_distances,
    place_topology,
)

ORIGIN = np.zeros(3)


def test_single_element_at_origin():
    arr = build_array(1, 1, 0.005, ORIGIN, 0.0)
    assert arr.count == 1
    np.testing.assert_array_equal(arr.elements[0], ORIGIN)
    np.testing.assert_array_equal(arr.mid_point, ORIGIN)


def test_two_element_array_at_28ghz():
    # half wavelength computed from c = 299792458 m/s, not quoted
    half = half_wavelength(28e9)
    assert half == SPEED_OF_LIGHT / 28e9 / 2
    assert abs(half - 0.00535343675) < 1e-12
    arr = build_array(1, 2, half, ORIGIN, 0.0)
    ys = np.sort(arr.elements[:, 1])
    np.testing.assert_allclose(ys, [-half / 2, half / 2], atol=1e-15)
    assert abs(half / 2 - 0.002676718375) < 1e-12
    assert np.all(arr.elements[:, [0, 2]] == 0.0)


def test_rotation_preserves_pairwise_distances():
    flat = build_array(2, 2, 1.0, ORIGIN, 0.0)
    rot = build_array(2, 2, 1.0, ORIGIN, math.pi / 2)
    # the local-y offsets land on the x-axis after a quarter turn
    assert np.max(np.abs(rot.elements[:, 1])) < 1e-12
    assert np.max(np.abs(rot.elements[:, 0])) == pytest.approx(0.5)

    def dist_set(arr):
        d = pairwise_distances(arr, arr)
        return np.sort(d[np.triu_indices(4, k=1)])

    np.testing.assert_allclose(dist_set(flat), dist_set(rot), atol=1e-12)
    np.testing.assert_allclose(dist_set(flat), [1, 1, 1, 1, math.sqrt(2), math.sqrt(2)], atol=1e-12)


def test_array_invariants():
    arr = build_array(3, 5, 0.02, np.array([1.0, -2.0, 0.5]), 0.7)
    assert arr.count == 15 == arr.rows * arr.cols
    np.testing.assert_allclose(arr.mid_point, arr.elements.mean(axis=0), atol=1e-12)
    # adjacent elements along each local axis are exactly `spacing` apart
    grid = arr.elements.reshape(3, 5, 3)
    along_y = np.linalg.norm(np.diff(grid, axis=1), axis=2)
    along_z = np.linalg.norm(np.diff(grid, axis=0), axis=2)
    np.testing.assert_allclose(along_y, 0.02, atol=1e-12)
    np.testing.assert_allclose(along_z, 0.02, atol=1e-12)


def test_invalid_dimensions():
    with pytest.raises(InvalidDimensionError):
        build_array(0, 4, 0.01, ORIGIN)
    with pytest.raises(InvalidDimensionError):
        build_array(4, 0, 0.01, ORIGIN)
    with pytest.raises(InvalidDimensionError):
        build_array(1, 1, 0.0, ORIGIN)


def test_paraxial_placement():
    cfg = ScenarioConfig(
        d_f=3.0, d_b=3.0, theta_f=0.0, theta_b=math.pi, psi_f=0.0, psi_b=0.0,
        tx_dims=(1, 4), ris_dims=(1, 8), rx_dims=(1, 4),
    )
    tx, ris, rx = place_topology(cfg)
    np.testing.assert_array_equal(ris.mid_point, ORIGIN)
    assert np.max(np.abs(ris.elements[:, 0])) == 0.0  # parallel to the yz-plane
    assert np.linalg.norm(tx.mid_point) == pytest.approx(3.0, abs=0)
    assert np.linalg.norm(rx.mid_point) == pytest.approx(3.0, abs=1e-12)
    assert tx.mid_point[0] > 0 and rx.mid_point[0] < 0  # opposite sides
    assert abs(tx.mid_point[1]) < 1e-12 and abs(rx.mid_point[1]) < 1e-12


def test_placement_distance_exact():
    cfg = ScenarioConfig(d_f=1.0, theta_f=0.0, tx_dims=(1, 2), ris_dims=(1, 2), rx_dims=(1, 2))
    tx, _, _ = place_topology(cfg)
    assert np.linalg.norm(tx.mid_point) == 1.0


def test_placement_angle_recovered():
    cfg = ScenarioConfig(d_f=2.0, theta_f=math.pi / 4, tx_dims=(1, 2), ris_dims=(1, 2), rx_dims=(1, 2))
    tx, _, _ = place_topology(cfg)
    v = tx.mid_point
    angle = math.atan2(v[1], v[0])  # angle from the +x RIS normal
    assert abs(angle - math.pi / 4) < 1e-12
    assert np.linalg.norm(v) == pytest.approx(2.0, abs=1e-12)


def test_psi_zero_keeps_panels_parallel():
    cfg = ScenarioConfig(d_f=2.0, d_b=2.0, psi_f=0.0, psi_b=0.0,
                         tx_dims=(2, 2), ris_dims=(2, 2), rx_dims=(2, 2))
    tx, ris, rx = place_topology(cfg)
    for arr in (tx, ris, rx):
        # each panel spans only y/z around its mid-point
        offsets = arr.elements - arr.mid_point
        assert np.max(np.abs(offsets[:, 0])) < 1e-12


def test_pairwise_two_points():
    a = build_array(1, 1, 1.0, ORIGIN)
    b = build_array(1, 1, 1.0, np.array([0.0, 3.0, 0.0]))
    np.testing.assert_array_equal(pairwise_distances(a, b), [[3.0]])


def test_pairwise_self_distance_zero_then_channel_rejects():
    from rismimo.channel import los_channel

    a = build_array(1, 3, 0.5, ORIGIN)
    d = pairwise_distances(a, a)
    assert np.all(np.diag(d) == 0.0)
    with pytest.raises(DegenerateGeometryError):
        los_channel(d, 2 * math.pi)


def test_pairwise_broadside_pythagoras():
    s, r = 0.4, 2.5
    a = build_array(1, 2, s, ORIGIN)
    b = build_array(1, 1, 1.0, np.array([r, 0.0, 0.0]))
    expected = math.sqrt(r * r + (s / 2) ** 2)
    np.testing.assert_allclose(pairwise_distances(a, b), [[expected, expected]], atol=1e-12)


def _rigid_transform(arr, rot, shift):
    return replace(
        arr,
        elements=arr.elements @ rot.T + shift,
        mid_point=rot @ arr.mid_point + shift,
    )


def test_rigid_motion_invariance():
    rng = np.random.default_rng(7)
    a = build_array(2, 3, 0.3, np.array([1.0, 0.0, 0.0]), 0.2)
    b = build_array(1, 4, 0.3, np.array([-2.0, 1.0, 0.0]), -0.5)
    base = pairwise_distances(a, b)
    for _ in range(5):
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        shift = rng.standard_normal(3)
        moved = pairwise_distances(_rigid_transform(a, q, shift), _rigid_transform(b, q, shift))
        np.testing.assert_allclose(moved, base, atol=1e-10)


def test_distance_symmetry_transpose():
    a = build_array(2, 2, 0.3, np.array([1.0, 0.5, 0.0]))
    b = build_array(1, 3, 0.4, np.array([-1.0, 0.0, 0.0]))
    np.testing.assert_array_equal(pairwise_distances(a, b), pairwise_distances(b, a).T)


def test_paraxial_mirror_distance_matrices():
    cfg = ScenarioConfig(d_f=4.0, d_b=4.0, theta_f=0.0, theta_b=math.pi,
                         tx_dims=(1, 6), ris_dims=(1, 16), rx_dims=(1, 6))
    tx, ris, rx = place_topology(cfg)
    d_f = pairwise_distances(tx, ris)  # K x N
    d_b = pairwise_distances(ris, rx)  # M x K
    np.testing.assert_allclose(d_f, d_b.T, atol=1e-10)
