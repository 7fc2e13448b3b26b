import math

import numpy as np
import pytest

from billiardlab.actionangle import solve_rotation
from billiardlab.connect import (
    CONFIGS,
    DIRECTIONS,
    InsufficientRangeError,
    asymptotic_checks,
    critical_point_check,
    distance_to_boundary,
    find_connecting_orbits,
    path_length,
    point_inside,
    psi_gradient,
    resolve,
    stationarity_residual,
)
from billiardlab.geometry import RegimeError, line_lambda2

PAIRS = (((0.3, 1e-3), (0.31, 2e-3)), ((1.2, 2e-3), (1.18, 1e-3)), ((2.5, 5e-4), (2.52, 1.5e-3)))


@pytest.fixture(scope="module")
def solved(table):
    out = {}
    for j in (15, 20):
        for pair in PAIRS:
            x, y = (point_inside(phi, depth, table) for phi, depth in pair)
            out[j, pair] = (x, y, find_connecting_orbits(x, y, j, table))
    return out


def test_eight_tagged_orbits(solved):
    for x, y, orbits in solved.values():
        assert len(orbits) == 8
        tags = {(o.direction, o.config) for o in orbits}
        assert tags == {(d, c) for d in DIRECTIONS for c in CONFIGS}
        assert [o.branch_index for o in orbits] == list(range(1, 9))


def test_lengths_distinct_and_consistent(solved, table):
    for (j, _), (x, y, orbits) in solved.items():
        lengths = [o.length for o in orbits]
        assert len({round(v, 12) for v in lengths}) == 8
        for orbit in orbits:
            assert orbit.length == pytest.approx(path_length(orbit), rel=1e-14)
            assert len(orbit.impacts) == j
            assert abs(orbit.advance - table.ell) / table.ell < 0.01


def test_critical_points(solved, table):
    for x, y, orbits in solved.values():
        for orbit in orbits:
            assert critical_point_check(orbit, table) < 1e-10


def test_links_share_one_caustic(solved, table):
    for x, y, orbits in solved.values():
        for orbit in orbits:
            path = orbit.path()
            for p, q in zip(path, path[1:]):
                d = (q[0] - p[0], q[1] - p[1])
                assert line_lambda2(p, d, table) == pytest.approx(orbit.lam2, abs=1e-10)


def test_clockwise_orbits_mirror_counterclockwise(solved, table):
    x, y, orbits = solved[20, PAIRS[0]]
    mirrored = find_connecting_orbits((-x[0], x[1]), (-y[0], y[1]), 20, table)
    for k in range(4):
        assert orbits[k + 4].length == pytest.approx(mirrored[k].length, rel=1e-12)
        assert orbits[k + 4].impacts[0] == pytest.approx((-mirrored[k].impacts[0][0], mirrored[k].impacts[0][1]), abs=1e-10)


def test_gradient_is_unit_and_matches_finite_differences(solved, table):
    h = 1e-6
    x, y, orbits = solved[20, PAIRS[1]]
    for orbit in orbits:
        gx, gy = psi_gradient(orbit)
        assert math.hypot(*gx) == pytest.approx(1.0, abs=1e-14)
        assert math.hypot(*gy) == pytest.approx(1.0, abs=1e-14)
        for axis in range(2):
            e = [0.0, 0.0]
            e[axis] = h
            dx = (
                resolve(orbit, (x[0] + e[0], x[1] + e[1]), y, table).length
                - resolve(orbit, (x[0] - e[0], x[1] - e[1]), y, table).length
            ) / (2 * h)
            dy = (
                resolve(orbit, x, (y[0] + e[0], y[1] + e[1]), table).length
                - resolve(orbit, x, (y[0] - e[0], y[1] - e[1]), table).length
            ) / (2 * h)
            assert dx == pytest.approx(gx[axis], abs=1e-5)
            assert dy == pytest.approx(gy[axis], abs=1e-5)


def test_perturbed_impacts_break_stationarity(solved, table):
    x, y, orbits = solved[15, PAIRS[2]]
    orbit = orbits[0]
    base = critical_point_check(orbit, table)
    previous = base
    for size in (1e-8, 1e-6, 1e-4):
        angles = list(orbit.impact_angles)
        angles[3] += size
        residual = stationarity_residual(orbit.x, orbit.y, angles, table)
        assert residual > previous
        previous = residual


def test_single_reflection_fermat_principle(table):
    # a path from x to its mirror image through the top vertex is stationary
    x, y = (-0.2, 0.9), (0.2, 0.9)
    assert stationarity_residual(x, y, [math.pi / 2], table) < 1e-15
    assert stationarity_residual(x, y, [math.pi / 2 + 1e-3], table) > 1e-5


def test_small_reflection_count_rejected(table):
    x = point_inside(0.3, 1e-3, table)
    with pytest.raises(ValueError):
        find_connecting_orbits(x, x, 5, table)


def test_far_endpoints_rejected(table):
    with pytest.raises(ValueError):
        find_connecting_orbits(point_inside(0.3, 1e-3, table), point_inside(1.5, 1e-3, table), 20, table)
    with pytest.raises(ValueError):
        find_connecting_orbits((0.0, 0.0), (0.0, 0.0), 20, table)


def test_too_deep_endpoints_have_no_bracket(table):
    x = point_inside(0.3, 0.01, table)
    with pytest.raises(InsufficientRangeError):
        find_connecting_orbits(x, x, 30, table)


def test_distance_to_boundary(table):
    assert distance_to_boundary(point_inside(0.8, 3e-3, table), table) == pytest.approx(3e-3, rel=1e-9)


def coalescence_gaps(table, j, phi, depth):
    x = point_inside(phi, depth, table)
    target = solve_rotation(1, j, table).T_j
    same = find_connecting_orbits(x, x, j, table)
    fewer = find_connecting_orbits(x, x, j - 1, table)
    more = find_connecting_orbits(x, x, j + 1, table)
    return {
        "TN": same[1].length - target,
        "NT": same[2].length - target,
        "TT": fewer[0].length - target,
        "NN": more[3].length - target,
    }


def test_mixed_branches_coincide_with_periodic_length(table):
    for j, phi in ((20, 0.3), (30, 1.2)):
        gaps = coalescence_gaps(table, j, phi, 1e-5)
        assert abs(gaps["TN"]) < 1e-12
        assert abs(gaps["NT"]) < 1e-12


def test_neighbor_branches_approach_linearly(table):
    # the TT and NN gaps shrink in proportion to the distance from the boundary
    for j, phi in ((20, 0.3), (15, 2.5)):
        coarse = coalescence_gaps(table, j, phi, 1e-4)
        fine = coalescence_gaps(table, j, phi, 1e-5)
        for tag in ("TT", "NN"):
            assert coarse[tag] / fine[tag] == pytest.approx(10.0, rel=0.01)
        assert fine["TT"] < 0 < fine["NN"]


def test_asymptotic_scalings(table):
    report = asymptotic_checks([20, 40, 80, 160], table)
    assert report.exponent == pytest.approx(1.0, abs=0.02)
    assert all(d > 0 for d in report.dB_dlambda)
    assert report.ratio_range[1] / report.ratio_range[0] < 1.05
    assert report.omega_bound < 3.0
    assert np.all(np.array(report.dphi_dlambda) > 0)


def test_asymptotic_range_validation(table):
    with pytest.raises(ValueError):
        asymptotic_checks([5, 20], table)
    with pytest.raises(RegimeError):
        asymptotic_checks([20], table, relative_depth=0.5)
