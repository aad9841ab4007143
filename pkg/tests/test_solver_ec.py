import math
import time

import numpy as np
import pytest

from beaconplan.channel import Deployment, PathLoss
from beaconplan.geometry import grid_for_size, make_disk_grid
from beaconplan.objective import evaluate_field, worst_point
from beaconplan.solvers import (
    ECTopology,
    EdgeStationaryTerms,
    approx_ring_radius,
    edge_power,
    ode_pobes,
    ode_pobes_report,
    worst_edge_angle,
    worst_of_topology,
)
from beaconplan.solvers.ec import BENCHMARK, CENTERED, RING

from oracles import brute_force_ring_radius

R = 100.0


class TestECTopology:
    def test_ring_positions(self):
        t = ECTopology(4, False, 50.0, R)
        assert t.ring_count == 4 and t.angular_step == pytest.approx(math.pi / 2)
        np.testing.assert_allclose(np.hypot(*t.positions().T), 50.0)

    def test_centered_positions(self):
        t = ECTopology(4, True, 50.0, R)
        pos = t.positions()
        assert pos.shape == (4, 2)
        np.testing.assert_array_equal(pos[-1], [0.0, 0.0])
        assert t.angular_step == pytest.approx(2 * math.pi / 3)

    @pytest.mark.parametrize("args", [(0, False, 1.0, R), (1, True, 1.0, R), (3, False, 101.0, R),
                                      (3, False, -1.0, R)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            ECTopology(*args)


class TestEdgePower:
    def test_collapsed_ring(self):
        t = ECTopology(3, False, 0.0, R)
        assert edge_power(t, PathLoss(), 2.0, 1.234) == pytest.approx(3 * 2.0 * R**-3)

    def test_matches_direct_sum(self):
        t = ECTopology(5, False, 60.0, R)
        phi = np.linspace(0, 2 * np.pi, 37)
        edge = R * np.column_stack([np.cos(phi), np.sin(phi)])
        direct = evaluate_field(Deployment(t.positions(), 1.5), _points(edge), PathLoss(1.0, 3.0)).values
        np.testing.assert_allclose(edge_power(t, PathLoss(1.0, 3.0), 1.5, phi), direct, rtol=1e-12)

    def test_centered_adds_center_term(self):
        ring = ECTopology(4, False, 40.0, R)
        cent = ECTopology(5, True, 40.0, R)
        phi = np.array([0.3, 1.1])
        np.testing.assert_allclose(edge_power(cent, PathLoss(), 1.0, phi),
                                   edge_power(ring, PathLoss(), 1.0, phi) + R**-3, rtol=1e-13)

    def test_four_minima_and_maxima(self):
        t = ECTopology(4, False, 70.0, R)
        phi = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
        v = edge_power(t, PathLoss(1.0, 3.0), 1.0, phi)
        left, right = np.roll(v, 1), np.roll(v, -1)
        minima = phi[(v < left) & (v < right)]
        maxima = phi[(v > left) & (v > right)]
        assert len(minima) == 4 and len(maxima) == 4
        np.testing.assert_allclose(minima, np.pi / 4 + np.arange(4) * np.pi / 2, atol=2 * np.pi / 4000)

    def test_singular_on_boundary_beacon(self):
        t = ECTopology(3, False, R, R)
        with pytest.raises(Exception):
            edge_power(t, PathLoss(), 1.0, 0.0)


class TestWorstEdgeAngle:
    @pytest.mark.parametrize("B,expected", [(3, math.pi / 3), (4, math.pi / 4)])
    def test_half_step(self, B, expected):
        assert worst_edge_angle(ECTopology(B, False, 50.0, R)) == pytest.approx(expected)

    @pytest.mark.parametrize("B,gamma", [(3, 3.0), (4, 3.0), (5, 5.0)])
    def test_matches_sweep(self, B, gamma):
        t = ECTopology(B, False, 0.6 * R, R)
        phi = np.linspace(0, 2 * np.pi / B, 10_000, endpoint=False)
        i = np.argmin(edge_power(t, PathLoss(1.0, gamma), 1.0, phi))
        assert abs(phi[i] - worst_edge_angle(t)) <= phi[1] - phi[0]

    def test_stationary_terms(self):
        theta = 2 * math.pi / 3
        terms = EdgeStationaryTerms.at(40.0, R, theta, theta / 2)
        assert terms.M == pytest.approx(terms.N)
        assert terms.derivative_numerator(3.0, theta, theta / 2) == pytest.approx(0.0, abs=1e-6 * terms.M**2.5)


class TestApproxRingRadius:
    @pytest.mark.parametrize("B,expected", [(1, 0.0), (2, 0.0), (3, R / 2), (4, R * math.sqrt(2) / 2)])
    def test_values(self, B, expected):
        assert approx_ring_radius(B, R) == pytest.approx(expected)

    def test_invalid(self):
        with pytest.raises(ValueError):
            approx_ring_radius(0)


class TestWorstOfTopology:
    def test_ring_three_half_radius(self):
        pl = PathLoss(1.0, 3.0)
        t = ECTopology(3, False, R / 2, R)
        theta = 2 * math.pi / 3
        phi = np.array([theta / 2])
        edge = sum((t.ring_radius**2 + R**2 - 2 * t.ring_radius * R * math.cos(theta * b - phi[0])) ** -1.5
                   for b in range(3))
        center = 3 * (R / 2) ** -3
        assert worst_of_topology(t, pl, 1.0) == pytest.approx(min(edge, center), rel=1e-12)

    def test_ring_center_dominates_large_gamma(self):
        pl = PathLoss(1.0, 5.0)
        t = ECTopology(6, False, 0.999 * R, R)
        assert worst_of_topology(t, pl, 1.0) == pytest.approx(6 * (0.999 * R) ** -5)

    def test_centered_interior_point(self):
        # three ring beacons: the equidistant interior point sits at x = r
        pl = PathLoss(1.0, 3.0)
        r = 30.0
        t = ECTopology(4, True, r, R)
        x = r / (2 * math.cos(math.pi / 3))
        assert x == pytest.approx(r)
        xpt = x * np.array([math.cos(math.pi / 3), math.sin(math.pi / 3)])
        inner = evaluate_field(Deployment(t.positions(), 1.0), _points(xpt[None]), pl).values[0]
        edge = edge_power(t, pl, 1.0, math.pi / 3)
        assert worst_of_topology(t, pl, 1.0) == pytest.approx(min(inner, edge), rel=1e-12)

    def test_consistent_with_fine_grid(self):
        pl = PathLoss(1.0, 3.0)
        t = ECTopology(5, False, 65.0, R)
        grid = make_disk_grid(R, 60, 2.0)
        fld = evaluate_field(Deployment(t.positions(), 1.0), grid, pl, on_coincident="exclude")
        assert fld.min == pytest.approx(worst_of_topology(t, pl, 1.0), rel=0.02)


class TestOdePoBes:
    @pytest.mark.parametrize("B", [1, 2])
    def test_center_for_one_or_two(self, B):
        sol = ode_pobes(B, PathLoss(1.0, 3.0), 1.0, R, delta_r=0.1)
        assert sol.r_star == 0.0 and sol.variant == BENCHMARK
        np.testing.assert_array_equal(sol.positions(), np.zeros((B, 2)))

    def test_three_beacons_gamma5(self):
        sol = ode_pobes(3, PathLoss(1.0, 5.0), 1.0, R, delta_r=0.1)
        assert abs(sol.r_star - 50.0) <= 2.0
        assert sol.variant == RING

    @pytest.mark.parametrize("B,gamma", [(3, 3.0), (3, 5.0), (4, 3.0), (4, 5.0)])
    def test_matches_brute_force(self, B, gamma):
        sol = ode_pobes(B, PathLoss(1.0, gamma), 1.0, 1.0, delta_r=1e-3)
        r_bf, v_bf = brute_force_ring_radius(B, gamma, n_r=1001, n_interior=3000)
        assert abs(sol.r_star - r_bf) <= 2e-3
        assert sol.xi_star == pytest.approx(v_bf, rel=1e-3)

    @pytest.mark.xfail(strict=True, reason="the exact optimum is 0.680 R, 3.8% below R*sqrt(2)/2; "
                                           "see the decisions ledger")
    def test_four_beacons_near_sqrt2_over_2(self):
        sol = ode_pobes(4, PathLoss(1.0, 3.0), 1.0, R, delta_r=0.1)
        assert abs(sol.r_star - R * math.sqrt(2) / 2) <= 0.03 * R * math.sqrt(2) / 2

    @pytest.mark.parametrize("B,gamma", [
        (1, 3.0), (2, 3.0), (4, 3.0), (1, 5.0), (2, 5.0), (3, 5.0), (4, 5.0),
        pytest.param(3, 3.0, marks=pytest.mark.xfail(
            strict=True, reason="exact optimum 0.4435 R is 5.65% of R from R/2; see the decisions ledger")),
    ])
    def test_close_to_approximation(self, B, gamma):
        sol = ode_pobes(B, PathLoss(1.0, gamma), 1.0, R)
        assert abs(sol.r_star - approx_ring_radius(B, R)) / R < 0.05

    @pytest.mark.parametrize("B", range(1, 16))
    def test_never_below_benchmark(self, B):
        sol = ode_pobes(B, PathLoss(1.0, 3.0), 2.0, R)
        assert sol.xi_star >= B * 2.0 * R**-3

    def test_refinement_never_loses(self):
        for B in (3, 5, 9):
            vals = [ode_pobes(B, PathLoss(1.0, 3.0), 1.0, R, delta_r=d).xi_star for d in (1.0, 0.1, 0.01)]
            assert vals[0] <= vals[1] * (1 + 1e-12) and vals[1] <= vals[2] * (1 + 1e-12)

    def test_variant_transition_gamma5(self):
        variants = [ode_pobes(B, PathLoss(1.0, 5.0), 1.0, R).variant for B in range(3, 16)]
        assert variants[0] == RING and CENTERED in variants

    def test_fast(self):
        t0 = time.perf_counter()
        ode_pobes(15, PathLoss(1.0, 3.0), 1.0, R, delta_r=0.1)
        assert time.perf_counter() - t0 < 1.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            ode_pobes(0, PathLoss(), 1.0, R)
        with pytest.raises(ValueError):
            ode_pobes(3, PathLoss(), 1.0, R, delta_r=0.0)


class TestOdePoBesReport:
    def test_report_fields(self):
        grid = grid_for_size(R, 1000)
        rep = ode_pobes_report(5, grid, PathLoss(), 2.0)
        assert rep.solver == "ode-pobes" and rep.converged
        assert rep.positions.shape == (5, 2)
        assert np.all(np.hypot(*rep.positions.T) <= R)
        assert rep.worst_power_w == pytest.approx(rep.surrogate_value, rel=0.02)
        assert rep.details["variant"] in (RING, CENTERED)

    def test_grid_worst_point_at_half_step(self):
        grid = grid_for_size(R, 1000)
        dep = Deployment(ECTopology(3, False, R / 2, R).positions(), 1.0)
        idx, _ = worst_point(evaluate_field(dep, grid, PathLoss(), on_coincident="exclude"))
        x, y = grid.points[idx]
        assert math.hypot(x, y) == pytest.approx(R)
        theta = 2 * math.pi / 3
        ang = math.atan2(y, x) % theta
        outer = np.count_nonzero(grid.ring == grid.ring_count)
        assert abs(ang - theta / 2) <= 2 * math.pi / outer


def _points(arr):
    from beaconplan.geometry import PointSet

    return PointSet.from_array(np.asarray(arr, dtype=float), radius=R)
