import numpy as np
import pytest

from beaconplan.channel import Deployment, PathLoss
from beaconplan.exceptions import MonotonicityError
from beaconplan.geometry import grid_for_size
from beaconplan.planner import (
    AreaSpec,
    antenna_study,
    centered_coverage_radius,
    estimate_outage,
    max_coverage_radius,
    min_beacons,
    network_outage,
    outage_curve,
    wilson_interval,
    worst_power_at_radius,
)
from beaconplan.solvers import ode_pobes

from oracles import gen_chi2_cdf, rician_weights, single_term_cdf

N = 50_000


@pytest.fixture(scope="module")
def area():
    return AreaSpec()


@pytest.fixture(scope="module")
def grid():
    return grid_for_size(100.0, 1000)


class TestAreaSpec:
    @pytest.mark.parametrize("kw", [{"R": 0.0}, {"P_T": -1.0}, {"xi0": -1e-9}, {"zeta": 0.0},
                                    {"zeta": 1.0}, {"kappa": -1.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            AreaSpec(**kw)

    def test_default_sensitivity(self, area):
        assert area.xi0 == pytest.approx(10 ** (-2.2) * 1e-3)


class TestWilson:
    def test_zero_failures_positive_width(self):
        lo, hi = wilson_interval(0, 10_000)
        assert lo == 0.0 and 0 < hi < 1e-3

    def test_symmetric(self):
        lo, hi = wilson_interval(50, 100)
        assert lo + hi == pytest.approx(1.0)

    def test_contains_estimate(self):
        lo, hi = wilson_interval(37, 1000)
        assert lo < 0.037 < hi


class TestEstimateOutage:
    def test_zero_sensitivity(self, area):
        dep = Deployment([[0.0, 0.0]], 10.0)
        est = estimate_outage([50.0, 0.0], dep, area.replace(xi0=0.0), samples=N)
        assert est.failures == 0 and est.probability == 0.0

    def test_vanishing_power(self, area):
        dep = Deployment([[0.0, 0.0]], 1e-12)
        est = estimate_outage([100.0, 0.0], dep, area, samples=N)
        assert est.probability == 1.0

    def test_single_beacon_oracle(self, area):
        dep = Deployment([[0.0, 0.0]], area.P_T)
        est = estimate_outage([100.0, 0.0], dep, area, samples=200_000, seed=7)
        w = rician_weights([100.0 ** -3], area.P_T, area.kappa)[0]
        exact = single_term_cdf(area.xi0, w, area.kappa)
        assert abs(est.probability - exact) <= 2 * est.half_width_95

    def test_two_beacon_oracle(self, area):
        pos = np.array([[30.0, 0.0], [-30.0, 0.0]])
        u = np.array([0.0, 80.0])
        dep = Deployment(pos, 5.0, 2)
        est = estimate_outage(u, dep, area, samples=200_000, seed=3)
        g = np.linalg.norm(pos - u, axis=1) ** -3.0
        exact = gen_chi2_cdf(area.xi0, rician_weights(g, 5.0, area.kappa, 2), 2.0, 2 * area.kappa)
        assert abs(est.probability - exact) <= 2 * est.half_width_95

    def test_mean_power_matches_field(self, area):
        dep = Deployment([[10.0, 0.0], [-10.0, 0.0]], 3.0)
        est = estimate_outage([0.0, 40.0], dep, area, samples=N, seed=0)
        exact = 2 * 3.0 * (10.0 ** 2 + 40.0 ** 2) ** -1.5
        assert abs(est.mean_power - exact) < 4 * est.std_error

    def test_thread_count_invariant(self, area):
        dep = Deployment([[0.0, 0.0]], 10.0)
        a = estimate_outage([90.0, 0.0], dep, area, samples=3 * 65_536 + 17, seed=5, n_jobs=1)
        b = estimate_outage([90.0, 0.0], dep, area, samples=3 * 65_536 + 17, seed=5, n_jobs=4)
        assert a == b

    def test_seed_reproducible(self, area):
        dep = Deployment([[0.0, 0.0]], 10.0)
        a = estimate_outage([90.0, 0.0], dep, area, samples=N, seed=11)
        b = estimate_outage([90.0, 0.0], dep, area, samples=N, seed=11)
        c = estimate_outage([90.0, 0.0], dep, area, samples=N, seed=12)
        assert a == b and a.failures != c.failures

    def test_antennas_keep_mean(self, area):
        u = [0.0, 70.0]
        one = estimate_outage(u, Deployment([[0.0, 0.0]], 10.0, 1), area, samples=N, seed=1)
        four = estimate_outage(u, Deployment([[0.0, 0.0]], 10.0, 4), area, samples=N, seed=1)
        assert abs(one.mean_power - four.mean_power) < 4 * np.hypot(one.std_error, four.std_error)
        assert four.std_error < one.std_error

    @pytest.mark.parametrize("kw", [{"samples": 9_999}, {"antenna_count": 0}])
    def test_invalid(self, area, kw):
        with pytest.raises(ValueError):
            estimate_outage([0.0, 1.0], Deployment([[0.0, 0.0]], 1.0), area, **kw)


class TestNetworkOutage:
    def test_audited_order(self, area, grid):
        rep = ode_pobes(3, area.pl, area.P_T / 3, area.R)
        dep = Deployment(rep.positions(), area.P_T / 3)
        est = network_outage(dep, grid, area, samples=N, seed=0, audit=4)
        assert len(est.audited) == 4
        means = [a.mean_power for a in est.audited]
        assert means[0] == pytest.approx(min(means), rel=0.05)
        assert est.probability == max(a.probability for a in est.audited)

    def test_centered_worst_on_edge(self, area, grid):
        dep = Deployment([[0.0, 0.0]], area.P_T)
        est = network_outage(dep, grid, area, samples=N, seed=0, audit=1)
        assert np.hypot(*grid.points[est.worst_index]) == pytest.approx(area.R, rel=1e-9)


class TestMinBeacons:
    def test_loose_target_single_beacon(self, area):
        res = min_beacons(area.replace(zeta=0.999), samples=10_000, seed=0)
        assert res.feasible and res.beacon_count == 1 and len(res.history) == 1

    def test_cap_exhausted(self, area):
        res = min_beacons(area.replace(P_T=1e-6), samples=10_000, seed=0, cap=3)
        assert not res.feasible
        assert [h[0] for h in res.history] == [1, 2, 3]

    def test_boundary_tight(self, area):
        res = min_beacons(area.replace(zeta=0.05), samples=N, seed=0)
        assert res.feasible
        probs = dict((b, p) for b, p, _ in res.history)
        assert probs[res.beacon_count] <= 0.05
        assert all(probs[b] > 0.05 for b in range(1, res.beacon_count))

    def test_matches_outage_curve(self, area):
        a = area.replace(zeta=0.05)
        res = min_beacons(a, samples=N, seed=4)
        curve = outage_curve(a, range(1, res.beacon_count + 1), samples=N, seed=4)
        assert [c.probability for c in curve] == [h[1] for h in res.history]

    def test_invalid_cap(self, area):
        with pytest.raises(ValueError):
            min_beacons(area, cap=0)


class TestCoverage:
    def test_centered_closed_form(self, area):
        r = centered_coverage_radius(area)
        assert r == pytest.approx((area.P_T / area.xi0) ** (1 / 3))
        res = max_coverage_radius(1, area, solver="centered-benchmark", tolerance=0.05)
        assert res.feasible and abs(res.r_max - r) <= 0.05

    @pytest.mark.parametrize("B", [1, 3, 7])
    def test_sensitivity_met_at_boundary(self, area, B):
        res = max_coverage_radius(B, area, tolerance=0.1)
        p = worst_power_at_radius(B, area, res.r_max)
        assert p >= area.xi0
        assert p == pytest.approx(area.xi0, rel=0.01)

    def test_more_beacons_cover_more(self, area):
        radii = [max_coverage_radius(B, area, tolerance=0.5).r_max for B in (1, 3, 7, 10)]
        assert np.all(np.diff(radii) > 0)

    def test_exceeds_centered(self, area):
        rc = centered_coverage_radius(area)
        assert max_coverage_radius(7, area, tolerance=0.5).r_max > rc

    def test_unreachable(self, area):
        res = max_coverage_radius(1, area.replace(P_T=1e-20), solver="centered-benchmark")
        assert not res.feasible and res.r_max == 0.0

    def test_non_monotone_detected(self, area, monkeypatch):
        import beaconplan.planner as planner
        monkeypatch.setattr(planner, "worst_power_at_radius", lambda *a, **k: 1.0)
        with pytest.raises(MonotonicityError):
            max_coverage_radius(2, area)

    def test_invalid_tolerance(self, area):
        with pytest.raises(ValueError):
            max_coverage_radius(1, area, tolerance=0.0)


class TestAntennaStudy:
    def test_monotone_in_antennas(self, area):
        study = antenna_study(area, [2, 3], [1, 2, 4], samples=100_000, seed=0, audit=1)
        m = study.matrix
        assert m.shape == (2, 3)
        assert np.all(np.diff(m, axis=1) <= 0)

    def test_empty(self, area):
        with pytest.raises(ValueError):
            antenna_study(area, [], [1])
