import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beaconplan.channel import (
    Deployment,
    PathLoss,
    RicianFading,
    dbm_to_watts,
    distances,
    mean_incident_power,
    path_gain,
    sample_incident_power,
    watts_to_dbm,
)
from beaconplan.exceptions import SingularityError

from oracles import gen_chi2_cdf, rician_weights


class TestPathLoss:
    def test_unit_distance(self):
        assert path_gain(1.0, PathLoss(1.0, 3.0)) == 1.0

    def test_known_value(self):
        assert path_gain(100.0, PathLoss(1.0, 3.0)) == pytest.approx(1e-6)
        assert path_gain(100.0, PathLoss(2.0, 5.0)) == pytest.approx(2e-10)

    @pytest.mark.parametrize("d", [0.0, -1.0])
    def test_singular(self, d):
        with pytest.raises(SingularityError):
            path_gain(d, PathLoss())

    @pytest.mark.parametrize("K,g", [(0, 3), (1, 0), (-1, 2)])
    def test_invalid(self, K, g):
        with pytest.raises(ValueError):
            PathLoss(K, g)


class TestRicianFading:
    def test_components(self):
        f = RicianFading(3.0)
        assert f.los_mean == pytest.approx(math.sqrt(3 / 8))
        assert f.component_variance == pytest.approx(1 / 8)

    def test_rayleigh_limit(self):
        f = RicianFading(0.0)
        h2 = f.sample_power_gain(np.random.default_rng(0), 200_000)
        # exponential with unit mean
        assert h2.mean() == pytest.approx(1.0, abs=0.01)
        assert h2.var() == pytest.approx(1.0, abs=0.03)

    def test_sample_matches_power_gain(self):
        f = RicianFading(3.0)
        h = f.sample(np.random.default_rng(5), 1000)
        h2 = f.sample_power_gain(np.random.default_rng(5), 1000)
        np.testing.assert_allclose(np.abs(h) ** 2, h2, rtol=1e-12)

    def test_negative_kappa(self):
        with pytest.raises(ValueError):
            RicianFading(-0.1)

    def test_variance_matches_ncx2(self):
        kappa = 3.0
        h2 = RicianFading(kappa).sample_power_gain(np.random.default_rng(2), 1_000_000)
        # |h|^2 = X / (2(1+kappa)) with X ~ ncx2(2, 2 kappa), var X = 2(2 + 4 kappa)
        expected = 2 * (2 + 4 * kappa) / (2 * (1 + kappa)) ** 2
        assert h2.var() == pytest.approx(expected, rel=0.01)


class TestDeployment:
    def test_validation(self):
        with pytest.raises(ValueError):
            Deployment([[0.0, 0.0]], power=0.0)
        with pytest.raises(ValueError):
            Deployment([[0.0, 0.0]], power=1.0, antenna_count=0)
        with pytest.raises(ValueError):
            Deployment([[0.0, 0.0, 1.0]])

    def test_immutable_positions(self):
        arr = np.zeros((2, 2))
        dep = Deployment(arr)
        arr[0, 0] = 5.0
        assert dep.positions[0, 0] == 0.0
        with pytest.raises(ValueError):
            dep.positions[0, 0] = 1.0

    def test_totals(self):
        dep = Deployment(np.zeros((4, 2)), power=2.5)
        assert dep.beacon_count == 4 and dep.total_power == 10.0


class TestMeanIncidentPower:
    def test_single_beacon(self):
        dep = Deployment([[0.0, 0.0]], power=10.0)
        assert mean_incident_power([100.0, 0.0], dep, PathLoss()) == pytest.approx(1e-5)

    def test_superposition(self):
        pl = PathLoss(1.0, 3.0)
        a, b = [[10.0, 0.0]], [[-20.0, 5.0]]
        u = np.array([[1.0, 2.0], [30.0, -4.0]])
        both = mean_incident_power(u, Deployment(a + b, 2.0), pl)
        sep = mean_incident_power(u, Deployment(a, 2.0), pl) + mean_incident_power(u, Deployment(b, 2.0), pl)
        np.testing.assert_allclose(both, sep, rtol=1e-14)

    def test_independent_of_antennas(self):
        u = np.array([[5.0, 5.0]])
        d1 = Deployment([[0.0, 0.0]], 1.0, 1)
        d8 = d1.with_antennas(8)
        assert mean_incident_power(u, d1, PathLoss())[0] == mean_incident_power(u, d8, PathLoss())[0]

    def test_coincident_raises(self):
        with pytest.raises(SingularityError) as info:
            distances([[1.0, 1.0], [0.0, 0.0]], [[0.0, 0.0]])
        assert info.value.point_index == 1 and info.value.beacon_index == 0

    @given(angle=st.floats(-6.3, 6.3))
    def test_rotation_invariant(self, angle):
        dep = Deployment([[30.0, 0.0], [-10.0, 20.0]], 1.0)
        u = np.array([[12.0, -40.0]])
        from beaconplan.geometry import rotate

        p0 = mean_incident_power(u, dep, PathLoss())
        p1 = mean_incident_power(rotate(u, angle), dep.rotated(angle), PathLoss())
        np.testing.assert_allclose(p1, p0, rtol=1e-12)


class TestSampleIncidentPower:
    def test_mean_preserved(self):
        dep = Deployment([[0.0, 0.0], [40.0, 0.0]], power=5.0, antenna_count=1)
        u = [80.0, 10.0]
        rng = np.random.default_rng(11)
        draws = sample_incident_power(u, dep, PathLoss(), RicianFading(3.0), rng, 400_000)
        mean = mean_incident_power(u, dep, PathLoss())
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - mean) < 3 * se

    def test_antennas_reduce_variance_keep_mean(self):
        u = [60.0, 0.0]
        rng = np.random.default_rng(3)
        base = Deployment([[0.0, 0.0]], 1.0)
        v1 = sample_incident_power(u, base, PathLoss(), RicianFading(3.0), rng, 200_000)
        v4 = sample_incident_power(u, base.with_antennas(4), PathLoss(), RicianFading(3.0), rng, 200_000)
        assert v4.var() == pytest.approx(v1.var() / 4, rel=0.03)
        mean = mean_incident_power(u, base, PathLoss())
        assert abs(v4.mean() - mean) < 3 * v4.std() / math.sqrt(v4.size)

    def test_scalar_draw(self):
        dep = Deployment([[0.0, 0.0]], 1.0)
        x = sample_incident_power([10.0, 0.0], dep, PathLoss(), RicianFading(), np.random.default_rng(0))
        assert isinstance(x, float) and x > 0

    def test_distribution_matches_oracle(self):
        dep = Deployment([[0.0, 0.0], [50.0, 0.0]], 2.0, antenna_count=2)
        u = np.array([-60.0, 30.0])
        gains = np.hypot(*(u - dep.positions).T) ** -3.0
        w = rician_weights(gains, dep.power, 3.0, antenna_count=2)
        draws = sample_incident_power(u, dep, PathLoss(), RicianFading(3.0), np.random.default_rng(9), 400_000)
        for q in (0.01, 0.1, 0.5):
            x = np.quantile(draws, q)
            p = gen_chi2_cdf(x, w, 2, 6.0)
            assert abs(p - q) < 4 * math.sqrt(q * (1 - q) / draws.size)


class TestDbm:
    def test_reference_sensitivity(self):
        assert dbm_to_watts(-22.0) == pytest.approx(6.309573e-6, rel=1e-6)

    @given(st.floats(-120, 60))
    def test_round_trip(self, dbm):
        assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-10)

    def test_one_milliwatt(self):
        assert watts_to_dbm(1e-3) == pytest.approx(0.0)
