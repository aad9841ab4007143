"""Estimator-style wrappers around the placement solvers.

``fit(X)`` takes proxy harvester locations (an ``(n, 2)`` array, or ``None``
for the default ring grid) and places the beacons; ``predict(X)`` returns the
mean incident power at new locations; ``score(X)`` is the worst of those, so
larger is better, as the usual estimator convention expects.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .channel import Deployment, PathLoss
from .geometry import PointSet, grid_for_size
from .solvers import IPMConfig, PSOConfig, solve_placement


class _BasePlacer(BaseEstimator):
    def _validate_common(self):
        if int(self.n_beacons) != self.n_beacons or self.n_beacons < 1:
            raise ValueError(f"n_beacons must be a positive integer, got {self.n_beacons!r}")
        if self.radius is not None and not self.radius > 0:
            raise ValueError("radius must be positive")
        if not self.total_power > 0:
            raise ValueError("total_power must be positive")
        return PathLoss(self.path_loss_k, self.path_loss_exponent)

    def _proxy_set(self, X):
        if X is None:
            R = 100.0 if self.radius is None else float(self.radius)
            return grid_for_size(R, self.grid_points)
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        if X.shape[1] != 2:
            raise ValueError(f"X must have 2 columns (x, y in meters), got {X.shape[1]}")
        return PointSet.from_array(X, self.radius)

    def _solve(self, grid, pl, power):
        raise NotImplementedError

    def fit(self, X=None, y=None):
        """Place ``n_beacons`` beacons to maximize the worst mean power over ``X``.

        Parameters
        ----------
        X : array-like of shape (n_points, 2), optional
            Proxy harvester locations in meters. ``None`` uses a ring grid of
            ``grid_points`` points on a disk of radius ``radius`` (100 m if unset).
        y : ignored

        Returns
        -------
        self
        """
        pl = self._validate_common()
        grid = self._proxy_set(X)
        power = self.total_power / self.n_beacons
        report = self._solve(grid, pl, power)
        self.report_ = report
        self.positions_ = np.asarray(report.positions, dtype=float)
        self.worst_power_ = float(report.worst_power_w)
        self.radius_ = float(grid.radius)
        self.power_per_beacon_ = power
        self.path_loss_ = pl
        self.n_features_in_ = 2
        return self

    @property
    def deployment_(self) -> Deployment:
        check_is_fitted(self, "positions_")
        return Deployment(self.positions_, self.power_per_beacon_)

    def predict(self, X):
        """Mean incident power in watts at each row of ``X``; ``inf`` on top of a beacon."""
        check_is_fitted(self, "positions_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        d = np.linalg.norm(X[:, None, :] - self.positions_[None, :, :], axis=2)
        with np.errstate(divide="ignore"):
            gains = self.path_loss_.K * d ** (-self.path_loss_.gamma)
        return self.power_per_beacon_ * gains.sum(axis=1)

    def score(self, X, y=None):
        """Worst mean incident power over ``X`` (watts)."""
        return float(np.min(self.predict(X)))


class OdePoBesPlacer(_BasePlacer):
    """Best equally-far-from-center constellation by a radial sweep.

    Parameters
    ----------
    n_beacons : int
    radius : float, optional
        Disk radius in meters; inferred from ``X`` when omitted.
    total_power : float
        Budget in watts, split evenly across beacons.
    path_loss_k, path_loss_exponent : float
        Path loss ``K d**-gamma``.
    delta_r : float, optional
        Sweep step in meters; defaults to ``radius / 1000``.
    grid_points : int
        Size of the default grid used when ``fit`` gets no points.
    """

    def __init__(self, n_beacons=3, radius=None, total_power=10.0, path_loss_k=1.0,
                 path_loss_exponent=3.0, delta_r=None, grid_points=1000):
        self.n_beacons = n_beacons
        self.radius = radius
        self.total_power = total_power
        self.path_loss_k = path_loss_k
        self.path_loss_exponent = path_loss_exponent
        self.delta_r = delta_r
        self.grid_points = grid_points

    def _solve(self, grid, pl, power):
        return solve_placement("ode-pobes", int(self.n_beacons), grid, pl, power, delta_r=self.delta_r)


class CenteredPlacer(_BasePlacer):
    """All beacons at the disk center; the reference every placement should beat."""

    def __init__(self, n_beacons=3, radius=None, total_power=10.0, path_loss_k=1.0,
                 path_loss_exponent=3.0, grid_points=1000):
        self.n_beacons = n_beacons
        self.radius = radius
        self.total_power = total_power
        self.path_loss_k = path_loss_k
        self.path_loss_exponent = path_loss_exponent
        self.grid_points = grid_points

    def _solve(self, grid, pl, power):
        return solve_placement("centered-benchmark", int(self.n_beacons), grid, pl, power)


class InteriorPointPlacer(_BasePlacer):
    """Free positions from a log-barrier Newton method on the power-mean surrogate.

    Extra parameters mirror :class:`~beaconplan.solvers.IPMConfig`;
    ``random_state`` seeds the starting-point perturbation.
    """

    def __init__(self, n_beacons=3, radius=None, total_power=10.0, path_loss_k=1.0,
                 path_loss_exponent=3.0, k=-25.0, mu0=1e-2, mu_decay=0.2, mu_final=1e-8,
                 newton_tol=1e-10, max_outer=40, max_inner=100, init="ode-pobes",
                 random_state=0, grid_points=1000):
        self.n_beacons = n_beacons
        self.radius = radius
        self.total_power = total_power
        self.path_loss_k = path_loss_k
        self.path_loss_exponent = path_loss_exponent
        self.k = k
        self.mu0 = mu0
        self.mu_decay = mu_decay
        self.mu_final = mu_final
        self.newton_tol = newton_tol
        self.max_outer = max_outer
        self.max_inner = max_inner
        self.init = init
        self.random_state = random_state
        self.grid_points = grid_points

    def _solve(self, grid, pl, power):
        cfg = IPMConfig(k=self.k, mu0=self.mu0, mu_decay=self.mu_decay, mu_final=self.mu_final,
                        newton_tol=self.newton_tol, max_outer=self.max_outer,
                        max_inner=self.max_inner, init=self.init)
        return solve_placement("ipm", int(self.n_beacons), grid, pl, power,
                               seed=self.random_state, ipm_config=cfg)


class SwarmPlacer(_BasePlacer):
    """Free positions from a global-best particle swarm with a boundary barrier.

    Extra parameters mirror :class:`~beaconplan.solvers.PSOConfig`.
    """

    def __init__(self, n_beacons=3, radius=None, total_power=10.0, path_loss_k=1.0,
                 path_loss_exponent=3.0, swarm_size=50, inertia=0.729, cognitive=1.49445,
                 social=1.49445, epsilon=1e-12, max_iters=2000, stall_iters=200,
                 velocity_clamp=0.2, random_state=0, grid_points=1000):
        self.n_beacons = n_beacons
        self.radius = radius
        self.total_power = total_power
        self.path_loss_k = path_loss_k
        self.path_loss_exponent = path_loss_exponent
        self.swarm_size = swarm_size
        self.inertia = inertia
        self.cognitive = cognitive
        self.social = social
        self.epsilon = epsilon
        self.max_iters = max_iters
        self.stall_iters = stall_iters
        self.velocity_clamp = velocity_clamp
        self.random_state = random_state
        self.grid_points = grid_points

    def _solve(self, grid, pl, power):
        cfg = PSOConfig(swarm_size=self.swarm_size, inertia=self.inertia, cognitive=self.cognitive,
                        social=self.social, epsilon=self.epsilon, max_iters=self.max_iters,
                        stall_iters=self.stall_iters, velocity_clamp=self.velocity_clamp)
        seed = 0 if self.random_state is None else self.random_state
        return solve_placement("pso", int(self.n_beacons), grid, pl, power, seed=seed, pso_config=cfg)


PLACERS = {
    "ode-pobes": OdePoBesPlacer,
    "ipm": InteriorPointPlacer,
    "pso": SwarmPlacer,
    "centered-benchmark": CenteredPlacer,
}
