"""Equally-far-from-center (EC) constellations and the Ode-PoBes radial sweep.

Two constellation families are considered for ``B`` beacons sharing a ring of
radius ``r``:

* ring: all ``B`` beacons on the ring, angular step ``2*pi/B``;
* centered: ``B - 1`` beacons on the ring, step ``2*pi/(B-1)``, plus one at the origin.

For both, the worst mean power sits either on the disk edge half-way between
two adjacent ring beacons, or at an interior candidate (the origin for the
ring family, the point equidistant from the origin and two adjacent ring
beacons for the centered family). Ode-PoBes sweeps ``r`` over ``[0, R]`` and
keeps the constellation with the best worst-point power, starting from the
all-at-center benchmark.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..channel import PathLoss
from ..exceptions import SingularityError
from ..geometry import TWO_PI, DiskGrid, angular_positions
from ..objective import grid_worst_power
from .report import SolverReport

RING = "ring"
CENTERED = "centered"
BENCHMARK = "benchmark"


@dataclass(frozen=True)
class ECTopology:
    beacon_count: int
    centered_variant: bool
    ring_radius: float
    radius: float

    def __post_init__(self):
        if self.beacon_count < 1:
            raise ValueError("beacon_count must be at least 1")
        if self.centered_variant and self.beacon_count < 2:
            raise ValueError("the centered variant needs at least 2 beacons")
        if not 0 <= self.ring_radius <= self.radius:
            raise ValueError(f"ring radius {self.ring_radius} outside [0, {self.radius}]")

    @property
    def ring_count(self) -> int:
        """Number of beacons on the ring."""
        return self.beacon_count - 1 if self.centered_variant else self.beacon_count

    @property
    def angular_step(self) -> float:
        return TWO_PI / self.ring_count

    def positions(self, offset: float = 0.0) -> np.ndarray:
        pts = angular_positions(self.ring_count, self.ring_radius, offset)
        if self.centered_variant:
            pts = np.vstack([pts, np.zeros((1, 2))])
        return pts


@dataclass(frozen=True)
class EdgeStationaryTerms:
    """Squared distances from the edge point at angle ``phi`` to two adjacent ring beacons."""

    M: float
    N: float

    @classmethod
    def at(cls, r: float, R: float, theta: float, phi: float) -> "EdgeStationaryTerms":
        return cls(
            r * r + R * R - 2 * r * R * math.cos(theta - phi),
            r * r + R * R - 2 * r * R * math.cos(phi),
        )

    def derivative_numerator(self, gamma: float, theta: float, phi: float) -> float:
        """Numerator of the two-beacon edge derivative; vanishes at ``phi = theta/2``."""
        e = gamma / 2 + 1
        return self.M**e * math.sin(phi) - self.N**e * math.sin(theta - phi)


def edge_power(topology: ECTopology, pl: PathLoss, power: float, phi):
    """Mean power on the disk edge at angle(s) ``phi`` for an EC constellation."""
    phi = np.asarray(phi, dtype=float)
    R, r = topology.radius, topology.ring_radius
    ang = topology.angular_step * np.arange(topology.ring_count)
    d2 = r * r + R * R - 2 * r * R * np.cos(ang[:, None] - phi.reshape(1, -1))
    if np.any(d2 <= 0):
        raise SingularityError("edge angle coincides with a beacon on the disk boundary")
    tot = np.sum(d2 ** (-pl.gamma / 2), axis=0)
    if topology.centered_variant:
        tot = tot + R ** (-pl.gamma)
    out = power * pl.K * tot
    return float(out[0]) if phi.ndim == 0 else out.reshape(phi.shape)


def worst_edge_angle(topology: ECTopology) -> float:
    """Edge angle of the surviving minimum, half-way between the first two ring beacons."""
    return topology.angular_step / 2


def approx_ring_radius(beacon_count: int, radius: float = 1.0) -> float:
    """Ring radius ``R cos(pi/B)``, clamped to ``[0, R]``; zero for one or two beacons."""
    if beacon_count < 1:
        raise ValueError("beacon_count must be at least 1")
    if beacon_count <= 2:
        return 0.0
    return float(min(max(radius * math.cos(math.pi / beacon_count), 0.0), radius))


def _ring_worst(B: int, r: np.ndarray, R: float, pl: PathLoss, power: float) -> np.ndarray:
    """Closed-form worst-point power of the ring family, vectorized over ``r``."""
    g = pl.gamma
    theta = TWO_PI / B
    ang = theta * np.arange(B) - theta / 2
    d2 = r[:, None] ** 2 + R * R - 2 * r[:, None] * R * np.cos(ang)[None, :]
    edge = power * pl.K * np.sum(d2 ** (-g / 2), axis=1)
    with np.errstate(divide="ignore"):
        center = np.where(r > 0, B * power * pl.K * np.where(r > 0, r, 1.0) ** (-g), np.inf)
    return np.minimum(center, edge)


def _centered_worst(B: int, r: np.ndarray, R: float, pl: PathLoss, power: float) -> np.ndarray:
    """Closed-form worst-point power of the centered family, vectorized over ``r``."""
    g = pl.gamma
    m = B - 1
    theta = TWO_PI / m
    ang = theta * np.arange(m) - theta / 2
    d2 = r[:, None] ** 2 + R * R - 2 * r[:, None] * R * np.cos(ang)[None, :]
    edge = power * pl.K * (R ** (-g) + np.sum(d2 ** (-g / 2), axis=1))
    out = edge
    if m >= 3:
        # interior point equidistant from the origin and two adjacent ring beacons
        x = r / (2 * math.cos(theta / 2))
        pos = r > 0
        xs = np.where(pos, x, 1.0)
        dx2 = xs[:, None] ** 2 + r[:, None] ** 2 - 2 * xs[:, None] * r[:, None] * np.cos(ang)[None, :]
        inner = power * pl.K * (xs ** (-g) + np.sum(dx2 ** (-g / 2), axis=1))
        out = np.where(pos & (x <= R), np.minimum(edge, inner), edge)
    # r = 0 collapses every beacon onto the center
    return np.where(r > 0, out, B * power * pl.K * R ** (-g))


def worst_of_topology(topology: ECTopology, pl: PathLoss, power: float) -> float:
    """Closed-form mean power at the worst point of an EC constellation."""
    r = np.array([topology.ring_radius])
    if topology.centered_variant:
        return float(_centered_worst(topology.beacon_count, r, topology.radius, pl, power)[0])
    return float(_ring_worst(topology.beacon_count, r, topology.radius, pl, power)[0])


@dataclass(frozen=True)
class ECSolution:
    beacon_count: int
    radius: float
    r_star: float
    theta_star: float
    variant: str
    xi_star: float
    benchmark: float
    iterations: int

    @property
    def topology(self) -> ECTopology | None:
        if self.variant == BENCHMARK:
            return None
        return ECTopology(self.beacon_count, self.variant == CENTERED, self.r_star, self.radius)

    def positions(self, offset: float = 0.0) -> np.ndarray:
        if self.variant == BENCHMARK:
            return np.zeros((self.beacon_count, 2))
        return self.topology.positions(offset)


def ode_pobes(beacon_count: int, pl: PathLoss, power: float, radius: float,
              delta_r: float | None = None) -> ECSolution:
    """Sweep the ring radius and return the best EC constellation.

    Parameters
    ----------
    beacon_count : int
    pl : PathLoss
    power : float
        Per-beacon transmit power in watts.
    radius : float
        Disk radius ``R`` in meters.
    delta_r : float, optional
        Sweep step; defaults to ``R / 1000``. Evaluates ``r = i * delta_r`` for
        ``i = 0 .. floor(R / delta_r)``.

    Returns
    -------
    ECSolution
        ``variant`` is ``"benchmark"`` when no constellation beats every beacon at the center.
    """
    if beacon_count < 1:
        raise ValueError("beacon_count must be at least 1")
    if delta_r is None:
        delta_r = radius / 1000.0
    if not delta_r > 0:
        raise ValueError("delta_r must be positive")
    B = int(beacon_count)
    n = int(math.floor(radius / delta_r + 1e-9)) + 1
    r = np.arange(n) * delta_r
    r[-1] = min(r[-1], radius)

    ring = _ring_worst(B, r, radius, pl, power)
    if B >= 2:
        cent = _centered_worst(B, r, radius, pl, power)
    else:
        cent = np.full(n, -np.inf)
    # ring variant wins exact ties
    use_cent = cent > ring
    best = np.where(use_cent, cent, ring)

    benchmark = B * power * pl.K * radius ** (-pl.gamma)
    i = int(np.argmax(best))
    if best[i] > benchmark:
        variant = CENTERED if use_cent[i] else RING
        m = B - 1 if use_cent[i] else B
        return ECSolution(B, radius, float(r[i]), TWO_PI / m, variant, float(best[i]), benchmark, n)
    return ECSolution(B, radius, 0.0, TWO_PI / B, BENCHMARK, benchmark, benchmark, n)


def ode_pobes_report(beacon_count: int, grid: DiskGrid, pl: PathLoss, power: float,
                     delta_r: float | None = None, offset: float = 0.0):
    """Run Ode-PoBes and wrap the constellation in a :class:`SolverReport`."""
    t0 = time.perf_counter()
    sol = ode_pobes(beacon_count, pl, power, grid.radius, delta_r)
    pos = sol.positions(offset)
    elapsed = (time.perf_counter() - t0) * 1e3
    return SolverReport(
        solver="ode-pobes",
        positions=pos,
        power_per_beacon=power,
        worst_power_w=grid_worst_power(pos, grid, pl, power),
        surrogate_value=sol.xi_star,
        iterations=sol.iterations,
        wall_time_ms=elapsed,
        converged=True,
        details={"r_star": sol.r_star, "theta_star": sol.theta_star, "variant": sol.variant},
    )


def centered_report(beacon_count: int, grid: DiskGrid, pl: PathLoss, power: float):
    """All beacons at the origin: the single-centered-beacon benchmark at total power."""
    t0 = time.perf_counter()
    pos = np.zeros((beacon_count, 2))
    elapsed = (time.perf_counter() - t0) * 1e3
    return SolverReport(
        solver="centered-benchmark",
        positions=pos,
        power_per_beacon=power,
        worst_power_w=grid_worst_power(pos, grid, pl, power),
        surrogate_value=beacon_count * power * pl.K * grid.radius ** (-pl.gamma),
        iterations=0,
        wall_time_ms=elapsed,
        converged=True,
    )
