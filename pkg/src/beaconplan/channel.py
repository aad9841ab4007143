"""Path loss, Rician fading and incident RF power at a harvester.

Incident power from beacon ``b`` at distance ``d`` is ``P * K * d**-gamma * |h|**2``
with ``h`` a unit-mean-power Rician coefficient; contributions from independent
beacons add. Multi-antenna beacons use antenna switching (SA): each antenna
radiates the full power ``P`` for ``1/|A|`` of the coherence block, so the
block-averaged power is ``(P/|A|) * sum_a K d**-gamma |h_a|**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SingularityError
from .geometry import as_points, rotate


@dataclass(frozen=True)
class PathLoss:
    """Power-law path gain ``K * d**-gamma``."""

    K: float = 1.0
    gamma: float = 3.0

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError(f"K must be positive, got {self.K}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def gain(self, d):
        return path_gain(d, self)


@dataclass(frozen=True)
class RicianFading:
    """i.i.d. Rician fading with factor ``kappa``, normalized so ``E|h|^2 = 1``."""

    kappa: float = 3.0

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")

    @property
    def los_mean(self) -> float:
        """Mean of each of the real and imaginary parts."""
        return math.sqrt(self.kappa / (2.0 * (1.0 + self.kappa)))

    @property
    def component_variance(self) -> float:
        return 1.0 / (2.0 * (1.0 + self.kappa))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Complex coefficients ``alpha + j*beta`` of the given shape."""
        z = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
        s = math.sqrt(self.component_variance)
        m = self.los_mean
        return (m + s * z[0]) + 1j * (m + s * z[1])

    def sample_power_gain(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draws of ``|h|^2`` without materializing complex arrays."""
        z = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
        s = math.sqrt(self.component_variance)
        m = self.los_mean
        z *= s
        z += m
        np.square(z, out=z)
        return z[0] + z[1]


@dataclass(frozen=True)
class BeaconRadio:
    power: float
    antenna_count: int = 1

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power}")
        if int(self.antenna_count) != self.antenna_count or self.antenna_count < 1:
            raise ValueError(f"antenna_count must be a positive integer, got {self.antenna_count}")


@dataclass(frozen=True)
class Deployment:
    """Beacon positions (meters) sharing one per-beacon power and antenna count."""

    positions: np.ndarray = field(repr=False)
    power: float = 1.0
    antenna_count: int = 1

    def __post_init__(self):
        pos = as_points(self.positions).copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        BeaconRadio(self.power, self.antenna_count)  # validates

    @property
    def beacon_count(self) -> int:
        return self.positions.shape[0]

    @property
    def total_power(self) -> float:
        return self.power * self.beacon_count

    @property
    def radio(self) -> BeaconRadio:
        return BeaconRadio(self.power, self.antenna_count)

    def with_power(self, power: float) -> "Deployment":
        return Deployment(self.positions, power, self.antenna_count)

    def with_antennas(self, antenna_count: int) -> "Deployment":
        return Deployment(self.positions, self.power, antenna_count)

    def scaled(self, factor: float) -> "Deployment":
        return Deployment(self.positions * factor, self.power, self.antenna_count)

    def rotated(self, angle: float) -> "Deployment":
        return Deployment(rotate(self.positions, angle), self.power, self.antenna_count)

    def __repr__(self):
        pts = ", ".join(f"({x:.4g}, {y:.4g})" for x, y in self.positions)
        return f"Deployment([{pts}], power={self.power!r}, antenna_count={self.antenna_count})"


def path_gain(d, pl: PathLoss):
    """``K * d**-gamma``; raises :class:`SingularityError` at ``d == 0``."""
    arr = np.asarray(d, dtype=float)
    if np.any(arr <= 0):
        raise SingularityError("path gain is singular at non-positive distance")
    out = pl.K * arr ** (-pl.gamma)
    return float(out) if out.ndim == 0 else out


def distances(points, positions) -> np.ndarray:
    """Pairwise distances, shape ``(n_points, n_beacons)``; raises on coincidence."""
    pts = as_points(points)
    pos = as_points(positions)
    diff = pts[:, None, :] - pos[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(d == 0):
        s, b = np.argwhere(d == 0)[0]
        raise SingularityError(
            f"point {s} at ({pts[s, 0]:.6g}, {pts[s, 1]:.6g}) coincides with beacon {b}",
            point_index=int(s),
            beacon_index=int(b),
        )
    return d


def mean_incident_power(u, deployment: Deployment, pl: PathLoss):
    """Mean incident power ``P * K * sum_b ||u - n_b||**-gamma`` in watts.

    ``u`` may be a single point (returns a float) or an ``(n, 2)`` array.
    The result does not depend on the antenna count.
    """
    single = np.ndim(u) == 1
    d = distances(u, deployment.positions)
    vals = deployment.power * pl.K * np.sum(d ** (-pl.gamma), axis=1)
    return float(vals[0]) if single else vals


def sample_incident_power(u, deployment: Deployment, pl: PathLoss, fading: RicianFading,
                          rng: np.random.Generator, size=None):
    """Draw incident power at a single point ``u`` under Rician fading.

    Each draw uses fresh fading for every beacon (and every antenna under SA).
    Returns a float when ``size`` is None, else an array of ``size`` draws.
    """
    gains = pl.K * distances(u, deployment.positions)[0] ** (-pl.gamma)
    n = 1 if size is None else int(size)
    A = deployment.antenna_count
    h2 = fading.sample_power_gain(rng, (n, gains.size, A))
    draws = (deployment.power / A) * (h2.sum(axis=2) @ gains)
    return float(draws[0]) if size is None else draws


def watts_to_dbm(w):
    return 10.0 * np.log10(np.asarray(w, dtype=float) * 1e3)


def dbm_to_watts(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0 - 3.0)
