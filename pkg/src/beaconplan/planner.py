"""Outage-constrained planning: Monte Carlo outage, minimum beacon count, coverage, antennas.

Outage estimates split the requested samples into fixed-size chunks, each with
its own child of ``SeedSequence(seed)``; the failure counts are summed exactly,
so a result depends only on ``seed`` and ``samples``, never on ``n_jobs``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import Deployment, PathLoss, RicianFading, dbm_to_watts, distances
from .exceptions import MonotonicityError
from .geometry import DiskGrid, grid_for_size
from .objective import evaluate_field
from .solvers import IPMConfig, PSOConfig, SolverReport, ode_pobes, solve_placement

log = logging.getLogger(__name__)

CHUNK = 1 << 16
Z95 = 1.959963984540054


@dataclass(frozen=True)
class AreaSpec:
    """Service disk, propagation law and QoS target. Defaults follow the reference setup."""

    R: float = 100.0
    pl: PathLoss = field(default_factory=PathLoss)
    kappa: float = 3.0
    P_T: float = 10.0
    xi0: float = float(dbm_to_watts(-22.0))
    zeta: float = 1e-3

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not self.P_T > 0:
            raise ValueError("P_T must be positive")
        if not self.xi0 >= 0:
            raise ValueError("xi0 must be non-negative")
        if not 0 < self.zeta < 1:
            raise ValueError("zeta must lie in (0, 1)")
        RicianFading(self.kappa)

    @property
    def fading(self) -> RicianFading:
        return RicianFading(self.kappa)

    def replace(self, **changes) -> "AreaSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo estimate of ``P(incident power <= xi0)`` at one grid point.

    ``half_width_95`` is the half-width of the 95% Wilson score interval,
    which stays positive when no failure is observed.
    """

    probability: float
    samples: int
    failures: int
    half_width_95: float
    worst_index: int | None = None
    mean_power: float = float("nan")
    std_error: float = float("nan")
    audited: tuple = ()          # per-point estimates, lowest mean power first

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.samples)


def wilson_interval(failures: int, n: int, z: float = Z95) -> tuple[float, float]:
    p = failures / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def _chunk_stats(gains, power, antennas, fading, xi0, n, seed_seq):
    rng = np.random.default_rng(seed_seq)
    h2 = fading.sample_power_gain(rng, (n, gains.size, antennas))
    draws = (power / antennas) * (h2.sum(axis=2) @ gains)
    return int(np.count_nonzero(draws <= xi0)), float(draws.sum()), float(np.dot(draws, draws))


def estimate_outage(u, deployment: Deployment, area: AreaSpec, antenna_count: int | None = None,
                    samples: int = 1_000_000, seed=0, n_jobs: int = 1,
                    worst_index: int | None = None) -> OutageEstimate:
    """Estimate the energy-outage probability at point ``u``.

    Parameters
    ----------
    u : array-like, shape (2,)
    deployment : Deployment
        Per-beacon power and positions; ``antenna_count`` overrides its antenna count.
    area : AreaSpec
        Supplies path loss, Rician factor and sensitivity ``xi0``.
    samples : int
        Number of fading realizations, at least 10**4.
    seed : int or sequence of int
        Entropy for ``numpy.random.SeedSequence``.
    n_jobs : int
        Worker threads; the result is identical for any value.
    """
    if samples < 10_000:
        raise ValueError("samples must be at least 10**4")
    A = deployment.antenna_count if antenna_count is None else int(antenna_count)
    if A < 1:
        raise ValueError("antenna_count must be positive")
    gains = area.pl.K * distances(u, deployment.positions)[0] ** (-area.pl.gamma)
    fading = area.fading
    n_chunks = -(-samples // CHUNK)
    sizes = [CHUNK] * (n_chunks - 1) + [samples - CHUNK * (n_chunks - 1)]
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    args = [(gains, deployment.power, A, fading, area.xi0, n, ss) for n, ss in zip(sizes, children)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda a: _chunk_stats(*a), args))
    else:
        parts = [_chunk_stats(*a) for a in args]

    failures = sum(p[0] for p in parts)
    total = sum(p[1] for p in parts)
    total_sq = sum(p[2] for p in parts)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    lo, hi = wilson_interval(failures, samples)
    return OutageEstimate(
        probability=failures / samples,
        samples=samples,
        failures=failures,
        half_width_95=(hi - lo) / 2,
        worst_index=worst_index,
        mean_power=mean,
        std_error=math.sqrt(var / samples),
    )


def network_outage(deployment: Deployment, grid: DiskGrid, area: AreaSpec,
                   antenna_count: int | None = None, samples: int = 1_000_000, seed=0,
                   audit: int = 5, n_jobs: int = 1) -> OutageEstimate:
    """Outage at the grid point with the lowest mean power, audited over the next lowest.

    The ``audit`` lowest-mean points are each estimated with their own stream
    (keyed by rank, so common random numbers are shared across deployments)
    and the largest outage is returned. ``audited`` holds every per-point
    estimate in rank order, so ``audited[0]`` is the lowest-mean point.
    """
    fld = evaluate_field(deployment, grid, area.pl, on_coincident="exclude")
    ranks = fld.lowest(max(1, audit))
    base = list(np.atleast_1d(seed))
    best = None
    audited = []
    for rank, idx in enumerate(ranks):
        est = estimate_outage(grid.points[idx], deployment, area, antenna_count, samples,
                              seed=base + [rank], n_jobs=n_jobs, worst_index=int(idx))
        audited.append(est)
        if best is None or est.probability > best.probability:
            best = est
    return replace(best, audited=tuple(audited))


def _solve(solver, beacon_count, grid, area, power, seed, ipm_config, pso_config):
    return solve_placement(solver, beacon_count, grid, area.pl, power, seed=seed,
                           ipm_config=ipm_config, pso_config=pso_config)


@dataclass(frozen=True)
class MinBeaconsResult:
    beacon_count: int
    feasible: bool
    deployment: Deployment
    outage: OutageEstimate
    report: SolverReport
    history: tuple = ()          # (beacon_count, probability, half_width) per evaluated count


def min_beacons(area: AreaSpec, solver: str = "ode-pobes", antenna_count: int = 1,
                samples: int = 1_000_000, seed: int = 0, cap: int = 15, grid: DiskGrid | None = None,
                audit: int = 5, n_jobs: int = 1, ipm_config: IPMConfig | None = None,
                pso_config: PSOConfig | None = None) -> MinBeaconsResult:
    """Smallest beacon count whose optimized deployment meets the outage target.

    Starts at one beacon with the full budget, then adds beacons one at a
    time with the budget split evenly, re-solving the placement each time.
    Returns the first count with outage ``<= area.zeta``; if ``cap`` is reached
    first, returns ``feasible=False`` with the lowest outage seen.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    grid = grid or grid_for_size(area.R, 1000)
    history = []
    best = None
    for B in range(1, cap + 1):
        power = area.P_T / B
        rep = _solve(solver, B, grid, area, power, seed, ipm_config, pso_config)
        dep = Deployment(rep.positions, power, antenna_count)
        est = network_outage(dep, grid, area, antenna_count, samples, seed=[seed, B],
                             audit=audit, n_jobs=n_jobs)
        history.append((B, est.probability, est.half_width_95))
        log.info("|B|=%d outage=%.3g", B, est.probability)
        if best is None or est.probability < best.outage.probability:
            best = MinBeaconsResult(B, False, dep, est, rep)
        if est.probability <= area.zeta:
            return MinBeaconsResult(B, True, dep, est, rep, tuple(history))
    return replace(best, history=tuple(history))


def outage_curve(area: AreaSpec, beacon_counts, solver: str = "ode-pobes", antenna_count: int = 1,
                 samples: int = 1_000_000, seed: int = 0, grid: DiskGrid | None = None,
                 audit: int = 5, n_jobs: int = 1, ipm_config: IPMConfig | None = None,
                 pso_config: PSOConfig | None = None) -> list[OutageEstimate]:
    """Network outage at the optimized deployment for each beacon count (budget split evenly).

    Uses the same per-count seeding as :func:`min_beacons`, so the two agree exactly.
    """
    grid = grid or grid_for_size(area.R, 1000)
    out = []
    for B in beacon_counts:
        power = area.P_T / B
        rep = _solve(solver, B, grid, area, power, seed, ipm_config, pso_config)
        dep = Deployment(rep.positions, power, antenna_count)
        out.append(network_outage(dep, grid, area, antenna_count, samples, seed=[seed, B],
                                  audit=audit, n_jobs=n_jobs))
    return out


@dataclass(frozen=True)
class CoverageResult:
    beacon_count: int
    r_max: float
    feasible: bool
    worst_power: float
    probes: int
    solver: str


def worst_power_at_radius(beacon_count: int, area: AreaSpec, R: float, solver: str = "ode-pobes",
                          seed: int = 0, grid_size: int = 1000) -> float:
    """Optimized worst-point mean power on a disk of radius ``R`` (budget split evenly).

    Ode-PoBes uses its closed-form worst point; other solvers use the grid minimum.
    """
    power = area.P_T / beacon_count
    if solver == "ode-pobes":
        return ode_pobes(beacon_count, area.pl, power, R).xi_star
    if solver == "centered-benchmark":
        return beacon_count * power * area.pl.K * R ** (-area.pl.gamma)
    grid = grid_for_size(R, grid_size)
    return solve_placement(solver, beacon_count, grid, area.pl, power, seed=seed).worst_power_w


def max_coverage_radius(beacon_count: int, area: AreaSpec, solver: str = "ode-pobes",
                        tolerance: float = 0.1, r_min: float = 1e-3, seed: int = 0) -> CoverageResult:
    """Largest disk radius whose optimized worst-point mean power still reaches ``xi0``.

    Bisection on ``R``; every probe re-solves the placement and checks that the
    worst-point power strictly decreases over a small step in ``R``, raising
    :class:`MonotonicityError` otherwise.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    probes = 0

    def feasible(R):
        nonlocal probes
        probes += 1
        p = worst_power_at_radius(beacon_count, area, R, solver, seed)
        eps = min(tolerance / 10, R * 1e-3)
        p_next = worst_power_at_radius(beacon_count, area, R + eps, solver, seed)
        if not p_next < p:
            raise MonotonicityError(
                f"worst-point power did not decrease from R={R:.6g} ({p:.6g} W) "
                f"to R={R + eps:.6g} ({p_next:.6g} W)")
        return p >= area.xi0, p

    ok, p_lo = feasible(r_min)
    if not ok:
        return CoverageResult(beacon_count, 0.0, False, p_lo, probes, solver)
    lo, hi = r_min, max(area.R, 2 * r_min)
    while True:
        ok, p = feasible(hi)
        if not ok:
            break
        lo, p_lo = hi, p
        hi *= 2
        if hi > 1e9:
            raise MonotonicityError("coverage radius did not bracket below 1e9 m")
    # halve the bracket past the tolerance so the feasible end is within it with margin
    while hi - lo > tolerance / 2:
        mid = 0.5 * (lo + hi)
        ok, p = feasible(mid)
        if ok:
            lo, p_lo = mid, p
        else:
            hi = mid
    return CoverageResult(beacon_count, lo, True, p_lo, probes, solver)


def centered_coverage_radius(area: AreaSpec) -> float:
    """Closed-form coverage radius of one beacon at the center with the full budget."""
    return (area.P_T * area.pl.K / area.xi0) ** (1.0 / area.pl.gamma)


@dataclass(frozen=True)
class AntennaStudy:
    beacon_counts: tuple
    antenna_counts: tuple
    estimates: tuple             # estimates[i][j] for beacon_counts[i], antenna_counts[j]

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[e.probability for e in row] for row in self.estimates])


def antenna_study(area: AreaSpec, beacon_counts, antenna_counts, samples: int = 1_000_000,
                  seed: int = 0, grid: DiskGrid | None = None, audit: int = 5,
                  n_jobs: int = 1) -> AntennaStudy:
    """Worst-point outage under antenna switching for every (beacons, antennas) pair.

    Deployments come from Ode-PoBes with the budget split evenly; antennas
    change only the fading statistics, not the mean field.
    """
    beacon_counts, antenna_counts = tuple(beacon_counts), tuple(antenna_counts)
    if not beacon_counts or not antenna_counts:
        raise ValueError("beacon_counts and antenna_counts must be non-empty")
    grid = grid or grid_for_size(area.R, 1000)
    rows = []
    for B in beacon_counts:
        power = area.P_T / B
        rep = solve_placement("ode-pobes", B, grid, area.pl, power)
        row = []
        for A in antenna_counts:
            dep = Deployment(rep.positions, power, A)
            row.append(network_outage(dep, grid, area, A, samples, seed=[seed, B],
                                      audit=audit, n_jobs=n_jobs))
        rows.append(tuple(row))
    return AntennaStudy(beacon_counts, antenna_counts, tuple(rows))
