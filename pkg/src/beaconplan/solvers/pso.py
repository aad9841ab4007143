"""Particle swarm search over beacon positions with a boundary barrier."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..channel import PathLoss
from ..geometry import DiskGrid
from ..objective import grid_worst_power
from .report import SolverReport


@dataclass(frozen=True)
class PSOConfig:
    """Swarm hyperparameters.

    ``epsilon`` is relative to ``P K R**-gamma``; ``velocity_clamp`` is a fraction of ``R``.
    """

    swarm_size: int = 50
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    epsilon: float = 1e-12
    max_iters: int = 2000
    stall_iters: int = 200
    velocity_clamp: float = 0.2
    improve_tol: float = 1e-6

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be at least 2")
        if not (self.inertia > 0 and self.cognitive > 0 and self.social > 0):
            raise ValueError("inertia and acceleration coefficients must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1 or self.stall_iters < 1:
            raise ValueError("iteration limits must be positive")
        if not self.velocity_clamp > 0:
            raise ValueError("velocity_clamp must be positive")


def _inv_pow(rho2: np.ndarray, gamma: float) -> np.ndarray:
    """``rho2 ** (-gamma/2)``, avoiding the generic power for integer exponents."""
    if float(gamma).is_integer() and 1 <= gamma <= 8:
        gi = int(gamma)
        out = rho2 ** (gi // 2) if gi >= 2 else np.ones_like(rho2)
        if gi % 2:
            out = out * np.sqrt(rho2)
        with np.errstate(divide="ignore"):
            return 1.0 / out
    with np.errstate(divide="ignore"):
        return rho2 ** (-gamma / 2)


def swarm_fitness(swarm: np.ndarray, points: np.ndarray, power: float, pl: PathLoss,
                  radius: float, epsilon: float) -> np.ndarray:
    """Grid-minimum mean power minus a barrier that grows near the disk edge.

    ``swarm`` has shape ``(Q, B, 2)``; returns ``(Q,)``. Particles outside the
    disk get ``-inf``. A grid point under a beacon does not count toward the minimum.
    """
    Q, B, _ = swarm.shape
    flat = swarm.reshape(Q * B, 2)
    rho2 = (np.einsum("bi,bi->b", flat, flat)[:, None]
            + np.einsum("si,si->s", points, points)[None, :]
            - 2.0 * flat @ points.T)                              # (Q*B, S)
    np.maximum(rho2, 0.0, out=rho2)
    field = _inv_pow(rho2, pl.gamma).reshape(Q, B, -1).sum(axis=1)
    worst = power * pl.K * field.min(axis=1)
    slack = radius - np.hypot(swarm[..., 0], swarm[..., 1])       # (Q, B)
    with np.errstate(divide="ignore"):
        barrier = np.where(slack > 0, epsilon / np.where(slack > 0, slack, 1.0), np.inf).sum(axis=1)
    return worst - barrier


def _reflect(z: np.ndarray, v: np.ndarray, radius: float):
    """Mirror positions that left the disk back inside; reverse their velocity."""
    nrm = np.hypot(z[..., 0], z[..., 1])
    out = nrm >= radius
    if np.any(out):
        target = np.clip(2 * radius - nrm[out], 0.0, radius * (1 - 1e-9))
        z[out] *= (target / nrm[out])[:, None]
        v[out] *= -1.0
    return z, v


def pso_solve(beacon_count: int, grid: DiskGrid, pl: PathLoss, power: float,
              config: PSOConfig = PSOConfig(), seed: int = 0) -> SolverReport:
    """Maximize the barrier fitness with a global-best particle swarm.

    Particles start uniformly in the disk. The search stops after
    ``config.max_iters`` iterations or ``config.stall_iters`` iterations without
    improving the global best. Deterministic for a given ``seed``.
    """
    t_start = time.perf_counter()
    if beacon_count < 1:
        raise ValueError("beacon_count must be at least 1")
    B, Q, R = int(beacon_count), config.swarm_size, grid.radius
    rng = np.random.default_rng(seed)
    eps = config.epsilon * power * pl.K * R ** (-pl.gamma)
    vmax = config.velocity_clamp * R

    rr = R * np.sqrt(rng.random((Q, B)))
    aa = 2 * np.pi * rng.random((Q, B))
    z = np.stack([rr * np.cos(aa), rr * np.sin(aa)], axis=-1)
    v = rng.uniform(-vmax, vmax, size=z.shape) * 0.1

    fit = swarm_fitness(z, grid.points, power, pl, R, eps)
    pbest, pbest_fit = z.copy(), fit.copy()
    g = int(np.argmax(pbest_fit))
    gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])

    trace = [(0, gbest_fit, gbest_fit, (time.perf_counter() - t_start) * 1e3)]
    stall = 0
    it = 0
    for it in range(1, config.max_iters + 1):
        r1 = rng.random((Q, B, 1))
        r2 = rng.random((Q, B, 1))
        v = (config.inertia * v
             + config.cognitive * r1 * (pbest - z)
             + config.social * r2 * (gbest[None] - z))
        np.clip(v, -vmax, vmax, out=v)
        z = z + v
        z, v = _reflect(z, v, R)

        fit = swarm_fitness(z, grid.points, power, pl, R, eps)
        better = fit > pbest_fit
        pbest[better] = z[better]
        pbest_fit[better] = fit[better]
        g = int(np.argmax(pbest_fit))
        if pbest_fit[g] > gbest_fit:
            # only material gains reset the stall window
            stall = 0 if pbest_fit[g] > gbest_fit * (1 + config.improve_tol) else stall + 1
            gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
        else:
            stall += 1
        if it % 10 == 0:
            trace.append((it, float(fit.max()), gbest_fit, (time.perf_counter() - t_start) * 1e3))
        if stall >= config.stall_iters:
            break

    nrm = np.hypot(gbest[:, 0], gbest[:, 1])
    projected = bool(np.any(nrm > R))
    pos = np.where((nrm > R)[:, None], gbest * (R / np.maximum(nrm, 1e-300))[:, None], gbest)
    elapsed = (time.perf_counter() - t_start) * 1e3
    return SolverReport(
        solver="pso",
        positions=pos,
        power_per_beacon=power,
        worst_power_w=grid_worst_power(pos, grid, pl, power),
        surrogate_value=gbest_fit,
        iterations=it,
        wall_time_ms=elapsed,
        converged=stall >= config.stall_iters,
        seed=seed,
        projected=projected,
        trace=trace,
    )
