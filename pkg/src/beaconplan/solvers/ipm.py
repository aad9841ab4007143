"""Log-barrier interior-point solver for free beacon positions.

Maximizes the power-mean surrogate ``f_k`` of the grid field subject to
``||n_b||^2 - R^2 + t_b = 0`` with slacks ``t_b > 0``::

    minimize  -f_k(n) - mu * sum_b log t_b

The Lagrangian is taken as ``-f_k - mu sum log t - sum_b lambda_b c_b``, which
gives the stationarity blocks ``-grad f_k - 2 lambda_b n_b`` and
``mu / t_b + lambda_b`` (zero at ``lambda_b = -mu / t_b``).

The problem is solved in normalized units (lengths over ``R``, powers over
``P K R**-gamma``) so that tolerances and the barrier schedule are scale-free.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..channel import PathLoss
from ..exceptions import SolverFailure
from ..geometry import DiskGrid
from ..objective import grid_worst_power, powermean_derivatives
from .ec import ode_pobes
from .report import SolverReport


@dataclass(frozen=True)
class IPMConfig:
    k: float = -25.0
    mu0: float = 1e-2            # relative to f_k at the initial point
    mu_decay: float = 0.2
    mu_final: float = 1e-8       # relative to f_k at the initial point
    newton_tol: float = 1e-10    # relative to f_k at the initial point
    max_outer: int = 40
    max_inner: int = 100
    fd_fallback: bool = False
    init: str = "ode-pobes"      # or "random"
    init_noise: float = 0.01     # fraction of R

    def __post_init__(self):
        if not self.k < 0:
            raise ValueError("k must be negative")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if not 0 < self.mu_decay < 1:
            raise ValueError("mu_decay must lie in (0, 1)")
        if not (self.newton_tol > 0 and self.mu_final > 0):
            raise ValueError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be positive")
        if self.init not in ("ode-pobes", "random"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class IPMState:
    positions: np.ndarray        # (B, 2)
    slacks: np.ndarray           # (B,)
    multipliers: np.ndarray      # (B,)

    @classmethod
    def feasible(cls, positions, radius: float, mu: float) -> "IPMState":
        pos = np.array(positions, dtype=float)
        t = radius**2 - np.einsum("bi,bi->b", pos, pos)
        return cls(pos, t, -mu / t)

    def copy(self) -> "IPMState":
        return IPMState(self.positions.copy(), self.slacks.copy(), self.multipliers.copy())


def _residual_blocks(state: IPMState, grad_f: np.ndarray, radius: float, mu: float):
    x, t, lam = state.positions, state.slacks, state.multipliers
    r_x = -grad_f - 2.0 * lam[:, None] * x
    r_t = mu / t + lam
    r_c = np.einsum("bi,bi->b", x, x) - radius**2 + t
    return r_x, r_t, r_c


def kkt_residual(state: IPMState, grid: DiskGrid, pl: PathLoss, power: float,
                 k: float, mu: float) -> float:
    """Norm of the stacked KKT residual of the barrier subproblem at ``mu``."""
    _, grad, _ = powermean_derivatives(grid.points, state.positions, power, pl, k)
    r_x, r_t, r_c = _residual_blocks(state, grad, grid.radius, mu)
    return float(np.sqrt(np.sum(r_x**2) + np.sum(r_t**2) + np.sum(r_c**2)))


def _fd_hessian(points, x, pl, k, h=1e-6):
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        _, gp, _ = powermean_derivatives(points, (x.ravel() + e).reshape(-1, 2), 1.0, pl, k)
        _, gm, _ = powermean_derivatives(points, (x.ravel() - e).reshape(-1, 2), 1.0, pl, k)
        H[i] = (gp - gm).ravel() / (2 * h)
    return 0.5 * (H + H.T)


def _initial_positions(B, grid, pl, config, rng):
    R = grid.radius
    if config.init == "random":
        r = R * np.sqrt(rng.random(B)) * 0.95
        a = 2 * np.pi * rng.random(B)
        return np.column_stack([r * np.cos(a), r * np.sin(a)])
    sol = ode_pobes(B, pl, 1.0, R)
    pos = sol.positions()
    return pos + rng.uniform(-config.init_noise * R, config.init_noise * R, size=pos.shape)


def ipm_solve(beacon_count: int, grid: DiskGrid, pl: PathLoss, power: float,
              config: IPMConfig = IPMConfig(), initial=None, seed: int | None = 0) -> SolverReport:
    """Place ``beacon_count`` beacons by a primal-dual log-barrier Newton method.

    Parameters
    ----------
    beacon_count : int
    grid : DiskGrid
        Proxy harvester locations; the disk radius is ``grid.radius``.
    pl : PathLoss
    power : float
        Per-beacon power in watts.
    config : IPMConfig
    initial : array-like, optional
        Starting positions in meters; overrides ``config.init``.
    seed : int, optional
        Seeds the perturbation of the default starting point.

    Returns
    -------
    SolverReport
        ``worst_power_w`` is the true grid minimum at the returned positions;
        ``surrogate_value`` is ``f_k`` there.
    """
    t_start = time.perf_counter()
    if beacon_count < 1:
        raise ValueError("beacon_count must be at least 1")
    if grid.size == 0:
        raise ValueError("empty grid")
    B = int(beacon_count)
    R = grid.radius
    rng = np.random.default_rng(seed)
    pos0 = _initial_positions(B, grid, pl, config, rng) if initial is None else np.array(initial, float)
    if pos0.shape != (B, 2):
        raise ValueError(f"initial positions must have shape ({B}, 2)")
    if not np.all(np.isfinite(pos0)):
        raise ValueError("initial positions must be finite")

    # normalized problem: unit disk, unit power scale
    pts = grid.points / R
    upl = PathLoss(1.0, pl.gamma)
    scale_w = power * pl.K * R ** (-pl.gamma)
    k = config.k

    x = pos0 / R
    nrm = np.hypot(x[:, 0], x[:, 1])
    x = np.where((nrm > 0.999)[:, None], x * (0.999 / np.maximum(nrm, 1e-300))[:, None], x)

    f0, _, _ = powermean_derivatives(pts, x, 1.0, upl, k)
    mu = config.mu0 * f0
    mu_stop = config.mu_final * f0
    tol = config.newton_tol * f0
    state = IPMState.feasible(x, 1.0, mu)
    last_good = state.copy()

    trace = []
    worst_history = []
    newton_iters = 0
    outer = 0
    converged = False
    res = np.inf

    def barrier(xx):
        t = 1.0 - np.einsum("bi,bi->b", xx, xx)
        if np.any(t <= 0):
            return np.inf
        fv, _, _ = powermean_derivatives(pts, xx, 1.0, upl, k)
        return -fv - mu * np.sum(np.log(t))

    while outer < config.max_outer:
        outer += 1
        inner_ok = False
        for _ in range(config.max_inner):
            fv, grad, hess = powermean_derivatives(pts, state.positions, 1.0, upl, k,
                                                   hessian=not config.fd_fallback)
            if config.fd_fallback:
                hess = _fd_hessian(pts, state.positions, upl, k)
            r_x, r_t, r_c = _residual_blocks(state, grad, 1.0, mu)
            res = float(np.sqrt(np.sum(r_x**2) + np.sum(r_t**2) + np.sum(r_c**2)))
            if not np.isfinite(res) or not np.all(np.isfinite(hess)):
                raise SolverFailure("non-finite KKT residual", state=last_good)
            last_good = state.copy()
            if res < tol:
                inner_ok = True
                break

            xb, t, lam = state.positions, state.slacks, state.multipliers
            n = 2 * B
            # condensed x-block: -hess f + 2 diag(-lambda) + sum_b 4 (mu/t^2) x_b x_b^T
            W = -hess
            W[np.diag_indices(n)] -= 2.0 * np.repeat(lam, 2)
            for b in range(B):
                W[2 * b:2 * b + 2, 2 * b:2 * b + 2] += 4.0 * mu / t[b] ** 2 * np.outer(xb[b], xb[b])
            rhs = -r_x - 2.0 * xb * (r_t + mu / t**2 * r_c)[:, None]
            delta = 0.0
            diag_scale = max(np.abs(np.diag(W)).max(), 1e-12)
            while True:
                try:
                    c = cho_factor(W + delta * np.eye(n), lower=True, check_finite=True)
                    break
                except LinAlgError:
                    delta = max(1e-8 * diag_scale, 10.0 * delta)
                    if delta > 1e12 * diag_scale:
                        raise SolverFailure("could not regularize the KKT system", state=last_good)
            dx = cho_solve(c, rhs.ravel()).reshape(B, 2)
            dt = -r_c - 2.0 * np.einsum("bi,bi->b", xb, dx)
            dlam = -r_t + mu / t**2 * dt

            # backtracking: stay strictly inside the disk, Armijo on the barrier objective
            phi0 = barrier(xb)
            slope = float(np.dot(-grad.ravel() + (2 * mu * xb / t[:, None]).ravel(), dx.ravel()))
            alpha = 1.0
            while True:
                xn = xb + alpha * dx
                tn = 1.0 - np.einsum("bi,bi->b", xn, xn)
                # slack of a few ulps: near convergence decreases drop below rounding
                armijo = phi0 + 1e-4 * alpha * min(slope, 0.0) + 1e-14 * abs(phi0)
                if np.all(tn > 0.01 * t) and barrier(xn) <= armijo:
                    break
                alpha *= 0.5
                if alpha < 1e-12:
                    break
            if alpha < 1e-12:
                # no progress possible at this mu; accept the current point
                inner_ok = res < 1e3 * tol
                break
            state = IPMState(xn, tn, lam + alpha * dlam)
            newton_iters += 1

        worst = grid_worst_power(state.positions * R, grid, pl, power)
        worst_history.append(worst)
        trace.append((outer, float(fv) * scale_w, res, (time.perf_counter() - t_start) * 1e3))
        if mu <= mu_stop:
            converged = inner_ok
            break
        mu *= config.mu_decay
        # re-center the multipliers on the new barrier parameter
        state = IPMState(state.positions, state.slacks, -mu / state.slacks)

    pos = state.positions * R
    fv, _, _ = powermean_derivatives(pts, state.positions, 1.0, upl, k)
    nrm = np.hypot(pos[:, 0], pos[:, 1])
    projected = bool(np.any(nrm > R))
    if projected:
        pos = np.where((nrm > R)[:, None], pos * (R / nrm)[:, None], pos)
    elapsed = (time.perf_counter() - t_start) * 1e3
    return SolverReport(
        solver="ipm",
        positions=pos,
        power_per_beacon=power,
        worst_power_w=grid_worst_power(pos, grid, pl, power),
        surrogate_value=float(fv) * scale_w,
        iterations=newton_iters,
        wall_time_ms=elapsed,
        converged=converged,
        seed=seed,
        projected=projected,
        trace=trace,
        details={"outer_iterations": outer, "final_mu": mu * scale_w, "kkt_residual": res,
                 "worst_history": worst_history},
    )
