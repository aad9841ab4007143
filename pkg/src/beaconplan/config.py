"""Flat JSON run configuration with unit-suffixed keys.

Every key has a fixed type and default. Unknown keys, wrong types and
out-of-range values are rejected before any computation starts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .channel import PathLoss, dbm_to_watts
from .exceptions import ConfigError
from .planner import AreaSpec
from .solvers import SOLVERS, IPMConfig, PSOConfig

STOCHASTIC_SOLVERS = ("ipm", "pso")


def _default(value):
    return field(default_factory=lambda: list(value))


@dataclass(frozen=True)
class RunConfig:
    # area and channel
    radius_m: float = 100.0
    tx_power_total_w: float = 10.0
    xi0_dbm: float = -22.0
    path_loss_k: float = 1.0
    path_loss_exponent: float = 3.0
    rician_kappa: float = 3.0
    zeta: float = 1e-3
    # grid
    grid_points: int = 1000
    # placement
    solver: str = "ode-pobes"
    beacon_count: int = 3
    antenna_count: int = 1
    delta_r_m: float | None = None
    ipm_k: float = -25.0
    ipm_mu0: float = 1e-2
    ipm_mu_decay: float = 0.2
    ipm_mu_final: float = 1e-8
    ipm_newton_tol: float = 1e-10
    ipm_max_outer: int = 40
    ipm_max_inner: int = 100
    ipm_init: str = "ode-pobes"
    ipm_init_noise: float = 0.01
    pso_swarm_size: int = 50
    pso_inertia: float = 0.729
    pso_cognitive: float = 1.49445
    pso_social: float = 1.49445
    pso_epsilon: float = 1e-12
    pso_max_iters: int = 2000
    pso_stall_iters: int = 200
    pso_velocity_clamp: float = 0.2
    # Monte Carlo
    samples: int = 1_000_000
    seed: int | None = None
    audit_points: int = 5
    n_jobs: int = 1
    # sweeps
    compare_beacon_min: int = 1
    compare_beacon_max: int = 6
    compare_solvers: list = _default(SOLVERS)
    sweep_zeta: list = _default([1e-3])
    sweep_radius_m: list = _default([100.0])
    beacon_cap: int = 15
    coverage_beacon_counts: list = _default([1, 3, 7, 10])
    coverage_tolerance_m: float = 0.1
    antenna_beacon_counts: list = _default([1, 2, 3, 4])
    antenna_counts: list = _default([1, 2, 4, 8])
    # output
    output_dir: str = "out"
    heatmap: bool = False

    def __post_init__(self):
        _check_types(self)
        _check_ranges(self)

    # -- construction -------------------------------------------------------
    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(data) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def override(self, **changes) -> "RunConfig":
        unknown = sorted(set(changes) - set(self.keys()))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return replace(self, **changes)

    # -- derived objects ----------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    @property
    def path_loss(self) -> PathLoss:
        return PathLoss(self.path_loss_k, self.path_loss_exponent)

    @property
    def xi0_w(self) -> float:
        return float(dbm_to_watts(self.xi0_dbm))

    def area(self) -> AreaSpec:
        return AreaSpec(R=self.radius_m, pl=self.path_loss, kappa=self.rician_kappa,
                        P_T=self.tx_power_total_w, xi0=self.xi0_w, zeta=self.zeta)

    def ipm_config(self) -> IPMConfig:
        return IPMConfig(k=self.ipm_k, mu0=self.ipm_mu0, mu_decay=self.ipm_mu_decay,
                         mu_final=self.ipm_mu_final, newton_tol=self.ipm_newton_tol,
                         max_outer=self.ipm_max_outer, max_inner=self.ipm_max_inner,
                         init=self.ipm_init, init_noise=self.ipm_init_noise)

    def pso_config(self) -> PSOConfig:
        return PSOConfig(swarm_size=self.pso_swarm_size, inertia=self.pso_inertia,
                         cognitive=self.pso_cognitive, social=self.pso_social,
                         epsilon=self.pso_epsilon, max_iters=self.pso_max_iters,
                         stall_iters=self.pso_stall_iters, velocity_clamp=self.pso_velocity_clamp)


_ELEMENT_TYPES = {
    "compare_solvers": str,
    "sweep_zeta": float,
    "sweep_radius_m": float,
    "coverage_beacon_counts": int,
    "antenna_beacon_counts": int,
    "antenna_counts": int,
}


def _is_type(value: Any, kind) -> bool:
    if kind is bool:
        return isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, kind)


def _check_types(cfg: RunConfig):
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        spec = str(f.type)
        optional = "None" in spec
        if value is None:
            if not optional:
                raise ConfigError(f"{f.name} may not be null")
            continue
        if f.name in _ELEMENT_TYPES:
            kind = _ELEMENT_TYPES[f.name]
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"{f.name} must be a non-empty list")
            bad = [v for v in value if not _is_type(v, kind)]
            if bad:
                raise ConfigError(f"{f.name} entries must be {kind.__name__}, got {bad[0]!r}")
            continue
        kind = {"float": float, "int": int, "str": str, "bool": bool}[spec.split(" ")[0]]
        if not _is_type(value, kind):
            raise ConfigError(f"{f.name} must be {kind.__name__}, got {value!r}")


def _check_ranges(cfg: RunConfig):
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg.radius_m > 0, "radius_m must be positive")
    need(cfg.tx_power_total_w > 0, "tx_power_total_w must be positive")
    need(cfg.path_loss_k > 0 and cfg.path_loss_exponent > 0, "path loss parameters must be positive")
    need(cfg.rician_kappa >= 0, "rician_kappa must be non-negative")
    need(0 < cfg.zeta < 1, "zeta must lie in (0, 1)")
    need(cfg.grid_points >= 7, "grid_points must be at least 7")
    need(cfg.solver in SOLVERS, f"solver must be one of {SOLVERS}")
    need(cfg.beacon_count >= 1, "beacon_count must be at least 1")
    need(cfg.antenna_count >= 1, "antenna_count must be at least 1")
    need(cfg.delta_r_m is None or cfg.delta_r_m > 0, "delta_r_m must be positive")
    need(cfg.samples >= 10_000, "samples must be at least 10000")
    need(cfg.seed is None or cfg.seed >= 0, "seed must be non-negative")
    need(cfg.audit_points >= 1, "audit_points must be at least 1")
    need(cfg.n_jobs >= 1, "n_jobs must be at least 1")
    need(1 <= cfg.compare_beacon_min <= cfg.compare_beacon_max <= 15,
         "compare range must satisfy 1 <= compare_beacon_min <= compare_beacon_max <= 15")
    need(all(s in SOLVERS for s in cfg.compare_solvers), f"compare_solvers must be drawn from {SOLVERS}")
    need(all(0 < z < 1 for z in cfg.sweep_zeta), "sweep_zeta entries must lie in (0, 1)")
    need(all(r > 0 for r in cfg.sweep_radius_m), "sweep_radius_m entries must be positive")
    need(cfg.beacon_cap >= 1, "beacon_cap must be at least 1")
    need(all(b >= 1 for b in cfg.coverage_beacon_counts), "coverage_beacon_counts must be positive")
    need(cfg.coverage_tolerance_m > 0, "coverage_tolerance_m must be positive")
    need(all(b >= 1 for b in cfg.antenna_beacon_counts), "antenna_beacon_counts must be positive")
    need(all(a >= 1 for a in cfg.antenna_counts), "antenna_counts must be positive")
    need(bool(cfg.output_dir), "output_dir must be non-empty")
    # solver configs validate themselves
    try:
        cfg.ipm_config()
        cfg.pso_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
