"""Placement solvers: EC sweep (Ode-PoBes), interior point, particle swarm, centered benchmark."""

from __future__ import annotations

from ..channel import PathLoss
from ..geometry import DiskGrid
from .ec import (
    ECSolution,
    ECTopology,
    EdgeStationaryTerms,
    approx_ring_radius,
    centered_report,
    edge_power,
    ode_pobes,
    ode_pobes_report,
    worst_edge_angle,
    worst_of_topology,
)
from .ipm import IPMConfig, IPMState, ipm_solve, kkt_residual
from .pso import PSOConfig, pso_solve
from .report import SolverReport

SOLVERS = ("ode-pobes", "ipm", "pso", "centered-benchmark")


def solve_placement(solver: str, beacon_count: int, grid: DiskGrid, pl: PathLoss, power: float,
                    seed: int | None = 0, ipm_config: IPMConfig | None = None,
                    pso_config: PSOConfig | None = None, delta_r: float | None = None) -> SolverReport:
    """Dispatch to one of :data:`SOLVERS` and return its report."""
    if solver == "ode-pobes":
        return ode_pobes_report(beacon_count, grid, pl, power, delta_r)
    if solver == "ipm":
        return ipm_solve(beacon_count, grid, pl, power, ipm_config or IPMConfig(), seed=seed)
    if solver == "pso":
        return pso_solve(beacon_count, grid, pl, power, pso_config or PSOConfig(),
                         seed=0 if seed is None else seed)
    if solver == "centered-benchmark":
        return centered_report(beacon_count, grid, pl, power)
    raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")


__all__ = [
    "SOLVERS",
    "ECSolution",
    "ECTopology",
    "EdgeStationaryTerms",
    "IPMConfig",
    "IPMState",
    "PSOConfig",
    "SolverReport",
    "approx_ring_radius",
    "centered_report",
    "edge_power",
    "ipm_solve",
    "kkt_residual",
    "ode_pobes",
    "ode_pobes_report",
    "pso_solve",
    "solve_placement",
    "worst_edge_angle",
    "worst_of_topology",
]
