"""Placement and outage planning for RF power beacons charging location-unknown harvesters."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .channel import (
    Deployment,
    PathLoss,
    RicianFading,
    dbm_to_watts,
    mean_incident_power,
    sample_incident_power,
    watts_to_dbm,
)
from .exceptions import BeaconPlanError, ConfigError, MonotonicityError, SingularityError, SolverFailure
from .geometry import DiskGrid, Point2, PointSet, angular_positions, grid_for_size, make_disk_grid
from .objective import PowerField, SmoothingSpec, evaluate_field, smoothed_min, worst_point
from .planner import (
    AreaSpec,
    OutageEstimate,
    antenna_study,
    estimate_outage,
    max_coverage_radius,
    min_beacons,
    network_outage,
    outage_curve,
)
from .solvers import SOLVERS, IPMConfig, PSOConfig, SolverReport, ode_pobes, solve_placement

__all__ = [
    "AreaSpec",
    "BeaconPlanError",
    "ConfigError",
    "Deployment",
    "DiskGrid",
    "IPMConfig",
    "MonotonicityError",
    "OutageEstimate",
    "PSOConfig",
    "PathLoss",
    "Point2",
    "PointSet",
    "PowerField",
    "RicianFading",
    "SOLVERS",
    "SingularityError",
    "SmoothingSpec",
    "SolverFailure",
    "SolverReport",
    "angular_positions",
    "antenna_study",
    "dbm_to_watts",
    "estimate_outage",
    "evaluate_field",
    "grid_for_size",
    "make_disk_grid",
    "max_coverage_radius",
    "mean_incident_power",
    "min_beacons",
    "network_outage",
    "ode_pobes",
    "outage_curve",
    "sample_incident_power",
    "smoothed_min",
    "solve_placement",
    "watts_to_dbm",
    "worst_point",
]
