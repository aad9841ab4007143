from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..channel import watts_to_dbm


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one placement run.

    ``worst_power_w`` is always the true grid minimum of the mean field at the
    returned positions. ``surrogate_value`` holds the solver's own objective
    where it differs (the smoothed minimum for IPM, the closed-form worst-point
    power for Ode-PoBes, the barrier fitness for PSO).
    """

    solver: str
    positions: np.ndarray
    power_per_beacon: float
    worst_power_w: float
    surrogate_value: float | None
    iterations: int
    wall_time_ms: float
    converged: bool
    seed: int | None = None
    projected: bool = False
    trace: list = field(default_factory=list, repr=False)
    details: dict = field(default_factory=dict)

    @property
    def beacon_count(self) -> int:
        return len(self.positions)

    @property
    def worst_power_dbm(self) -> float:
        return float(watts_to_dbm(self.worst_power_w))

    def to_dict(self, include_timing: bool = True) -> dict:
        d = asdict(self)
        d["positions"] = [[float(x), float(y)] for x, y in np.asarray(self.positions)]
        d["worst_power_dbm"] = self.worst_power_dbm
        d["beacon_count"] = self.beacon_count
        d.pop("trace")
        if not include_timing:
            d.pop("wall_time_ms")
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def trace_csv(self) -> str:
        lines = ["iter,objective,residual_or_gbest,wall_ms"]
        for it, obj, res, ms in self.trace:
            lines.append(f"{it},{obj!r},{res!r},{ms!r}")
        return "\n".join(lines) + "\n"
