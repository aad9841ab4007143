"""Worst-point objective over a grid and its smooth generalized-mean surrogate."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .channel import Deployment, PathLoss, distances
from .exceptions import SingularityError
from .geometry import DiskGrid

SMOOTHING_KINDS = ("power-mean", "softmax", "quasimax")


@dataclass(frozen=True)
class PowerField:
    """Mean incident power (watts) at every grid point."""

    grid: DiskGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.values))

    def lowest(self, n: int) -> np.ndarray:
        """Indices of the ``n`` lowest values, ascending; ties by index."""
        return np.argsort(self.values, kind="stable")[:n]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "mean_power_watts"])
        for (x, y), v in zip(self.grid.points, self.values):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(v))])
        return buf.getvalue()


@dataclass(frozen=True)
class SmoothingSpec:
    kind: str = "power-mean"
    k: float = -25.0

    def __post_init__(self):
        if self.kind not in SMOOTHING_KINDS:
            raise ValueError(f"unknown smoothing kind {self.kind!r}; choose from {SMOOTHING_KINDS}")
        if self.k == 0:
            raise ValueError("smoothing exponent k must be non-zero")


def evaluate_field(deployment: Deployment, grid: DiskGrid, pl: PathLoss,
                   on_coincident: str = "raise") -> PowerField:
    """Mean incident power at every grid point.

    A grid point sitting exactly on a beacon raises :class:`SingularityError`
    unless ``on_coincident="exclude"``, in which case its value is ``inf`` so it
    can never be the worst point.
    """
    if on_coincident == "raise":
        try:
            d = distances(grid.points, deployment.positions)
        except SingularityError as exc:
            raise SingularityError(
                f"grid {exc}", point_index=exc.point_index, beacon_index=exc.beacon_index
            ) from None
    elif on_coincident == "exclude":
        diff = grid.points[:, None, :] - deployment.positions[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
    else:
        raise ValueError(f"on_coincident must be 'raise' or 'exclude', got {on_coincident!r}")
    with np.errstate(divide="ignore"):
        vals = deployment.power * pl.K * np.sum(d ** (-pl.gamma), axis=1)
    return PowerField(grid, vals)


def grid_worst_power(positions, grid: DiskGrid, pl: PathLoss, power: float) -> float:
    """True grid minimum of the mean field, ignoring points under a beacon."""
    return evaluate_field(Deployment(positions, power), grid, pl, on_coincident="exclude").min


def worst_point(field: PowerField) -> tuple[int, float]:
    """Index and value of the grid minimum (first index on ties)."""
    i = field.argmin
    return i, float(field.values[i])


def _as_values(field) -> np.ndarray:
    return field.values if isinstance(field, PowerField) else np.asarray(field, dtype=float)


def smoothed_min(field, spec: SmoothingSpec = SmoothingSpec()) -> float:
    """Smooth approximation of ``min(field)``.

    The power mean ``((1/n) sum x**k) ** (1/k)`` is evaluated as
    ``exp((logsumexp(k log x) - log n) / k)`` so ``k = -25`` on values near
    1e-10 W neither overflows nor underflows.
    """
    x = _as_values(field)
    if x.size == 0:
        raise ValueError("empty field")
    if spec.kind == "power-mean":
        if np.any(x <= 0):
            raise ValueError("power mean requires strictly positive values")
        return float(np.exp((logsumexp(spec.k * np.log(x)) - np.log(x.size)) / spec.k))
    if spec.kind == "softmax":
        z = spec.k * x
        w = np.exp(z - z.max())
        return float(np.dot(w, x) / w.sum())
    return float(logsumexp(spec.k * x) / spec.k)


def powermean_derivatives(points: np.ndarray, positions: np.ndarray, power: float,
                          pl: PathLoss, k: float, hessian: bool = False):
    """Power-mean surrogate of the field and its derivatives in beacon positions.

    Returns ``(f, grad, hess)`` where ``grad`` has shape ``(B, 2)`` and ``hess``
    (``None`` unless requested) is ``(2B, 2B)`` with coordinates ordered
    ``x_1, y_1, x_2, ...``. Works with the softmax weights
    ``w_s = (xi_s / f)**k / |S|`` which sum to one, so that
    ``grad f = f * sum_s w_s * grad(log xi_s)``.
    """
    g = pl.gamma
    diff = points[:, None, :] - positions[None, :, :]          # (S, B, 2)
    rho2 = np.einsum("sbi,sbi->sb", diff, diff)
    if np.any(rho2 == 0):
        s, b = np.argwhere(rho2 == 0)[0]
        raise SingularityError(f"grid point {s} coincides with beacon {b}",
                               point_index=int(s), beacon_index=int(b))
    pk = power * pl.K
    rpow = rho2 ** (-g / 2.0)                                     # rho**-gamma
    xi = pk * rpow.sum(axis=1)                                    # (S,)
    logxi = np.log(xi)
    z = k * logxi
    lse = logsumexp(z)
    f = float(np.exp((lse - np.log(xi.size)) / k))
    w = np.exp(z - lse)                                           # (S,)

    coef = g * pk * rpow / rho2                                   # gamma P K rho**(-gamma-2)
    dxi = coef[..., None] * diff                                  # d xi_s / d n_b, (S, B, 2)
    G = dxi / xi[:, None, None]                                   # grad log xi_s
    gbar = np.einsum("s,sbi->bi", w, G)
    grad = f * gbar
    if not hessian:
        return f, grad, None

    B = positions.shape[0]
    Gf = G.reshape(xi.size, 2 * B)
    gb = gbar.reshape(2 * B)
    H = (k - 1.0) * np.einsum("s,si,sj->ij", w, Gf, Gf) - k * np.outer(gb, gb)
    # block-diagonal second derivative of xi_s in n_b
    ws = w / xi
    c2 = g * (g + 2.0) * pk * rpow / rho2**2                     # (S, B)
    blocks = np.einsum("s,sb,sbi,sbj->bij", ws, c2, diff, diff)
    blocks -= np.einsum("s,sb->b", ws, coef)[:, None, None] * np.eye(2)
    for b in range(B):
        H[2 * b:2 * b + 2, 2 * b:2 * b + 2] += blocks[b]
    hess = f * (H + np.outer(gb, gb))
    return f, grad, hess


def smoothed_min_gradient(deployment: Deployment, grid: DiskGrid, pl: PathLoss,
                          spec: SmoothingSpec = SmoothingSpec()) -> np.ndarray:
    """Gradient of the power-mean surrogate with respect to each beacon position, ``(B, 2)``."""
    if spec.kind != "power-mean":
        raise NotImplementedError("analytic gradients are provided for the power mean only")
    _, grad, _ = powermean_derivatives(grid.points, deployment.positions, deployment.power, pl, spec.k)
    return grad
