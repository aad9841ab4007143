"""Planar points and the ring discretization of the service disk."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * math.pi


class Point2(NamedTuple):
    """A point in the plane, in meters."""

    x: float
    y: float

    @classmethod
    def from_polar(cls, r: float, phi: float) -> "Point2":
        if r < 0:
            raise ValueError(f"radius must be non-negative, got {r}")
        return cls(r * math.cos(phi), r * math.sin(phi))

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def phi(self) -> float:
        """Polar angle wrapped to [0, 2*pi)."""
        a = math.atan2(self.y, self.x) % TWO_PI
        # atan2 can return -0.0 or values that wrap to exactly 2*pi
        return 0.0 if a >= TWO_PI else a

    def to_polar(self) -> tuple[float, float]:
        return self.r, self.phi

    def rotated(self, angle: float) -> "Point2":
        c, s = math.cos(angle), math.sin(angle)
        return Point2(c * self.x - s * self.y, s * self.x + c * self.y)


def as_points(points) -> np.ndarray:
    """Coerce a sequence of points (or an (n, 2) array) to a float64 (n, 2) array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of points, got shape {arr.shape}")
    return arr


def rotate(points, angle: float) -> np.ndarray:
    """Rotate an (n, 2) array of points about the origin."""
    pts = as_points(points)
    c, s = math.cos(angle), math.sin(angle)
    return pts @ np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class DiskGrid:
    """Concentric-ring sample of a disk standing in for the unknown harvester set.

    Ring 0 is the single origin point; ring ``j`` sits at radius
    ``j * radius / ring_count``. ``points`` and ``ring`` are read-only.
    """

    radius: float
    ring_count: int
    density: float
    points: np.ndarray = field(repr=False)
    ring: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def ring_radii(self) -> np.ndarray:
        return np.arange(self.ring_count + 1) * (self.radius / self.ring_count)

    @property
    def ring_sizes(self) -> np.ndarray:
        return np.bincount(self.ring, minlength=self.ring_count + 1)

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        r = np.hypot(self.points[:, 0], self.points[:, 1])
        phi = np.mod(np.arctan2(self.points[:, 1], self.points[:, 0]), TWO_PI)
        return r, phi

    def scaled(self, factor: float) -> "DiskGrid":
        """Same ring layout on a disk ``factor`` times larger."""
        pts = self.points * factor
        pts.setflags(write=False)
        return DiskGrid(self.radius * factor, self.ring_count, self.density / factor, pts, self.ring)

    def rotated(self, angle: float) -> "DiskGrid":
        """Same grid with every point rotated about the origin."""
        pts = rotate(self.points, angle)
        pts.setflags(write=False)
        return DiskGrid(self.radius, self.ring_count, self.density, pts, self.ring)

    def to_csv(self) -> str:
        r, phi = self.polar()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "r", "phi"])
        for (x, y), ri, pi in zip(self.points, r, phi):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(ri)), repr(float(pi))])
        return buf.getvalue()


@dataclass(frozen=True)
class PointSet:
    """Arbitrary proxy harvester locations inside a disk of radius ``radius``.

    Accepted wherever solvers take a grid; only ``radius``, ``points`` and
    ``size`` are used there.
    """

    radius: float
    points: np.ndarray = field(repr=False)

    @classmethod
    def from_array(cls, points, radius: float | None = None) -> "PointSet":
        pts = np.array(as_points(points), dtype=float)
        if pts.shape[0] == 0:
            raise ValueError("point set is empty")
        reach = float(np.hypot(pts[:, 0], pts[:, 1]).max())
        if radius is None:
            radius = reach
        if not radius > 0:
            raise ValueError("radius must be positive")
        if reach > radius * (1 + 1e-12):
            raise ValueError(f"points extend to {reach:.6g}, beyond radius {radius:.6g}")
        pts.setflags(write=False)
        return cls(float(radius), pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def size(self) -> int:
        return self.points.shape[0]


def make_disk_grid(radius: float, ring_count: int, density: float) -> DiskGrid:
    """Discretize a disk into evenly spaced rings.

    Parameters
    ----------
    radius : float
        Disk radius in meters.
    ring_count : int
        Number of non-trivial rings; ring ``j`` lies at ``j * radius / ring_count``.
    density : float
        Points per meter of circumference. Ring ``j > 0`` carries
        ``max(6, round(density * 2*pi * r_j))`` equally spaced points starting at angle 0.

    Returns
    -------
    DiskGrid
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if int(ring_count) != ring_count or ring_count < 1:
        raise ValueError(f"ring_count must be a positive integer, got {ring_count}")
    if not density > 0:
        raise ValueError(f"density must be positive, got {density}")
    ring_count = int(ring_count)

    chunks = [np.zeros((1, 2))]
    rings = [np.zeros(1, dtype=np.intp)]
    for j in range(1, ring_count + 1):
        rj = j * radius / ring_count
        n = max(6, int(round(density * TWO_PI * rj)))
        ang = TWO_PI * np.arange(n) / n
        chunks.append(np.column_stack([rj * np.cos(ang), rj * np.sin(ang)]))
        rings.append(np.full(n, j, dtype=np.intp))
    pts = np.concatenate(chunks)
    ring = np.concatenate(rings)
    pts.setflags(write=False)
    ring.setflags(write=False)
    return DiskGrid(float(radius), ring_count, float(density), pts, ring)


def grid_for_size(radius: float, n_points: int = 1000) -> DiskGrid:
    """Grid with roughly ``n_points`` points and comparable ring and arc spacing.

    Picks ``ring_count ~ sqrt(n_points / pi)`` then tunes the density so the
    total lands as close to ``n_points`` as ring rounding allows.
    """
    if n_points < 7:
        raise ValueError("n_points must be at least 7 (origin plus one ring of 6)")
    rings = max(1, int(round(math.sqrt(n_points / math.pi))))
    # total ~ 1 + density * 2*pi * (R / rings) * rings*(rings+1)/2
    density = (n_points - 1) / (math.pi * radius * (rings + 1))
    best = make_disk_grid(radius, rings, density)
    # small local search over density to absorb rounding
    for scale in np.linspace(0.97, 1.03, 61):
        g = make_disk_grid(radius, rings, density * scale)
        if abs(g.size - n_points) < abs(best.size - n_points):
            best = g
    return best


def angular_positions(beacon_count: int, ring_radius: float, offset: float = 0.0) -> np.ndarray:
    """``beacon_count`` points on a circle, spaced ``2*pi / beacon_count`` apart from ``offset``."""
    if int(beacon_count) != beacon_count or beacon_count < 1:
        raise ValueError(f"beacon_count must be a positive integer, got {beacon_count}")
    if ring_radius < 0:
        raise ValueError(f"ring_radius must be non-negative, got {ring_radius}")
    ang = offset + TWO_PI * np.arange(int(beacon_count)) / beacon_count
    return np.column_stack([ring_radius * np.cos(ang), ring_radius * np.sin(ang)])


def covering_radius(grid: DiskGrid, n_probe: int = 20000, seed: int = 0) -> float:
    """Monte Carlo estimate of the largest disk-to-nearest-grid-point distance."""
    rng = np.random.default_rng(seed)
    rr = grid.radius * np.sqrt(rng.random(n_probe))
    aa = TWO_PI * rng.random(n_probe)
    probe = np.column_stack([rr * np.cos(aa), rr * np.sin(aa)])
    dist, _ = cKDTree(grid.points).query(probe)
    return float(dist.max())
