"""Rectangular rate grids and the sampled surfaces that live on them."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SURFACE_FLOOR = -1e-9

__all__ = ["GridSpec", "SurfaceGrid", "read_csv"]


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``nx`` by ``ny`` grid on ``[x_min, x_max] x [y_min, y_max]``."""

    nx: int = 41
    ny: int = 41
    x_max: float = 1.0
    y_max: float = 1.0
    x_min: float = 0.0
    y_min: float = 0.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must have at least one point per axis")
        for lo, hi, n in ((self.x_min, self.x_max, self.nx), (self.y_min, self.y_max, self.ny)):
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0:
                raise ValueError("grid bounds must be finite and nonnegative")
            if hi < lo or (n > 1 and hi == lo):
                raise ValueError("grid bounds must be increasing")

    @classmethod
    def square(cls, n: int, r_max: float = 1.0) -> "GridSpec":
        return cls(n, n, r_max, r_max)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(self.x_min, self.x_max, self.nx),
            np.linspace(self.y_min, self.y_max, self.ny),
        )

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape ``(nx, ny)``, ``r_x`` along axis 0."""
        xs, ys = self.axes()
        return np.meshgrid(xs, ys, indexing="ij")


@dataclass(frozen=True)
class SurfaceGrid:
    """Samples ``z[i, j]`` of a surface at ``(r_x_values[i], r_y_values[j])``."""

    r_x_values: np.ndarray
    r_y_values: np.ndarray
    z: np.ndarray
    label: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.r_x_values, dtype=float)
        ys = np.asarray(self.r_y_values, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if xs.ndim != 1 or ys.ndim != 1 or xs.size == 0 or ys.size == 0:
            raise ValueError("grid axes must be nonempty 1-D arrays")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        if z.shape != (xs.size, ys.size):
            raise ValueError(f"z has shape {z.shape}, expected {(xs.size, ys.size)}")
        if np.any(~np.isfinite(z)):
            raise ValueError("surface values must be finite")
        if np.any(z < SURFACE_FLOOR):
            raise ValueError(f"surface {self.label!r} dips to {z.min()!r} below {SURFACE_FLOOR}")
        for name, arr in (("r_x_values", xs), ("r_y_values", ys), ("z", z)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.z.shape

    def argmax(self) -> tuple[float, float, float]:
        """``(r_x, r_y, z)`` at the largest sample."""
        i, j = np.unravel_index(np.argmax(self.z), self.z.shape)
        return float(self.r_x_values[i]), float(self.r_y_values[j]), float(self.z[i, j])

    def value_at(self, r_x: float, r_y: float) -> float:
        i = int(np.argmin(np.abs(self.r_x_values - r_x)))
        j = int(np.argmin(np.abs(self.r_y_values - r_y)))
        return float(self.z[i, j])

    def to_csv(self, path=None) -> str:
        """CSV text with header ``r_x,r_y,z``; written to ``path`` when given."""
        buf = io.StringIO()
        buf.write("r_x,r_y,z\n")
        for i, x in enumerate(self.r_x_values):
            for j, y in enumerate(self.r_y_values):
                buf.write(f"{x:.12g},{y:.12g},{self.z[i, j]:.12g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def read_csv(source, label: str = "") -> SurfaceGrid:
    """Parse the CSV layout written by :meth:`SurfaceGrid.to_csv`."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    else:
        text = str(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["r_x", "r_y", "z"]:
        raise ValueError("missing r_x,r_y,z header")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if data.shape[0] != xs.size * ys.size:
        raise ValueError("rows do not form a full rectangular grid")
    return SurfaceGrid(xs, ys, data[:, 2].reshape(xs.size, ys.size), label)
