"""Inner bound surface for a uniform binary pattern seen through a BSC.

The pattern ``X`` is uniform on ``{0, 1}`` and the observation is ``Y = X xor Z``
with ``Z ~ Bernoulli(q)``. Choosing ``U = X xor W_x`` and ``V = Y xor W_y`` with
crossovers ``q_x = h^{-1}(1 - r_x)``, ``q_y = h^{-1}(1 - r_y)`` gives the surface

    g(r_x, r_y) = 1 - h(q * q_x * q_y)

and ``g_star`` is its upper concave envelope. This module conjectures nothing
about optimality: ``g_star`` is reported as the hull of the achievable surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import info_core as ic
from .envelope import ScalarField2D, ray_envelope
from .errors import ConsistencyError
from .surface import GridSpec, SurfaceGrid

__all__ = ["BinaryEnv", "g", "g_star", "forward_construction_check", "surface", "SURFACES"]

SURFACES = ("g", "g_star", "difference")
FORWARD_TOL = 1e-10


@dataclass(frozen=True)
class BinaryEnv:
    """Binary symmetric environment with crossover ``q`` in ``[0, 1/2]``."""

    q: float = 0.2

    def __post_init__(self):
        q = float(self.q)
        if not 0.0 <= q <= 0.5:
            raise ValueError(f"q must lie in [0, 1/2], got {self.q!r}")
        object.__setattr__(self, "q", q)

    @property
    def q_bar(self) -> float:
        return 1.0 - self.q

    def field(self) -> ScalarField2D:
        """The surface ``g`` as an envelope-ready field on ``[0,1]^2``."""
        return ScalarField2D(lambda x, y: _g(self.q, x, y), 1.0, 1.0, name=f"binary_g(q={self.q:g})")


def _check_rates(r_x, r_y):
    rx = np.asarray(r_x, dtype=float)
    ry = np.asarray(r_y, dtype=float)
    for name, arr in (("r_x", rx), ("r_y", ry)):
        if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError(f"{name} must lie in [0, 1]")
    return rx, ry


def _g(q, rx, ry):
    qx = ic.inverse_binary_entropy(1.0 - np.asarray(rx))
    qy = ic.inverse_binary_entropy(1.0 - np.asarray(ry))
    c = ic.binary_convolve(ic.binary_convolve(q, qx), qy)
    return np.maximum(1.0 - ic.binary_entropy(c), 0.0)


def g(env: BinaryEnv, r_x, r_y):
    """Inner bound ``1 - h(q * q_x * q_y)``; scalar or elementwise array."""
    rx, ry = _check_rates(r_x, r_y)
    out = _g(env.q, rx, ry)
    return float(out) if np.ndim(out) == 0 else out


def g_star(env: BinaryEnv, r_x, r_y):
    """Upper concave envelope of ``g`` by the ray form ``max theta g(r / theta)``."""
    rx, ry = _check_rates(r_x, r_y)
    rx, ry = np.broadcast_arrays(rx, ry)
    pts = np.stack([rx.ravel(), ry.ravel()], axis=1)
    vals = ray_envelope(env.field(), pts)
    vals = np.asarray(vals).reshape(rx.shape)
    return float(vals) if vals.ndim == 0 else vals


def forward_construction_check(env: BinaryEnv, q_x: float, q_y: float) -> ic.RateTriple:
    """Rate triple of ``U = X xor W_x``, ``V = Y xor W_y`` by brute force.

    Raises :class:`ConsistencyError` if it strays from
    ``(1 - h(q*q_x*q_y), 1 - h(q_x), 1 - h(q_y))`` by more than 1e-10.
    """
    for name, v in (("q_x", q_x), ("q_y", q_y)):
        if not 0.0 <= v <= 0.5:
            raise ValueError(f"{name} must lie in [0, 1/2]")
    pmf = ic.build_chain_pmf([0.5, 0.5], ic.bsc(env.q), ic.bsc(q_x), ic.bsc(q_y))
    triple = ic.rate_triple_from_aux(pmf)
    c = ic.binary_convolve(ic.binary_convolve(env.q, q_x), q_y)
    expected = (1.0 - ic.binary_entropy(c), 1.0 - ic.binary_entropy(q_x), 1.0 - ic.binary_entropy(q_y))
    err = max(abs(a - b) for a, b in zip(triple.as_tuple(), expected))
    if err > FORWARD_TOL:
        raise ConsistencyError(f"forward construction off closed form by {err:.3g}")
    return triple


def surface(env: BinaryEnv, grid: GridSpec | None = None, which: str = "g") -> SurfaceGrid:
    """Sample ``g``, ``g_star`` or ``g_star - g`` on a grid inside ``[0,1]^2``."""
    if which not in SURFACES:
        raise ValueError(f"which must be one of {SURFACES}, got {which!r}")
    grid = grid or GridSpec()
    xs, ys = grid.axes()
    _check_rates(xs, ys)
    gx, gy = grid.mesh()
    if which == "g":
        z = g(env, gx, gy)
    else:
        z = g_star(env, gx, gy)
        if which == "difference":
            z = z - g(env, gx, gy)
    return SurfaceGrid(xs, ys, z, which, {"case": "binary", "q": env.q})
