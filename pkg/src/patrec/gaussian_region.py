"""Jointly Gaussian pattern, observation and test channels.

``X`` and ``Y`` are unit-variance with correlation ``rho_xy``; ``U`` is a noisy
copy of ``X`` and ``V`` of ``Y``. A rate ``r`` corresponds to correlation
``rho = sqrt(1 - 2^{-2r})`` with the source it describes. Chains ``U - X - Y``
and ``X - Y - V`` force ``rho_uy = rho_xy rho_xu`` and ``rho_xv = rho_xy rho_yv``;
``rho_uv`` is the single free parameter of the outer family and equals
``gamma = rho_xy rho_xu rho_yv`` on the inner (long chain) family.

Closed forms used below, with ``t = rho_uv``::

    |C| / (|C_xy| |C_uv|) = 1 + (2 t gamma - beta) / (1 - t^2)
    I(XY;UV) = -1/2 log2 of that ratio
    beta = rho_xu^2 + rho_yv^2 - (1 - rho_xy^2) rho_xu^2 rho_yv^2

``I(XY;UV)`` is smallest at the root ``rho* = k - sqrt(k^2 - 1)``, ``k = beta/2gamma``,
of ``gamma t^2 - beta t + gamma = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import ScalarField2D, golden_maximize, ray_envelope
from .errors import DegenerateInputError
from .surface import GridSpec, SurfaceGrid

__all__ = [
    "R_MAX",
    "RHO_CAP",
    "CorrelationSet",
    "GammaBeta",
    "rho_from_rate",
    "rate_from_rho",
    "G",
    "G_star",
    "gamma_beta",
    "correlation_matrix",
    "gaussian_mi_xyuv",
    "rational_mi_xyuv",
    "closed_form_sign_convention",
    "feasible_rho_uv",
    "sweep_optimize_rho_uv",
    "markov_correlation_check",
    "inner_field",
    "surface",
    "SURFACES",
]

R_MAX = 8.0
RHO_CAP = 1.0 - 1e-6
SURFACES = ("G", "G_star", "difference", "hull_gap")
MI_AGREEMENT = 1e-9
SWEEP_POINTS = 4096


def rho_from_rate(r, r_max: float = R_MAX):
    """Correlation ``sqrt(1 - 2^{-2r})`` for rate ``r``; rates above ``r_max`` are clamped."""
    arr = np.asarray(r, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError("rate must be nonnegative")
    arr = np.minimum(arr, r_max)
    out = np.sqrt(-np.expm1(-2.0 * np.log(2.0) * arr))
    return float(out) if out.ndim == 0 else out


def rate_from_rho(rho):
    """Inverse of :func:`rho_from_rate`, ``-1/2 log2(1 - rho^2)``."""
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0) or np.any(arr >= 1):
        raise ValueError("rho must lie in [0, 1)")
    out = -0.5 * np.log2(1.0 - arr**2)
    return float(out) if out.ndim == 0 else out


def clamped(r, r_max: float = R_MAX) -> bool:
    """True if any requested rate exceeds the cap and was clamped."""
    return bool(np.any(np.asarray(r, dtype=float) > r_max))


@dataclass(frozen=True)
class CorrelationSet:
    """Correlations of ``(X, Y, U, V)`` under the two short chains."""

    rho_xy: float
    rho_xu: float
    rho_yv: float
    rho_uv: float | None = None

    def __post_init__(self):
        for name in ("rho_xy", "rho_xu", "rho_yv"):
            v = float(getattr(self, name))
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v!r}")
            object.__setattr__(self, name, v)
        if self.rho_uv is not None:
            v = float(self.rho_uv)
            if not -1.0 < v < 1.0:
                raise ValueError(f"rho_uv must lie in (-1, 1), got {v!r}")
            object.__setattr__(self, "rho_uv", v)

    @property
    def rho_xv(self) -> float:
        return self.rho_xy * self.rho_yv

    @property
    def rho_yu(self) -> float:
        return self.rho_xy * self.rho_xu

    @property
    def gamma(self) -> float:
        return self.rho_xy * self.rho_xu * self.rho_yv

    def with_rho_uv(self, rho_uv: float) -> "CorrelationSet":
        return CorrelationSet(self.rho_xy, self.rho_xu, self.rho_yv, rho_uv)


@dataclass(frozen=True)
class GammaBeta:
    gamma: float
    beta: float
    rho_star: float
    margin: float
    boundary: bool

    @property
    def k(self) -> float:
        return self.beta / (2.0 * self.gamma)


def _beta(rho_xy, a, b):
    return a**2 + b**2 - (1.0 - rho_xy**2) * a**2 * b**2


def _check_rho_xy(rho_xy, allow_zero=True):
    arr = np.asarray(rho_xy, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr >= 1.0) or np.any(arr < 0.0):
        raise ValueError("rho_xy must lie in [0, 1)")
    if not allow_zero and np.any(arr == 0.0):
        raise ValueError("rho_xy must be positive")
    return arr


def G(rho_xy, r_x, r_y):
    """Inner bound ``-1/2 log2(1 - rho_xy^2 rho_xu^2 rho_yv^2)``."""
    rxy = _check_rho_xy(rho_xy)
    a = np.asarray(rho_from_rate(r_x))
    b = np.asarray(rho_from_rate(r_y))
    out = -0.5 * np.log2(1.0 - (rxy * a * b) ** 2)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def gamma_beta(rho_xy: float, rho_xu: float, rho_yv: float) -> GammaBeta:
    """``gamma``, ``beta`` and the optimal ``rho_uv`` for three correlations in ``(0, 1)``.

    ``beta - 2 gamma`` is reported as ``margin``. It is zero only on the
    boundary ``rho_xy = 1, rho_xu = rho_yv``, which ``boundary`` flags.
    """
    vals = (rho_xy, rho_xu, rho_yv)
    if any(v == 0.0 for v in vals):
        raise DegenerateInputError("gamma vanishes when any correlation is zero")
    if not all(0.0 < v <= 1.0 for v in vals) or not (rho_xu < 1.0 and rho_yv < 1.0):
        raise ValueError("correlations must lie in (0, 1)")
    gamma = rho_xy * rho_xu * rho_yv
    beta = _beta(rho_xy, rho_xu, rho_yv)
    margin = beta - 2.0 * gamma
    k = beta / (2.0 * gamma)
    boundary = bool(margin <= 1e-15 * max(1.0, beta))
    # 1 / (k + sqrt(k^2 - 1)) is the small root without cancellation
    rho_star = 1.0 / (k + math.sqrt(max(k * k - 1.0, 0.0)))
    return GammaBeta(gamma, beta, rho_star, margin, boundary)


def _gamma_beta_arrays(rho_xy, a, b):
    gamma = rho_xy * a * b
    beta = _beta(rho_xy, a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = beta / (2.0 * gamma)
        rho = 1.0 / (k + np.sqrt(np.maximum(k * k - 1.0, 0.0)))
    return gamma, beta, rho


def G_star(rho_xy, r_x, r_y):
    """Outer bound ``r_x + r_y + 1/2 log2[1 + (2 rho gamma - beta)/(1 - rho^2)]`` at ``rho = rho*``.

    The rate constraints are taken with equality. At zero rate the value is
    0 by continuity.
    """
    rxy = _check_rho_xy(rho_xy)
    rx = np.minimum(np.asarray(r_x, dtype=float), R_MAX)
    ry = np.minimum(np.asarray(r_y, dtype=float), R_MAX)
    if np.any(rx < 0) or np.any(ry < 0):
        raise ValueError("rates must be nonnegative")
    a = np.asarray(rho_from_rate(rx))
    b = np.asarray(rho_from_rate(ry))
    gamma, beta, rho = _gamma_beta_arrays(rxy, a, b)
    degenerate = gamma <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        # at the optimum the ratio collapses to 1 - gamma / rho*
        ratio = np.where(degenerate, 1.0, 1.0 - gamma / np.where(degenerate, 1.0, rho))
        out = rx + ry + 0.5 * np.log2(ratio)
    out = np.where(degenerate, 0.0, np.maximum(out, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def correlation_matrix(cs: CorrelationSet) -> np.ndarray:
    """4x4 correlation matrix of ``(X, Y, U, V)``; needs ``rho_uv``."""
    if cs.rho_uv is None:
        raise ValueError("rho_uv is required")
    rxy, rxu, ryv, ruv = cs.rho_xy, cs.rho_xu, cs.rho_yv, cs.rho_uv
    return np.array(
        [
            [1.0, rxy, rxu, cs.rho_xv],
            [rxy, 1.0, cs.rho_yu, ryv],
            [rxu, cs.rho_yu, 1.0, ruv],
            [cs.rho_xv, ryv, ruv, 1.0],
        ]
    )


def _check_cap(cs: CorrelationSet):
    for name in ("rho_xy", "rho_xu", "rho_yv"):
        if getattr(cs, name) > RHO_CAP:
            raise OverflowError(f"{name} above {RHO_CAP}: mutual information diverges")
    if abs(cs.rho_uv) > RHO_CAP:
        raise OverflowError(f"|rho_uv| above {RHO_CAP}: mutual information diverges")


def rational_mi_xyuv(cs: CorrelationSet) -> float:
    """``-1/2 log2[1 + (2 t gamma - beta)/(1 - t^2)]`` with ``t = rho_uv``."""
    t = cs.rho_uv
    beta = _beta(cs.rho_xy, cs.rho_xu, cs.rho_yv)
    ratio = 1.0 + (2.0 * t * cs.gamma - beta) / (1.0 - t * t)
    if ratio <= 0:
        raise ValueError("correlations are not jointly feasible")
    return -0.5 * math.log2(ratio)


def gaussian_mi_xyuv(cs: CorrelationSet, check: bool = True) -> float:
    """``I(XY;UV)`` in bits from the correlation matrix.

    Uses ``1/2 log2(|C_xy| / |C_xy - C_xy,uv C_uv^{-1} C_uv,xy|)``. With
    ``check`` the result is compared against :func:`rational_mi_xyuv`.
    """
    C = correlation_matrix(cs)
    _check_cap(cs)
    eig = np.linalg.eigvalsh(C)
    if eig[0] < -1e-12:
        raise ValueError(f"correlation matrix is not PSD (min eigenvalue {eig[0]:.3g})")
    c_xy = C[:2, :2]
    c_cross = C[:2, 2:]
    c_uv = C[2:, 2:]
    schur = c_xy - c_cross @ np.linalg.solve(c_uv, c_cross.T)
    det_schur = np.linalg.det(schur)
    if det_schur <= 0:
        raise ValueError("correlation matrix is singular")
    mi = max(0.5 * math.log2(np.linalg.det(c_xy) / det_schur), 0.0)
    if check:
        closed = rational_mi_xyuv(cs)
        if abs(mi - closed) > MI_AGREEMENT:
            from .errors import ConsistencyError

            raise ConsistencyError(f"determinant form {mi!r} vs rational form {closed!r}")
    return mi


def closed_form_sign_convention(cs: CorrelationSet) -> str:
    """Which leading sign makes ``s/2 log2[1 + (2 t gamma - beta)/(1 - t^2)]`` match the determinant form.

    Returns ``"-"`` or ``"+"`` (or ``"either"`` when the value is 0).
    """
    det = gaussian_mi_xyuv(cs, check=False)
    t = cs.rho_uv
    beta = _beta(cs.rho_xy, cs.rho_xu, cs.rho_yv)
    core = 0.5 * math.log2(1.0 + (2.0 * t * cs.gamma - beta) / (1.0 - t * t))
    minus, plus = abs(det + core), abs(det - core)
    if minus <= MI_AGREEMENT and plus <= MI_AGREEMENT:
        return "either"
    return "-" if minus < plus else "+"


def feasible_rho_uv(rho_xy: float, rho_xu: float, rho_yv: float) -> tuple[float, float]:
    """Interval of ``rho_uv`` for which the 4x4 correlation matrix is PSD.

    The determinant is a quadratic in ``rho_uv``; it is fitted from three
    evaluations and its roots bracket the feasible set.
    """
    base = CorrelationSet(rho_xy, rho_xu, rho_yv)
    ts = np.array([-0.5, 0.0, 0.5])
    dets = [np.linalg.det(correlation_matrix(base.with_rho_uv(t))) for t in ts]
    c2, c1, c0 = np.polyfit(ts, dets, 2)
    if c2 >= 0:
        raise ValueError("determinant is not concave in rho_uv")
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0:
        raise ValueError("no feasible rho_uv")
    root = math.sqrt(disc)
    lo, hi = sorted(((-c1 + root) / (2 * c2), (-c1 - root) / (2 * c2)))
    return max(lo, -RHO_CAP), min(hi, RHO_CAP)


def sweep_optimize_rho_uv(rho_xy: float, rho_xu: float, rho_yv: float, n_scan: int = SWEEP_POINTS) -> float:
    """``rho_uv`` minimizing ``I(XY;UV)`` found numerically over the PSD interval.

    A dense scan of the determinant-form information is followed by a
    golden-section refinement. Independent of the closed-form root.
    """
    for name, v in (("rho_xy", rho_xy), ("rho_xu", rho_xu), ("rho_yv", rho_yv)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must lie in (0, 1)")
    lo, hi = feasible_rho_uv(rho_xy, rho_xu, rho_yv)
    # keep strictly inside so the Schur complement stays invertible
    pad = 1e-9 * (hi - lo)
    lo, hi = lo + pad, hi - pad
    mi = _mi_batch(rho_xy, rho_xu, rho_yv)
    ts = np.linspace(lo, hi, n_scan)
    vals = mi(ts)
    k = int(np.argmin(vals))
    a = np.array([ts[max(k - 1, 0)]])
    b = np.array([ts[min(k + 1, n_scan - 1)]])
    t, _ = golden_maximize(lambda x: -mi(x), a, b, xtol=1e-12)
    return float(t[0])


def _mi_batch(rho_xy, rho_xu, rho_yv):
    """Vectorized determinant-form ``I(XY;UV)`` as a function of ``rho_uv``."""
    base = CorrelationSet(rho_xy, rho_xu, rho_yv)
    c0 = correlation_matrix(base.with_rho_uv(0.0))
    det_xy = np.linalg.det(c0[:2, :2])

    def mi(ts):
        ts = np.asarray(ts, dtype=float)
        C = np.broadcast_to(c0, ts.shape + (4, 4)).copy()
        C[..., 2, 3] = ts
        C[..., 3, 2] = ts
        det_full = np.linalg.det(C)
        det_uv = 1.0 - ts**2
        # |C| = |C_uv| |schur|
        return 0.5 * np.log2(det_xy * det_uv / det_full)

    return mi


def markov_correlation_check(rho_ab: float, rho_bc: float) -> float:
    """Correlation of ``A`` and ``C`` when ``A - B - C`` is a Gaussian chain."""
    if abs(rho_ab) > 1 or abs(rho_bc) > 1:
        raise ValueError("correlations must have magnitude at most 1")
    return rho_ab * rho_bc


def inner_field(rho_xy: float, r_max: float = 3.0) -> ScalarField2D:
    """``G`` as an envelope-ready field on ``[0, r_max]^2``."""
    if r_max > R_MAX:
        raise ValueError(f"r_max above cap {R_MAX}")
    return ScalarField2D(lambda x, y: G(rho_xy, x, y), r_max, r_max, name=f"gaussian_G(rho_xy={rho_xy:g})")


def surface(
    rho_xy: float,
    grid: GridSpec | None = None,
    which: str = "G",
    envelope_max: float | None = None,
) -> SurfaceGrid:
    """Sample ``G``, ``G_star``, ``G_star - G`` or ``G_star - hull(G)`` on a grid.

    The default grid is 41 x 41 on ``[0, 3]^2``. ``envelope_max`` sets the
    square on which the hull of ``G`` is taken (default: the grid's extent).
    Rates above :data:`R_MAX` are clamped and flagged in ``meta``.
    """
    if which not in SURFACES:
        raise ValueError(f"which must be one of {SURFACES}, got {which!r}")
    _check_rho_xy(rho_xy)
    grid = grid or GridSpec(41, 41, 3.0, 3.0)
    xs, ys = grid.axes()
    gx, gy = grid.mesh()
    meta = {"case": "gaussian", "rho_xy": float(rho_xy), "clamped": clamped(xs) or clamped(ys)}
    gx = np.minimum(gx, R_MAX)
    gy = np.minimum(gy, R_MAX)
    if which == "G":
        z = G(rho_xy, gx, gy)
    elif which == "G_star":
        z = G_star(rho_xy, gx, gy)
    elif which == "difference":
        z = G_star(rho_xy, gx, gy) - G(rho_xy, gx, gy)
    else:
        m = envelope_max if envelope_max is not None else float(min(max(xs[-1], ys[-1]), R_MAX))
        meta["envelope_max"] = m
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        env = np.asarray(ray_envelope(inner_field(rho_xy, m), pts)).reshape(gx.shape)
        z = G_star(rho_xy, gx, gy) - env
    return SurfaceGrid(xs, ys, z, which, meta)
