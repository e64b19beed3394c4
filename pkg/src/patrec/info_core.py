"""Exact information measures on small dense probability tables.

Everything here is in bits. A :class:`JointPMF` is a named, dense table over
at most four discrete variables; entropies and (conditional) mutual
informations are computed from its marginals with the convention
``0 log 0 = 0``.

Negative results that are pure float noise (magnitude below ``ROUNDOFF``) are
clamped to zero. Anything more negative than that points to a bug and raises
:class:`~patrec.errors.ConsistencyError`.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConsistencyError

ROUNDOFF = 1e-12
MAX_VARIABLES = 4
MAX_ALPHABET = 16

VarSpec = Union[str, Sequence[str]]

__all__ = [
    "JointPMF",
    "RateTriple",
    "entropy",
    "binary_entropy",
    "inverse_binary_entropy",
    "binary_convolve",
    "mutual_information",
    "conditional_mutual_information",
    "is_markov_chain",
    "build_chain_pmf",
    "rate_triple_from_aux",
    "bsc",
]


def _clamp(value: float, what: str) -> float:
    if value < 0.0:
        if value < -ROUNDOFF:
            raise ConsistencyError(f"{what} = {value!r} is negative beyond round-off")
        return 0.0
    return value


@dataclass(frozen=True)
class JointPMF:
    """Dense joint p.m.f. over named discrete variables.

    ``probs`` has one axis per entry of ``names``; axis ``k`` indexes the
    symbols of ``names[k]``.
    """

    names: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        probs = np.array(self.probs, dtype=float)
        if len(names) == 0 or len(names) > MAX_VARIABLES:
            raise ValueError(f"need 1..{MAX_VARIABLES} variables, got {len(names)}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if probs.ndim != len(names):
            raise ValueError(
                f"table has {probs.ndim} axes but {len(names)} variable names"
            )
        if any(s < 1 or s > MAX_ALPHABET for s in probs.shape):
            raise ValueError(f"alphabet sizes must be in 1..{MAX_ALPHABET}, got {probs.shape}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > ROUNDOFF:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "probs", probs)

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    def axes(self, variables: VarSpec) -> tuple[int, ...]:
        """Axis indices of ``variables`` (a name or a sequence of names)."""
        if isinstance(variables, str):
            variables = (variables,)
        variables = tuple(variables)
        if not variables:
            raise ValueError("variable subset must be nonempty")
        missing = [v for v in variables if v not in self.names]
        if missing:
            raise ValueError(f"unknown variables {missing}; pmf has {self.names}")
        if len(set(variables)) != len(variables):
            raise ValueError(f"repeated variables in {variables}")
        return tuple(self.names.index(v) for v in variables)

    def marginal(self, variables: VarSpec) -> np.ndarray:
        """Marginal table over ``variables``, axes in the order given."""
        keep = self.axes(variables)
        drop = tuple(k for k in range(self.probs.ndim) if k not in keep)
        table = self.probs.sum(axis=drop) if drop else self.probs
        # axes of `table` are the kept ones in ascending order
        order = sorted(keep)
        return np.transpose(table, [order.index(k) for k in keep])

    def marginal_pmf(self, variables: VarSpec) -> "JointPMF":
        if isinstance(variables, str):
            variables = (variables,)
        return JointPMF(tuple(variables), self.marginal(variables))

    @classmethod
    def uniform(cls, names: Sequence[str], sizes: Sequence[int]) -> "JointPMF":
        sizes = tuple(sizes)
        return cls(tuple(names), np.full(sizes, 1.0 / math.prod(sizes)))


@dataclass(frozen=True)
class RateTriple:
    """Pattern, memory and sensory rates ``(r_c, r_x, r_y)`` in bits/symbol."""

    r_c: float
    r_x: float
    r_y: float

    def __post_init__(self):
        for field in ("r_c", "r_x", "r_y"):
            value = float(getattr(self, field))
            if not math.isfinite(value):
                raise ValueError(f"{field} must be finite")
            if value < 0.0:
                if value < -ROUNDOFF:
                    raise ValueError(f"{field} = {value!r} is negative")
                value = 0.0
            object.__setattr__(self, field, value)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r_c, self.r_x, self.r_y)

    def scaled(self, theta: float) -> "RateTriple":
        """The time-shared point ``theta * R``."""
        if not 0.0 <= theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        return RateTriple(theta * self.r_c, theta * self.r_x, theta * self.r_y)


def _table_entropy(table: np.ndarray) -> float:
    p = table[table > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(pmf: JointPMF, variables: VarSpec) -> float:
    """Entropy in bits of the marginal of ``pmf`` over ``variables``."""
    return _clamp(_table_entropy(pmf.marginal(variables)), "entropy")


def _as_tuple(variables: VarSpec) -> tuple[str, ...]:
    if isinstance(variables, str):
        return (variables,)
    return tuple(variables)


def _check_disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for group in groups:
        if not group:
            raise ValueError("variable subsets must be nonempty")
        overlap = seen.intersection(group)
        if overlap:
            raise ValueError(f"variable subsets overlap on {sorted(overlap)}")
        seen.update(group)


def mutual_information(pmf: JointPMF, a: VarSpec, b: VarSpec) -> float:
    """``I(A;B) = H(A) + H(B) - H(A,B)`` in bits."""
    a, b = _as_tuple(a), _as_tuple(b)
    _check_disjoint(a, b)
    value = _table_entropy(pmf.marginal(a)) + _table_entropy(pmf.marginal(b))
    value -= _table_entropy(pmf.marginal(a + b))
    return _clamp(value, f"I({a};{b})")


def conditional_mutual_information(
    pmf: JointPMF, a: VarSpec, b: VarSpec, c: VarSpec
) -> float:
    """``I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)`` in bits."""
    a, b, c = _as_tuple(a), _as_tuple(b), _as_tuple(c)
    _check_disjoint(a, b, c)
    value = _table_entropy(pmf.marginal(a + c)) + _table_entropy(pmf.marginal(b + c))
    value -= _table_entropy(pmf.marginal(a + b + c)) + _table_entropy(pmf.marginal(c))
    return _clamp(value, f"I({a};{b}|{c})")


def is_markov_chain(
    pmf: JointPMF, a: VarSpec, b: VarSpec, c: VarSpec, tol: float = 1e-10
) -> bool:
    """True iff ``A - B - C`` holds numerically, i.e. ``I(A;C|B) <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return conditional_mutual_information(pmf, a, c, b) <= tol


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_unit(arr: np.ndarray, name: str) -> None:
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")


def binary_entropy(p):
    """``h(p) = -p log2 p - (1-p) log2 (1-p)``; scalar or array input."""
    arr, scalar = _as_array(p)
    _check_unit(arr, "p")
    out = _h(arr)
    return float(out) if scalar else out


def _h(p: np.ndarray) -> np.ndarray:
    # unchecked; 0 log 0 = 0 at both ends
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p)
    return np.where((p <= 0.0) | (p >= 1.0), 0.0, out)


def inverse_binary_entropy(t, max_iter: int = 200, xtol: float = 1e-14):
    """The unique ``q`` in ``[0, 1/2]`` with ``h(q) = t``, by bisection.

    Accepts scalars or arrays; arrays are bisected elementwise in lockstep.
    """
    arr, scalar = _as_array(t)
    _check_unit(arr, "t")
    lo = np.zeros_like(arr)
    hi = np.full_like(arr, 0.5)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = _h(mid) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo < xtol):
            break
    q = 0.5 * (lo + hi)
    q = np.where(arr >= 1.0, 0.5, np.where(arr <= 0.0, 0.0, q))
    return float(q) if scalar else q


def binary_convolve(a, b):
    """Crossover of two cascaded binary symmetric channels, ``a(1-b) + b(1-a)``."""
    arr_a, scalar_a = _as_array(a)
    arr_b, scalar_b = _as_array(b)
    _check_unit(arr_a, "a")
    _check_unit(arr_b, "b")
    out = arr_a * (1.0 - arr_b) + arr_b * (1.0 - arr_a)
    return float(out) if (scalar_a and scalar_b) else out


def bsc(crossover: float) -> np.ndarray:
    """Transition matrix of a binary symmetric channel."""
    if not 0.0 <= crossover <= 1.0:
        raise ValueError("crossover must lie in [0, 1]")
    return np.array([[1.0 - crossover, crossover], [crossover, 1.0 - crossover]])


def _check_stochastic(channel, name: str, rows: int) -> np.ndarray:
    m = np.asarray(channel, dtype=float)
    if m.ndim != 2 or m.shape[0] != rows:
        raise ValueError(f"{name} must be a {rows}-row matrix, got shape {m.shape}")
    if np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > ROUNDOFF):
        raise ValueError(f"{name} rows must be probability vectors")
    return m


def build_chain_pmf(p_x, ch_yx, ch_ux, ch_vy) -> JointPMF:
    """Joint ``p(x,y,u,v) = p(x) p(y|x) p(u|x) p(v|y)`` over ``(X, Y, U, V)``.

    ``p_x`` is a 1-D probability vector or a single-variable :class:`JointPMF`;
    the channels are row-stochastic matrices indexed ``[input, output]``.
    The result satisfies the long chain ``U - X - Y - V``.
    """
    if isinstance(p_x, JointPMF):
        if len(p_x.names) != 1:
            raise ValueError("p_x must be a single-variable pmf")
        px = np.asarray(p_x.probs)
    else:
        px = np.asarray(p_x, dtype=float)
    if px.ndim != 1 or np.any(px < 0) or abs(px.sum() - 1.0) > ROUNDOFF:
        raise ValueError("p_x must be a probability vector")
    yx = _check_stochastic(ch_yx, "ch_yx", px.size)
    ux = _check_stochastic(ch_ux, "ch_ux", px.size)
    vy = _check_stochastic(ch_vy, "ch_vy", yx.shape[1])
    table = np.einsum("x,xy,xu,yv->xyuv", px, yx, ux, vy)
    return JointPMF(("X", "Y", "U", "V"), table)


def rate_triple_from_aux(pmf: JointPMF) -> RateTriple:
    """Corner point ``(I(U;V) - I(U;V|XY), I(U;X), I(V;Y))`` of the rate set of ``UV``."""
    if set(pmf.names) != {"X", "Y", "U", "V"}:
        raise ValueError(f"need a pmf over X, Y, U, V; got {pmf.names}")
    r_c = mutual_information(pmf, "U", "V") - conditional_mutual_information(
        pmf, "U", "V", ("X", "Y")
    )
    return RateTriple(
        max(r_c, 0.0),
        mutual_information(pmf, "U", "X"),
        mutual_information(pmf, "V", "Y"),
    )
