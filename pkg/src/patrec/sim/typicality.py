"""Strong joint typicality for short sequences.

General sequences are integer arrays of symbols. Binary sequences of length
``n <= 62`` are also handled bit-packed into ``int64`` words, where a pair test
reduces to the weights of both words and of their overlap.
"""

from __future__ import annotations

import math
from itertools import combinations
from math import comb

import numpy as np

from ..errors import SamplingError
from ..info_core import JointPMF

__all__ = [
    "SLACK",
    "pack_bits",
    "unpack_bits",
    "popcount",
    "typicality_test",
    "PairTypicality",
    "sample_typical",
    "sample_typical_binary",
    "flip_masks",
]

# absorbs float error in |N/n - p| <= delta at exact band edges
SLACK = 1e-12
MAX_PACKED = 62


def pack_bits(bits) -> np.ndarray:
    """Pack 0/1 arrays of shape ``(..., n)`` into ``int64``; bit ``k`` is position ``k``."""
    arr = np.asarray(bits)
    n = arr.shape[-1]
    if n > MAX_PACKED:
        raise ValueError(f"at most {MAX_PACKED} bits can be packed")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("bits must be 0 or 1")
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    return (arr.astype(np.int64) * weights).sum(axis=-1)


def unpack_bits(codes, n: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[..., None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)


def popcount(codes) -> np.ndarray:
    return np.bitwise_count(np.asarray(codes, dtype=np.int64)).astype(np.intp)


def typicality_test(sequences, joint: JointPMF, delta: float) -> bool:
    """True iff every joint symbol frequency is within ``delta`` of ``joint``.

    ``sequences`` holds one aligned integer sequence per variable of
    ``joint``, in the order of ``joint.names``.
    """
    seqs = [np.asarray(s) for s in sequences]
    if len(seqs) != len(joint.names):
        raise ValueError(f"expected {len(joint.names)} sequences, got {len(seqs)}")
    n = seqs[0].size
    if n == 0 or any(s.ndim != 1 or s.size != n for s in seqs):
        raise ValueError("sequences must be aligned nonempty 1-D arrays")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    sizes = joint.alphabet_sizes
    for s, k in zip(seqs, sizes):
        if np.any(s < 0) or np.any(s >= k):
            raise ValueError("symbol out of range")
    flat = np.ravel_multi_index(tuple(s.astype(np.intp) for s in seqs), sizes)
    counts = np.bincount(flat, minlength=math.prod(sizes)).reshape(sizes)
    return bool(np.all(np.abs(counts / n - joint.probs) <= delta + SLACK))


class PairTypicality:
    """Typicality of packed binary pairs against a 2x2 joint table.

    ``lut[ka, kb, k11]`` says whether a pair with weights ``ka``, ``kb`` and
    ``k11`` common ones is strongly jointly ``delta``-typical.
    """

    def __init__(self, probs, n: int, delta: float):
        p = np.asarray(probs, dtype=float)
        if p.shape != (2, 2):
            raise ValueError("pair typicality needs a 2x2 joint table")
        if not 1 <= n <= MAX_PACKED:
            raise ValueError(f"n must lie in 1..{MAX_PACKED}")
        self.probs = p
        self.n = n
        self.delta = float(delta)
        k = np.arange(n + 1)
        ka, kb, k11 = np.meshgrid(k, k, k, indexing="ij")
        k10 = ka - k11
        k01 = kb - k11
        k00 = n - ka - kb + k11
        valid = (k10 >= 0) & (k01 >= 0) & (k00 >= 0)
        tol = self.delta + SLACK
        ok = valid
        for cnt, prob in ((k00, p[0, 0]), (k01, p[0, 1]), (k10, p[1, 0]), (k11, p[1, 1])):
            ok = ok & (np.abs(cnt / n - prob) <= tol)
        self.lut = ok

    @property
    def max_flips(self) -> int:
        """Largest Hamming distance between any typical pair (``-1`` if none)."""
        ka, kb, k11 = np.nonzero(self.lut)
        if ka.size == 0:
            return -1
        return int(np.max(ka + kb - 2 * k11))

    def __call__(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return self.lut[popcount(a), popcount(b), popcount(a & b)]


def flip_masks(n: int, max_weight: int) -> np.ndarray:
    """All ``n``-bit words of weight at most ``max_weight``, by weight then value."""
    if not 1 <= n <= MAX_PACKED:
        raise ValueError(f"n must lie in 1..{MAX_PACKED}")
    out = []
    for k in range(min(max_weight, n) + 1):
        words = [sum(1 << i for i in c) for c in combinations(range(n), k)]
        out.append(np.sort(np.array(words, dtype=np.int64)))
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def _accept_with_gap_cap(accepted: np.ndarray, need: int, since: int, cap: int):
    """Indices of accepted draws to keep, and the trailing rejection run."""
    idx = np.flatnonzero(accepted)[:need]
    if idx.size == 0:
        since += accepted.size
        if since > cap:
            raise SamplingError(f"no typical draw within {cap} attempts")
        return idx, since
    gaps = np.diff(np.concatenate(([-1 - since], idx))) - 1
    if gaps.max() > cap:
        raise SamplingError(f"no typical draw within {cap} attempts")
    return idx, int(accepted.size - 1 - idx[-1])


def sample_typical(marginal: JointPMF, n: int, delta: float, rng: np.random.Generator,
                   size: int | None = None, max_rejection: int = 10**6) -> np.ndarray:
    """Typical sequences for a one-variable pmf by i.i.d. draws and rejection.

    Returns an ``(n,)`` array, or ``(size, n)`` when ``size`` is given. More
    than ``max_rejection`` consecutive rejections raise :class:`SamplingError`.
    """
    if len(marginal.names) != 1:
        raise ValueError("sample_typical needs a single-variable pmf")
    if n < 1:
        raise ValueError("n must be positive")
    probs = np.asarray(marginal.probs)
    k = probs.size
    need = 1 if size is None else int(size)
    out = []
    got = 0
    since = 0
    batch = 64
    while got < need:
        draws = rng.choice(k, size=(batch, n), p=probs)
        counts = np.stack([(draws == s).sum(axis=1) for s in range(k)], axis=1)
        ok = np.all(np.abs(counts / n - probs) <= delta + SLACK, axis=1)
        idx, since = _accept_with_gap_cap(ok, need - got, since, max_rejection)
        out.append(draws[idx])
        got += idx.size
        batch = min(batch * 2, 1 << 16)
    res = np.concatenate(out)[:need]
    return res[0] if size is None else res


def sample_typical_binary(p1: float, n: int, delta: float, rng: np.random.Generator,
                          size: int, max_rejection: int = 10**6) -> np.ndarray:
    """Packed Bernoulli(``p1``) sequences whose weight fraction is within ``delta`` of ``p1``."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError("p1 must lie in [0, 1]")
    if not 1 <= n <= MAX_PACKED:
        raise ValueError(f"n must lie in 1..{MAX_PACKED}")
    w = np.arange(n + 1)
    weight_ok = (np.abs(w / n - p1) <= delta + SLACK) & (np.abs((n - w) / n - (1 - p1)) <= delta + SLACK)
    if not weight_ok.any():
        raise SamplingError("no sequence weight is typical at this n and delta")
    accept_rate = float(sum(comb(n, k) * p1**k * (1 - p1) ** (n - k) for k in w[weight_ok]))
    out = []
    got = 0
    since = 0
    while got < size:
        need = size - got
        batch = int(min(max(64, 1.1 * need / max(accept_rate, 1e-9) + 16), 1 << 22))
        if p1 == 0.5 and n <= 62:
            draws = rng.integers(0, np.int64(1) << np.int64(n), size=batch, dtype=np.int64)
        else:
            draws = pack_bits((rng.random((batch, n)) < p1).astype(np.uint8))
        ok = weight_ok[popcount(draws)]
        idx, since = _accept_with_gap_cap(ok, need, since, max_rejection)
        out.append(draws[idx])
        got += idx.size
    return np.concatenate(out)
