"""Random-coding recognition scheme for a uniform binary pattern behind a BSC.

Training draws ``M_c`` patterns, quantizes each to the first memory codeword
jointly typical with it, and stores the index. At test time the observation
is quantized to the first typical sensory codeword, and the classifier looks
for the unique stored memory codeword typical with it. All indices and labels
are 0-based; every fallback index is 0.

Error attribution for a failed trial picks the first event that holds:

E0  pattern and observation not jointly typical
E1  selected pattern unencodable
E2  two training patterns share a memory codeword
E3  observation unencodable
E4  true memory codeword not typical with the sensory codeword
E5  several stored codewords typical with the sensory codeword
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .. import info_core as ic
from ..errors import ConsistencyError, SamplingError
from .typicality import PairTypicality, flip_masks, pack_bits, popcount, sample_typical_binary

__all__ = [
    "EVENTS",
    "CodeConfig",
    "TrialOutcome",
    "Code",
    "make_rng",
    "default_delta",
    "generate_codebooks",
    "memory_encode",
    "encode_patterns",
    "detect_collision",
    "sensory_encode",
    "classify",
    "ClassifyResult",
    "train_code",
    "recognize",
    "simulate_trial",
    "TypicalityRecognizer",
]

EVENTS = ("OK", "E0", "E1", "E2", "E3", "E4", "E5", "SAMPLING")
MAX_LOG_CODEBOOK = 24
_DENSE_BLOCK = 1 << 22


def default_delta(n: int) -> float:
    return 0.1 if n <= 12 else 0.05


def make_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Counter-based stream for one trial, keyed by ``seed xor trial``."""
    key = (int(seed) ^ int(trial)) & ((1 << 64) - 1)
    return np.random.Generator(np.random.Philox(key=key))


def _codebook_size(n: int, rate: float) -> int:
    return max(1, int(round(2.0 ** (n * rate))))


@dataclass(frozen=True)
class CodeConfig:
    """Block length, channel and test-channel crossovers, rates and slack."""

    n: int
    q: float
    q_x: float
    q_y: float
    R_c: float
    R_x: float
    R_y: float
    delta: float | None = None
    seed: int = 0
    max_rejection: int = 10**6

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not 4 <= self.n <= 24:
            raise ValueError("n must be an integer in 4..24")
        object.__setattr__(self, "n", int(self.n))
        for name in ("q", "q_x", "q_y"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name} must lie in [0, 1/2]")
            object.__setattr__(self, name, v)
        for name in ("R_c", "R_x", "R_y"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be nonnegative")
            if self.n * v > MAX_LOG_CODEBOOK:
                raise ValueError(f"n*{name} exceeds {MAX_LOG_CODEBOOK}: codebook too large")
            object.__setattr__(self, name, v)
        delta = default_delta(self.n) if self.delta is None else float(self.delta)
        if not 0.0 < delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        object.__setattr__(self, "delta", delta)
        if self.max_rejection < 1:
            raise ValueError("max_rejection must be positive")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ValueError("seed must fit in 64 bits")

    @classmethod
    def from_rates(cls, n: int, q: float, r_x: float, r_y: float, r_c: float, **kw) -> "CodeConfig":
        """Test channels matched to the rates: ``q_x = h^{-1}(1 - r_x)``, likewise ``q_y``."""
        for name, v in (("r_x", r_x), ("r_y", r_y)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        q_x = ic.inverse_binary_entropy(1.0 - r_x)
        q_y = ic.inverse_binary_entropy(1.0 - r_y)
        return cls(n, q, q_x, q_y, r_c, r_x, r_y, **kw)

    @property
    def M_c(self) -> int:
        return _codebook_size(self.n, self.R_c)

    @property
    def M_x(self) -> int:
        return _codebook_size(self.n, self.R_x)

    @property
    def M_y(self) -> int:
        return _codebook_size(self.n, self.R_y)

    def joint(self) -> ic.JointPMF:
        """``p(x, y, u, v)`` of the binary long chain."""
        return ic.build_chain_pmf([0.5, 0.5], ic.bsc(self.q), ic.bsc(self.q_x), ic.bsc(self.q_y))


@dataclass(frozen=True)
class _Tests:
    xy: PairTypicality
    xu: PairTypicality
    yv: PairTypicality
    uv: PairTypicality

    @classmethod
    def for_config(cls, cfg: CodeConfig) -> "_Tests":
        pmf = cfg.joint()
        make = lambda a, b: PairTypicality(pmf.marginal((a, b)), cfg.n, cfg.delta)  # noqa: E731
        return cls(make("X", "Y"), make("X", "U"), make("Y", "V"), make("U", "V"))


@dataclass(frozen=True)
class TrialOutcome:
    selected_w: int
    m_assigned: int
    mu: int
    m_hat: int
    w_hat: int
    event: str

    @property
    def ok(self) -> bool:
        return self.event == "OK"


@dataclass(frozen=True)
class ClassifyResult:
    w_hat: int
    m_hat: int
    e4: bool
    e5: bool
    matches: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class Code:
    """A trained code: patterns, both codebooks and the stored assignments."""

    cfg: CodeConfig
    patterns: np.ndarray
    book_u: np.ndarray
    book_v: np.ndarray
    assignments: np.ndarray
    unencodable: np.ndarray
    tests: _Tests = field(repr=False)

    @property
    def active(self) -> np.ndarray:
        return np.unique(self.assignments)

    @property
    def collision(self) -> bool:
        return detect_collision(self.assignments)


def generate_codebooks(cfg: CodeConfig, rng: np.random.Generator):
    """Memory and sensory codebooks drawn from the typical sets of ``U`` and ``V``."""
    pmf = cfg.joint()
    p_u = float(pmf.marginal("U")[1])
    p_v = float(pmf.marginal("V")[1])
    book_u = sample_typical_binary(p_u, cfg.n, cfg.delta, rng, cfg.M_x, cfg.max_rejection)
    book_v = sample_typical_binary(p_v, cfg.n, cfg.delta, rng, cfg.M_y, cfg.max_rejection)
    return book_u, book_v


def _first_typical_dense(book: np.ndarray, words: np.ndarray, test: PairTypicality):
    """First index in ``book`` typical with each word, by direct comparison."""
    words = np.asarray(words, dtype=np.int64)
    idx = np.zeros(words.size, dtype=np.int64)
    found = np.zeros(words.size, dtype=bool)
    kb = popcount(book)
    block = max(1, _DENSE_BLOCK // max(book.size, 1))
    for s in range(0, words.size, block):
        w = words[s:s + block]
        typ = test.lut[popcount(w)[:, None], kb[None, :], popcount(w[:, None] & book[None, :])]
        found[s:s + block] = typ.any(axis=1)
        idx[s:s + block] = np.argmax(typ, axis=1)
    idx[~found] = 0
    return idx, ~found


def _first_typical_claim(book: np.ndarray, words: np.ndarray, test: PairTypicality):
    """Same result as the dense search, by letting each codeword claim its neighbours."""
    from ._kernels import claim_table, new_table

    masks = flip_masks(test.n, test.max_flips)
    table = claim_table(np.asarray(book, dtype=np.int64), masks, test.lut, new_table(test.n))
    hit = table[np.asarray(words, dtype=np.int64)].astype(np.int64)
    miss = hit < 0
    hit[miss] = 0
    return hit, miss


def _choose_strategy(n_words: int, book_size: int, test: PairTypicality) -> str:
    if test.max_flips < 0:
        return "dense"
    n_masks = sum(math.comb(test.n, k) for k in range(test.max_flips + 1))
    claim_cost = 4 * book_size * n_masks + (1 << test.n)
    return "claim" if claim_cost < n_words * book_size else "dense"


def encode_patterns(book_u, patterns, test: PairTypicality, strategy: str = "auto"):
    """Memory indices for many patterns: ``(m, unencodable)`` arrays.

    ``strategy`` is ``"dense"``, ``"claim"`` or ``"auto"``; both searches return
    the first typical codeword in ascending index order.
    """
    book_u = np.asarray(book_u, dtype=np.int64)
    patterns = np.asarray(patterns, dtype=np.int64)
    if strategy == "auto":
        strategy = _choose_strategy(patterns.size, book_u.size, test)
    if strategy == "dense":
        return _first_typical_dense(book_u, patterns, test)
    if strategy == "claim":
        return _first_typical_claim(book_u, patterns, test)
    raise ValueError(f"unknown strategy {strategy!r}")


def memory_encode(book_u, pattern: int, test: PairTypicality) -> tuple[int, bool]:
    """First memory codeword typical with ``pattern``; ``(0, True)`` if none (E1)."""
    m, miss = _first_typical_dense(np.asarray(book_u, dtype=np.int64), np.array([pattern]), test)
    return int(m[0]), bool(miss[0])


def sensory_encode(book_v, y: int, test: PairTypicality) -> tuple[int, bool]:
    """First sensory codeword typical with ``y``; ``(0, True)`` if none (E3)."""
    mu, miss = _first_typical_dense(np.asarray(book_v, dtype=np.int64), np.array([y]), test)
    return int(mu[0]), bool(miss[0])


def detect_collision(assignments) -> bool:
    """True iff two patterns were stored at the same memory index (E2)."""
    a = np.asarray(assignments)
    return bool(np.unique(a).size < a.size)


def classify(book_u, active, v_codeword: int, assignments, test: PairTypicality) -> ClassifyResult:
    """Find the unique active memory codeword typical with ``v_codeword`` and its label.

    No match flags E4 and several flag E5; both fall back to index 0. The
    label is the first pattern stored at the chosen index.
    """
    book_u = np.asarray(book_u, dtype=np.int64)
    active = np.asarray(active, dtype=np.int64)
    assignments = np.asarray(assignments)
    matches = active[test(book_u[active], np.int64(v_codeword))]
    e4 = matches.size == 0
    e5 = matches.size > 1
    m_hat = 0 if (e4 or e5) else int(matches[0])
    labels = np.flatnonzero(assignments == m_hat)
    w_hat = int(labels[0]) if labels.size else -1
    return ClassifyResult(w_hat, m_hat, e4, e5, matches)


def train_code(cfg: CodeConfig, rng: np.random.Generator, patterns=None, strategy: str = "auto") -> Code:
    """Draw (or accept) training patterns and codebooks, then store the patterns."""
    tests = _Tests.for_config(cfg)
    if patterns is None:
        patterns = rng.integers(0, 1 << cfg.n, size=cfg.M_c, dtype=np.int64)
    patterns = np.asarray(patterns, dtype=np.int64)
    book_u, book_v = generate_codebooks(cfg, rng)
    m, miss = encode_patterns(book_u, patterns, tests.xu, strategy)
    return Code(cfg, patterns, book_u, book_v, m, miss, tests)


def recognize(code: Code, w: int, y: int) -> TrialOutcome:
    """Run the test phase on observation ``y`` of pattern ``w`` and attribute the outcome."""
    t = code.tests
    x = code.patterns[w]
    m_w = int(code.assignments[w])
    mu, e3 = sensory_encode(code.book_v, y, t.yv)
    v = code.book_v[mu]
    res = classify(code.book_u, code.active, v, code.assignments, t.uv)
    if res.w_hat == w and res.m_hat == m_w:
        event = "OK"
    elif not t.xy(x, y):
        event = "E0"
    elif code.unencodable[w]:
        event = "E1"
    elif code.collision:
        event = "E2"
    elif e3:
        event = "E3"
    elif not t.uv(code.book_u[m_w], v):
        event = "E4"
    elif res.e5:
        event = "E5"
    else:
        raise ConsistencyError("recognition failed without any attributable event")
    return TrialOutcome(int(w), m_w, mu, res.m_hat, res.w_hat, event)


def observe(x: int, q: float, n: int, rng: np.random.Generator) -> int:
    """Pass a packed pattern through a BSC(q)."""
    noise = pack_bits((rng.random(n) < q).astype(np.uint8))
    return int(x ^ noise)


def simulate_trial(cfg: CodeConfig, trial: int) -> TrialOutcome:
    """One independent trial: fresh patterns, codebooks, selection and noise."""
    rng = make_rng(cfg.seed, trial)
    try:
        code = train_code(cfg, rng)
    except SamplingError:
        return TrialOutcome(-1, -1, -1, -1, -1, "SAMPLING")
    w = int(rng.integers(cfg.M_c))
    y = observe(int(code.patterns[w]), cfg.q, cfg.n, rng)
    return recognize(code, w, y)


class TypicalityRecognizer(ClassifierMixin, BaseEstimator):
    """Estimator wrapper: ``fit`` stores labelled binary patterns, ``predict`` labels observations.

    Parameters
    ----------
    q : float
        Crossover of the observation channel.
    r_x, r_y : float
        Memory and sensory rates; set the test channels and codebook sizes.
    delta : float or None
        Typicality slack; block-length default when None.
    seed : int
        Seed for codebook generation.
    """

    def __init__(self, q=0.2, r_x=0.8, r_y=0.8, delta=None, seed=0):
        self.q = q
        self.r_x = r_x
        self.r_y = r_y
        self.delta = delta
        self.seed = seed

    def fit(self, X, y):
        X = check_array(X, dtype=np.int64)
        y = np.asarray(y)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have different lengths")
        n = X.shape[1]
        r_c = math.log2(max(X.shape[0], 1)) / n
        cfg = CodeConfig.from_rates(n, self.q, self.r_x, self.r_y, r_c, delta=self.delta, seed=self.seed)
        self.code_ = train_code(cfg, make_rng(self.seed), patterns=pack_bits(X))
        self.classes_, self.label_index_ = np.unique(y, return_inverse=True)
        self.labels_ = y
        self.n_features_in_ = n
        return self

    def predict(self, X):
        check_is_fitted(self, "code_")
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        code = self.code_
        out = []
        for y in pack_bits(X):
            mu, _ = sensory_encode(code.book_v, int(y), code.tests.yv)
            res = classify(code.book_u, code.active, code.book_v[mu], code.assignments, code.tests.uv)
            out.append(self.labels_[max(res.w_hat, 0)])
        return np.asarray(out)
