"""Brute-force checks of information identities on small random models.

Each ``check_*`` draws ``cases`` random joint pmfs (flat Dirichlet tables or
chains of Dirichlet-row channels), evaluates both sides exactly, and reports
the largest violation. All checks are deterministic given the seed.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from . import info_core as ic

__all__ = [
    "TOLERANCE",
    "LemmaReport",
    "check_ab_lemma",
    "check_gelfand_pinsker",
    "check_time_sharing",
    "check_alt_form",
    "check_rate_excess",
    "check_no_ind_identity",
    "SUITES",
    "run_suite",
    "short_chain_mixture",
    "ab_terms",
    "gelfand_pinsker_terms",
    "no_ind_terms",
    "alt_form_value",
    "rate_excess_value",
]

TOLERANCE = 1e-10
NEAR_EQUALITY = 1e-6
_MI = ic.mutual_information
_CMI = ic.conditional_mutual_information


@dataclass
class LemmaReport:
    lemma_id: str
    cases_run: int
    max_violation: float
    worst_case: dict
    tolerance: float = TOLERANCE
    passed: bool = field(init=False)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.max_violation <= self.tolerance)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _dirichlet_pmf(rng, names, sizes) -> ic.JointPMF:
    flat = rng.dirichlet(np.ones(int(np.prod(sizes))))
    return ic.JointPMF(tuple(names), flat.reshape(sizes))


def _channel(rng, n_in, n_out) -> np.ndarray:
    return rng.dirichlet(np.ones(n_out), size=n_in)


def _check_cases(cases):
    if int(cases) < 1:
        raise ValueError("cases must be at least 1")
    return int(cases)


class _Tracker:
    def __init__(self):
        self.worst = 0.0
        self.where: dict = {}

    def update(self, violation: float, **where):
        if violation > self.worst or not self.where:
            self.worst = max(violation, self.worst)
            self.where = where


def ab_terms(p: ic.JointPMF) -> tuple[float, float, float]:
    """``(I(a;b), I(A;a) + I(B;b) - I(AB;ab), I(Aa;Bb) - I(A;B))`` over ``A, alpha, B, beta``."""
    lhs = _MI(p, "alpha", "beta")
    rhs = _MI(p, "A", "alpha") + _MI(p, "B", "beta") - _MI(p, ("A", "B"), ("alpha", "beta"))
    bracket = _MI(p, ("A", "alpha"), ("B", "beta")) - _MI(p, "A", "B")
    return lhs, rhs, bracket


def check_ab_lemma(seed=0, cases: int = 10**4, alphabet_cap: int = 3) -> LemmaReport:
    """``I(a;b) >= I(A;a) + I(B;b) - I(AB;ab)``, with slack ``I(Aa;Bb) - I(A;B)``.

    The inequality and the exact slack identity are both checked. Cases with
    slack below 1e-6 are listed as near-equality cases.
    """
    cases = _check_cases(cases)
    if not 2 <= alphabet_cap <= 3:
        raise ValueError("alphabet_cap must be 2 or 3")
    rng = _rng(seed)
    names = ("A", "alpha", "B", "beta")
    track = _Tracker()
    near = []
    for k in range(cases):
        sizes = tuple(rng.integers(2, alphabet_cap + 1, size=4))
        p = _dirichlet_pmf(rng, names, sizes)
        lhs, rhs, bracket = ab_terms(p)
        violation = max(rhs - lhs, abs((lhs - rhs) - bracket), -bracket)
        track.update(violation, case=k, sizes=[int(s) for s in sizes])
        if bracket < NEAR_EQUALITY and len(near) < 10:
            near.append({"case": k, "gap": lhs - rhs, "bracket": bracket})
    return LemmaReport("ab_lemma", cases, track.worst, track.where, extras={"near_equality": near})


def no_ind_terms(p: ic.JointPMF) -> tuple[float, float]:
    """Both sides of ``I(A;a) = I(A;a,g) - I(A,a;g) + I(a;g)`` over ``A, alpha, gamma``."""
    lhs = _MI(p, "A", "alpha")
    rhs = _MI(p, "A", ("alpha", "gamma")) - _MI(p, ("A", "alpha"), "gamma") + _MI(p, "alpha", "gamma")
    return lhs, rhs


def check_no_ind_identity(seed=0, cases: int = 10**4, alphabet_cap: int = 3) -> LemmaReport:
    """``I(A;a) = I(A;a,g) - I(A,a;g) + I(a;g)`` on random three-variable pmfs."""
    cases = _check_cases(cases)
    rng = _rng(seed)
    names = ("A", "alpha", "gamma")
    track = _Tracker()
    for k in range(cases):
        sizes = tuple(rng.integers(2, alphabet_cap + 1, size=3))
        p = _dirichlet_pmf(rng, names, sizes)
        lhs, rhs = no_ind_terms(p)
        track.update(abs(lhs - rhs), case=k, sizes=[int(s) for s in sizes])
    return LemmaReport("no_ind_identity", cases, track.worst, track.where)


def _iid_with_side(rng, n: int, gamma_size: int) -> ic.JointPMF:
    """``A_1..A_n`` i.i.d. Bernoulli and ``gamma`` a noisy random function of them."""
    p1 = rng.uniform(0.05, 0.95)
    a = np.array([1.0 - p1, p1])
    prior = a
    for _ in range(n - 1):
        prior = np.multiply.outer(prior, a)
    f = rng.integers(gamma_size, size=2**n)
    noise = _channel(rng, 2**n, gamma_size)
    lam = rng.uniform()
    chan = lam * np.eye(gamma_size)[f] + (1.0 - lam) * noise
    table = prior.reshape(-1, 1) * chan
    names = tuple(f"A{i + 1}" for i in range(n)) + ("gamma",)
    return ic.JointPMF(names, table.reshape((2,) * n + (gamma_size,)))


def gelfand_pinsker_terms(p: ic.JointPMF) -> tuple[float, float, float]:
    """``(sum_i I(A_i; gamma, A^{i-1}), sum_i I(A_i; A^{i-1}), I(A^n; gamma))`` for ``A1..An, gamma``."""
    a = [v for v in p.names if v != "gamma"]
    total = 0.0
    correction = 0.0
    for i in range(len(a)):
        total += _MI(p, a[i], ("gamma", *a[:i]))
        if i:
            correction += _MI(p, a[i], tuple(a[:i]))
    return total, correction, _MI(p, tuple(a), "gamma")


def check_gelfand_pinsker(seed=0, cases: int = 10**3, n_small: int = 3) -> LemmaReport:
    """``sum_i I(A_i; gamma, A^{i-1}) = I(A^n; gamma)`` for i.i.d. ``A_i``.

    The general form with the correction ``sum_i I(A_i; A^{i-1})`` is checked
    too; its largest correction is reported.
    """
    cases = _check_cases(cases)
    if not 1 <= n_small <= 3:
        raise ValueError("n_small must lie in 1..3")
    rng = _rng(seed)
    track = _Tracker()
    worst_correction = 0.0
    for k in range(cases):
        g = int(rng.integers(2, 5))
        total, correction, rhs = gelfand_pinsker_terms(_iid_with_side(rng, n_small, g))
        violation = max(abs(total - rhs), abs(total - correction - rhs))
        worst_correction = max(worst_correction, correction)
        track.update(violation, case=k, gamma_size=g)
    return LemmaReport(
        "gelfand_pinsker", cases, track.worst, track.where, extras={"max_correction": worst_correction}
    )


@dataclass(frozen=True)
class _Mixture:
    pmf: ic.JointPMF
    weights: np.ndarray
    parts: tuple


def short_chain_mixture(rng, q_size: int, x_size: int = 2, y_size: int = 2,
                        u_size: int = 2, v_size: int = 2) -> _Mixture:
    """Pair ``U = (U_Q, Q)``, ``V = (V_Q, Q)`` built from per-``q`` long chains.

    ``X, Y ~ p(x, y)`` are shared and ``Q`` is independent of them. The
    composite satisfies both short chains; it generally violates the long one.
    """
    px = rng.dirichlet(np.ones(x_size))
    yx = _channel(rng, x_size, y_size)
    weights = rng.dirichlet(np.ones(q_size))
    parts = []
    table = np.zeros((x_size, y_size, u_size * q_size, v_size * q_size))
    for q in range(q_size):
        part = ic.build_chain_pmf(px, yx, _channel(rng, x_size, u_size), _channel(rng, y_size, v_size))
        parts.append(part)
        table[:, :, q * u_size:(q + 1) * u_size, q * v_size:(q + 1) * v_size] += weights[q] * part.probs
    pmf = ic.JointPMF(("X", "Y", "U", "V"), table)
    return _Mixture(pmf, weights, tuple(parts))


def _random_mixture(rng, q_choices=(2, 3)) -> _Mixture:
    q = int(rng.choice(q_choices))
    sizes = rng.integers(2, 4, size=4)
    # composite alphabets stay within the 16-symbol table limit
    return short_chain_mixture(rng, q, *[int(s) for s in sizes])


def rate_excess_value(p: ic.JointPMF) -> float:
    """``I(U;V) - I(U;V|XY)``."""
    return _MI(p, "U", "V") - _CMI(p, "U", "V", ("X", "Y"))


def alt_form_value(p: ic.JointPMF) -> float:
    """``I(X;U) + I(Y;V) - I(XY;UV)``."""
    return _MI(p, "X", "U") + _MI(p, "Y", "V") - _MI(p, ("X", "Y"), ("U", "V"))


_excess = rate_excess_value
_alt = alt_form_value


def check_time_sharing(seed=0, cases: int = 10**3) -> LemmaReport:
    """Time-shared pair ``(U_Q, Q), (V_Q, Q)`` averages the three rate expressions.

    Also checks both short chains of the composite and that its corner rate
    triple is the ``p(q)``-weighted average of the per-``q`` triples.
    """
    cases = _check_cases(cases)
    rng = _rng(seed)
    track = _Tracker()
    for k in range(cases):
        mix = _random_mixture(rng)
        p, w = mix.pmf, mix.weights
        avg_xu = sum(wq * _MI(part, "X", "U") for wq, part in zip(w, mix.parts))
        avg_yv = sum(wq * _MI(part, "Y", "V") for wq, part in zip(w, mix.parts))
        avg_c = sum(wq * _excess(part) for wq, part in zip(w, mix.parts))
        avg_triple = sum(wq * np.array(ic.rate_triple_from_aux(part).as_tuple()) for wq, part in zip(w, mix.parts))
        triple = np.array(ic.rate_triple_from_aux(p).as_tuple())
        violation = max(
            abs(_MI(p, "X", "U") - avg_xu),
            abs(_MI(p, "Y", "V") - avg_yv),
            abs(_excess(p) - avg_c),
            _CMI(p, "U", "Y", "X"),
            _CMI(p, "V", "X", "Y"),
            float(np.max(np.abs(triple - avg_triple))),
        )
        track.update(violation, case=k, q_size=len(w), shape=list(p.alphabet_sizes))
    return LemmaReport("time_sharing", cases, track.worst, track.where)


def check_alt_form(seed=0, cases: int = 10**3) -> LemmaReport:
    """``I(X;U) + I(Y;V) - I(XY;UV) = I(U;V) - I(U;V|XY)`` under the two short chains."""
    cases = _check_cases(cases)
    rng = _rng(seed)
    track = _Tracker()
    off_chain = 0
    for k in range(cases):
        mix = _random_mixture(rng, q_choices=(1, 2, 3))
        p = mix.pmf
        if _CMI(p, "U", "V", ("X", "Y")) > NEAR_EQUALITY:
            off_chain += 1
        track.update(abs(_alt(p) - _excess(p)), case=k, shape=list(p.alphabet_sizes))
    return LemmaReport("alt_form", cases, track.worst, track.where, extras={"cases_off_long_chain": off_chain})


def check_rate_excess(seed=0, cases: int = 10**3) -> LemmaReport:
    """``I(X;U) - I(X;U|V)`` and ``I(Y;V) - I(Y;V|U)`` both equal ``I(U;V) - I(U;V|XY)``."""
    cases = _check_cases(cases)
    rng = _rng(seed)
    track = _Tracker()
    for k in range(cases):
        p = _random_mixture(rng, q_choices=(1, 2, 3)).pmf
        ex = _excess(p)
        x_side = _MI(p, "X", "U") - _CMI(p, "X", "U", "V")
        y_side = _MI(p, "Y", "V") - _CMI(p, "Y", "V", "U")
        track.update(max(abs(x_side - ex), abs(y_side - ex)), case=k, shape=list(p.alphabet_sizes))
    return LemmaReport("rate_excess", cases, track.worst, track.where)


SUITES: dict[str, tuple[Callable[..., LemmaReport], int]] = {
    "ab_lemma": (check_ab_lemma, 10**4),
    "gelfand_pinsker": (check_gelfand_pinsker, 10**3),
    "time_sharing": (check_time_sharing, 10**3),
    "alt_form": (check_alt_form, 10**3),
    "rate_excess": (check_rate_excess, 10**3),
    "no_ind_identity": (check_no_ind_identity, 10**4),
}


def run_suite(name: str, seed: int = 0, cases: int | None = None) -> LemmaReport:
    """Run one named check with its default case count unless ``cases`` is given."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn, default = SUITES[name]
    return fn(seed, default if cases is None else cases)
