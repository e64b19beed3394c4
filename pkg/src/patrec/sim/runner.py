"""Monte Carlo trial loops, error-rate summaries and their serialization."""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import binomtest

from .scheme import EVENTS, Code, CodeConfig, make_rng, recognize, simulate_trial

__all__ = [
    "SimulationResult",
    "run_trials",
    "sweep",
    "simulate_fixed_code",
    "enumerate_fixed_code",
    "ci95_halfwidth",
    "trend_ok",
]


def ci95_halfwidth(errors: int, trials: int) -> float:
    """Half-width of the 95% Wilson score interval for ``errors / trials``."""
    ci = binomtest(int(errors), int(trials)).proportion_ci(0.95, method="wilson")
    return float((ci.high - ci.low) / 2.0)


@dataclass(frozen=True)
class SimulationResult:
    """Event counts over ``trials`` independent trials of one configuration."""

    cfg: CodeConfig
    trials: int
    counts: dict

    def __post_init__(self):
        counts = {e: int(self.counts.get(e, 0)) for e in EVENTS}
        if sum(counts.values()) != self.trials:
            raise ValueError("event counts must sum to the number of trials")
        object.__setattr__(self, "counts", counts)

    @property
    def errors(self) -> int:
        return self.trials - self.counts["OK"]

    @property
    def pe_hat(self) -> float:
        return self.errors / self.trials

    @property
    def ci95(self) -> float:
        return ci95_halfwidth(self.errors, self.trials)

    def record(self) -> dict:
        c = self.cfg
        rec = {
            "n": c.n,
            "Rc": c.R_c,
            "Rx": c.R_x,
            "Ry": c.R_y,
            "q": c.q,
            "qx": c.q_x,
            "qy": c.q_y,
            "delta": c.delta,
            "seed": c.seed,
            "trials": self.trials,
        }
        for e in EVENTS[1:7]:
            rec[e.lower()] = self.counts[e]
        rec["ok"] = self.counts["OK"]
        rec["sampling_failures"] = self.counts["SAMPLING"]
        rec["pe_hat"] = self.pe_hat
        rec["ci95"] = self.ci95
        return rec

    def to_json(self) -> str:
        return json.dumps(self.record())


def _count(cfg: CodeConfig, trials: range) -> Counter:
    return Counter(simulate_trial(cfg, t).event for t in trials)


def run_trials(cfg: CodeConfig, trials: int, threads: int = 1) -> SimulationResult:
    """Run trials ``0 .. trials-1``; the result does not depend on ``threads``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads == 1:
        counts = _count(cfg, range(trials))
    else:
        bounds = np.linspace(0, trials, threads + 1).astype(int)
        chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
        counts = Counter()
        with ThreadPoolExecutor(threads) as pool:
            for part in pool.map(lambda r: _count(cfg, r), chunks):
                counts.update(part)
    return SimulationResult(cfg, trials, dict(counts))


def sweep(cfg: CodeConfig, n_values, trials: int, delta: float | None = None, threads: int = 1):
    """One result per block length; ``delta=None`` uses the block-length default."""
    return [run_trials(replace(cfg, n=int(n), delta=delta), trials, threads) for n in n_values]


def trend_ok(results, allowed_overlaps: int = 1) -> bool:
    """Is ``pe_hat`` nonincreasing in order, up to ``allowed_overlaps`` rises within CI overlap?"""
    rises = 0
    for a, b in zip(results[:-1], results[1:]):
        if b.pe_hat > a.pe_hat:
            if b.pe_hat - b.ci95 > a.pe_hat + a.ci95:
                return False
            rises += 1
    return rises <= allowed_overlaps


def simulate_fixed_code(code: Code, trials: int, seed: int = 0) -> SimulationResult:
    """Monte Carlo over pattern choice and channel noise with the code held fixed."""
    cfg = code.cfg
    rng = make_rng(seed)
    ws = rng.integers(cfg.M_c, size=trials)
    noise_bits = (rng.random((trials, cfg.n)) < cfg.q).astype(np.int64)
    noise = (noise_bits << np.arange(cfg.n, dtype=np.int64)).sum(axis=1)
    ys = code.patterns[ws] ^ noise
    # outcomes depend on (w, y) only; cache the deterministic pipeline
    cache: dict = {}
    counts: Counter = Counter()
    for w, y in zip(ws.tolist(), ys.tolist()):
        key = (w, y)
        if key not in cache:
            cache[key] = recognize(code, w, y).event
        counts[cache[key]] += 1
    return SimulationResult(cfg, trials, dict(counts))


def enumerate_fixed_code(code: Code) -> tuple[float, dict]:
    """Exact error probability of a fixed code over uniform patterns and all noise words."""
    cfg = code.cfg
    n = cfg.n
    noise = np.arange(1 << n, dtype=np.int64)
    weight = np.bitwise_count(noise).astype(float)
    prob = cfg.q**weight * (1.0 - cfg.q) ** (n - weight)
    p_event = {e: 0.0 for e in EVENTS}
    for w in range(cfg.M_c):
        x = int(code.patterns[w])
        for e, p in zip(noise.tolist(), prob.tolist()):
            p_event[recognize(code, w, x ^ e).event] += p / cfg.M_c
    return 1.0 - p_event["OK"], p_event
