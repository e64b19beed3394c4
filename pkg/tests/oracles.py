"""Independent reference implementations used only by the tests.

Everything here is written from the defining formulas with mpmath at 50
digits or with plain Python loops, sharing no code with the package.
"""

from __future__ import annotations

import itertools
import math

import mpmath as mp

mp.mp.dps = 50


def h(p):
    p = mp.mpf(p)
    if p <= 0 or p >= 1:
        return mp.mpf(0)
    return -p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2)


def h_inv(t):
    """Root of ``h(q) = t`` on ``[0, 1/2]`` by 200-step bisection at high precision."""
    t = mp.mpf(t)
    if t <= 0:
        return mp.mpf(0)
    if t >= 1:
        return mp.mpf("0.5")
    lo, hi = mp.mpf(0), mp.mpf("0.5")
    for _ in range(200):
        mid = (lo + hi) / 2
        if h(mid) < t:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def star(a, b):
    a, b = mp.mpf(a), mp.mpf(b)
    return a * (1 - b) + b * (1 - a)


def g(q, rx, ry):
    return 1 - h(star(star(q, h_inv(1 - mp.mpf(rx))), h_inv(1 - mp.mpf(ry))))


def G(rho_xy, rx, ry):
    a2 = 1 - mp.power(2, -2 * mp.mpf(rx))
    b2 = 1 - mp.power(2, -2 * mp.mpf(ry))
    return -mp.log(1 - mp.mpf(rho_xy) ** 2 * a2 * b2, 2) / 2


def table_entropy(table: dict) -> float:
    return -math.fsum(p * math.log2(p) for p in table.values() if p > 0)


def marginal_dict(probs, axes):
    """Marginal of a numpy table over ``axes`` as a ``{index tuple: prob}`` dict, by looping."""
    out: dict = {}
    for idx in itertools.product(*(range(s) for s in probs.shape)):
        key = tuple(idx[a] for a in axes)
        out[key] = out.get(key, 0.0) + float(probs[idx])
    return out


def mi_loop(probs, a_axes, b_axes):
    """``sum p(a,b) log p(a,b) / p(a)p(b)`` by explicit summation."""
    pab = marginal_dict(probs, tuple(a_axes) + tuple(b_axes))
    pa = marginal_dict(probs, a_axes)
    pb = marginal_dict(probs, b_axes)
    k = len(a_axes)
    total = []
    for key, p in pab.items():
        if p > 0:
            total.append(p * math.log2(p / (pa[key[:k]] * pb[key[k:]])))
    return math.fsum(total)


def cmi_loop(probs, a_axes, b_axes, c_axes):
    """``sum p(a,b,c) log p(ab|c) / p(a|c)p(b|c)`` by explicit summation."""
    pabc = marginal_dict(probs, tuple(a_axes) + tuple(b_axes) + tuple(c_axes))
    pac = marginal_dict(probs, tuple(a_axes) + tuple(c_axes))
    pbc = marginal_dict(probs, tuple(b_axes) + tuple(c_axes))
    pc = marginal_dict(probs, c_axes)
    ka, kb = len(a_axes), len(b_axes)
    total = []
    for key, p in pabc.items():
        if p > 0:
            a, b, c = key[:ka], key[ka:ka + kb], key[ka + kb:]
            total.append(p * math.log2(p * pc[c] / (pac[a + c] * pbc[b + c])))
    return math.fsum(total)


def rho(r):
    return mp.sqrt(1 - mp.power(2, -2 * mp.mpf(r)))


def corr4(rxy, rxu, ryv, ruv):
    """Correlation matrix of ``(X, Y, U, V)`` for ``U - X - Y - V`` style pairs."""
    rxy, rxu, ryv, ruv = (mp.mpf(v) for v in (rxy, rxu, ryv, ruv))
    return mp.matrix([
        [1, rxy, rxu, rxy * ryv],
        [rxy, 1, rxy * rxu, ryv],
        [rxu, rxy * rxu, 1, ruv],
        [rxy * ryv, ryv, ruv, 1],
    ])


def mi_xyuv(rxy, rxu, ryv, ruv):
    """``I(XY;UV) = 1/2 log2(|C_xy| |C_uv| / |C|)``."""
    c = corr4(rxy, rxu, ryv, ruv)
    d = mp.det(c)
    if d <= 0:
        return mp.inf
    return mp.log((1 - mp.mpf(rxy) ** 2) * (1 - mp.mpf(ruv) ** 2) / d, 2) / 2


def argmin_rho_uv(rxy, rxu, ryv, iters=160):
    """Golden-section minimizer of ``mi_xyuv`` over ``rho_uv``; the objective is convex on the PSD set."""
    phi = (mp.sqrt(5) - 1) / 2
    lo, hi = mp.mpf(0), mp.mpf(1) - mp.mpf(10) ** -30
    f = lambda t: mi_xyuv(rxy, rxu, ryv, t)
    a, b = hi - phi * (hi - lo), lo + phi * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(iters):
        if fa < fb:
            hi, b, fb = b, a, fa
            a = hi - phi * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + phi * (hi - lo)
            fb = f(b)
    return (lo + hi) / 2


def G_star(rho_xy, rx, ry):
    t = argmin_rho_uv(rho_xy, rho(rx), rho(ry))
    return mp.mpf(rx) + mp.mpf(ry) - mi_xyuv(rho_xy, rho(rx), rho(ry), t)


def h_inv_float(t):
    from scipy.optimize import brentq

    if t <= 0:
        return 0.0
    if t >= 1:
        return 0.5
    return brentq(lambda q: h_float(q) - t, 0.0, 0.5, xtol=1e-17, rtol=1e-15)


def h_float(p):
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def fixed_code_error(code) -> float:
    """Exact error probability by unpacked sequences and the general typicality test."""
    from patrec import info_core as ic
    from patrec.sim import typicality_test, unpack_bits

    cfg = code.cfg
    n, d = cfg.n, cfg.delta
    pmf = cfg.joint()
    j_xu = ic.JointPMF(("X", "U"), pmf.marginal(("X", "U")))
    j_yv = ic.JointPMF(("Y", "V"), pmf.marginal(("Y", "V")))
    j_uv = ic.JointPMF(("U", "V"), pmf.marginal(("U", "V")))
    bits = lambda w: unpack_bits(int(w), n).astype(int)  # noqa: E731

    def first(book, seq, joint):
        for j, c in enumerate(book):
            if typicality_test([seq, bits(c)], joint, d):
                return j
        return 0

    assign = [first(code.book_u, bits(x), j_xu) for x in code.patterns]
    active = sorted(set(assign))
    err = 0.0
    for w, x in enumerate(code.patterns):
        for e in range(1 << n):
            k = bin(e).count("1")
            prob = cfg.q**k * (1 - cfg.q) ** (n - k) / cfg.M_c
            v = bits(code.book_v[first(code.book_v, bits(int(x) ^ e), j_yv)])
            hits = [m for m in active if typicality_test([bits(code.book_u[m]), v], j_uv, d)]
            m_hat = hits[0] if len(hits) == 1 else 0
            w_hat = assign.index(m_hat) if m_hat in assign else -1
            if not (w_hat == w and m_hat == assign[w]):
                err += prob
    return err
