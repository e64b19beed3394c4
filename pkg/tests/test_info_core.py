import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patrec import info_core as ic
from patrec.errors import ConsistencyError

from . import oracles


def bern(p, name="X"):
    return ic.JointPMF((name,), np.array([1 - p, p]))


def bsc_joint(q):
    return ic.JointPMF(("X", "Y"), 0.5 * ic.bsc(q))


def random_pmf(rng, names, sizes):
    return ic.JointPMF(names, rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes))


class TestJointPMF:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            ic.JointPMF(("X",), np.array([0.5, 0.6]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ic.JointPMF(("X",), np.array([1.5, -0.5]))

    def test_rejects_too_many_variables(self):
        with pytest.raises(ValueError):
            ic.JointPMF(tuple("ABCDE"), np.full((2,) * 5, 1 / 32))

    def test_rejects_large_alphabet(self):
        with pytest.raises(ValueError):
            ic.JointPMF(("X",), np.full(17, 1 / 17))

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            ic.JointPMF(("X", "X"), np.full((2, 2), 0.25))

    def test_marginal_follows_requested_order(self):
        rng = np.random.default_rng(1)
        p = random_pmf(rng, ("A", "B", "C"), (2, 3, 2))
        m = p.marginal(("C", "A"))
        assert m.shape == (2, 2)
        np.testing.assert_allclose(m, p.probs.sum(axis=1).T)

    def test_unknown_variable(self):
        with pytest.raises(ValueError):
            ic.entropy(bern(0.3), "Z")


class TestEntropy:
    def test_uniform_bit(self):
        assert ic.entropy(bern(0.5), "X") == pytest.approx(1.0, abs=1e-15)

    def test_point_mass(self):
        assert ic.entropy(bern(0.0), "X") == 0.0

    def test_bernoulli_02(self):
        assert ic.entropy(bern(0.2), "X") == pytest.approx(0.721928, abs=1e-6)
        assert ic.entropy(bern(0.2), "X") == pytest.approx(float(oracles.h(0.2)), abs=1e-14)


class TestBinaryFunctions:
    @pytest.mark.parametrize("p, want", [(0.5, 1.0), (0.0, 0.0), (1.0, 0.0)])
    def test_h_trivial(self, p, want):
        assert ic.binary_entropy(p) == pytest.approx(want, abs=1e-15)

    def test_h_02(self):
        assert ic.binary_entropy(0.2) == pytest.approx(0.721928, abs=1e-6)

    def test_h_out_of_range(self):
        with pytest.raises(ValueError):
            ic.binary_entropy(1.2)

    @pytest.mark.parametrize("t, want", [(1.0, 0.5), (0.0, 0.0)])
    def test_h_inv_trivial(self, t, want):
        assert ic.inverse_binary_entropy(t) == pytest.approx(want, abs=1e-15)

    def test_h_inv_02(self):
        q = ic.inverse_binary_entropy(0.2)
        assert q == pytest.approx(0.0311, abs=1e-4)
        assert abs(ic.binary_entropy(q) - 0.2) <= 1e-12
        assert q == pytest.approx(float(oracles.h_inv(0.2)), abs=1e-13)

    def test_h_inv_out_of_range(self):
        with pytest.raises(ValueError):
            ic.inverse_binary_entropy(-0.1)

    def test_h_inv_vectorized_matches_oracle(self):
        ts = np.linspace(0, 1, 101)
        qs = ic.inverse_binary_entropy(ts)
        want = np.array([float(oracles.h_inv(t)) for t in ts])
        np.testing.assert_allclose(qs, want, atol=1e-13)

    @given(st.floats(0.0, 1.0))
    def test_h_inv_roundtrip(self, t):
        q = ic.inverse_binary_entropy(t)
        assert 0.0 <= q <= 0.5
        assert abs(ic.binary_entropy(q) - t) <= 1e-12

    @pytest.mark.parametrize("a, b, want", [(0.3, 0.0, 0.3), (0.3, 0.5, 0.5), (0.2, 0.2, 0.32)])
    def test_convolve_examples(self, a, b, want):
        assert ic.binary_convolve(a, b) == pytest.approx(want, abs=1e-15)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_convolve_commutative_associative(self, a, b, c):
        conv = ic.binary_convolve
        assert conv(a, b) == pytest.approx(conv(b, a), abs=1e-15)
        assert conv(conv(a, b), c) == pytest.approx(conv(a, conv(b, c)), abs=1e-14)

    def test_convolve_out_of_range(self):
        with pytest.raises(ValueError):
            ic.binary_convolve(0.2, 1.5)


class TestMutualInformation:
    def test_independent(self):
        p = ic.JointPMF(("A", "B"), np.outer([0.3, 0.7], [0.6, 0.4]))
        assert ic.mutual_information(p, "A", "B") == 0.0

    def test_copy(self):
        p = ic.JointPMF(("A", "B"), np.diag([0.2, 0.8]))
        assert ic.mutual_information(p, "A", "B") == pytest.approx(ic.entropy(p, "A"), abs=1e-15)

    def test_bsc(self):
        assert ic.mutual_information(bsc_joint(0.2), "X", "Y") == pytest.approx(0.278072, abs=1e-6)

    def test_overlap_rejected(self):
        p = bsc_joint(0.1)
        with pytest.raises(ValueError):
            ic.mutual_information(p, ("X", "Y"), "Y")

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = random_pmf(rng, ("A", "B", "C"), (2, 3, 2))
            got = ic.mutual_information(p, ("A", "C"), "B")
            assert got == pytest.approx(oracles.mi_loop(p.probs, (0, 2), (1,)), abs=1e-13)

    def test_large_negative_is_consistency_error(self):
        with pytest.raises(ConsistencyError):
            ic._clamp(-1e-6, "I")
        with pytest.raises(ValueError):
            ic.RateTriple(-1e-6, 0.0, 0.0)

    def test_tiny_negative_clamped(self):
        assert ic.RateTriple(-1e-14, 0.1, 0.2).r_c == 0.0


class TestConditionalMI:
    def test_markov_zero(self):
        p = ic.build_chain_pmf(np.array([0.3, 0.7]), ic.bsc(0.1), ic.bsc(0.2), ic.bsc(0.3))
        assert ic.conditional_mutual_information(p, "U", "Y", "X") == 0.0

    def test_independent_condition(self):
        rng = np.random.default_rng(3)
        ab = rng.dirichlet(np.ones(4)).reshape(2, 2)
        p = ic.JointPMF(("A", "B", "C"), np.multiply.outer(ab, [0.25, 0.75]))
        assert ic.conditional_mutual_information(p, "A", "B", "C") == pytest.approx(
            ic.mutual_information(p, "A", "B"), abs=1e-14
        )

    def test_random_matches_direct_sum(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = random_pmf(rng, ("A", "B", "C"), (2, 2, 2))
            got = ic.conditional_mutual_information(p, "A", "B", "C")
            assert got == pytest.approx(oracles.cmi_loop(p.probs, (0,), (1,), (2,)), abs=1e-13)


class TestMarkov:
    def test_chain_constructed(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), ic.bsc(0.1), ic.bsc(0.1))
        assert ic.is_markov_chain(p, "U", "X", "Y")
        assert ic.is_markov_chain(p, "X", "Y", "V")
        assert ic.is_markov_chain(p, "U", "X", "V")
        assert ic.is_markov_chain(p, "U", ("X",), ("Y", "V"))

    def test_copied_endpoints_fail(self):
        table = np.zeros((2, 2, 2))
        for a in range(2):
            for b in range(2):
                table[a, b, a] = 0.25
        p = ic.JointPMF(("A", "B", "C"), table)
        assert not ic.is_markov_chain(p, "A", "B", "C")


class TestChainAndRates:
    def test_identity_channels(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), np.eye(2), np.eye(2))
        assert ic.entropy(p, ("X", "U")) == pytest.approx(ic.entropy(p, "X"), abs=1e-15)
        assert ic.entropy(p, ("Y", "V")) == pytest.approx(ic.entropy(p, "Y"), abs=1e-15)

    def test_uniform_channels(self):
        u = np.full((2, 2), 0.5)
        p = ic.build_chain_pmf(np.array([0.4, 0.6]), ic.bsc(0.2), u, u)
        assert ic.mutual_information(p, ("U", "V"), ("X", "Y")) == 0.0

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            ic.build_chain_pmf(np.array([0.5, 0.5]), np.array([[0.5, 0.6], [0.5, 0.5]]), np.eye(2), np.eye(2))

    def test_identity_aux_triple(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), np.eye(2), np.eye(2))
        t = ic.rate_triple_from_aux(p)
        assert t.r_c == pytest.approx(ic.mutual_information(p, "X", "Y"), abs=1e-14)
        assert t.r_x == pytest.approx(1.0, abs=1e-14)
        assert t.r_y == pytest.approx(1.0, abs=1e-14)

    def test_independent_v_useless(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), np.eye(2), np.full((2, 2), 0.5))
        assert ic.rate_triple_from_aux(p).r_c == 0.0

    def test_bsc_forward_construction(self):
        q, qx, qy = 0.2, 0.1, 0.1
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(q), ic.bsc(qx), ic.bsc(qy))
        t = ic.rate_triple_from_aux(p)
        want = 1 - oracles.h(oracles.star(oracles.star(q, qx), qy))
        assert t.r_c == pytest.approx(float(want), abs=1e-13)
        assert t.r_x == pytest.approx(float(1 - oracles.h(qx)), abs=1e-13)

    def test_missing_variable(self):
        with pytest.raises(ValueError):
            ic.rate_triple_from_aux(bsc_joint(0.2))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_chain_rule_and_nonnegativity(seed):
    rng = np.random.default_rng(seed)
    p = random_pmf(rng, ("A", "B", "C"), tuple(rng.integers(1, 4, size=3)))
    h_ab = ic.entropy(p, ("A", "B"))
    assert h_ab == pytest.approx(ic.entropy(p, "A") + ic.entropy(p, "B") - ic.mutual_information(p, "A", "B"), abs=1e-12)
    assert ic.conditional_mutual_information(p, "A", "B", "C") >= 0.0
    assert ic.entropy(p, ("A", "B", "C")) <= math.log2(p.probs.size) + 1e-12
