import json

import numpy as np
import pytest

from patrec import info_core as ic
from patrec import lemma_lab as ll


class TestAbLemma:
    def test_all_independent(self):
        marg = [np.array([0.3, 0.7]), np.array([0.5, 0.5]), np.array([0.2, 0.8]), np.array([0.6, 0.4])]
        table = np.einsum("a,b,c,d->abcd", *marg)
        lhs, rhs, bracket = ll.ab_terms(ic.JointPMF(("A", "alpha", "B", "beta"), table))
        assert lhs == pytest.approx(0.0, abs=1e-14)
        assert rhs == pytest.approx(0.0, abs=1e-14)
        assert bracket == pytest.approx(0.0, abs=1e-14)

    def test_copies_are_equality(self):
        ab = np.array([[0.4, 0.1], [0.2, 0.3]])
        table = np.zeros((2, 2, 2, 2))
        for a in range(2):
            for b in range(2):
                table[a, a, b, b] = ab[a, b]
        lhs, rhs, bracket = ll.ab_terms(ic.JointPMF(("A", "alpha", "B", "beta"), table))
        assert lhs - rhs == pytest.approx(0.0, abs=1e-14)
        assert bracket == pytest.approx(0.0, abs=1e-14)

    def test_random_cases(self):
        rep = ll.check_ab_lemma(0, 500)
        assert rep.passed and rep.cases_run == 500
        assert rep.max_violation <= 1e-10

    def test_cap(self):
        with pytest.raises(ValueError):
            ll.check_ab_lemma(0, 10, alphabet_cap=4)

    def test_zero_cases(self):
        with pytest.raises(ValueError):
            ll.check_ab_lemma(0, 0)


class TestGelfandPinsker:
    def _pmf(self, chan):
        prior = np.einsum("a,b,c->abc", *([np.array([0.3, 0.7])] * 3)).reshape(-1, 1)
        return ic.JointPMF(("A1", "A2", "A3", "gamma"), (prior * chan).reshape(2, 2, 2, -1))

    def test_independent_side(self):
        total, correction, rhs = ll.gelfand_pinsker_terms(self._pmf(np.full((8, 3), 1 / 3)))
        assert total == pytest.approx(0.0, abs=1e-14) and rhs == pytest.approx(0.0, abs=1e-14)
        assert correction == pytest.approx(0.0, abs=1e-14)

    def test_gamma_is_first(self):
        first = np.array([(k >> 2) & 1 for k in range(8)])
        total, _, rhs = ll.gelfand_pinsker_terms(self._pmf(np.eye(2)[first]))
        assert total == pytest.approx(ic.binary_entropy(0.7), abs=1e-13)
        assert rhs == pytest.approx(ic.binary_entropy(0.7), abs=1e-13)

    def test_random(self):
        rep = ll.check_gelfand_pinsker(1, 200)
        assert rep.passed
        assert rep.extras["max_correction"] <= 1e-10

    def test_bad_n(self):
        with pytest.raises(ValueError):
            ll.check_gelfand_pinsker(0, 5, n_small=4)


class TestTimeSharing:
    def test_single_q_is_original(self):
        mix = ll.short_chain_mixture(np.random.default_rng(0), 1)
        np.testing.assert_allclose(mix.pmf.probs, mix.parts[0].probs, atol=1e-15)

    def test_composite_short_chains(self):
        mix = ll.short_chain_mixture(np.random.default_rng(5), 3)
        assert ic.is_markov_chain(mix.pmf, "U", "X", "Y")
        assert ic.is_markov_chain(mix.pmf, "X", "Y", "V")

    def test_convex_combination(self):
        mix = ll.short_chain_mixture(np.random.default_rng(6), 2)
        avg = sum(w * np.array(ic.rate_triple_from_aux(p).as_tuple()) for w, p in zip(mix.weights, mix.parts))
        np.testing.assert_allclose(ic.rate_triple_from_aux(mix.pmf).as_tuple(), avg, atol=1e-12)

    def test_random(self):
        assert ll.check_time_sharing(2, 100).passed


class TestAltFormAndExcess:
    def test_long_chain(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), ic.bsc(0.1), ic.bsc(0.3))
        assert ll.alt_form_value(p) == pytest.approx(ic.mutual_information(p, "U", "V"), abs=1e-14)
        assert ll.rate_excess_value(p) == pytest.approx(ic.mutual_information(p, "U", "V"), abs=1e-14)

    def test_constants(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), np.ones((2, 1)), np.ones((2, 1)))
        assert ll.alt_form_value(p) == 0.0
        assert ll.rate_excess_value(p) == 0.0

    def test_copies(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), np.eye(2), np.eye(2))
        ixy = ic.mutual_information(p, "X", "Y")
        assert ll.rate_excess_value(p) == pytest.approx(ixy, abs=1e-14)
        assert ic.mutual_information(p, "X", "U") - ic.conditional_mutual_information(p, "X", "U", "V") == pytest.approx(ixy, abs=1e-14)

    def test_independent_v(self):
        p = ic.build_chain_pmf(np.array([0.5, 0.5]), ic.bsc(0.2), ic.bsc(0.1), np.full((2, 2), 0.5))
        assert ll.rate_excess_value(p) == 0.0
        assert ic.mutual_information(p, "Y", "V") - ic.conditional_mutual_information(p, "Y", "V", "U") == pytest.approx(0.0, abs=1e-14)

    def test_alt_form_random_sees_off_chain_pairs(self):
        rep = ll.check_alt_form(3, 200)
        assert rep.passed
        assert rep.extras["cases_off_long_chain"] > 0

    def test_rate_excess_random(self):
        assert ll.check_rate_excess(4, 200).passed


class TestNoInd:
    def test_constant_gamma(self):
        rng = np.random.default_rng(0)
        table = rng.dirichlet(np.ones(4)).reshape(2, 2, 1)
        lhs, rhs = ll.no_ind_terms(ic.JointPMF(("A", "alpha", "gamma"), table))
        assert lhs == pytest.approx(rhs, abs=1e-14)

    def test_independent(self):
        table = np.einsum("a,b,c->abc", [0.2, 0.8], [0.5, 0.5], [0.1, 0.3, 0.6])
        lhs, rhs = ll.no_ind_terms(ic.JointPMF(("A", "alpha", "gamma"), table))
        assert lhs == pytest.approx(0.0, abs=1e-14) and rhs == pytest.approx(0.0, abs=1e-14)

    def test_random(self):
        assert ll.check_no_ind_identity(5, 500).passed


class TestReports:
    def test_deterministic(self):
        a = ll.check_ab_lemma(9, 50)
        b = ll.check_ab_lemma(9, 50)
        assert a.to_json() == b.to_json()

    def test_json_shape(self):
        rep = json.loads(ll.run_suite("rate_excess", cases=10).to_json())
        assert set(rep) >= {"lemma_id", "cases_run", "max_violation", "worst_case", "tolerance", "passed"}

    def test_pass_flag_follows_tolerance(self):
        assert not ll.LemmaReport("x", 1, 1e-9, {}).passed
        assert ll.LemmaReport("x", 1, 1e-9, {}, tolerance=1e-8).passed

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            ll.run_suite("nope")
