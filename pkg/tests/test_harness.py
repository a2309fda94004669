"""Harness experiments: analytic means, fooling reports, grid tests."""

import math

import numpy as np
import pytest

from ptfprg.errors import ConfigError
from ptfprg.harness import (
    PTF,
    analytic_gauss_mean,
    anticoncentration_test,
    check_annihilation,
    check_constancy,
    check_semigroup,
    check_size_vs_derivative,
    discretization_test,
    fooling_test,
    inequality_corpus,
    inequality_suite,
    linear_fooling_corpus,
    normal_cdf,
    quadratic_fooling_corpus,
    sign_values,
)
from ptfprg.polyalg import Polynomial, random_poly
from ptfprg.prg import plan_params


def small_params(n=4, d=1, **kw):
    ov = {"N": 32, "k": 8, "M": 32}
    ov.update(kw)
    return plan_params(n, d, 0.5, 4.0, overrides=ov)


class TestSignConvention:
    def test_sgn_zero_is_plus_one(self):
        assert list(sign_values(np.array([-1.0, 0.0, 2.0]))) == [-1.0, 1.0, 1.0]


class TestAnalyticGaussMean:
    def test_sgn_x1(self):
        assert analytic_gauss_mean(Polynomial(1, {(1,): 1.0})) == 0.0

    def test_linear_threshold(self):
        # sgn(a.x - b) -> 1 - 2 Phi(b / |a|)
        p = Polynomial(2, {(1, 0): 3.0, (0, 1): 4.0, (0, 0): -2.5})
        expected = 1.0 - 2.0 * normal_cdf(2.5 / 5.0)
        assert abs(analytic_gauss_mean(p) - expected) < 1e-15

    def test_constant(self):
        assert analytic_gauss_mean(Polynomial.constant(2, -3.0)) == -1.0
        assert analytic_gauss_mean(Polynomial.zero(2)) == 1.0

    def test_odd_monomial(self):
        assert analytic_gauss_mean(Polynomial(2, {(1, 1): 2.0})) == 0.0
        assert analytic_gauss_mean(Polynomial(2, {(2, 3): -1.0})) == 0.0

    def test_even_monomial(self):
        assert analytic_gauss_mean(Polynomial(2, {(2, 2): 5.0})) == 1.0
        assert analytic_gauss_mean(Polynomial(2, {(2, 0): -5.0})) == -1.0

    def test_no_closed_form(self):
        assert analytic_gauss_mean(Polynomial(2, {(2, 0): 1.0, (0, 1): 1.0})) is None

    def test_monte_carlo_agreement(self):
        p = Polynomial(2, {(1, 0): 1.0, (0, 1): -2.0, (0, 0): 0.7})
        rng = np.random.default_rng(0)
        vals = sign_values(p.evaluate_many(rng.standard_normal((200_000, 2))))
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - analytic_gauss_mean(p)) <= 4 * se


class TestFoolingTest:
    def test_linear_corpus_passes_small_scale(self):
        params = small_params(n=8, N=64, k=8)
        reports = fooling_test(
            params,
            linear_fooling_corpus(),
            draws_prg=20_000,
            draws_gauss=1000,
            master_seed="f001",
            threshold=0.05,
        )
        assert len(reports) == 8
        for rep in reports:
            assert rep.gauss_method == "analytic"
            assert rep.stderr_gauss == 0.0
            assert rep.verdict == "pass", rep

    def test_sign_product_monomial(self):
        # f = sgn(x1 x2): analytic mean 0; desk-scale gap stays under 0.05
        params = plan_params(2, 2, 0.5, 4.0, overrides={"N": 256, "k": 16, "M": 32})
        corpus = [PTF("prod", Polynomial(2, {(1, 1): 1.0}))]
        (rep,) = fooling_test(
            params, corpus, draws_prg=20_000, draws_gauss=1000,
            master_seed="ab", threshold=0.05,
        )
        assert rep.gauss_mean == 0.0
        assert rep.gap <= 0.05
        assert rep.verdict == "pass"

    def test_degree_overflow_rejected(self):
        params = small_params(n=2)
        corpus = [PTF("quad", Polynomial(2, {(2, 0): 1.0}))]
        with pytest.raises(ConfigError):
            fooling_test(params, corpus, 1000, 1000, "00")

    def test_dimension_overflow_rejected(self):
        params = small_params(n=2)
        corpus = [PTF("wide", Polynomial(3, {(1, 0, 0): 1.0}))]
        with pytest.raises(ConfigError):
            fooling_test(params, corpus, 1000, 1000, "00")

    def test_mc_ground_truth_path(self):
        params = plan_params(2, 2, 0.5, 4.0, overrides={"N": 32, "k": 8, "M": 32})
        corpus = [PTF("mixed", Polynomial(2, {(2, 0): 1.0, (0, 1): 1.0, (0, 0): -0.5}))]
        (rep,) = fooling_test(
            params, corpus, draws_prg=20_000, draws_gauss=100_000,
            master_seed="cd", threshold=0.05,
        )
        assert rep.gauss_method == "mc"
        assert rep.stderr_gauss > 0.0
        assert rep.verdict == "pass"

    def test_reproducible(self):
        params = small_params(n=2)
        corpus = [PTF("l", Polynomial(2, {(1, 0): 1.0}))]
        a = fooling_test(params, corpus, 2000, 1000, "11", threshold=0.1)
        b = fooling_test(params, corpus, 2000, 1000, "11", threshold=0.1)
        assert a == b


class TestAnticoncentration:
    def test_known_cdf_value(self):
        # p = x, eps = 0.1: Pr(|Y| <= 0.1) = 2 Phi(0.1) - 1
        rows = anticoncentration_test(
            Polynomial(1, {(1,): 1.0}), [0.1], samples=400_000, seed=1
        )
        expected = 2.0 * normal_cdf(0.1) - 1.0
        assert abs(expected - 0.0797) < 1e-4
        row = rows[0]
        assert abs(row["frequency"] - expected) <= 4 * row["stderr"]

    def test_trivial_threshold_regime(self):
        # bounded-ratio polynomial: a constant has |p| / |p|_2 = 1
        rows = anticoncentration_test(
            Polynomial.constant(1, 3.0), [1.0, 1.5], samples=1000, seed=2
        )
        assert rows[0]["frequency"] == 1.0
        assert rows[1]["frequency"] == 1.0

    def test_monotone_in_eps(self):
        p = random_poly(3, 3, seed=9, basis="hermite")
        rows = anticoncentration_test(
            p, [0.01, 0.05, 0.1, 0.5, 1.0], samples=50_000, seed=3
        )
        freqs = [r["frequency"] for r in rows]
        assert freqs == sorted(freqs)


class TestInequalitySuite:
    def test_p_equals_x(self):
        rows = inequality_suite([Polynomial(1, {(1,): 1.0})], samples=200_000, seed=4)
        (row,) = rows
        # |x|_4 = 3^(1/4) <= sqrt(3), and Pr(|Y| >= 1/2) ~ 0.617 >= 1/18
        assert abs(row["l4_estimate"] - 3**0.25) <= 4 * row["l4_stderr"]
        expected_pz = 2.0 * (1.0 - normal_cdf(0.5))
        assert abs(expected_pz - 0.617) < 1e-3
        assert abs(row["pz_frequency"] - expected_pz) <= 4 * row["pz_stderr"]
        assert row["verdict"] == "pass"

    def test_constant_polynomial(self):
        rows = inequality_suite([Polynomial.constant(1, 2.0)], samples=1000, seed=5)
        (row,) = rows
        assert row["pz_frequency"] == 1.0
        assert row["verdict"] == "pass"

    def test_small_corpus_passes(self):
        corpus = inequality_corpus(count=10)
        rows = inequality_suite(corpus, samples=20_000, seed=6)
        assert all(r["verdict"] == "pass" for r in rows)


class TestDiscretization:
    def test_near_machine_precision_no_exceedances(self):
        rows = discretization_test([52], samples=100_000, c0=8.0, seed=7)
        assert rows[0]["n_exceed"] == 0

    def test_m16_within_delta(self):
        rows = discretization_test([16], samples=100_000, c0=8.0, seed=7)
        row = rows[0]
        assert row["delta"] == 0.03125
        assert row["frequency"] <= row["delta"]

    def test_frequency_nonincreasing_in_m(self):
        rows = discretization_test([8, 16, 24, 32], samples=100_000, c0=8.0, seed=7)
        freqs = [r["frequency"] for r in rows]
        ses = [r["stderr"] for r in rows]
        for i in range(len(freqs) - 1):
            assert freqs[i + 1] <= freqs[i] + 3 * (ses[i] + ses[i + 1])


class TestCorpora:
    def test_linear_corpus_pinned(self):
        corpus = linear_fooling_corpus()
        assert [ptf.p.n for ptf in corpus] == [1, 1, 2, 2, 4, 4, 8, 8]
        assert all(ptf.p.degree == 1 or not ptf.p.terms for ptf in corpus)
        again = linear_fooling_corpus()
        assert [p.p.terms for p in corpus] == [p.p.terms for p in again]

    def test_quadratic_corpus_pinned(self):
        a = quadratic_fooling_corpus(count=5)
        b = quadratic_fooling_corpus(count=5)
        assert [x.p.terms for x in a] == [y.p.terms for y in b]
        assert all(x.p.degree == 2 for x in a)


class TestLabChecks:
    def test_semigroup_rows(self):
        rows = check_semigroup(count=10)
        assert all(r["verdict"] == "pass" for r in rows)

    def test_annihilation_rows(self):
        rows = check_annihilation(d_values=(1, 2), thetas=(0.1,))
        assert all(r["verdict"] == "pass" for r in rows)
        cases = [r["case"] for r in rows]
        assert any("negative-control" in c for c in cases)

    def test_constancy_rows_small(self):
        corpus = [random_poly(2, 2, seed=50, basis="hermite")]
        rows = check_constancy(corpus, samples=4000, seed=8)
        assert all(r["verdict"] == "pass" for r in rows)

    def test_size_vs_derivative_rows_small(self):
        corpus = [random_poly(2, 2, seed=51, basis="hermite")]
        rows = check_size_vs_derivative(corpus, samples=50_000, seed=9)
        verdicts = {r["verdict"] for r in rows}
        assert "fail" not in verdicts
        assert any(r["case"].startswith("corpus constant") for r in rows)
