"""Orthant probabilities and truncated means.

Closed forms are pinned to hand-derived exact values; the quasi-random
integrator is cross-checked against both the closed forms and the plain
Monte Carlo counting oracle, which shares no code with it.
"""

import math

import numpy as np
import pytest

from onebitmimo import (
    AccuracyError,
    CapabilityError,
    DimensionError,
    DomainError,
    NotPositiveDefiniteError,
    orthant_probability,
    orthant_probability_mc,
    positive_orthant_mean,
    positive_orthant_mean_mc,
    standardize,
    truncated_mean_cf_2d,
)
from onebitmimo.orthant import MAX_QMC_DIM, arcsin_clamped

CLOSED_TOL = 1e-12


def random_correlation(n, rng, extra=2):
    a = rng.standard_normal((n, n + extra))
    c = a @ a.T
    d = 1.0 / np.sqrt(np.diagonal(c))
    corr = d[:, None] * c * d[None, :]
    np.fill_diagonal(corr, 1.0)
    return corr


def equicorrelated(n, rho):
    return (1.0 - rho) * np.eye(n) + rho * np.ones((n, n))


def sign_pattern_flip(psi, signs):
    s = np.asarray(signs, dtype=float)
    return np.outer(s, s) * psi


# ---------------------------------------------------------------------------
# closed forms


def test_closed_form_values():
    # independent scalars: 2^-L; pairwise: 1/4 + arcsin(rho)/(2 pi)
    assert abs(orthant_probability(np.eye(1)) - 0.5) < CLOSED_TOL
    assert abs(orthant_probability(np.eye(2)) - 0.25) < CLOSED_TOL
    assert abs(orthant_probability(np.eye(3)) - 0.125) < CLOSED_TOL
    assert abs(orthant_probability(equicorrelated(2, 0.5)) - 1.0 / 3.0) < CLOSED_TOL
    assert abs(orthant_probability(equicorrelated(2, -0.5)) - 1.0 / 6.0) < CLOSED_TOL
    assert abs(orthant_probability(equicorrelated(3, 0.5)) - 0.25) < CLOSED_TOL


def test_closed_form_matches_arcsine_expression():
    rng = np.random.default_rng(11)
    for _ in range(25):
        rho = rng.uniform(-0.95, 0.95)
        expect = 0.25 + math.asin(rho) / (2.0 * math.pi)
        assert abs(orthant_probability(equicorrelated(2, rho)) - expect) < CLOSED_TOL
    for _ in range(25):
        psi = random_correlation(3, rng)
        expect = 0.125 + (
            math.asin(psi[0, 1]) + math.asin(psi[0, 2]) + math.asin(psi[1, 2])
        ) / (4.0 * math.pi)
        assert abs(orthant_probability(psi) - expect) < CLOSED_TOL


def test_scale_invariance():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        psi = random_correlation(n, rng)
        scale = np.diag(rng.uniform(0.1, 10.0, size=n))
        p_std = orthant_probability(psi, seed=5)
        p_scaled = orthant_probability(scale @ psi @ scale, seed=5)
        assert p_scaled == pytest.approx(p_std, rel=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_sign_patterns_sum_to_one(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        psi = random_correlation(n, rng)
        total = 0.0
        for bits in range(2**n):
            signs = [1.0 if bits & (1 << i) else -1.0 for i in range(n)]
            total += orthant_probability(sign_pattern_flip(psi, signs))
        assert abs(total - 1.0) < 1e-12


def test_block_diagonal_splits_exactly():
    psi = np.zeros((4, 4))
    psi[:2, :2] = equicorrelated(2, 0.7)
    psi[2:, 2:] = equicorrelated(2, -0.3)
    expect = (0.25 + math.asin(0.7) / (2 * math.pi)) * (
        0.25 + math.asin(-0.3) / (2 * math.pi)
    )
    assert abs(orthant_probability(psi) - expect) < CLOSED_TOL
    # the split-free numeric path integrates the same matrix in full
    p_numeric = orthant_probability(psi, use_closed_forms=False, seed=2)
    assert p_numeric == pytest.approx(expect, rel=1e-3)


# ---------------------------------------------------------------------------
# quasi-random integrator


def test_qmc_matches_closed_forms():
    rng = np.random.default_rng(17)
    for n in (2, 3):
        for _ in range(5):
            psi = random_correlation(n, rng)
            closed = orthant_probability(psi)
            qmc = orthant_probability(psi, use_closed_forms=False, seed=9)
            assert qmc == pytest.approx(closed, rel=1e-3)


def test_qmc_matches_counting_oracle():
    rng = np.random.default_rng(29)
    for n in (4, 5):
        psi = random_correlation(n, rng)
        qmc = orthant_probability(psi, seed=1)
        mc, se = orthant_probability_mc(psi, 2_000_000, seed=4)
        assert abs(qmc - mc) < 5.0 * se + 1e-3 * qmc


def test_qmc_deterministic_per_seed():
    psi = random_correlation(4, np.random.default_rng(41))
    a = orthant_probability(psi, seed=7)
    b = orthant_probability(psi, seed=7)
    c = orthant_probability(psi, seed=8)
    assert a == b
    assert c == pytest.approx(a, rel=1e-3)


def test_qmc_accuracy_error_carries_estimate():
    psi = random_correlation(4, np.random.default_rng(5))
    with pytest.raises(AccuracyError) as info:
        orthant_probability(psi, rel_tol=1e-10, max_samples=50_000, seed=0)
    assert info.value.estimate > 0.0
    assert info.value.error_estimate > 0.0


def test_dimension_cap():
    psi = equicorrelated(MAX_QMC_DIM + 1, 0.3)
    with pytest.raises(CapabilityError):
        orthant_probability(psi)


# ---------------------------------------------------------------------------
# input validation


def test_standardize_splits_scale():
    corr, scale = standardize(np.array([[4.0, 1.0], [1.0, 1.0]]))
    np.testing.assert_allclose(scale, [2.0, 1.0])
    np.testing.assert_allclose(corr, [[1.0, 0.5], [0.5, 1.0]])


def test_rejects_indefinite_matrix():
    with pytest.raises(NotPositiveDefiniteError):
        orthant_probability(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_rejects_asymmetric_matrix():
    with pytest.raises(DomainError):
        orthant_probability(np.array([[1.0, 0.5], [0.2, 1.0]]))


def test_rejects_bad_shapes_and_values():
    with pytest.raises(DimensionError):
        orthant_probability(np.ones((2, 3)))
    with pytest.raises(DomainError):
        orthant_probability(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_arcsin_clamped():
    x = np.array([-0.5, 0.0, 0.5])
    np.testing.assert_allclose(arcsin_clamped(x), np.arcsin(x))
    assert arcsin_clamped(1.0 + 1e-13) == pytest.approx(np.pi / 2.0)
    with pytest.raises(DomainError):
        arcsin_clamped(1.1)


# ---------------------------------------------------------------------------
# truncated means


def test_mean_scalar_closed_form():
    # exp(-c x^2) on x > 0 is a half normal with variance 1/(2c)
    res = positive_orthant_mean(np.array([[1.0]]))
    assert res.method == "closed-form"
    assert abs(res.mean[0] - 1.0 / math.sqrt(math.pi)) < CLOSED_TOL
    assert abs(res.normalizer - 0.5 * math.sqrt(math.pi)) < CLOSED_TOL


def test_mean_independent_pair():
    res = positive_orthant_mean(0.5 * np.eye(2))
    np.testing.assert_allclose(res.mean, math.sqrt(2.0 / math.pi), atol=CLOSED_TOL)
    assert abs(res.normalizer - math.pi / 2.0) < CLOSED_TOL


def test_mean_reduction_matches_bivariate_closed_form():
    rng = np.random.default_rng(13)
    for _ in range(20):
        rho = rng.uniform(-0.98, 0.98)
        psi = equicorrelated(2, rho)
        c = 0.5 * np.linalg.inv(psi)
        res = positive_orthant_mean(c)
        expect = truncated_mean_cf_2d(psi)[0] / orthant_probability(psi)
        np.testing.assert_allclose(res.mean, expect, atol=1e-10)


def test_mean_matches_rejection_oracle():
    rng = np.random.default_rng(37)
    a = rng.standard_normal((4, 6))
    c = a @ a.T / 6.0 + 0.5 * np.eye(4)
    res = positive_orthant_mean(c, seed=3)
    mc_mean, mc_se, kept = positive_orthant_mean_mc(c, 400_000, seed=8)
    assert kept > 1000
    assert np.all(np.abs(res.mean - mc_mean) < 5.0 * mc_se + 1e-3 * res.mean)


def test_mean_block_splitting():
    c = np.zeros((3, 3))
    c[0, 0] = 2.0
    c[1:, 1:] = np.array([[1.0, 0.3], [0.3, 1.0]])
    res = positive_orthant_mean(c)
    assert res.method == "closed-form"
    assert abs(res.mean[0] - 1.0 / math.sqrt(2.0 * math.pi)) < CLOSED_TOL
    sub = positive_orthant_mean(c[1:, 1:])
    np.testing.assert_allclose(res.mean[1:], sub.mean, atol=CLOSED_TOL)
    scalar = positive_orthant_mean(c[:1, :1])
    assert abs(res.normalizer - scalar.normalizer * sub.normalizer) < CLOSED_TOL


def test_mean_numeric_path_agrees():
    rng = np.random.default_rng(19)
    a = rng.standard_normal((3, 5))
    c = a @ a.T / 5.0 + 0.4 * np.eye(3)
    closed = positive_orthant_mean(c)
    numeric = positive_orthant_mean(c, use_closed_forms=False, seed=6)
    assert closed.method == "closed-form"
    assert numeric.method == "reduction"
    np.testing.assert_allclose(numeric.mean, closed.mean, rtol=2e-3)
    assert numeric.normalizer == pytest.approx(closed.normalizer, rel=2e-3)


def test_cf_2d_validation():
    val = truncated_mean_cf_2d(np.eye(2))[0]
    assert abs(val - 1.0 / (2.0 * math.sqrt(2.0 * math.pi))) < CLOSED_TOL
    with pytest.raises(DimensionError):
        truncated_mean_cf_2d(np.eye(3))
    with pytest.raises(DomainError):
        truncated_mean_cf_2d(np.array([[2.0, 0.5], [0.5, 1.0]]))


def test_rejection_oracle_needs_acceptances():
    c = 0.5 * np.linalg.inv(equicorrelated(3, -0.49))
    with pytest.raises(AccuracyError):
        positive_orthant_mean_mc(c, 4, seed=0)


def test_counting_oracle_sanity():
    p, se = orthant_probability_mc(np.eye(2), 400_000, seed=1)
    assert abs(p - 0.25) < 5.0 * se
