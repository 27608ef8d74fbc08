"""Positive-orthant integrals of multivariate Gaussians.

Two quantities drive the optimal estimator: the orthant probability

    P(psi) = Pr[u > 0],  u ~ N(0, psi),

and the first moment of exp(-z^T C z) restricted to the positive orthant.
P has exact arcsine closed forms up to dimension 3; beyond that it is
integrated by sequential conditioning over randomized quasi-random points,
which returns an error estimate alongside the value.  The first moment is
reduced to a vector of one-dimension-lower orthant probabilities, so it
inherits whichever path those take.

Plain Monte Carlo estimators (`orthant_probability_mc`,
`positive_orthant_mean_mc`) are kept as independent oracles for tests.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .exceptions import (
    AccuracyError,
    CapabilityError,
    DimensionError,
    DomainError,
    NotPositiveDefiniteError,
)

# Largest dimension the quasi-random integrator will attempt.  Block-diagonal
# inputs are split first, so only the largest coupled block counts.
MAX_QMC_DIM = 16

# Eigenvalue ratio below which a covariance is treated as not PD.
_EIG_RATIO_FLOOR = 1e-12

# Tolerance for clamping arcsine arguments that rounding pushed past +-1.
_ARCSIN_SLACK = 1e-12

_PRIMES = np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])

_N_SHIFTS = 12
_FIRST_BATCH = 2048


def arcsin_clamped(x, slack=_ARCSIN_SLACK):
    """arcsin with tolerance for arguments barely outside [-1, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + slack):
        worst = float(np.max(np.abs(x)))
        raise DomainError(f"arcsin argument {worst!r} outside [-1, 1] beyond tolerance")
    return np.arcsin(np.clip(x, -1.0, 1.0))


def _validate_spd(m, name):
    """Check a real symmetric PD matrix; return (matrix, eigenvalues)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.size == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains non-finite entries")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > 1e-12 * scale:
        raise DomainError(f"{name} is not symmetric within relative tolerance 1e-12")
    m = (m + m.T) / 2.0
    w = np.linalg.eigvalsh(m)
    if w[-1] <= 0.0 or w[0] <= _EIG_RATIO_FLOOR * w[-1]:
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])"
        )
    return m, w


def standardize(psi):
    """Rescale a covariance to unit diagonal.

    Returns (corr, scale) with psi = Diag(scale) corr Diag(scale).
    """
    psi, _ = _validate_spd(psi, "psi")
    scale = np.sqrt(psi.diagonal())
    corr = psi / np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    corr = (corr + corr.T) / 2.0
    return corr, scale


def _closed_orthant(corr):
    """Exact orthant probability of a standardized covariance, L <= 3."""
    n = corr.shape[0]
    if n == 1:
        return 0.5
    if n == 2:
        return 0.25 + arcsin_clamped(corr[0, 1]) / (2.0 * np.pi)
    if n == 3:
        s = arcsin_clamped(corr[0, 1]) + arcsin_clamped(corr[0, 2]) + arcsin_clamped(corr[1, 2])
        return 0.125 + s / (4.0 * np.pi)
    raise DimensionError(f"no closed form for dimension {n}")


def _components(pattern):
    """Connected components of the coupling graph of a symmetric matrix."""
    n = pattern.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            i = stack.pop()
            comp.append(i)
            for k in np.nonzero(pattern[i])[0]:
                if not seen[k]:
                    seen[k] = True
                    stack.append(int(k))
        comps.append(sorted(comp))
    return comps


def _coupling_components(m):
    scale = np.abs(m).max()
    pattern = np.abs(m) > 1e-12 * scale
    np.fill_diagonal(pattern, False)
    return _components(pattern)


def _qmc_orthant(corr, rel_tol, max_samples, seed):
    """Sequential-conditioning orthant integration over randomized
    quasi-random (Richtmyer) points.

    Returns (estimate, error_estimate) where the error is the standard
    error over the random shifts.  Raises AccuracyError when max_samples
    integrand evaluations do not reach rel_tol relative accuracy.
    """
    n = corr.shape[0]
    if n > MAX_QMC_DIM:
        raise CapabilityError(
            f"orthant integration supports coupled dimension <= {MAX_QMC_DIM}, got {n}"
        )
    if n == 1:
        return 0.5, 0.0
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("correlation matrix is not positive definite") from exc

    q = np.sqrt(_PRIMES[: n - 1])
    shifts = [
        np.random.Generator(np.random.Philox(key=[seed % 2**64, 10_000 + k])).random(n - 1)
        for k in range(_N_SHIFTS)
    ]

    sums = np.zeros(_N_SHIFTS)
    count = 0
    batch = _FIRST_BATCH
    while True:
        ks = np.arange(count + 1, count + batch + 1, dtype=float)
        base = ks[:, None] * q[None, :]
        for s in range(_N_SHIFTS):
            pts = np.mod(base + shifts[s], 1.0)
            # antithetic pair halves the variance of the smooth part
            sums[s] += 0.5 * (_integrand_sum(chol, pts) + _integrand_sum(chol, 1.0 - pts))
        count += batch
        means = sums / count
        est = float(means.mean())
        err = float(means.std(ddof=1) / math.sqrt(_N_SHIFTS))
        evals = 2 * count * _N_SHIFTS
        if est > 0.0 and err <= rel_tol * est:
            return est, err
        if evals >= max_samples:
            raise AccuracyError(
                f"orthant integration used {evals} evaluations without reaching "
                f"relative tolerance {rel_tol:g} (estimate {est:.6e}, error {err:.2e})",
                estimate=est,
                error_estimate=err,
            )
        batch = min(batch * 2, max(1, (max_samples - evals) // (2 * _N_SHIFTS)))


def _integrand_sum(chol, pts):
    """Sum of sequential-conditioning integrand values over points in [0,1)^(L-1)."""
    n_pts, _ = pts.shape
    dim = chol.shape[0]
    prob = np.full(n_pts, 0.5)
    y = np.empty((n_pts, dim - 1))
    u = 0.5 + 0.5 * pts[:, 0]
    y[:, 0] = ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))
    for i in range(1, dim):
        s = y[:, :i] @ chol[i, :i]
        e = ndtr(s / chol[i, i])
        prob *= e
        if i < dim - 1:
            u = (1.0 - e) + pts[:, i] * e
            y[:, i] = ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))
    return float(prob.sum())


def orthant_probability(psi, rel_tol=1e-4, max_samples=10_000_000, seed=0,
                        use_closed_forms=True):
    """Probability that a N(0, psi) vector lands in the positive orthant.

    Dimensions 1..3 (after splitting uncoupled blocks) use the arcsine
    closed forms exactly; larger coupled blocks go through the quasi-random
    integrator at relative tolerance rel_tol.  With use_closed_forms=False
    everything, including the block splitting, is bypassed and the full
    matrix is integrated numerically; that path exists so the closed forms
    can be cross-validated.
    """
    corr, _ = standardize(psi)
    if not use_closed_forms:
        return _qmc_orthant(corr, rel_tol, max_samples, seed)[0]
    prob = 1.0
    for comp in _coupling_components(corr):
        sub = corr[np.ix_(comp, comp)]
        if len(comp) <= 3:
            prob *= _closed_orthant(sub)
        else:
            prob *= _qmc_orthant(sub, rel_tol, max_samples, seed)[0]
    return prob


@dataclass(frozen=True)
class TruncatedMeanResult:
    """First moment of exp(-z^T C z) over the positive orthant.

    mean is the normalized truncated mean, normalizer the value of
    integral exp(-z^T C z) dz over the orthant.  method records whether
    every orthant subproblem was closed-form ("closed-form") or some went
    through the numeric integrator ("reduction").
    """

    mean: np.ndarray
    normalizer: float
    method: str


def _minor_inverse(cinv, k):
    """Inverse of C with row/column k removed, from C^{-1} alone.

    Uses the Schur-complement identity (C_{-k})^{-1} =
    E - f f^T / g where [[E, f], [f^T, g]] partitions C^{-1} around k.
    """
    idx = np.delete(np.arange(cinv.shape[0]), k)
    e = cinv[np.ix_(idx, idx)]
    f = cinv[idx, k]
    return e - np.outer(f, f) / cinv[k, k]


def _mean_single_block(c, rel_tol, max_samples, seed, use_closed_forms):
    n = c.shape[0]
    w, v = np.linalg.eigh(c)
    cinv = (v / w) @ v.T
    cinv = (cinv + cinv.T) / 2.0
    det_c = float(np.prod(w))
    if n == 1:
        cval = c[0, 0]
        mean = np.array([1.0 / math.sqrt(np.pi * cval)])
        return TruncatedMeanResult(
            mean=mean, normalizer=0.5 * math.sqrt(np.pi / cval), method="closed-form"
        )

    kwargs = dict(rel_tol=rel_tol, max_samples=max_samples, use_closed_forms=use_closed_forms)
    prob = orthant_probability(0.5 * cinv, seed=seed, **kwargs)
    g = np.empty(n)
    for k in range(n):
        g[k] = orthant_probability(0.5 * _minor_inverse(cinv, k), seed=seed + k + 1, **kwargs)
    mean = cinv @ (g / np.sqrt(cinv.diagonal())) / (2.0 * math.sqrt(np.pi) * prob)
    normalizer = np.pi ** (n / 2.0) * prob / math.sqrt(det_c)
    method = "closed-form" if use_closed_forms and n <= 3 else "reduction"
    return TruncatedMeanResult(mean=mean, normalizer=normalizer, method=method)


def positive_orthant_mean(c, rel_tol=1e-4, max_samples=10_000_000, seed=0,
                          use_closed_forms=True):
    """Normalized first moment of exp(-z^T C z) over the positive orthant.

    The moment integral reduces to orthant probabilities of one dimension
    less through the cofactor identity, so each coordinate costs one
    orthant evaluation plus one for the shared normalizer.  Uncoupled
    blocks of C factor the distribution and are solved independently
    (unless use_closed_forms=False, which forces one full-dimension
    numeric evaluation for cross-validation).
    """
    c, _ = _validate_spd(c, "c")
    if not use_closed_forms:
        return _mean_single_block(c, rel_tol, max_samples, seed, use_closed_forms=False)
    comps = _coupling_components(c)
    if len(comps) == 1:
        return _mean_single_block(c, rel_tol, max_samples, seed, use_closed_forms=True)
    mean = np.empty(c.shape[0])
    normalizer = 1.0
    methods = set()
    for j, comp in enumerate(comps):
        sub = c[np.ix_(comp, comp)]
        res = _mean_single_block(sub, rel_tol, max_samples, seed + 1000 * j, use_closed_forms=True)
        mean[comp] = res.mean
        normalizer *= res.normalizer
        methods.add(res.method)
    method = "closed-form" if methods == {"closed-form"} else "reduction"
    return TruncatedMeanResult(mean=mean, normalizer=normalizer, method=method)


def truncated_mean_cf_2d(psi):
    """Unnormalized orthant first moments of a standardized bivariate normal.

    For u ~ N(0, psi) with unit variances, returns the pair
    (E[u_1 1{u > 0}], E[u_2 1{u > 0}]) = ((1 + psi12)/(2 sqrt(2 pi)),) * 2.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (2, 2):
        raise DimensionError(f"psi must be 2x2, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise DomainError("psi contains non-finite entries")
    if abs(psi[0, 0] - 1.0) > 1e-12 or abs(psi[1, 1] - 1.0) > 1e-12:
        raise DomainError("psi must be standardized (unit diagonal)")
    if abs(psi[0, 1] - psi[1, 0]) > 1e-12:
        raise DomainError("psi must be symmetric")
    rho = psi[0, 1]
    if abs(rho) > 1.0 + _ARCSIN_SLACK:
        raise DomainError(f"psi12 = {rho!r} outside [-1, 1]")
    val = (1.0 + min(max(rho, -1.0), 1.0)) / (2.0 * math.sqrt(2.0 * np.pi))
    return val, val


def orthant_probability_mc(psi, n_samples, seed=0, chunk=2_000_000):
    """Plain Monte Carlo counting estimate of the orthant probability.

    Independent of the closed forms and of the quasi-random integrator;
    returns (estimate, standard_error).
    """
    corr, _ = standardize(psi)
    chol = np.linalg.cholesky(corr)
    rng = np.random.Generator(np.random.Philox(key=[seed % 2**64, 1]))
    n_samples = int(n_samples)
    hits = 0
    left = n_samples
    while left > 0:
        m = min(left, chunk)
        z = rng.standard_normal((m, corr.shape[0]))
        hits += int(np.count_nonzero((z @ chol.T > 0.0).all(axis=1)))
        left -= m
    p = hits / n_samples
    return p, math.sqrt(max(p * (1.0 - p), 1e-300) / n_samples)


def positive_orthant_mean_mc(c, n_samples, seed=0, chunk=1_000_000):
    """Rejection-sampling estimate of the truncated first moment.

    Samples N(0, C^{-1}/2), keeps draws in the positive orthant and
    averages.  Returns (mean, standard_errors, n_accepted).
    """
    c, _ = _validate_spd(c, "c")
    n = c.shape[0]
    wv, v = np.linalg.eigh(c)
    psi = 0.5 * ((v / wv) @ v.T)
    chol = np.linalg.cholesky((psi + psi.T) / 2.0)
    rng = np.random.Generator(np.random.Philox(key=[seed % 2**64, 2]))
    n_samples = int(n_samples)
    total = np.zeros(n)
    total_sq = np.zeros(n)
    kept = 0
    left = n_samples
    while left > 0:
        m = min(left, chunk)
        z = rng.standard_normal((m, n)) @ chol.T
        mask = (z > 0.0).all(axis=1)
        zk = z[mask]
        total += zk.sum(axis=0)
        total_sq += (zk * zk).sum(axis=0)
        kept += int(mask.sum())
        left -= m
    if kept < 2:
        raise AccuracyError(
            f"rejection sampler accepted only {kept} of {n_samples} draws", estimate=None
        )
    mean = total / kept
    var = total_sq / kept - mean**2
    return mean, np.sqrt(np.clip(var, 0.0, None) / kept), kept
