"""Pilot-observation model for one-bit MIMO channel estimation.

The unquantized observation of a block of tau pilot symbols over an
N_R x N_T channel H is

    B = H S^T + N,   S: tau x N_T pilot matrix,

which column-stacks to b = A h + n with A = kron(S, I_NR), h = vec(H) and
n = vec(N).  The channel is zero-mean circular complex Gaussian with
covariance sigma_ch, the noise i.i.d. CN(0, noise_var).  Everything
downstream (quantization, orthant integrals, estimators) works off the
second-order statistics bundled in :class:`SecondOrderStats`.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionError,
    DomainError,
    NotPositiveDefiniteError,
    SingularMatrixError,
)

# Relative eigenvalue floor below which a nominally PD matrix is treated as
# singular (min/max eigenvalue ratio guard for inversions).
EIG_RATIO_FLOOR = 1e-12

# Relative tolerance for symmetry / Hermitian-ness checks on inputs.
SYMMETRY_TOL = 1e-12

_UINT64_MOD = 2**64


def _as_complex_matrix(m, name):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains non-finite entries")
    return m


def check_hermitian(m, name, tol=SYMMETRY_TOL):
    """Validate that m is Hermitian within a relative tolerance and return
    the exactly Hermitian average (m + m^H)/2."""
    m = _as_complex_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > tol * scale:
        raise DomainError(f"{name} is not Hermitian within relative tolerance {tol}")
    return (m + m.conj().T) / 2.0


def hermitian_inverse(m, name="matrix"):
    """Invert a Hermitian PD matrix through its eigendecomposition.

    Raises SingularMatrixError when the min/max eigenvalue ratio falls
    below EIG_RATIO_FLOOR, instead of returning garbage.
    """
    w, v = np.linalg.eigh(m)
    if w[-1] <= 0.0 or w[0] <= EIG_RATIO_FLOOR * w[-1]:
        raise SingularMatrixError(
            f"{name} is numerically singular: eigenvalue ratio "
            f"{w[0] / w[-1] if w[-1] > 0 else float('-inf'):.3e} below {EIG_RATIO_FLOOR:g}"
        )
    inv = (v / w) @ v.conj().T
    return (inv + inv.conj().T) / 2.0


@dataclass(frozen=True)
class SystemDims:
    """Antenna counts and pilot length; sanity checks on construction."""

    n_tx: int
    n_rx: int
    n_pilots: int

    def __post_init__(self):
        for fname in ("n_tx", "n_rx", "n_pilots"):
            val = getattr(self, fname)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise DimensionError(f"{fname} must be a positive integer, got {val!r}")

    @property
    def obs_len(self):
        """Length of the stacked observation b (= n_pilots * n_rx)."""
        return self.n_pilots * self.n_rx

    @property
    def channel_len(self):
        """Length of the stacked channel h (= n_tx * n_rx)."""
        return self.n_tx * self.n_rx


@dataclass(frozen=True)
class SystemModel:
    """Fixed pilot configuration: dims, pilot matrix, and the stacked
    observation operator A = kron(pilots, I_nrx)."""

    dims: SystemDims
    pilots: np.ndarray
    kron_matrix: np.ndarray


def build_pilot_model(pilots, n_rx):
    """Build a SystemModel from a tau x N_T pilot matrix and a receive
    antenna count."""
    pilots = _as_complex_matrix(pilots, "pilots")
    n_pilots, n_tx = pilots.shape
    dims = SystemDims(n_tx=n_tx, n_rx=int(n_rx), n_pilots=n_pilots)
    a = np.kron(pilots, np.eye(n_rx))
    return SystemModel(dims=dims, pilots=pilots, kron_matrix=a)


@dataclass(frozen=True)
class SecondOrderStats:
    """Second-order statistics of the unquantized observation.

    omega_b = A sigma_ch A^H + noise_var I is the observation covariance;
    d_r and d_i are the real and imaginary parts of its inverse, the only
    pieces the estimators and the optimality test ever need.
    """

    sigma_ch: np.ndarray
    noise_var: float
    omega_b: np.ndarray
    d_r: np.ndarray
    d_i: np.ndarray
    # Factor F with sigma_ch = F F^H, kept for sampling channel draws.
    sigma_factor: np.ndarray = field(repr=False, default=None)

    @property
    def omega_inv(self):
        return self.d_r + 1j * self.d_i


def _psd_factor(sigma, name):
    """Factor a Hermitian PSD matrix as F F^H, tolerating tiny negative
    rounding in the spectrum."""
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(sigma)
    floor = -SYMMETRY_TOL * max(w[-1], 1.0)
    if w[0] < floor:
        raise NotPositiveDefiniteError(
            f"{name} has negative eigenvalue {w[0]:.3e}; not positive semidefinite"
        )
    return v * np.sqrt(np.clip(w, 0.0, None))


def second_order_stats(model, sigma_ch, noise_var):
    """Assemble SecondOrderStats for a pilot model, channel covariance and
    noise variance.

    noise_var = 0 is allowed as long as A sigma_ch A^H stays invertible;
    otherwise SingularMatrixError is raised by the eigenvalue guard.
    """
    noise_var = float(noise_var)
    if not np.isfinite(noise_var) or noise_var < 0.0:
        raise DomainError(f"noise_var must be finite and >= 0, got {noise_var}")
    sigma_ch = check_hermitian(sigma_ch, "sigma_ch")
    if sigma_ch.shape[0] != model.dims.channel_len:
        raise DimensionError(
            f"sigma_ch has shape {sigma_ch.shape}, expected "
            f"({model.dims.channel_len}, {model.dims.channel_len})"
        )
    a = model.kron_matrix
    omega = a @ sigma_ch @ a.conj().T + noise_var * np.eye(model.dims.obs_len)
    omega = (omega + omega.conj().T) / 2.0
    omega_inv = hermitian_inverse(omega, "omega_b")
    d_r = omega_inv.real.copy()
    d_i = omega_inv.imag.copy()
    # omega_inv is Hermitian by construction, so these hold to rounding.
    d_r = (d_r + d_r.T) / 2.0
    d_i = (d_i - d_i.T) / 2.0
    factor = _psd_factor(sigma_ch, "sigma_ch")
    return SecondOrderStats(
        sigma_ch=sigma_ch,
        noise_var=noise_var,
        omega_b=omega,
        d_r=d_r,
        d_i=d_i,
        sigma_factor=factor,
    )


def snr_of(pilots, noise_var):
    """Pilot SNR: trace(S S^H) / (tau * N_T * noise_var)."""
    pilots = _as_complex_matrix(pilots, "pilots")
    noise_var = float(noise_var)
    if not np.isfinite(noise_var) or noise_var <= 0.0:
        raise DomainError(f"noise_var must be finite and > 0, got {noise_var}")
    n_pilots, n_tx = pilots.shape
    return float(np.linalg.norm(pilots) ** 2 / (n_pilots * n_tx * noise_var))


def trial_rng(seed, stream=0):
    """Counter-based generator for one (seed, stream) pair.

    Streams with the same seed and different stream indices are independent
    Philox keys, so trial draws do not depend on execution order or on how
    trials are divided among workers.
    """
    seed = int(seed)
    stream = int(stream)
    if seed < 0 or stream < 0:
        raise DomainError("seed and stream must be non-negative integers")
    return np.random.Generator(np.random.Philox(key=[seed % _UINT64_MOD, stream % _UINT64_MOD]))


def sample_realization(stats, model, seed, stream=0):
    """Draw one (h, n, b) realization, deterministic given (seed, stream)."""
    h, n, b = sample_realizations(stats, model, seed, 1, start_stream=stream)
    return h[0], n[0], b[0]


def sample_realizations(stats, model, seed, n_samples, start_stream=0):
    """Draw n_samples realizations with one counter-based stream per trial.

    Returns (h, noise, b) arrays of shape (n_samples, channel_len) and
    (n_samples, obs_len).  Trial t always uses stream start_stream + t, so
    any contiguous slice of trials reproduces exactly regardless of how the
    full run is chunked.
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise DimensionError(f"n_samples must be >= 1, got {n_samples}")
    nh = model.dims.channel_len
    nn = model.dims.obs_len
    width = 2 * (nh + nn)
    z = np.empty((n_samples, width))
    for t in range(n_samples):
        z[t] = trial_rng(seed, start_stream + t).standard_normal(width)
    h_white = (z[:, :nh] + 1j * z[:, nh : 2 * nh]) / np.sqrt(2.0)
    noise = (z[:, 2 * nh : 2 * nh + nn] + 1j * z[:, 2 * nh + nn :]) * np.sqrt(
        stats.noise_var / 2.0
    )
    h = h_white @ stats.sigma_factor.T
    b = h @ model.kron_matrix.T + noise
    return h, noise, b
