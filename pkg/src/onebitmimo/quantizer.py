"""One-bit quantization of complex observations.

Each receive chain keeps only the signs of the real and imaginary parts:

    r = sgn(Re b) + 1j * sgn(Im b),   sgn(0) := +1.

The sign vectors double as the diagonal matrices Lambda_R = Diag(Re r) and
Lambda_I = Diag(Im r) that reappear throughout the estimator algebra.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, DomainError


@dataclass(frozen=True)
class QuantizedObservation:
    """Sign pattern of one quantized observation.

    r_real and r_imag are +-1 integer vectors; r is the complex combination
    r_real + 1j * r_imag.
    """

    r_real: np.ndarray
    r_imag: np.ndarray

    @property
    def r(self):
        return self.r_real + 1j * self.r_imag

    @property
    def lambda_r(self):
        return np.diag(self.r_real.astype(float))

    @property
    def lambda_i(self):
        return np.diag(self.r_imag.astype(float))


def _sign_plus(x):
    # sgn with the tie sgn(0) = +1
    return np.where(x >= 0.0, 1.0, -1.0)


def quantize(b):
    """Quantize a complex observation vector to its sign pattern."""
    b = np.asarray(b, dtype=complex)
    if b.ndim != 1 or b.size == 0:
        raise DimensionError(f"observation must be a non-empty 1-d vector, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise DomainError("observation contains NaN or infinite entries")
    return QuantizedObservation(r_real=_sign_plus(b.real), r_imag=_sign_plus(b.imag))


def observation_from_signs(r_real, r_imag):
    """Build a QuantizedObservation from explicit +-1 sign vectors."""
    r_real = np.asarray(r_real, dtype=float)
    r_imag = np.asarray(r_imag, dtype=float)
    if r_real.shape != r_imag.shape or r_real.ndim != 1 or r_real.size == 0:
        raise DimensionError("sign vectors must be non-empty 1-d arrays of equal length")
    for name, v in (("r_real", r_real), ("r_imag", r_imag)):
        if not np.all(np.abs(v) == 1.0):
            raise DomainError(f"{name} entries must be +-1")
    return QuantizedObservation(r_real=r_real, r_imag=r_imag)


def sign_diagonals(obs):
    """Return (Lambda_R, Lambda_I) as dense diagonal matrices."""
    return obs.lambda_r, obs.lambda_i


def normalized_sign_covariance(omega_b):
    """Arcsine-law second moments of the quantizer output.

    For b ~ CN(0, omega_b) with r = quantize(b), the real sign covariance
    E[Re(r) Re(r)^T] equals the real part of the returned matrix and the
    cross moment E[Im(r) Re(r)^T] equals its imaginary part:

        (2/pi) * [arcsin(Dm Re(omega) Dm) + 1j * arcsin(Dm Im(omega) Dm)]

    with Dm = Diag(omega)^(-1/2).
    """
    omega_b = np.asarray(omega_b, dtype=complex)
    d = omega_b.diagonal().real
    if np.any(d <= 0.0):
        raise DomainError("omega_b must have positive diagonal")
    dm = 1.0 / np.sqrt(d)
    re = np.clip(dm[:, None] * omega_b.real * dm[None, :], -1.0, 1.0)
    np.fill_diagonal(re, 1.0)
    im = np.clip(dm[:, None] * omega_b.imag * dm[None, :], -1.0, 1.0)
    return (2.0 / np.pi) * (np.arcsin(re) + 1j * np.arcsin(im))
