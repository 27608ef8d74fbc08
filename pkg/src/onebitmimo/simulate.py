"""Monte Carlo MSE-versus-SNR sweeps.

The harness fixes the noise variance at 1 and solves the pilot energy from
the target SNR through snr = trace(S S^H) / (tau N_T noise_var), so the
SNR axis of a sweep is exact by construction; the per-point pilot energy
is echoed in the result metadata.  Every trial draws from its own
counter-based stream keyed by (seed, trial index), and per-trial squared
errors are reduced with compensated summation in trial order, so results
are bit-identical for any chunking of the work.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel_models import bessel_tx_covariance, exponential_covariance
from .estimators import (
    blmmse_operator,
    matches_simo3,
    mmse_estimate,
    mmse_linear_operator,
    simo3_closed_batch,
)
from .exceptions import (
    AssumptionError,
    CapabilityError,
    DimensionError,
    DomainError,
)
from .model import SystemDims, build_pilot_model, sample_realizations, second_order_stats
from .orthant import MAX_QMC_DIM
from .quantizer import observation_from_signs

NOISE_VAR = 1.0

ESTIMATOR_NAMES = ("mmse", "blmmse", "closed-form")

_CHUNK = 8192


@dataclass(frozen=True)
class SweepConfig:
    """Everything one MSE sweep depends on.

    covariance and pilots are plain {"kind": ..., parameters...} mappings;
    see build_covariance and build_pilots for the accepted kinds.
    """

    dims: SystemDims
    covariance: dict
    pilots: dict
    snr_grid_db: tuple
    estimators: tuple
    trials: int
    seed: int
    rel_tol: float = 1e-4

    def __post_init__(self):
        if len(self.snr_grid_db) == 0:
            raise DomainError("snr_grid_db must not be empty")
        if len(set(self.snr_grid_db)) != len(self.snr_grid_db):
            raise DomainError("snr_grid_db contains duplicate points")
        if not self.estimators:
            raise DomainError("estimators must not be empty")
        for name in self.estimators:
            if name not in ESTIMATOR_NAMES:
                raise DomainError(
                    f"unknown estimator {name!r}; choose from {ESTIMATOR_NAMES}"
                )
        if int(self.trials) < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if int(self.seed) < 0:
            raise DomainError(f"seed must be >= 0, got {self.seed}")
        if not 0.0 < float(self.rel_tol) < 1.0:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    estimator: str
    mse: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class MseSweepResult:
    rows: list
    metadata: dict


def _parse_complex_matrix(spec, key_prefix=""):
    real = spec.get(f"{key_prefix}real")
    if real is None:
        raise DomainError(f"missing '{key_prefix}real' matrix")
    real = np.asarray(real, dtype=float)
    imag = spec.get(f"{key_prefix}imag")
    imag = np.zeros_like(real) if imag is None else np.asarray(imag, dtype=float)
    if imag.shape != real.shape:
        raise DimensionError(
            f"'{key_prefix}imag' shape {imag.shape} does not match "
            f"'{key_prefix}real' shape {real.shape}"
        )
    return real + 1j * imag


def build_covariance(spec, dims):
    """Materialize the stacked-channel covariance for a covariance spec.

    kinds: identity; exponential (receive correlation, single-input only,
    parameter rho); bessel-tx (transmit correlation kron identity,
    parameters delta, theta, gamma_max); custom (explicit real/imag
    matrix over the full stacked channel).
    """
    kind = spec.get("kind")
    if kind == "identity":
        return np.eye(dims.channel_len, dtype=complex)
    if kind == "exponential":
        if dims.n_tx != 1:
            raise DomainError(
                "exponential covariance models receive correlation and "
                "requires n_tx == 1"
            )
        return exponential_covariance(dims.n_rx, spec.get("rho", 0.0)).astype(complex)
    if kind == "bessel-tx":
        sigma_tx = bessel_tx_covariance(
            dims.n_tx,
            spec.get("delta", 0.5),
            spec.get("theta", np.pi / 6.0),
            spec.get("gamma_max", 0.1),
        )
        return np.kron(sigma_tx, np.eye(dims.n_rx))
    if kind == "custom":
        sigma = _parse_complex_matrix(spec)
        if sigma.shape != (dims.channel_len, dims.channel_len):
            raise DimensionError(
                f"custom covariance has shape {sigma.shape}, expected "
                f"({dims.channel_len}, {dims.channel_len})"
            )
        return sigma
    raise DomainError(f"unknown covariance kind {kind!r}")


def build_pilots(spec, dims, snr_linear, noise_var=NOISE_VAR, sigma_ch=None):
    """Materialize the pilot matrix for one SNR point.

    kinds: scalar (single-input single-pilot); scaled-unitary (identity
    basis, n_pilots == n_tx); eigenbasis (rows from the transmit-covariance
    eigenvectors, n_pilots == n_tx, needs sigma_ch); explicit (fixed base
    matrix rescaled to the target SNR).
    """
    kind = spec.get("kind")
    if snr_linear <= 0.0 or not np.isfinite(snr_linear):
        raise DomainError(f"snr must be positive and finite, got {snr_linear}")
    if kind == "scalar":
        if dims.n_tx != 1 or dims.n_pilots != 1:
            raise DomainError("scalar pilots require n_tx == n_pilots == 1")
        return np.array([[math.sqrt(snr_linear * noise_var)]], dtype=complex)
    if kind == "scaled-unitary":
        if dims.n_pilots != dims.n_tx:
            raise DomainError("scaled-unitary pilots require n_pilots == n_tx")
        eta = snr_linear * dims.n_tx * noise_var
        return math.sqrt(eta) * np.eye(dims.n_tx, dtype=complex)
    if kind == "eigenbasis":
        if dims.n_pilots != dims.n_tx:
            raise DomainError("eigenbasis pilots require n_pilots == n_tx")
        if sigma_ch is None:
            raise DomainError("eigenbasis pilots require the channel covariance")
        sigma_tx = _tx_part(sigma_ch, dims)
        _, vecs = np.linalg.eigh(sigma_tx)
        eta = snr_linear * dims.n_tx * noise_var
        return math.sqrt(eta) * vecs.conj().T
    if kind == "explicit":
        base = _parse_complex_matrix(spec)
        if base.shape != (dims.n_pilots, dims.n_tx):
            raise DimensionError(
                f"explicit pilots have shape {base.shape}, expected "
                f"({dims.n_pilots}, {dims.n_tx})"
            )
        energy = np.linalg.norm(base) ** 2
        if energy <= 0.0:
            raise DomainError("explicit pilot matrix must be non-zero")
        target = snr_linear * dims.n_pilots * dims.n_tx * noise_var
        return base * math.sqrt(target / energy)
    raise DomainError(f"unknown pilot kind {kind!r}")


def _tx_part(sigma_ch, dims):
    blocks = sigma_ch.reshape(dims.n_tx, dims.n_rx, dims.n_tx, dims.n_rx)
    sigma_tx = np.trace(blocks, axis1=1, axis2=3) / dims.n_rx
    rebuilt = np.kron(sigma_tx, np.eye(dims.n_rx))
    if np.abs(rebuilt - sigma_ch).max() > 1e-10 * max(np.abs(sigma_ch).max(), 1.0):
        raise DomainError(
            "eigenbasis pilots require sigma_ch = kron(sigma_tx, identity)"
        )
    return sigma_tx


def _resolve_estimator(name, stats, model, rel_tol):
    """Turn an estimator name into a batch evaluator (r_real, r_imag) -> h_hat."""
    if name == "blmmse":
        w = blmmse_operator(stats, model)
        return lambda rr, ri: (rr + 1j * ri) @ w.T

    lin = mmse_linear_operator(stats, model)
    if lin is not None:
        w = lin.matrix
        return lambda rr, ri: (rr + 1j * ri) @ w.T
    if matches_simo3(stats, model):
        sigma = stats.sigma_ch.real
        pilot = model.pilots[0, 0]
        nv = stats.noise_var

        def simo3_eval(rr, ri):
            return simo3_closed_batch(sigma, pilot, nv, rr, ri)[0]

        return simo3_eval
    if name == "closed-form":
        raise AssumptionError(
            "closed-form estimator requested but no closed form matches this "
            "configuration"
        )
    if 2 * model.dims.obs_len > MAX_QMC_DIM:
        raise CapabilityError(
            f"numeric posterior mean needs orthant dimension "
            f"{2 * model.dims.obs_len} > {MAX_QMC_DIM}"
        )

    cache = {}

    def general_eval(rr, ri):
        out = np.empty((rr.shape[0], model.dims.channel_len), dtype=complex)
        for i in range(rr.shape[0]):
            key = (rr[i] > 0).tobytes() + (ri[i] > 0).tobytes()
            hit = cache.get(key)
            if hit is None:
                obs = observation_from_signs(rr[i], ri[i])
                hit = mmse_estimate(
                    stats, model, obs, rel_tol=rel_tol, method="general"
                ).h_hat
                cache[key] = hit
            out[i] = hit
        return out

    return general_eval


def build_point(config, snr_db):
    """Materialize (stats, model) for one SNR point of a sweep config."""
    sigma = build_covariance(config.covariance, config.dims)
    snr = 10.0 ** (float(snr_db) / 10.0)
    pilots = build_pilots(config.pilots, config.dims, snr, NOISE_VAR, sigma_ch=sigma)
    model = build_pilot_model(pilots, config.dims.n_rx)
    stats = second_order_stats(model, sigma, NOISE_VAR)
    return stats, model


def run_mse_sweep(config):
    """Run the Monte Carlo sweep described by a SweepConfig.

    Returns an MseSweepResult with one row per (snr_db, estimator),
    ordered by ascending SNR then estimator name.  Deterministic for a
    fixed config: per-trial counter-based streams plus compensated
    summation in trial order.
    """
    dims = config.dims
    sigma = build_covariance(config.covariance, dims)
    trials = int(config.trials)
    rows = []
    eta_notes = []
    for snr_db in sorted(float(x) for x in config.snr_grid_db):
        snr = 10.0 ** (snr_db / 10.0)
        pilots = build_pilots(config.pilots, dims, snr, NOISE_VAR, sigma_ch=sigma)
        model = build_pilot_model(pilots, dims.n_rx)
        stats = second_order_stats(model, sigma, NOISE_VAR)
        eta_notes.append(
            f"snr_db={snr_db:g} eta={np.linalg.norm(pilots) ** 2 / dims.n_pilots:.12g}"
        )
        evals = {
            name: _resolve_estimator(name, stats, model, config.rel_tol)
            for name in config.estimators
        }
        sq_errors = {name: [] for name in config.estimators}
        done = 0
        while done < trials:
            n = min(_CHUNK, trials - done)
            h, _, b = sample_realizations(
                stats, model, config.seed, n, start_stream=done
            )
            rr = np.where(b.real >= 0.0, 1.0, -1.0)
            ri = np.where(b.imag >= 0.0, 1.0, -1.0)
            for name, evaluate in evals.items():
                diff = evaluate(rr, ri) - h
                sq_errors[name].append(
                    np.einsum("ij,ij->i", diff.real, diff.real)
                    + np.einsum("ij,ij->i", diff.imag, diff.imag)
                )
            done += n
        for name in config.estimators:
            v = np.concatenate(sq_errors[name]) / dims.channel_len
            mean = math.fsum(v) / trials
            mean_sq = math.fsum(v * v) / trials
            stderr = math.sqrt(max(mean_sq - mean * mean, 0.0) / trials)
            rows.append(
                SweepRow(
                    snr_db=snr_db,
                    estimator=name,
                    mse=mean,
                    stderr=stderr,
                    trials=trials,
                )
            )
    rows.sort(key=lambda r: (r.snr_db, r.estimator))
    metadata = {
        "dims": f"n_tx={dims.n_tx} n_rx={dims.n_rx} n_pilots={dims.n_pilots}",
        "covariance": " ".join(f"{k}={v}" for k, v in sorted(config.covariance.items())
                               if not isinstance(v, (list, tuple))),
        "pilots": " ".join(f"{k}={v}" for k, v in sorted(config.pilots.items())
                           if not isinstance(v, (list, tuple))),
        "noise_var": f"{NOISE_VAR:g}",
        "pilot_energy_per_symbol": "; ".join(eta_notes),
        "estimators": ",".join(config.estimators),
        "trials": str(trials),
        "seed": str(config.seed),
        "rel_tol": f"{config.rel_tol:g}",
    }
    return MseSweepResult(rows=rows, metadata=metadata)


def render_csv(result):
    """Render a sweep result as CSV text with a commented metadata preamble."""
    lines = ["# one-bit mimo mse sweep"]
    for key, value in result.metadata.items():
        lines.append(f"# {key}: {value}")
    lines.append("SNR_dB,estimator,MSE,stderr,trials")
    for row in result.rows:
        lines.append(
            f"{row.snr_db:.12g},{row.estimator},{row.mse:.12g},"
            f"{row.stderr:.12g},{row.trials}"
        )
    return "\n".join(lines) + "\n"


def emit_results(result, path):
    """Write a sweep result to a CSV file; identical configs yield
    byte-identical files."""
    text = render_csv(result)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
