"""Command line interface.

Subcommands:

* estimate: channel estimate(s) for one observation (file or sampled).
* simulate: Monte Carlo MSE sweep to CSV.
* check-optimality: does the linear estimator equal the posterior mean?
* orthant: orthant probability (and optionally truncated mean) of a
  covariance matrix read from a file.
"""

import argparse
import io
import sys

import numpy as np
import yaml

from . import config as config_mod
from .estimators import blmmse_estimate, mmse_estimate
from .exceptions import DomainError
from .model import hermitian_inverse, sample_realization
from .optimality import is_blmmse_optimal
from .orthant import orthant_probability, positive_orthant_mean
from .quantizer import observation_from_signs, quantize
from .simulate import build_point, emit_results, run_mse_sweep


def _fmt_vector(v):
    return "\n".join(
        f"  [{i}] {z.real:+.9f} {z.imag:+.9f}j" for i, z in enumerate(np.asarray(v))
    )


def _load_observation(path):
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise DomainError("observation file must be a mapping")
    if "r_real" in raw and "r_imag" in raw:
        return observation_from_signs(
            np.asarray(raw["r_real"], dtype=float),
            np.asarray(raw["r_imag"], dtype=float),
        )
    if "b_real" in raw:
        b_real = np.asarray(raw["b_real"], dtype=float)
        b_imag = np.asarray(raw.get("b_imag", np.zeros_like(b_real)), dtype=float)
        return quantize(b_real + 1j * b_imag)
    raise DomainError(
        "observation file needs either r_real/r_imag sign vectors or "
        "b_real/b_imag raw observations"
    )


def _cmd_estimate(args):
    raw = config_mod.load_raw(args.config)
    cfg = config_mod.sweep_config_from_dict(raw)
    snr_db = config_mod.point_snr_db(raw, cfg)
    stats, model = build_point(cfg, snr_db)
    if args.obs is not None:
        obs = _load_observation(args.obs)
    else:
        h_true, _, b = sample_realization(stats, model, cfg.seed)
        obs = quantize(b)
        print(f"sampled observation (seed {cfg.seed}), true channel:")
        print(_fmt_vector(h_true))
    print(f"snr_db: {snr_db:g}")
    print("r:")
    print(_fmt_vector(obs.r))
    results = {}
    if args.estimator in ("mmse", "auto"):
        results["mmse"] = mmse_estimate(stats, model, obs, rel_tol=cfg.rel_tol)
    if args.estimator in ("blmmse", "auto"):
        results["blmmse"] = blmmse_estimate(stats, model, obs)
    for name, est in results.items():
        print(f"{name} estimate (path: {est.estimator}):")
        print(_fmt_vector(est.h_hat))
        if est.pr_r is not None:
            print(f"  Pr(r) = {est.pr_r:.9g}")
    if len(results) == 2:
        gap = np.abs(results["mmse"].h_hat - results["blmmse"].h_hat).max()
        print(f"max |mmse - blmmse| = {gap:.3e}")
        verdict = is_blmmse_optimal(stats)
        print(f"linear estimator optimal: {verdict.optimal}")
    return 0


def _cmd_simulate(args):
    cfg = config_mod.load_sweep_config(args.config)
    result = run_mse_sweep(cfg)
    emit_results(result, args.out)
    print(f"wrote {len(result.rows)} rows to {args.out}")
    return 0


def _cmd_check_optimality(args):
    raw = config_mod.load_raw(args.config)
    cfg = config_mod.sweep_config_from_dict(raw)
    snr_db = config_mod.point_snr_db(raw, cfg)
    stats, _ = build_point(cfg, snr_db)
    verdict = is_blmmse_optimal(stats, eps=args.eps)
    print(f"snr_db: {snr_db:g}")
    print(f"linear estimator optimal: {verdict.optimal}")
    print(f"coupling threshold: {verdict.threshold:.3e}")
    if verdict.witness is not None:
        w = verdict.witness
        print(
            f"witness: row {w.row} couples to columns {w.col_a} "
            f"(|{w.magnitude_a:.6e}|) and {w.col_b} (|{w.magnitude_b:.6e}|)"
        )
    return 0


def _load_matrix(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError:
        raw = None
    if isinstance(raw, dict) and "matrix" in raw:
        return np.asarray(raw["matrix"], dtype=float)
    if isinstance(raw, list):
        return np.asarray(raw, dtype=float)
    return np.loadtxt(io.StringIO(text), ndmin=2)


def _cmd_orthant(args):
    psi = _load_matrix(args.matrix)
    prob = orthant_probability(
        psi, rel_tol=args.rel_tol, max_samples=args.max_samples, seed=args.seed
    )
    print(f"orthant probability: {prob:.12g}")
    if args.mean:
        c = 0.5 * hermitian_inverse(psi.astype(complex), "psi").real
        res = positive_orthant_mean(
            c, rel_tol=args.rel_tol, max_samples=args.max_samples, seed=args.seed
        )
        print(f"truncated mean ({res.method}):")
        for i, v in enumerate(res.mean):
            print(f"  [{i}] {v:.12g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="onebitmimo",
        description="Channel estimation from one-bit quantized MIMO pilots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate the channel for one observation")
    p_est.add_argument("--config", required=True, help="YAML config file")
    group = p_est.add_mutually_exclusive_group(required=True)
    group.add_argument("--obs", help="YAML observation file (r_real/r_imag or b_real/b_imag)")
    group.add_argument("--sample", action="store_true",
                       help="sample an observation from the config seed")
    p_est.add_argument("--estimator", choices=("mmse", "blmmse", "auto"), default="auto")
    p_est.set_defaults(func=_cmd_estimate)

    p_sim = sub.add_parser("simulate", help="run an MSE-versus-SNR sweep")
    p_sim.add_argument("--config", required=True, help="YAML config file")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_opt = sub.add_parser("check-optimality",
                           help="check whether the linear estimator is exactly optimal")
    p_opt.add_argument("--config", required=True, help="YAML config file")
    p_opt.add_argument("--eps", type=float, default=1e-10,
                       help="relative coupling threshold (default 1e-10)")
    p_opt.set_defaults(func=_cmd_check_optimality)

    p_orth = sub.add_parser("orthant",
                            help="orthant probability of a covariance matrix")
    p_orth.add_argument("--matrix", required=True,
                        help="matrix file (YAML 'matrix:' mapping or whitespace grid)")
    p_orth.add_argument("--mean", action="store_true",
                        help="also print the positive-orthant truncated mean")
    p_orth.add_argument("--rel-tol", type=float, default=1e-4, dest="rel_tol")
    p_orth.add_argument("--max-samples", type=int, default=10_000_000, dest="max_samples")
    p_orth.add_argument("--seed", type=int, default=0)
    p_orth.set_defaults(func=_cmd_orthant)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
