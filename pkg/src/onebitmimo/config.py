"""YAML configuration files for the command line tools.

One structured file describes a sweep (see README for the schema); the
single-point commands reuse the same file and read the optional snr_db key
(default: the first grid point).  Complex matrices are entered as paired
real/imag arrays.
"""

import yaml

from .exceptions import DomainError
from .model import SystemDims
from .simulate import SweepConfig

_ALLOWED_KEYS = {
    "dims",
    "covariance",
    "pilots",
    "snr_grid_db",
    "estimators",
    "trials",
    "seed",
    "rel_tol",
    "snr_db",
}

_DIM_KEYS = {"n_tx", "n_rx", "n_pilots"}


def load_raw(path):
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise DomainError(f"config root must be a mapping, got {type(raw).__name__}")
    unknown = set(raw) - _ALLOWED_KEYS
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    return raw


def _require(raw, key, kind, kind_name):
    if key not in raw:
        raise DomainError(f"config is missing required key '{key}'")
    value = raw[key]
    if not isinstance(value, kind):
        raise DomainError(f"config key '{key}' must be a {kind_name}")
    return value


def sweep_config_from_dict(raw):
    dims_raw = _require(raw, "dims", dict, "mapping")
    missing = _DIM_KEYS - set(dims_raw)
    if missing:
        raise DomainError(f"dims is missing keys: {sorted(missing)}")
    extra = set(dims_raw) - _DIM_KEYS
    if extra:
        raise DomainError(f"dims has unknown keys: {sorted(extra)}")
    dims = SystemDims(
        n_tx=int(dims_raw["n_tx"]),
        n_rx=int(dims_raw["n_rx"]),
        n_pilots=int(dims_raw["n_pilots"]),
    )
    covariance = _require(raw, "covariance", dict, "mapping")
    pilots = _require(raw, "pilots", dict, "mapping")
    grid = _require(raw, "snr_grid_db", (list, tuple), "list")
    try:
        grid = tuple(float(x) for x in grid)
    except (TypeError, ValueError) as exc:
        raise DomainError("snr_grid_db entries must be numbers") from exc
    estimators = _require(raw, "estimators", (list, tuple), "list")
    estimators = tuple(str(x) for x in estimators)
    trials = int(_require(raw, "trials", (int,), "integer"))
    seed = int(_require(raw, "seed", (int,), "integer"))
    rel_tol = float(raw.get("rel_tol", 1e-4))
    return SweepConfig(
        dims=dims,
        covariance=dict(covariance),
        pilots=dict(pilots),
        snr_grid_db=grid,
        estimators=estimators,
        trials=trials,
        seed=seed,
        rel_tol=rel_tol,
    )


def load_sweep_config(path):
    return sweep_config_from_dict(load_raw(path))


def point_snr_db(raw, config):
    """SNR used by the single-point commands: snr_db if present, else the
    first grid entry."""
    if "snr_db" in raw:
        return float(raw["snr_db"])
    return float(config.snr_grid_db[0])
