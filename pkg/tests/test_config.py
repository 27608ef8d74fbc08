"""YAML configuration loading."""

import pytest

from onebitmimo import DomainError, SystemDims
from onebitmimo.config import load_raw, load_sweep_config, point_snr_db, sweep_config_from_dict

GOOD = """
dims: {n_tx: 1, n_rx: 2, n_pilots: 1}
covariance: {kind: exponential, rho: 0.65}
pilots: {kind: scalar}
snr_grid_db: [-10, 0, 10, 20]
estimators: [mmse, blmmse]
trials: 1000
seed: 42
"""


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_load_good_config(tmp_path):
    cfg = load_sweep_config(write(tmp_path, GOOD))
    assert cfg.dims == SystemDims(n_tx=1, n_rx=2, n_pilots=1)
    assert cfg.covariance == {"kind": "exponential", "rho": 0.65}
    assert cfg.snr_grid_db == (-10.0, 0.0, 10.0, 20.0)
    assert cfg.estimators == ("mmse", "blmmse")
    assert cfg.trials == 1000
    assert cfg.seed == 42
    assert cfg.rel_tol == 1e-4


def test_point_snr_defaults_to_first_grid_entry(tmp_path):
    path = write(tmp_path, GOOD)
    raw = load_raw(path)
    cfg = sweep_config_from_dict(raw)
    assert point_snr_db(raw, cfg) == -10.0
    raw2 = load_raw(write(tmp_path, GOOD + "snr_db: 15\n", name="b.yaml"))
    assert point_snr_db(raw2, sweep_config_from_dict(raw2)) == 15.0


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(DomainError, match="unknown config keys"):
        load_raw(write(tmp_path, GOOD + "bogus: 1\n"))


def test_non_mapping_root_rejected(tmp_path):
    with pytest.raises(DomainError, match="mapping"):
        load_raw(write(tmp_path, "- 1\n- 2\n"))


def test_missing_and_extra_dim_keys_rejected():
    raw = {
        "dims": {"n_tx": 1, "n_rx": 2},
        "covariance": {"kind": "identity"},
        "pilots": {"kind": "scalar"},
        "snr_grid_db": [0],
        "estimators": ["mmse"],
        "trials": 10,
        "seed": 0,
    }
    with pytest.raises(DomainError, match="missing keys"):
        sweep_config_from_dict(raw)
    raw["dims"] = {"n_tx": 1, "n_rx": 2, "n_pilots": 1, "oops": 3}
    with pytest.raises(DomainError, match="unknown keys"):
        sweep_config_from_dict(raw)


def test_type_errors_rejected():
    raw = {
        "dims": {"n_tx": 1, "n_rx": 1, "n_pilots": 1},
        "covariance": {"kind": "identity"},
        "pilots": {"kind": "scalar"},
        "snr_grid_db": [0, "ten"],
        "estimators": ["mmse"],
        "trials": 10,
        "seed": 0,
    }
    with pytest.raises(DomainError, match="numbers"):
        sweep_config_from_dict(raw)
    raw["snr_grid_db"] = "not a list"
    with pytest.raises(DomainError, match="list"):
        sweep_config_from_dict(raw)
    raw["snr_grid_db"] = [0]
    raw["trials"] = "many"
    with pytest.raises(DomainError, match="integer"):
        sweep_config_from_dict(raw)


def test_missing_required_key_rejected():
    with pytest.raises(DomainError, match="missing required key"):
        sweep_config_from_dict({"dims": {"n_tx": 1, "n_rx": 1, "n_pilots": 1}})
