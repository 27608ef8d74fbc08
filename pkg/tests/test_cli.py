"""Command line interface, driven through main(argv)."""

import numpy as np
import pytest

from onebitmimo.cli import main

SCALAR_CFG = """
dims: {n_tx: 1, n_rx: 1, n_pilots: 1}
covariance: {kind: identity}
pilots: {kind: scalar}
snr_grid_db: [0, 10]
estimators: [mmse, blmmse]
trials: 400
seed: 11
"""

SIMO3_CFG = """
dims: {n_tx: 1, n_rx: 3, n_pilots: 1}
covariance: {kind: exponential, rho: 0.5}
pilots: {kind: scalar}
snr_grid_db: [10]
estimators: [mmse, blmmse]
trials: 200
seed: 5
"""


def write(tmp_path, text, name):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_simulate_writes_csv(tmp_path, capsys):
    cfg = write(tmp_path, SCALAR_CFG, "cfg.yaml")
    out = tmp_path / "sweep.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert "wrote 4 rows" in capsys.readouterr().out
    lines = out.read_text().strip().split("\n")
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    assert data[0] == "SNR_dB,estimator,MSE,stderr,trials"
    assert len(data) == 5

    out2 = tmp_path / "sweep2.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
    assert out.read_bytes() == out2.read_bytes()


def test_estimate_sampled_observation(tmp_path, capsys):
    cfg = write(tmp_path, SCALAR_CFG, "cfg.yaml")
    assert main(["estimate", "--config", cfg, "--sample"]) == 0
    text = capsys.readouterr().out
    assert "sampled observation" in text
    assert "(path: mmse-closed)" in text
    assert "(path: blmmse)" in text
    assert "Pr(r) = 0.25" in text
    assert "linear estimator optimal: True" in text
    gap = float(text.split("max |mmse - blmmse| = ")[1].split()[0])
    assert gap < 1e-9


def test_estimate_observation_file(tmp_path, capsys):
    cfg = write(tmp_path, SIMO3_CFG, "cfg.yaml")
    obs = write(
        tmp_path,
        "r_real: [1, -1, 1]\nr_imag: [1, 1, -1]\n",
        "obs.yaml",
    )
    assert main(["estimate", "--config", cfg, "--obs", obs, "--estimator", "mmse"]) == 0
    text = capsys.readouterr().out
    assert "(path: mmse-closed)" in text
    assert "Pr(r)" in text


def test_estimate_raw_observation_file(tmp_path, capsys):
    cfg = write(tmp_path, SCALAR_CFG, "cfg.yaml")
    obs = write(tmp_path, "b_real: [-0.3]\nb_imag: [2.0]\n", "obs.yaml")
    assert main(["estimate", "--config", cfg, "--obs", obs]) == 0
    text = capsys.readouterr().out
    assert "[0] -1.000000000 +1.000000000j" in text


def test_check_optimality(tmp_path, capsys):
    cfg = write(tmp_path, SIMO3_CFG, "cfg.yaml")
    assert main(["check-optimality", "--config", cfg]) == 0
    text = capsys.readouterr().out
    assert "linear estimator optimal: False" in text
    assert "witness: row 0" in text

    cfg2 = write(tmp_path, SCALAR_CFG, "scalar.yaml")
    assert main(["check-optimality", "--config", cfg2]) == 0
    assert "linear estimator optimal: True" in capsys.readouterr().out


def test_orthant_text_matrix(tmp_path, capsys):
    mat = write(tmp_path, "1.0 0.5\n0.5 1.0\n", "psi.txt")
    assert main(["orthant", "--matrix", mat]) == 0
    value = float(capsys.readouterr().out.split("orthant probability:")[1])
    assert value == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_orthant_yaml_matrix_with_mean(tmp_path, capsys):
    mat = write(tmp_path, "matrix:\n- [1.0, 0.0]\n- [0.0, 1.0]\n", "psi.yaml")
    assert main(["orthant", "--matrix", mat, "--mean"]) == 0
    text = capsys.readouterr().out
    assert "orthant probability: 0.25" in text
    assert "truncated mean (closed-form):" in text
    vals = [float(ln.split()[-1]) for ln in text.strip().split("\n")[-2:]]
    np.testing.assert_allclose(vals, np.sqrt(2.0 / np.pi), atol=1e-12)


def test_missing_file_reports_error(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "nope.yaml"), "--out", "x"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_bad_config_reports_error(tmp_path, capsys):
    cfg = write(tmp_path, SCALAR_CFG + "bogus: 2\n", "bad.yaml")
    assert main(["estimate", "--config", cfg, "--sample"]) == 1
    assert "unknown config keys" in capsys.readouterr().err


def test_bad_observation_reports_error(tmp_path, capsys):
    cfg = write(tmp_path, SCALAR_CFG, "cfg.yaml")
    obs = write(tmp_path, "r_real: [1, 0.5]\nr_imag: [1, 1]\n", "obs.yaml")
    assert main(["estimate", "--config", cfg, "--obs", obs]) == 1
    assert "error:" in capsys.readouterr().err
