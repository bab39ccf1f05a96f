import math

import numpy as np
import pytest

from markovpin import build_kernel, homogeneous_free_energy
from markovpin import csvio
from markovpin.cli import main
from markovpin.config import ConfigError, parse_config

TWO_STATE = """\
seed: 3
kernel:
  alpha: 0.5
chain:
  states: [-1, 1]
  Q: [[0.5, 0.5], [0.5, 0.5]]
grid:
  beta: [0.0, 0.5, 1.0, 2.0]
  h: [-0.2, 0.3]
"""


def _run(tmp_path, command, text, *extra):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(text)
    out = tmp_path / f"{command}.csv"
    code = main([command, str(cfg), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


def test_critical_curve_iid(tmp_path):
    code, text = _run(tmp_path, "critical-curve", TWO_STATE)
    assert code == 0
    meta, cols, rows = csvio.parse(text)
    assert cols == ["beta", "h_c_a", "lambda0"]
    assert meta["command"] == "critical-curve" and meta["seed"] == "3"
    assert len(meta["config_sha256"]) == 64
    for beta, hc, _ in rows:
        assert float(hc) == pytest.approx(-math.log(math.cosh(float(beta))), abs=1e-10)
    assert rows[0][1] == "0"


def test_free_energy_columns_and_beta_zero(tmp_path):
    code, text = _run(tmp_path, "free-energy", TWO_STATE)
    assert code == 0
    _, cols, rows = csvio.parse(text)
    assert cols == ["beta", "h", "F_a", "lambda0", "regime"]
    k = build_kernel(0.5)
    for beta, h, F, lam, regime in rows:
        if float(beta) == 0.0:
            assert float(F) == pytest.approx(homogeneous_free_energy(k, float(h)).F, abs=1e-13)
        assert regime == ("localized" if math.log(float(lam)) > 0 else "delocalized")


def test_free_energy_with_samples(tmp_path):
    text = TWO_STATE.replace("seed: 3", "seed: 3\nsamples: 6").replace("h: [-0.2, 0.3]", "h: [0.3]\n  N: [300]")
    code, out = _run(tmp_path, "free-energy", text)
    assert code == 0
    _, cols, rows = csvio.parse(out)
    assert cols[-3:] == ["N", "meanF", "stderr"]
    for row in rows:
        assert float(row[6]) <= float(row[2]) + 3 * float(row[7])


def test_moving_average_config(tmp_path):
    text = """\
kernel: {alpha: 0.5}
chain:
  moving_average: {weights: [1.0, -0.5], alphabet: [-1, 1]}
grid: {beta: [1.0]}
"""
    code, out = _run(tmp_path, "critical-curve", text)
    assert code == 0
    from markovpin import oracle
    lam = float(csvio.parse(out)[2][0][2])
    assert lam == pytest.approx(oracle.moving_average_lambda(build_kernel(0.5), 1.0, -0.5, 1.0), rel=1e-12)


def test_modelb_and_phase_diagram(tmp_path):
    text = """\
seed: 2
samples: 3
kernel: {alpha: 0.5, T_K: 2000}
grid: {beta: 1.0, h: [0.0], N: [200, 400]}
"""
    code, out = _run(tmp_path, "modelb", text)
    assert code == 0
    _, cols, rows = csvio.parse(out)
    assert cols == ["N", "gamma", "beta", "h", "meanF", "stderr", "meanB", "F_limit", "gap", "branch"]
    assert [r[0] for r in rows] == ["200", "400"]
    code, out = _run(tmp_path, "phase-diagram", text.replace("h: [0.0]", "h: [-1.5, -1.0, 0.0, 1.0, 1.5]"))
    assert code == 0
    meta, cols, rows = csvio.parse(out)
    assert meta["thresholds[beta=1]"] == "-1 1"
    assert [r[3] for r in rows] == ["0", "0", "1", "1", "2"]


def test_homogeneous_and_quenched(tmp_path):
    code, out = _run(tmp_path, "homogeneous", "kernel: {alpha: 0.5}\ngrid: {h: [0.0, 0.5]}\n")
    assert code == 0 and csvio.parse(out)[1] == ["h", "F", "residual"]
    code, out = _run(tmp_path, "quenched", TWO_STATE + "  N: [100]\nsamples: 2\n")
    assert code == 0 and len(csvio.parse(out)[2]) == 8


def test_validate_passes(tmp_path, capsys):
    cfg = tmp_path / "v.yaml"
    cfg.write_text("validate: {instances: 10}\n")
    assert main(["validate", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "c=" in out and "C=" in out and "N=2000" in out


def test_validate_rejects_unnormalised_kernel(tmp_path, capsys):
    code, _ = _run(tmp_path, "validate", "kernel:\n  probs: [0.5, 0.4]\n")
    assert code != 0
    assert "not normalised" in capsys.readouterr().err


@pytest.mark.parametrize("text,line,key", [
    ("chain:\n  states: [-1, 1]\n  Q: [[0.5, 0.5],\n      [0.2, 0.2]]\ngrid: {beta: 1}\n", 4, "chain.Q.1"),
    ("kernel:\n  alpha: fast\nchain: {states: [0, 1], Q: [[0.5, 0.5], [0.5, 0.5]]}\ngrid: {beta: 1}\n", 2,
     "kernel.alpha"),
    ("chain: {states: [0, 1], Q: [[0.5, 0.5], [0.5, 0.5]]}\ngrid:\n  beta: {start: 0}\n", 3, "grid.beta"),
])
def test_config_errors_are_line_precise(tmp_path, capsys, text, line, key):
    code, _ = _run(tmp_path, "critical-curve", text)
    assert code == 2
    err = capsys.readouterr().err
    assert f"run.yaml:{line}: {key}:" in err


def test_invalid_yaml():
    with pytest.raises(ConfigError) as info:
        parse_config("a: [1, 2\n", "x.yaml")
    assert info.value.line is not None


def test_seed_override_changes_metadata(tmp_path):
    _, a = _run(tmp_path, "critical-curve", TWO_STATE, "--seed", "11")
    assert csvio.parse(a)[0]["seed"] == "11"


def test_digest_is_canonical():
    a = parse_config("seed: 1\nkernel: {alpha: 0.5}\n")
    b = parse_config("kernel:\n  alpha: 0.5\nseed: 1\n")
    assert a.digest() == b.digest()


def test_csv_format():
    text = csvio.render(["x", "y"], [(0.1, -0.0), (np.float64(0.25), 3)], {"seed": 1})
    assert text == "# seed: 1\nx,y\n0.10000000000000001,0\n0.25,3\n"
