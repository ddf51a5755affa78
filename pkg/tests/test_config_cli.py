import json
import math

import numpy as np
import pytest

from qgswlab.cli import main
from qgswlab.config import ConfigError, parse_config
from qgswlab.harness import NORMS
from qgswlab.spectral import Grid
from qgswlab.transport import write_snapshot

SMALL_SWEEP = """
[grid]
n = 32
length = 50.26548245743669

[initial]
kind = "two_blob"
sigma = 2.5
amplitude = 0.7

[sweep]
lambdas = [0.1, 0.05, 0.025]
T = 0.5
samples = 3
"""


# ---- parse_config ------------------------------------------------------------

def test_minimal_config_fills_defaults():
    cfg = parse_config("[grid]\nn = 128\n[sweep]\nlambdas = [0.1]\n")
    assert cfg.grid.n == 128 and cfg.grid.length == pytest.approx(2 * math.pi)
    assert cfg.sweep["lambdas"] == [0.1]
    assert cfg.sweep["T"] == 1.0 and cfg.sweep["samples"] == 11
    assert cfg.sweep["norms"] == list(NORMS)
    assert cfg.solver.filter is False and cfg.solver.cfl == 0.5
    assert cfg.output["formats"] == ["csv", "json"]
    sc = cfg.sweep_config()
    assert sc.n == 128 and sc.lambdas == (0.1,)


def test_empty_config_is_valid():
    cfg = parse_config("")
    assert cfg.grid.n == 128 and cfg.sweep["lambdas"] == []


@pytest.mark.parametrize("lams", ["[0.05, 0.1]", "[0.1, 0.1]", "[0.1, -0.05]", '["a"]'])
def test_bad_lambdas_name_the_key(lams):
    with pytest.raises(ConfigError, match="lambdas") as info:
        parse_config(f"[sweep]\nlambdas = {lams}\n")
    assert info.value.key == "lambdas"


def test_unknown_key_suggests_close_match():
    with pytest.raises(ConfigError, match="did you mean 'lambdas'") as info:
        parse_config("[sweep]\nlamda = [0.1]\n")
    assert info.value.key == "lamda"


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="did you mean 'solver'"):
        parse_config("[solvr]\ncfl = 0.5\n")


def test_syntax_error_carries_line():
    with pytest.raises(ConfigError) as info:
        parse_config("[grid]\nn = 64\nlength = = 3\n")
    assert info.value.line == 3


@pytest.mark.parametrize(
    "text,key",
    [
        ("[grid]\nn = 100\n", "n"),
        ("[grid]\nn = 64.5\n", "n"),
        ("[solver]\ncfl = 2.0\n", "cfl"),
        ('[initial]\nkind = "cloud"\n', "kind"),
        ('[initial]\nkind = "patch"\nshape = "disc"\nradius = -1.0\n', "shape"),
        ("[sweep]\nsamples = 1\n", "samples"),
        ('[sweep]\nnorms = ["l3"]\n', "norms"),
        ("[sweep.theta_rule]\nalpha = 1.5\n", "theta_rule"),
        ("[kernels]\nr_min = 5.0\nr_max = 1.0\n", "r_min"),
        ('[output]\nformats = ["pdf"]\n', "formats"),
    ],
)
def test_domain_validation_names_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key


def test_patch_initial_defaults():
    cfg = parse_config('[grid]\nn = 64\n[initial]\nkind = "patch"\nshape = "ellipse"\na = 1.0\nb = 0.5\n')
    p = cfg.initial_data()
    assert p.mollify_width == pytest.approx(4 * cfg.grid.dx)
    assert p.center == pytest.approx((math.pi, math.pi))


# ---- CLI -----------------------------------------------------------------

def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_sweep_writes_csv_and_json(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_SWEEP)
    rc, out, _ = run(capsys, "sweep", "--config", cfg, "--out", str(tmp_path / "o"), "--format", "csv,json")
    assert rc == 0
    assert (tmp_path / "o" / "sweep.csv").exists() and (tmp_path / "o" / "sweep.json").exists()
    assert json.loads(out)["cases"] == 3


def test_cli_threads_are_byte_identical(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_SWEEP)
    for t in ("1", "8"):
        assert run(capsys, "sweep", "--config", cfg, "--out", str(tmp_path / t), "--threads", t)[0] == 0
    for name in ("sweep.csv", "sweep.json"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "8" / name).read_bytes()


def test_cli_out_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QGSWLAB_OUT", str(tmp_path / "env"))
    assert run(capsys, "kernels")[0] == 0
    assert (tmp_path / "env" / "kernels.csv").exists()


def test_cli_kernels_verdict(tmp_path, capsys):
    cfg = write(tmp_path, "[kernels]\nlambda = 1.0\n")
    rc, out, _ = run(capsys, "kernels", "--config", cfg, "--out", str(tmp_path))
    assert rc == 0
    res = json.loads(out)
    assert res["monotone"] is True
    assert res["k0_derivative_lower_bound"] and res["k0_derivative_plus_inverse_positive"]
    rows = (tmp_path / "kernels.csv").read_text().splitlines()
    assert rows[0] == "r,k0,k1,combined,combined_derivative" and len(rows) == 501


def test_cli_simulate_then_norms(tmp_path, capsys):
    cfg = write(tmp_path, "[grid]\nn = 32\n[simulate]\nlambda = 0.1\nT = 0.2\nsamples = 3\n")
    rc, out, _ = run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path))
    assert rc == 0 and json.loads(out)["snapshots"] == 3
    snap = tmp_path / "snapshots" / "snap_0002.qgsw"
    assert snap.exists() and len((tmp_path / "diagnostics.csv").read_text().splitlines()) == 4
    rc, out, _ = run(capsys, "norms", "--snapshot", str(snap), "--out", str(tmp_path))
    assert rc == 0
    res = json.loads((tmp_path / "norms.json").read_text())
    assert res["xnorm"]["value"] > 0 and res["besov"]["value"] > 0


def test_cli_norms_nonzero_mean_exits_1(tmp_path, capsys):
    g = Grid(32)
    snap = tmp_path / "m.qgsw"
    write_snapshot(snap, g.from_function(lambda x, y: 1.0 + np.cos(x)))
    rc, _, err = run(capsys, "norms", "--snapshot", str(snap), "--out", str(tmp_path))
    assert rc == 1
    diag = json.loads(err)
    assert diag["exit_code"] == 1 and "mean" in diag["message"]


def test_cli_patch_study_with_control(tmp_path, capsys):
    text = ('[grid]\nn = 64\n[initial]\nkind = "patch"\nshape = "ellipse"\na = 1.0\nb = 0.5\n'
            "[patch_study]\nT = 0.1\nsamples = 3\n")
    rc, out, _ = run(capsys, "patch-study", "--config", write(tmp_path, text), "--out", str(tmp_path))
    assert rc == 0
    res = json.loads((tmp_path / "patch_study.json").read_text())
    assert len(res["study"]["times"]) == 3 and "control" in res


def test_cli_validation_error_exit_1(tmp_path, capsys):
    rc, _, err = run(capsys, "sweep", "--config", write(tmp_path, "[grid]\nnn = 64\n"))
    assert rc == 1
    diag = json.loads(err)
    assert diag["key"] == "nn" and "did you mean 'n'" in diag["message"]


def test_cli_syntax_error_reports_line(tmp_path, capsys):
    rc, _, err = run(capsys, "kernels", "--config", write(tmp_path, "[grid\n"))
    assert rc == 1 and json.loads(err)["line"] == 1


def test_cli_usage_error_exit_1(capsys):
    rc, _, err = run(capsys, "frobnicate")
    assert rc == 1 and json.loads(err)["error"] == "usage"
    rc, _, err = run(capsys, "kernels", "--threads", "0")
    assert rc == 1


def test_cli_numerical_failure_exit_2(tmp_path, capsys):
    text = "[grid]\nn = 32\n[solver]\ndt = 50.0\n[simulate]\nT = 100.0\n"
    rc, _, err = run(capsys, "simulate", "--config", write(tmp_path, text), "--out", str(tmp_path))
    assert rc == 2 and json.loads(err)["error"] == "numerical"


def test_cli_missing_file_exit_3(tmp_path, capsys):
    rc, _, err = run(capsys, "sweep", "--config", str(tmp_path / "nope.toml"))
    assert rc == 3 and json.loads(err)["exit_code"] == 3


def test_cli_unwritable_output_exit_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc, _, _ = run(capsys, "kernels", "--out", str(blocker / "sub"))
    assert rc == 3
