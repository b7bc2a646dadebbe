import csv

import numpy as np
import pytest

from renormfock import cli, config, fock, vhm
from renormfock.linalg import lowest_eigenpairs
from renormfock.modes import sample_form_factor

VHM_CFG = """
[grid]
dimension = 1
kind = log
nodes = 6
k_min = 0.4
k_max = 4.0

[truncation]
nmax = 4

[model]
name = vhm
form_factor = nelson_sharp
coupling = 0.4
sigma0 = 0.3

[sweep]
parameter = sigma
values = 1.0, 2.0, 4.0

[solver]
tol = 1e-10
seed = 0
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def _body(path):
    # all columns except the trailing runtime_ms, which legitimately varies
    with open(path, encoding="utf-8") as fh:
        return [line.rsplit(",", 1)[0] for line in fh.read().splitlines()]


def _rows(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_csv_and_figures(tmp_path):
    cfg = _write(tmp_path, VHM_CFG)
    out = str(tmp_path / "sweep.csv")
    assert cli.main(["run", "--config", cfg, "--out", out]) == 0
    with open(out, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == cli.CSV_HEADER
    assert len(lines) == 4
    for stem in ("sweep_spectrum.png", "sweep_diagnostics.png"):
        blob = (tmp_path / stem).read_bytes()
        assert blob[:4] == b"\x89PNG"
    rows = _rows(out)
    gaps = [float(r["resolvent_gap"]) for r in rows]
    assert gaps[-1] == 0.0
    assert gaps[0] > gaps[1] > 0.0
    # 17 significant digits, straight from the %g formatter
    assert rows[0]["sigma0"] == "%.17g" % 0.3


def test_run_creates_missing_output_directory(tmp_path):
    cfg = _write(tmp_path, VHM_CFG)
    out = str(tmp_path / "nested" / "deeper" / "sweep.csv")
    assert cli.main(["run", "--config", cfg, "--out", out,
                     "--no-figures"]) == 0
    assert _rows(out)[0]["model"] == "vhm"


def test_threads_do_not_change_the_csv(tmp_path):
    cfg = _write(tmp_path, VHM_CFG)
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    assert cli.main(["run", "--config", cfg, "--out", a, "--threads", "1",
                     "--no-figures"]) == 0
    assert cli.main(["run", "--config", cfg, "--out", b, "--threads", "8",
                     "--no-figures"]) == 0
    assert _body(a) == _body(b)


def test_env_var_supplies_thread_default(tmp_path, monkeypatch):
    monkeypatch.setenv("RENORMFOCK_THREADS", "2")
    cfg = _write(tmp_path, VHM_CFG)
    out = str(tmp_path / "env.csv")
    assert cli.main(["run", "--config", cfg, "--out", out,
                     "--no-figures"]) == 0
    assert len(_rows(out)) == 3


def test_rerun_is_byte_identical_outside_runtime(tmp_path):
    cfg = _write(tmp_path, VHM_CFG)
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    for out in (a, b):
        assert cli.main(["run", "--config", cfg, "--out", out, "--seed", "3",
                         "--threads", "2", "--no-figures"]) == 0
    assert _body(a) == _body(b)


def test_one_point_matches_module_path(tmp_path):
    text = VHM_CFG.replace("values = 1.0, 2.0, 4.0", "values = 4.0") \
                  .replace("nodes = 6", "nodes = 4") \
                  .replace("nmax = 4", "nmax = 6")
    cfgp = _write(tmp_path, text)
    out = str(tmp_path / "one.csv")
    assert cli.main(["run", "--config", cfgp, "--out", out, "--threads", "1",
                     "--no-figures"]) == 0
    row = _rows(out)[0]

    cfg = config.load_config(cfgp)
    grid = cfg.modes_for(4)
    basis = fock.enumerate_basis(4, 6)
    v = sample_form_factor(cfg.form_factor_for(4.0, 0.3), grid)
    m = vhm.assemble_vhm(v, grid, basis)
    vals, _, _ = lowest_eigenpairs(m.H.mat, k=2, tol=1e-10, seed=0)
    assert float(row["e0"]) == pytest.approx(vals[0], abs=1e-12)
    assert vals[0] >= m.ground_energy_formula - 1e-12
    assert float(row["resolvent_gap"]) == 0.0


def test_nmax_sweep_uses_cap_embeddings(tmp_path):
    text = VHM_CFG.replace("parameter = sigma", "parameter = nmax") \
                  .replace("values = 1.0, 2.0, 4.0", "values = 2, 4, 6") \
                  .replace("nodes = 6", "nodes = 4") \
                  .replace("sigma0 = 0.3", "sigma = 4.0\nsigma0 = 0.3")
    out = str(tmp_path / "nmax.csv")
    assert cli.main(["run", "--config", _write(tmp_path, text), "--out", out,
                     "--threads", "1", "--no-figures"]) == 0
    gaps = [float(r["resolvent_gap"]) for r in _rows(out)]
    assert gaps[0] > gaps[1] > 0.0
    assert gaps[2] == 0.0


def test_nodes_sweep_has_no_canonical_embedding(tmp_path):
    text = VHM_CFG.replace("parameter = sigma", "parameter = nodes") \
                  .replace("values = 1.0, 2.0, 4.0", "values = 4, 6") \
                  .replace("nmax = 4", "nmax = 3") \
                  .replace("sigma0 = 0.3", "sigma = 4.0\nsigma0 = 0.3")
    out = str(tmp_path / "nodes.csv")
    assert cli.main(["run", "--config", _write(tmp_path, text), "--out", out,
                     "--threads", "1", "--no-figures"]) == 0
    assert all(np.isnan(float(r["resolvent_gap"])) for r in _rows(out))


def test_sb_model_runs(tmp_path):
    text = """
[grid]
dimension = 3
kind = log
nodes = 4
k_min = 0.3
k_max = 3.0

[truncation]
nmax = 3

[model]
name = sb
form_factor = weisskopf_wigner
coupling = 0.3
sigma = 2.0
A = 0, 1, 1, 0
B = 1, 0, 0, -1
kernel = regular

[sweep]
parameter = sigma0
values = 0.4, 0.1

[solver]
seed = 1
"""
    out = str(tmp_path / "sb.csv")
    assert cli.main(["run", "--config", _write(tmp_path, text), "--out", out,
                     "--threads", "1", "--no-figures"]) == 0
    rows = _rows(out)
    assert len(rows) == 2
    assert all(r["dim"] == "70" for r in rows)  # 2 spin x 35 fock
    assert np.isfinite(float(rows[0]["e0"]))


def test_failed_point_preserves_partial_results(tmp_path, capsys):
    text = VHM_CFG.replace("parameter = sigma", "parameter = nmax") \
                  .replace("values = 1.0, 2.0, 4.0", "values = 2, 40") \
                  .replace("nodes = 6", "nodes = 8") \
                  .replace("nmax = 4", "nmax = 2") \
                  .replace("sigma0 = 0.3", "sigma = 4.0\nsigma0 = 0.3")
    out = str(tmp_path / "f.csv")
    rc = cli.main(["run", "--config", _write(tmp_path, text), "--out", out,
                   "--threads", "1", "--no-figures"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "sweep point 1 failed" in err
    assert not (tmp_path / "f.csv").exists()
    partial = _rows(out + ".partial")
    assert len(partial) == 1
    assert partial[0]["nmax"] == "2"


def test_validate_config_verdicts(tmp_path, capsys):
    good = _write(tmp_path, VHM_CFG, "good.cfg")
    assert cli.main(["validate-config", "--config", good]) == 0
    assert capsys.readouterr().out.startswith("ok: model vhm")
    bad = _write(tmp_path, VHM_CFG.replace("kind = log", "kind = cubic"),
                 "bad.cfg")
    assert cli.main(["validate-config", "--config", bad]) == 1
    assert "invalid:" in capsys.readouterr().err


def test_run_rejects_bad_config(tmp_path, capsys):
    bad = _write(tmp_path, VHM_CFG + "\n[grid]\nflux = 3\n")
    assert cli.main(["run", "--config", bad, "--out",
                     str(tmp_path / "x.csv")]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_requires_an_output_path(tmp_path, capsys):
    cfg = _write(tmp_path, VHM_CFG)
    assert cli.main(["run", "--config", cfg]) == 2
    assert "no output path" in capsys.readouterr().err


def test_output_section_supplies_the_path(tmp_path):
    out = tmp_path / "fromcfg.csv"
    text = VHM_CFG.replace("values = 1.0, 2.0, 4.0", "values = 4.0") \
        + "\n[output]\npath = %s\n" % out
    assert cli.main(["run", "--config", _write(tmp_path, text),
                     "--no-figures"]) == 0
    assert out.exists()
