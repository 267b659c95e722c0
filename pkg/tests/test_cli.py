import numpy as np
import pytest

from cksf.cli import main
from cksf.config import DEFAULTS, parse_config
from cksf.diagnostics import read_records
from cksf.snapshots import save_snapshot


def test_print_defaults_round_trips(capsys):
    assert main(["print-defaults"]) == 0
    out = capsys.readouterr().out
    assert parse_config(out) == parse_config("")
    for key in DEFAULTS:
        assert key in out


def test_simulate_t_end_zero_writes_single_record(tmp_path, capsys):
    code = main(["simulate", "--t-end", "0", "--nx", "8", "--out", str(tmp_path)])
    assert code == 0
    recs = read_records(tmp_path / "diagnostics.csv")
    assert len(recs) == 1 and recs[0].step == 0
    assert (tmp_path / "summary.txt").exists()
    assert (tmp_path / "n_000000.cksf").exists()


def test_simulate_short_run(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("nx = 16\nny = 16\nt_end = 0.01\nsnapshot_every = 5\n")
    code = main(["simulate", "--config", str(cfgfile), "--out", str(tmp_path / "out")])
    assert code == 0
    recs = read_records(tmp_path / "out" / "diagnostics.csv")
    assert len(recs) == 11  # initial record + 10 steps
    assert recs[-1].t == pytest.approx(0.01, abs=1e-12)
    summary = (tmp_path / "out" / "summary.txt").read_text()
    assert "violations = 0" in summary
    assert "reached_t_end = true" in summary


def test_simulate_custom_negative_field_fails(tmp_path, capsys):
    vals = np.ones((8, 8))
    vals[2, 2] = -0.5
    save_snapshot(tmp_path / "n.cksf", "n", vals, 0.0)
    save_snapshot(tmp_path / "c.cksf", "c", np.ones((8, 8)), 0.0)
    save_snapshot(tmp_path / "m.cksf", "m", np.ones((8, 8)), 0.0)
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "nx = 8\nny = 8\npreset = custom\n"
        f"n_file = {tmp_path / 'n.cksf'}\n"
        f"c_file = {tmp_path / 'c.cksf'}\n"
        f"m_file = {tmp_path / 'm.cksf'}\n"
    )
    code = main(["simulate", "--config", str(cfgfile), "--out", str(tmp_path / "out")])
    assert code != 0
    assert "CustomFieldNegative" in capsys.readouterr().err


def test_simulate_bad_config_reports_line(tmp_path, capsys):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("nx = -3\n")
    code = main(["simulate", "--config", str(cfgfile)])
    assert code != 0
    assert "line 1" in capsys.readouterr().err


def test_check_snapshot_command(tmp_path, capsys):
    path = tmp_path / "f.cksf"
    save_snapshot(path, "n", np.zeros((4, 4)), 0.5)
    assert main(["check-snapshot", str(path)]) == 0
    assert "4x4" in capsys.readouterr().out
    path.write_bytes(b"garbage")
    assert main(["check-snapshot", str(path)]) != 0
    assert main(["check-snapshot", str(tmp_path / "missing.cksf")]) != 0


def test_sweep_command_tiny(tmp_path):
    cfgfile = tmp_path / "base.cfg"
    cfgfile.write_text("nx = 8\nny = 8\nt_end = 0.002\n")
    # note the --alphas=... form: a leading minus would otherwise be taken
    # for an option by argparse
    code = main(
        [
            "sweep", "--config", str(cfgfile),
            "--alphas=-0.4,0.5", "--kappas", "0",
            "--out", str(tmp_path / "sw"), "--jobs", "1",
        ]
    )
    assert code == 0
    regime = (tmp_path / "sw" / "regime.csv").read_text().splitlines()
    assert regime[0] == "alpha,kappa,completed,max_sup_n_ratio,violations,bounded"
    assert len(regime) == 3
    assert (tmp_path / "sw" / "cell_a-0.4_k0" / "diagnostics.csv").exists()


def test_sweep_rejects_bad_lists(tmp_path, capsys):
    assert main(["sweep", "--alphas", "x", "--kappas", "0"]) == 2
