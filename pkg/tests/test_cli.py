import subprocess
import sys

from hrs_mimo.cli import main

SMALL = ["--snr", "0,20", "--draws", "3"]


def _write_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text("M = 24\nK = 4\nG = 2\nb_bar = 4\nr_d = 8\nscenario = small\n")
    return str(path)


def test_sweep_writes_csv_and_curves(tmp_path):
    out = tmp_path / "res.csv"
    code = main(["sweep", "--config", _write_cfg(tmp_path), *SMALL, "--scheme", "TTP,HRS_CLF",
                 "--out", str(out), "--curves"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 4
    assert (tmp_path / "res_HRS_CLF.dat").exists()


def test_detequiv_only_runs_asymptotic_rows(tmp_path, capsys):
    assert main(["detequiv", "--preset", "overlapping", "--snr", "10"]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert [r.split(",")[1] for r in rows] == ["HRS_DetEquiv", "TTP_DetEquiv"]


def test_split_prints_both_sources(capsys):
    assert main(["split", "--preset", "disjoint", "--snr", "0,30"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "snr_db,source,gamma_og,gamma_ig,alpha,beta"
    assert len(lines) == 5


def test_configuration_error_exits_nonzero(tmp_path, capsys):
    assert main(["sweep", "--config", _write_cfg(tmp_path), "--draws", "0"]) != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("hrs-sim: error:")


def test_missing_config_file_exits_nonzero(tmp_path):
    assert main(["split", "--config", str(tmp_path / "nope.cfg")]) != 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hrs_mimo", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sweep" in proc.stdout
