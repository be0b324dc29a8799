import csv
import json

from entropy_sensing.cli import parse_grid, run_cli


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_grid():
    assert parse_grid("-16:-6:1") == [float(x) for x in range(-16, -5)]
    assert parse_grid("0.1,0.2") == [0.1, 0.2]


def test_sweep_row_count_and_determinism(tmp_path, capsys):
    argv = ["sweep-snr", "--detector", "two-stage", "--delta0", "0.3", "--pf", "0.1",
            "--snr", "-16:-6:1", "--trials", "300", "--calibration-trials", "2000",
            "--seed", "42"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(argv + ["--out", str(a)]) == 0
    assert run_cli(argv + ["--out", str(b)]) == 0
    assert len(read_rows(a)) == 12
    assert a.read_bytes() == b.read_bytes()
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 2


def test_roc_without_calibration(tmp_path, capsys):
    code = run_cli(["roc", "--detector", "entropy-power", "--snr", "-10", "--trials", "200",
                    "--out", str(tmp_path / "r.csv")])
    assert code != 0
    assert "calibration record" in capsys.readouterr().err


def test_calibrate_then_roc(tmp_path):
    cal = tmp_path / "cal.json"
    assert run_cli(["calibrate", "--detector", "entropy-power,energy", "--pf", "0.1",
                    "--calibration-trials", "2000", "--out", str(cal)]) == 0
    records = json.loads(cal.read_text())
    assert {r["detector"] for r in records} == {"entropy-power", "energy"}
    out = tmp_path / "roc.csv"
    assert run_cli(["roc", "--detector", "entropy-power,energy", "--snr", "-10",
                    "--calibration", str(cal), "--trials", "200", "--out", str(out)]) == 0
    assert len(read_rows(out)) == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"detector": "entropy-power", "pf": 0.1, "snr": "-12,-10",
                               "trials": 200, "calibration_trials": 2000, "seed": 1}))
    out = tmp_path / "s.csv"
    assert run_cli(["sweep-snr", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(read_rows(out)) == 3
    assert run_cli(["sweep-snr", "--config", str(cfg), "--snr", "-8", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 2 and float(rows[1][rows[0].index("snr_db")]) == -8.0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run_cli(["sweep-snr", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) != 0
    assert "bogus" in capsys.readouterr().err


def test_bad_output_path(tmp_path, capsys):
    code = run_cli(["sweep-snr", "--detector", "entropy-power", "--pf", "0.1", "--snr", "-10",
                    "--trials", "100", "--calibration-trials", "2000",
                    "--out", str(tmp_path / "missing" / "x.csv")])
    assert code != 0
    assert capsys.readouterr().err.startswith("error:")


def test_usage_error():
    assert run_cli(["sweep-snr", "--trials", "many"]) == 2


def test_cooperative_and_gamma(tmp_path):
    out = tmp_path / "c.csv"
    assert run_cli(["cooperative", "--users", "3", "--rule", "two-bit,or", "--delta0", "0.2",
                    "--pf", "0.1", "--snr", "-12", "--trials", "200",
                    "--calibration-trials", "2000", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [r[rows[0].index("rule")] for r in rows[1:]] == ["two-bit", "or"]
    out = tmp_path / "g.csv"
    assert run_cli(["gamma", "--detector", "two-stage", "--delta0", "0.1,0.2", "--pf", "0.1",
                    "--snr", "-16,-8", "--trials", "200", "--calibration-trials", "2000",
                    "--out", str(out)]) == 0
    assert len(read_rows(out)) == 5


def test_noise_uncertainty_cli(tmp_path):
    out = tmp_path / "n.csv"
    assert run_cli(["noise-uncertainty", "--detector", "entropy-power,energy", "--pf", "0.1",
                    "--snr", "-10", "--offsets", "0,1", "--trials", "200",
                    "--calibration-trials", "2000", "--out", str(out)]) == 0
    assert len(read_rows(out)) == 5
