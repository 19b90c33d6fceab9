import csv
import json

import pytest

from rqsm.cli import _join_numeric, main
from rqsm.harness import read_curve


def test_negative_lists_are_folded():
    assert _join_numeric(["sweep", "--snr-db", "-30", "-28.5", "--trials", "5"]) == \
        ["sweep", "--snr-db=-30,-28.5", "--trials", "5"]


def test_design_writes_table(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["design", "--n", "256", "--nr", "4", "--m", "64", "--snr-db", "-23", "-17", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["snr_db"] for r in rows] == ["-23.0", "-17.0"]
    assert float(rows[0]["d0"]) == pytest.approx(0.2481, abs=5e-4)
    assert rows[1]["certified"] == "1"


def test_abep_conventional_and_explicit(tmp_path, capsys):
    assert main(["abep", "--n", "256", "--m", "64", "--snr-db", "-23", "--constellation", "conventional"]) == 0
    assert "abep_bound" in capsys.readouterr().out
    assert main(["abep", "--m", "16", "--snr-db", "-25", "--distances", "0.8", "0.9"]) == 2


def test_sweep_writes_curves(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 64, "Nr": 2, "M": 16, "trials": 200, "block_size": 100, "seed": 5}))
    rc = main(["sweep", "--config", str(cfg), "--snr-db", "-18", "--detector", "both",
               "--target-errors", "0", "--out", str(tmp_path)])
    assert rc == 0
    gd = read_curve(tmp_path / "ber_gd_conventional_M16.csv")
    ml = read_curve(tmp_path / "ber_ml_conventional_M16.csv")
    assert gd.config.N == 64 and gd.config.seed == 5 and gd.config.target_errors is None
    assert gd.points[0].trials == ml.points[0].trials == 200


def test_sweep_single_file_and_bad_input(tmp_path):
    out = tmp_path / "one.csv"
    assert main(["sweep", "--n", "32", "--snr-db", "-15", "--trials", "50", "--block-size", "50", "--out", str(out)]) == 0
    assert out.exists()
    assert main(["sweep", "--n", "32", "--snr-db", "-15", "--trials", "0", "--out", str(out)]) == 2


def test_verify_exit_code(capsys):
    assert main(["verify", "--trials", "1000", "--n", "256"]) == 0
    assert "quantity,target" in capsys.readouterr().out
