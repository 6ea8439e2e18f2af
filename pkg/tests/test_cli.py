import json
import subprocess
import sys

import numpy as np
import pytest

from quickshift_scale.cli import main
from quickshift_scale.pixels import load_labels_csv, load_lab_csv, load_pgm16, load_ppm


def _json_out(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_rescale(capsys):
    assert main(["rescale", "--ks", "5", "--dm", "10", "--rho", "2"]) == 0
    assert _json_out(capsys) == {"k_s": 10.0, "d_m": 20.0}
    assert main(["rescale", "--ks", "5", "--dm", "inf", "--rho", "3"]) == 0
    assert _json_out(capsys) == {"k_s": 15.0, "d_m": "inf"}


def test_predict(capsys):
    assert main(["predict", "--height", "100", "--width", "100", "--kw", "15", "--dm", "10",
                 "--method", "asymptotic"]) == 0
    out = _json_out(capsys)
    assert out["case"] == "disk" and out["expected"] == pytest.approx(100 / np.pi)
    assert main(["predict", "--height", "30", "--width", "30", "--kw", "3", "--dm", "2",
                 "--margin", "10"]) == 0
    assert _json_out(capsys)["expected"] == pytest.approx(100 / 13)


def test_generate_and_segment(tmp_path, capsys):
    img = tmp_path / "flat.csv"
    assert main(["gen-flat", str(img), "--height", "20", "--width", "24", "--sigma", "3"]) == 0
    assert load_lab_csv(img).shape == (20, 24, 3)
    out = tmp_path / "seg"
    assert main(["segment", str(img), "--ks", "2", "--dm", "6", "--out-dir", str(out)]) == 0
    summary = _json_out(capsys)
    labels = load_labels_csv(out / "flat_labels.csv")
    assert labels.shape == (20, 24) and labels.max() + 1 == summary["num_superpixels"]
    assert json.loads((out / "flat_summary.json").read_text()) == summary
    assert main(["segment", str(img), "--ks", "2", "--dm", "6", "--out-dir", str(out),
                 "--labels", "pgm16", "--variant", "simplified"]) == 0
    assert load_pgm16(out / "flat_labels.pgm").shape == (20, 24)


def test_ppm_paths(tmp_path, capsys):
    ppm = tmp_path / "b.ppm"
    assert main(["gen-bicolor", str(ppm), "--height", "8", "--width", "10", "--j0", "4"]) == 0
    assert load_ppm(ppm).shape == (8, 10, 3)
    csv_out = tmp_path / "b.csv"
    assert main(["to-lab", str(ppm), str(csv_out)]) == 0
    assert load_lab_csv(csv_out).shape == (8, 10, 3)
    assert main(["segment", str(ppm), "--ks", "1", "--out-dir", str(tmp_path)]) == 0


def test_errors_exit_2(tmp_path, capsys):
    assert main(["segment", str(tmp_path / "missing.ppm")]) == 2
    assert main(["rescale", "--rho", "0"]) == 2
    assert main(["gen-bicolor", str(tmp_path / "x.csv"), "--width", "5", "--j0", "9"]) == 2
    assert main(["evolution", "--sizes", "40", "--trials", "1", "--out-dir", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["rescale", "--rho", "2", "--dm", "far"])


def test_evolution_writes_outputs(tmp_path, capsys):
    code = main(["evolution", "--ks", "2", "--dm", "5", "--sizes", "30,40", "--trials", "2",
                 "--out-dir", str(tmp_path)])
    assert code in (0, 1)
    out = capsys.readouterr().out
    assert "PASS" in out or "FAIL" in out
    assert (tmp_path / "evolution_table.csv").read_text().startswith("size,")


def test_check_commands(tmp_path, capsys):
    assert main(["bicolor-check", "--sigma", "0", "--trials", "5",
                 "--out-dir", str(tmp_path)]) == 0
    assert main(["pq-check", "--trials", "20", "--eps", "1e6",
                 "--out-dir", str(tmp_path), "--format", "json"]) == 0
    assert main(["moments-check", "--trials", "200", "--out-dir", str(tmp_path)]) in (0, 1)
    files = {p.name for p in tmp_path.iterdir()}
    assert any(n.endswith(".json") for n in files) and any(n.endswith(".csv") for n in files)


def test_scale_commands(tmp_path, capsys):
    d = tmp_path / "imgs"
    for s in range(2):
        main(["gen-flat", str(d / f"im{s}.csv"), "--height", "24", "--width", "24",
              "--sigma", "5", "--seed", str(s)])
    assert main(["scale-size", "--image-dir", str(d), "--ks", "1", "--rho", "1,2",
                 "--out-dir", str(tmp_path / "o")]) == 0
    assert main(["scale-params", "--images", "1", "--size", "24", "--ks", "1",
                 "--kappa", "2", "--out-dir", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "quickshift_scale.cli", "rescale", "--rho", "2"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout) == {"k_s": 10.0, "d_m": 20.0}
