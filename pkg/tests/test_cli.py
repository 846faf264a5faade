import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from gibbsmix import write_matrix_csv
from gibbsmix.cli import main
from helpers import TWO_STATE, TWO_STATE_PI


def _run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, list(csv.DictReader(io.StringIO(out.out))), out.err


def test_validate_default_model(capsys, tmp_path):
    code, rows, _ = _run(capsys, "validate", "--out", str(tmp_path))
    values = {r["quantity"]: r["value"] for r in rows}
    assert code == 0 and values["n"] == "16" and values["reversible"] == "1"
    assert int(values["cut_bitmask"]).bit_count() == 11
    assert (tmp_path / "validate.csv").exists()


def test_validate_kernel_file(capsys, tmp_path):
    write_matrix_csv(tmp_path / "P.csv", np.array(TWO_STATE))
    write_matrix_csv(tmp_path / "pi.csv", np.array(TWO_STATE_PI))
    code, rows, _ = _run(capsys, "validate", "--kernel", str(tmp_path / "P.csv"),
                         "--pi", str(tmp_path / "pi.csv"), "--cut", "bitmask:1", "--out", str(tmp_path))
    values = {r["quantity"]: r["value"] for r in rows}
    assert code == 0 and float(values["slem"]) == pytest.approx(0.25)
    assert float(values["classical"]) == pytest.approx(0.5)


def test_invariant_violation_exit_code(capsys, tmp_path):
    write_matrix_csv(tmp_path / "P.csv", np.array([[0.9, 0.2], [0.1, 0.8]]))
    write_matrix_csv(tmp_path / "pi.csv", np.array([0.5, 0.5]))
    code, _, err = _run(capsys, "validate", "--kernel", str(tmp_path / "P.csv"),
                        "--pi", str(tmp_path / "pi.csv"), "--out", str(tmp_path))
    assert code == 2 and "row 0 sums to 1.1" in err


def test_size_exit_code(capsys, tmp_path):
    code, _, err = _run(capsys, "cw-compare", "--d", "13", "--T", "2", "--h", "0",
                        "--out", str(tmp_path), "--no-plots")
    assert code == 3 and "2**13" in err


def test_bad_cut_exit_code(capsys, tmp_path):
    code, _, _ = _run(capsys, "mm", "--cut", "bitmask:0", "--out", str(tmp_path), "--no-plots")
    assert code == 2


def test_frobenius_command(capsys, tmp_path):
    code, rows, _ = _run(capsys, "frobenius", "--alpha-grid", "0,0.5,1", "--out", str(tmp_path))
    assert code == 0 and [r["alpha"] for r in rows] == ["0.0", "0.5", "1.0"]
    assert float(rows[0]["value"]) == pytest.approx(1.0)
    assert len(list(csv.DictReader(open(tmp_path / "cut_search.csv")))) == 6


def test_mm_command(capsys, tmp_path):
    code, rows, _ = _run(capsys, "mm", "--T", "15", "--h", "2", "--out", str(tmp_path))
    objs = [float(r["objective"]) for r in rows]
    assert code == 0 and all(b <= a + 1e-12 for a, b in zip(objs, objs[1:]))
    assert (tmp_path / "mm_trace.png").exists()


def test_kl_command(capsys, tmp_path):
    code, rows, _ = _run(capsys, "kl", "--k", "3", "--alpha", "0.4", "--out", str(tmp_path))
    assert code == 0 and len(rows) == 1
    r = rows[0]
    assert float(r["actual"]) <= float(r["mixture_bound"]) + 1e-10


def test_cw_compare_overrides(capsys, tmp_path):
    code, rows, _ = _run(capsys, "cw-compare", "--T", "2,15", "--h", "0", "--horizons", "1-3",
                         "--out", str(tmp_path), "--no-plots")
    assert code == 0 and len(rows) == 2 * 4 * 4
    assert {r["T"] for r in rows} == {"2.0", "15.0"}
    assert not (tmp_path / "compare.png").exists()


def test_cw_optcuts_and_alpha_and_profile(capsys, tmp_path):
    code, rows, _ = _run(capsys, "cw-optcuts", "--T", "15", "--h", "0,2", "--out", str(tmp_path))
    assert code == 0 and len(rows) == 6
    code, rows, _ = _run(capsys, "cw-alpha", "--T", "2", "--h", "2", "--out", str(tmp_path))
    assert code == 0 and len(rows) == 3 * 21
    code, rows, _ = _run(capsys, "profile", "--cut", "opt", "--T", "15", "--h", "0", "--out", str(tmp_path))
    assert code == 0 and {r["sampler"] for r in rows} == {"GP", "GPG", "A"}
    assert (tmp_path / "profile.png").exists()


def test_config_file_with_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("regimes = 2:0\nhorizons = 1-4\nalpha = 0.25\n")
    code, rows, _ = _run(capsys, "cw-compare", "--config", str(cfg), "--horizons", "1-2",
                         "--out", str(tmp_path), "--no-plots")
    assert code == 0 and len(rows) == 4 * 3
    assert {r["alpha"] for r in rows if r["sampler"] == "A"} == {"0.25"}


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gibbsmix", "profile", "--out", str(tmp_path), "--no-plots"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and proc.stdout.startswith("T,h,sampler,m")
