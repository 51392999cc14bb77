import csv
import hashlib
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nlgrad.cli import main
from nlgrad.fields import GridSpec, make_bump, read_field, write_field

DATA = Path(__file__).parent / "data"
INDICATOR = DATA / "indicator_n1.ini"


def write_config(path, body):
    path.write_text("[kernel]\n" + body)
    return path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_hypotheses_pass(tmp_path):
    assert main(["hypotheses", str(INDICATOR), "--out", str(tmp_path)]) == 0
    (row,) = rows(tmp_path / "hypotheses.csv")
    assert row["h0_ok"] == row["h4_ok"] == "true"


def test_hypotheses_fail_for_nonintegrable_profile(tmp_path):
    cfg = write_config(tmp_path / "k.ini", "kind = power\nexponent = 2\nn = 1\n")
    assert main(["hypotheses", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_and_malformed_config(tmp_path):
    assert main(["hypotheses", str(tmp_path / "nope.ini")]) == 64
    cfg = write_config(tmp_path / "k.ini", "kind = indicator_riesz\ns = 3\n")
    assert main(["hypotheses", str(cfg), "--out", str(tmp_path)]) == 64


def test_usage_errors_exit_64(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["symbol", str(INDICATOR), "--method", "laplace"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 64
    assert main(["poincare", str(INDICATOR), "--domain", "1,0", "--out", str(tmp_path)]) == 64


def test_symbol_both_routes(tmp_path):
    assert main(["symbol", str(INDICATOR), "--kmax", "200", "--samples", "30",
                 "--method", "both", "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "symbol.csv")
    assert float(table[0]["k"]) == 0.0 and float(table[0]["qhat"]) == pytest.approx(4.0)
    assert all(r["positive"] == "true" for r in table)
    assert max(float(r["agreement"]) for r in table) < 1e-5


def test_gradient_of_fixture_matches_golden_hash(tmp_path):
    assert main(["gradient", str(INDICATOR), "--field", str(DATA / "bump_n1.nlgf"),
                 "--method", "direct", "--out", str(tmp_path)]) == 0
    digest = hashlib.sha256((tmp_path / "gradient.csv").read_bytes()).hexdigest()
    assert digest == (DATA / "bump_gradient_golden.sha256").read_text().strip()


def test_golden_fixture_agrees_with_fft_route(tmp_path):
    assert main(["gradient", str(INDICATOR), "--field", str(DATA / "bump_n1.nlgf"),
                 "--method", "fft", "--out", str(tmp_path)]) == 0
    golden = np.array([float(r["c0"]) for r in rows(DATA / "bump_gradient_golden.csv")])
    fft = np.array([float(r["c0"]) for r in rows(tmp_path / "gradient.csv")])
    assert np.linalg.norm(fft - golden) / np.linalg.norm(golden) < 1e-2


def test_reconstruct_round_trip(tmp_path):
    spec = GridSpec.centered(1, 1.4, 1 / 256)
    write_field(tmp_path / "u.nlgf", make_bump(spec, [0.0], 0.3))
    assert main(["gradient", str(INDICATOR), "--field", str(tmp_path / "u.nlgf"),
                 "--out", str(tmp_path)]) == 0
    code = main(["reconstruct", str(INDICATOR), "--gradient", str(tmp_path / "gradient.nlgf"),
                 "--domain=-0.3,0.3", "--reference", str(tmp_path / "u.nlgf"),
                 "--out", str(tmp_path)])
    assert code == 0
    (row,) = rows(tmp_path / "reconstruct_error.csv")
    assert float(row["relative_l2_error"]) < 1e-2
    assert read_field(tmp_path / "reconstructed.nlgf").spec == spec


def test_compare_identical_kernels(tmp_path):
    assert main(["compare", str(INDICATOR), str(INDICATOR), "--kmax", "100", "--samples", "20",
                 "--out", str(tmp_path)]) == 0
    assert all(float(r["m"]) == 1.0 for r in rows(tmp_path / "compare.csv"))


def test_poincare_verdicts(tmp_path):
    assert main(["poincare", str(INDICATOR), "--domain", "0,1", "--resolutions", "1/32,1/64",
                 "--out", str(tmp_path)]) == 0
    cfg = write_config(tmp_path / "v.ini", "kind = power\nexponent = -0.3\nn = 1\n")
    assert main(["poincare", str(cfg), "--domain", "0,1", "--resolutions", "1/32,1/64,1/128",
                 "--out", str(tmp_path)]) == 2


def test_grid_too_small_is_numeric_failure(tmp_path):
    spec = GridSpec.centered(1, 0.3, 1 / 64)
    write_field(tmp_path / "u.nlgf", make_bump(spec, [0.0], 0.2))
    assert main(["gradient", str(INDICATOR), "--field", str(tmp_path / "u.nlgf"),
                 "--out", str(tmp_path)]) == 70


def test_corrupt_field_is_usage_error(tmp_path):
    (tmp_path / "bad.nlgf").write_bytes(b"JUNKJUNKJUNK")
    assert main(["gradient", str(INDICATOR), "--field", str(tmp_path / "bad.nlgf"),
                 "--out", str(tmp_path)]) == 64


def test_outputs_deterministic_with_lf_endings(tmp_path):
    outs = []
    for run in ("a", "b"):
        assert main(["symbol", str(INDICATOR), "--kmax", "50", "--samples", "10",
                     "--out", str(tmp_path / run)]) == 0
        outs.append((tmp_path / run / "symbol.csv").read_bytes())
    assert outs[0] == outs[1] and b"\r" not in outs[0]


def test_console_script_honours_thread_cap(tmp_path):
    env = dict(os.environ, NLGRAD_THREADS="1")
    cmd = [sys.executable, "-m", "nlgrad.cli", "hypotheses", str(INDICATOR), "--out", str(tmp_path)]
    assert subprocess.run(cmd, env=env, capture_output=True).returncode == 0
    env["NLGRAD_THREADS"] = "many"
    assert subprocess.run(cmd, env=env, capture_output=True).returncode == 64
