"""CLI subcommands, exit codes, file outputs."""

import json
import subprocess
import sys

import numpy as np

from qdp import io


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "qdp.cli", *args],
                          capture_output=True, text=True)


def test_dp_run_and_fit(tmp_path):
    r = run_cli("dp-run", "-L", "64", "-T", "64", "-p", "0.2", "-n", "20",
                "--seed", "2", "--out", str(tmp_path), "--label", "probe")
    assert r.returncode == 0, r.stderr
    out = json.loads(r.stdout)
    agg = out["outputs"]["aggregate"]
    r2 = run_cli("fit", "--law", "power", "--x", "t", "--y", "n_classical",
                 "--input", agg, "--t-min", "4")
    assert r2.returncode == 0, r2.stderr
    fit = json.loads(r2.stdout)
    assert "exponent" in fit and fit["n_points"] > 10


def test_config_error_exit_code(tmp_path):
    r = run_cli("clifford-run", "--q-plus-1", "6", "-L", "8", "-T", "4",
                "-p", "0.2", "--out", str(tmp_path))
    assert r.returncode == 2
    assert "q_plus_1 must be prime" in r.stderr


def test_runtime_error_exit_code(tmp_path):
    r = run_cli("fit", "--input", str(tmp_path / "missing.csv"))
    assert r.returncode == 3


def test_etn_analyze_all_inactive(tmp_path):
    occ = np.zeros((6, 8), dtype=np.uint8)
    io.write_pgm(tmp_path / "dead.pgm", io.occupancy_to_pgm(occ))
    r = run_cli("etn-analyze", "--what", "min_cut", "--records",
                str(tmp_path / "dead.pgm"))
    assert r.returncode == 0
    assert "min_cut = 0" in r.stdout


def test_run_from_json_and_render(tmp_path):
    cfg = dict(model="dp_standard", L=24, T=16, p=0.3, n_samples=4,
               master_seed=11, output_path=str(tmp_path))
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    r = run_cli("run", "--config", str(cfg_path))
    assert r.returncode == 0, r.stderr
    png = tmp_path / "conf.pgm"
    r2 = run_cli("render-config", "--config", str(cfg_path), "--out", str(png))
    assert r2.returncode == 0, r2.stderr
    img = io.read_pgm(png)
    assert img.shape == (17, 24)  # T+1 bond rows
    assert set(np.unique(img)) <= {0, 255}


def test_collapse_command(tmp_path):
    # two runs at different L at the critical point collapse reasonably
    paths = []
    for L in (16, 32):
        r = run_cli("dp-run", "-L", str(L), "-T", "64", "-p", "0.3553",
                    "-n", "200", "--seed", "3", "--out", str(tmp_path),
                    "--label", f"L{L}")
        assert r.returncode == 0, r.stderr
        paths.append(json.loads(r.stdout)["outputs"]["aggregate"])
    r = run_cli("collapse", "--input", f"{paths[0]}:16:0.3553",
                f"{paths[1]}:32:0.3553", "--exponents", "dp",
                "--out", str(tmp_path / "resc.csv"))
    assert r.returncode == 0, r.stderr
    q = json.loads(r.stdout)["quality"]
    assert q == q and q >= 0
    assert (tmp_path / "resc.csv").exists()


def test_clifford_run_cli(tmp_path):
    r = run_cli("clifford-run", "--q-plus-1", "3", "-L", "8", "-T", "8",
                "-p", "0.3", "-n", "3", "--seed", "4", "--protocol",
                "steady_state", "--observables",
                "n_classical,entropy_Q,entropy_intervals",
                "--intervals", "0:2,0:4", "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    agg = json.loads(r.stdout)["outputs"]["aggregate"]
    rows = list(io.read_rows_csv(agg))
    names = {row["observable"] for row in rows}
    assert {"n_classical", "entropy_Q", "S_A[0,2]", "S_A[0,4]"} <= names


def test_appendixa_run_cli(tmp_path):
    r = run_cli("appendixa-run", "--q", "2", "-L", "16", "-T", "8",
                "-p", "0.5", "-n", "4", "--seed", "5",
                "--observables", "n_classical,density_f,density_g",
                "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr


def test_reuse_flag(tmp_path):
    args = ("dp-run", "-L", "16", "-T", "8", "-p", "0.5", "-n", "4",
            "--seed", "6", "--out", str(tmp_path), "--reuse")
    r1 = run_cli(*args)
    r2 = run_cli(*args)
    assert json.loads(r1.stdout)["reused"] is False
    assert json.loads(r2.stdout)["reused"] is True
