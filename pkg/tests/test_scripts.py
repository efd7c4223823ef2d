import json
import subprocess
import sys
from pathlib import Path

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def run_script(name, *args, cwd):
    proc = subprocess.run([sys.executable, str(SCRIPTS / name), *map(str, args)], capture_output=True,
                          text=True, cwd=cwd)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_reproduce_figures(tmp_path):
    run_script("reproduce_figures.py", "--out-dir", tmp_path / "f", "--length", 1200, "--long-delta-t", 300,
               cwd=tmp_path)
    names = {p.name for p in (tmp_path / "f").iterdir()}
    assert names == {"trend.csv", "derivative.csv", "fluctuations.csv", "volatility.csv", "summary.json"}
    summary = json.loads((tmp_path / "f" / "summary.json").read_text())
    assert summary["fluctuation_rms"]["algebraic"] < summary["fluctuation_rms"]["classical"]


def test_backtest_experiment(tmp_path):
    out = tmp_path / "runs.json"
    text = run_script("run_backtest_experiment.py", "--seeds", 0, "--etas", 0.05, "--length", 600,
                      "--random-assets", 3, "--output", out, cwd=tmp_path)
    assert "dominance: dynamic Sharpe >= static in 1/1 runs" in text
    runs = json.loads(out.read_text())["runs"]
    assert [r["family"] for r in runs] == ["dominance", "random"]
