"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``
to see the report lines.
"""
import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from chronicle import synthetic
from chronicle.cli import main, metrics_path
from chronicle.estimators import decompose, estimate_derivative, estimate_trend, make_config, \
    moving_average_derivative
from chronicle.portfolio import RebalancePolicy, equity_metrics, max_drawdown, run_backtest
from chronicle.series import Chronicle, lag
from chronicle.statistics import (asset_volatility, covariance, log_return, mean_return, moment_config,
                                  predict_volatility, prediction_offset, sharpe_ratio, variance)


def poly_exactness():
    worst = 0.0
    k = np.arange(300.0)
    P = np.polynomial.polynomial
    for window in (5, 20, 100):
        for degree in (0, 1, 2):
            coef = np.random.default_rng(window + degree).uniform(-3, 3, degree + 1)
            x = Chronicle(P.polyval(k, coef))
            for delay in (0, window // 2):
                cfg = make_config(window, degree, delay)
                te = k[window - 1:] - delay
                checks = [(estimate_trend(x, cfg).values[window - 1:], P.polyval(te, coef))]
                if degree:
                    checks.append((estimate_derivative(x, cfg).values[window - 1:],
                                   P.polyval(te, P.polyder(coef))))
                for got, want in checks:
                    worst = max(worst, np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want))))
    return worst <= 1e-9, f"max relative error {worst:.2e} (tol 1e-9)", 5.0


def decomposition_identity():
    worst = 0.0
    for seed in range(10):
        x = synthetic.gold_like(2000, seed=seed)
        cfg = make_config(100, 1)
        dec = decompose(x, cfg)
        err = dec.trend.values + dec.fluctuation.values - lag(x, cfg.eval_delay).values
        worst = max(worst, np.nanmax(np.abs(err)))
    return worst <= 1e-12, f"max |trend + fluctuation - x(t - delay)| = {worst:.2e} (tol 1e-12)", 5.0


def denoising():
    wins, ratios = 0, []
    cfg = make_config(100, 1)
    for seed in range(10):
        x, dx = synthetic.noisy_sine(2000, period=200, amplitude=1.0, noise=0.05, seed=seed)
        i = np.arange(cfg.window - 1, len(x))
        alg = estimate_derivative(x, cfg).values[i] - dx[i - cfg.eval_delay]
        cla = moving_average_derivative(x, 50).values[i] - dx[i]
        r_alg, r_cla = math.sqrt(np.mean(alg ** 2)), math.sqrt(np.mean(cla ** 2))
        wins += r_alg < r_cla
        ratios.append(r_alg / r_cla)
    return wins == 10, f"{wins}/10 seeds, RMS ratio algebraic/baseline max {max(ratios):.3f}", 10.0


def moment_identities():
    worst_oracle, worst_cov, min_var = 0.0, 0.0, math.inf
    for seed in range(5):
        rng = np.random.default_rng(seed)
        x = Chronicle(10 + np.cumsum(rng.normal(0, 0.5, 1000)))
        for cfg in (moment_config(100, 1), moment_config(40, 2), moment_config(60, 0, 0)):
            var = variance(x, cfg).values
            cov = covariance(x, x, cfg).values
            ok = ~np.isnan(var)
            min_var = min(min_var, var[ok].min())
            worst_cov = max(worst_cov, np.max(np.abs(np.maximum(cov[ok], 0.0) - var[ok])))
            if cfg.estimator.degree == 0:
                n = cfg.window
                oracle = np.lib.stride_tricks.sliding_window_view(x.values, n).var(axis=1)
                worst_oracle = max(worst_oracle, np.max(np.abs(var[n - 1:] - oracle)))
    ok = min_var >= 0 and worst_cov <= 1e-12 and worst_oracle <= 1e-9
    return ok, (f"min var {min_var:.2e}, cov-var {worst_cov:.2e} (tol 1e-12), rolling oracle "
                f"{worst_oracle:.2e} (tol 1e-9)"), 5.0


def invariances():
    worst_scale, worst_add = 0.0, 0.0
    cfg = moment_config(100, 1)
    for seed in range(3):
        rng = np.random.default_rng(seed)
        x = Chronicle(50 * np.exp(np.cumsum(rng.normal(0.0003, 0.01, 1500))))
        one = log_return(x, 1).raw.values
        for dt in (1, 5, 20):
            ref = [log_return(x, dt).raw.values, mean_return(x, dt, cfg).values,
                   asset_volatility(x, dt, cfg).values, sharpe_ratio(x, dt, cfg).values]
            for c in (0.01, 1.0, 100.0):
                y = x.with_values(c * x.values)
                got = [log_return(y, dt).raw.values, mean_return(y, dt, cfg).values,
                       asset_volatility(y, dt, cfg).values, sharpe_ratio(y, dt, cfg).values]
                for a, b in zip(ref, got):
                    worst_scale = max(worst_scale, np.nanmax(np.abs(a - b)))
            sums = np.convolve(one[1:], np.ones(dt), mode="valid")
            worst_add = max(worst_add, np.max(np.abs(ref[0][dt:] - sums)))
    ok = worst_scale <= 1e-12 and worst_add <= 1e-12
    return ok, f"rescaling {worst_scale:.2e}, additivity {worst_add:.2e} (tol 1e-12)", 5.0


def volatility_prediction():
    h = 20
    cfg = moment_config(100, 1)
    k = np.arange(600.0)
    worst = 0.0
    pred = predict_volatility(Chronicle(np.full(600, 0.15)), h, cfg).values
    worst = max(worst, np.nanmax(np.abs(pred - 0.15)))
    s = 2e-4
    pred = predict_volatility(Chronicle(0.1 + s * k), h, cfg).values
    off = prediction_offset(h, cfg)
    i = np.flatnonzero(~np.isnan(pred))
    worst = max(worst, np.max(np.abs(pred[i] - (0.1 + s * (i + off)))))
    return worst <= 1e-6, f"max error {worst:.2e} at horizon {h} (tol 1e-6)", 5.0


def conservation():
    panel = synthetic.random_panel(2000, 10, seed=0)
    rep = run_backtest(panel, RebalancePolicy(eta=0.2))
    P, X = panel.columns, rep.weights_history
    worst = 0.0
    for t in rep.rebalance_indices:
        before, after = math.fsum(P[t] * X[t - 1]), math.fsum(P[t] * X[t])
        worst = max(worst, abs(after - before) / before)
    ok = worst <= 1e-9 and (X >= 0).all() and len(rep.rebalance_indices) > 50
    return ok, (f"{len(rep.rebalance_indices)} rebalances, max relative value change {worst:.2e} "
                f"(tol 1e-9), min holding {X.min():.3g}"), 30.0


def rule_efficacy():
    panel = synthetic.dominance_panel(2000, drifts=(0.15, 0.0), seed=0)
    rep = run_backtest(panel)
    first = rep.rebalance_indices[0]
    e, b = rep.equity.values, rep.baseline_equity.values
    same_before = np.array_equal(e[:first], b[:first])
    differs_after = bool(np.any(e[first + 1:] != b[first + 1:]))
    dyn, base = rep.annualized_sharpe, rep.baseline_metrics["annualized_sharpe"]
    ok = rep.final_weights[0] > 0.5 and dyn >= base and same_before and differs_after
    return ok, (f"final dominant weight {rep.final_weights[0]:.3f}, Sharpe {dyn:.3f} vs static {base:.3f}, "
                f"identical before t={first}: {same_before}"), 30.0


def metric_oracles():
    worst = 0.0
    for seed in range(20):
        e = 100 * np.exp(np.cumsum(np.random.default_rng(seed).normal(0, 0.02, 250)))
        brute = max(1 - e[j] / e[i] for i in range(len(e)) for j in range(i, len(e)))
        worst = max(worst, abs(max_drawdown(e) - brute))
    with tempfile.TemporaryDirectory() as d:
        src, out = Path(d, "p.csv"), Path(d, "b.csv")
        main(["synth", "dominance", "-o", str(src), "--length", "2000"])
        code = main(["backtest", str(src), "-o", str(out)])
        block = json.loads(metrics_path(out).read_text())
        text = out.read_text().splitlines()
        header = text[0].split(",")
        rows = [line.split(",") for line in text[1:]]
        worst_metric = 0.0
        for curve, key in (("equity", "metrics"), ("baseline_equity", "baseline_metrics")):
            j = header.index(curve)
            again = equity_metrics(np.array([float(r[j]) for r in rows]))
            for name, value in block[key].items():
                worst_metric = max(worst_metric, abs(again[name] - value) / max(1.0, abs(value)))
    ok = code == 0 and worst <= 1e-12 and worst_metric <= 1e-9
    return ok, f"drawdown oracle {worst:.2e} (tol 1e-12), CSV-recomputed metrics {worst_metric:.2e} (tol 1e-9)", 10.0


def cli_determinism():
    runs = [("synth", "gold", []), ("trend", "gold", []), ("derivative", "sine", []),
            ("fluctuations", "gold", []), ("volatility", "gold", ["--delta-t", "5"]),
            ("backtest", "dominance", [])]
    same = 0
    with tempfile.TemporaryDirectory() as d:
        for command, kind, flags in runs:
            blobs = []
            for k in range(2):
                src, out = Path(d, f"{command}{k}.in.csv"), Path(d, f"{command}{k}.out.csv")
                main(["synth", kind, "-o", str(src), "--length", "800", "--seed", "3"])
                if command == "synth":
                    blobs.append(src.read_bytes())
                    continue
                assert main([command, str(src), "-o", str(out), *flags]) == 0
                blob = out.read_bytes()
                if command == "backtest":
                    blob += metrics_path(out).read_bytes()
                blobs.append(blob)
            same += blobs[0] == blobs[1]
    return same == len(runs), f"{same}/{len(runs)} commands byte-identical across runs", 10.0


CRITERIA = [
    ("AC1 polynomial exactness", poly_exactness),
    ("AC2 decomposition identity", decomposition_identity),
    ("AC3 denoising vs moving-average baseline", denoising),
    ("AC4 moment identities", moment_identities),
    ("AC5 return and Sharpe invariances", invariances),
    ("AC6 volatility prediction", volatility_prediction),
    ("AC7 no-leverage conservation", conservation),
    ("AC8 rule efficacy on dominance panel", rule_efficacy),
    ("AC9 metric oracles", metric_oracles),
    ("AC10 CLI determinism", cli_determinism),
]


def evaluate(check):
    start = time.perf_counter()
    ok, detail, budget = check()
    elapsed = time.perf_counter() - start
    passed = bool(ok) and elapsed < budget
    return passed, f"{detail}; {elapsed:.2f} s (budget {budget:.0f} s)"


@pytest.mark.parametrize("name, check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, capsys):
    passed, detail = evaluate(check)
    with capsys.disabled():
        print(f"\n{'PASS' if passed else 'FAIL'} {name}: {detail}")
    assert passed, detail


if __name__ == "__main__":
    results = []
    for name, check in CRITERIA:
        passed, detail = evaluate(check)
        results.append(passed)
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    print(f"{sum(results)}/{len(results)} criteria passed")
