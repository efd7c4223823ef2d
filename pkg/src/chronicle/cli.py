"""Command-line entry point: one subcommand per analysis, plus ``synth`` for fixtures.

Exit status is 0 on success, 2 on any input or parameter error (message on
stderr) and 1 on I/O failure.  Data goes only to ``--output``.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import synthetic
from .errors import ChronicleError
from .estimators import (DEFAULT_WINDOW, decompose, estimate_derivative, estimate_trend, make_config,
                         moving_average, moving_average_derivative)
from .portfolio import RebalancePolicy, run_backtest
from .series import Chronicle, lag, load_csv, load_panel_csv, save_csv, write_csv, write_json
from .statistics import (MomentConfig, asset_volatility, log_return, mean_return, predict_volatility,
                         prediction_offset)

log = logging.getLogger("chronicle")


def _emit(args, columns: dict, params: dict) -> None:
    if args.format == "json":
        write_json(args.output, {"command": args.command, "params": params, **columns})
    else:
        write_csv(args.output, columns)


def _estimator(args, degree_default: int = 1):
    degree = degree_default if args.degree is None else args.degree
    return make_config(args.window, degree, args.delay)


def _load(args) -> Chronicle:
    return load_csv(args.input, args.column, max_gap=args.max_gap, require_positive=args.positive)


def cmd_trend(args) -> None:
    x = _load(args)
    cfg = _estimator(args)
    ma_window = args.ma_window or args.window
    columns = {
        "date": x.time_labels(),
        "price": x.values,
        "moving_average": moving_average(x, ma_window).values,
        "algebraic_trend": estimate_trend(x, cfg).values,
    }
    _emit(args, columns, {"window": cfg.window, "degree": cfg.degree, "delay": cfg.eval_delay,
                          "ma_window": ma_window})


def cmd_derivative(args) -> None:
    x = _load(args)
    cfg = _estimator(args)
    columns = {
        "date": x.time_labels(),
        "price": x.values,
        "classical_derivative": moving_average_derivative(x, args.ma_window or 50).values,
        "algebraic_derivative": estimate_derivative(x, cfg).values,
    }
    _emit(args, columns, {"window": cfg.window, "degree": cfg.degree, "delay": cfg.eval_delay,
                          "ma_window": args.ma_window or 50})


def cmd_fluctuations(args) -> None:
    x = _load(args)
    cfg = _estimator(args)
    ma_window = args.ma_window or args.window
    dec = decompose(x, cfg)
    columns = {
        "date": x.time_labels(),
        "price": x.values,
        "classical_fluctuation": x.values - moving_average(x, ma_window).values,
        "algebraic_fluctuation": dec.fluctuation.values,
    }
    _emit(args, columns, {"window": cfg.window, "degree": cfg.degree, "delay": cfg.eval_delay,
                          "ma_window": ma_window})


def cmd_volatility(args) -> None:
    x = _load(args)
    mc = MomentConfig(_estimator(args))
    ret = log_return(x, args.delta_t)
    vol = asset_volatility(x, args.delta_t, mc)
    pred = predict_volatility(vol, args.horizon, mc)
    off = prediction_offset(args.horizon, mc)
    columns = {
        "date": x.time_labels(),
        "price": x.values,
        "log_return": ret.raw.values,
        "normalized_return": ret.normalized.values,
        "mean_return": mean_return(x, args.delta_t, mc).values,
        "volatility": vol.values,
        "predicted_volatility": pred.values,
        # row = the time the prediction is for
        "predicted_volatility_at_target": lag(pred, off).values,
    }
    _emit(args, columns, {"window": mc.window, "degree": mc.estimator.degree,
                          "delay": mc.estimator.eval_delay, "delta_t": args.delta_t,
                          "horizon": args.horizon, "target_offset": off})


def cmd_backtest(args) -> None:
    panel = load_panel_csv(args.input, max_gap=args.max_gap)
    degree = 0 if args.degree is None else args.degree
    policy = RebalancePolicy(
        delta_t=args.rebalance_every,
        eta=args.eta,
        epsilon=args.epsilon,
        grad_tol=args.grad_tol,
        sharpe_window=args.sharpe_window,
        moment_cfg=MomentConfig(make_config(args.window, degree, args.delay)),
        return_horizon=args.delta_t,
    )
    report = run_backtest(panel, policy, initial_capital=args.capital)
    if args.format == "json":
        report.to_json(args.output)
    else:
        report.to_csv(args.output)
        write_json(metrics_path(args.output), report.summary())
    log.info("dynamic %s | static %s", report.metrics, report.baseline_metrics)


def metrics_path(output) -> Path:
    """Where the CSV variant of ``backtest`` writes its JSON metrics block."""
    out = Path(output)
    return out.with_name(out.stem + ".metrics.json")


SYNTH_KINDS = ("constant", "ramp", "alternating", "exponential", "sine", "gold", "dominance", "panel")


def cmd_synth(args) -> None:
    n, seed = args.length, args.seed
    if args.kind in ("dominance", "panel"):
        if args.kind == "dominance":
            panel = synthetic.dominance_panel(n, drifts=(args.drift, 0.0), vol=args.noise or 0.01,
                                              seed=seed, dated=True)
        else:
            panel = synthetic.random_panel(n, args.assets, seed=seed, dated=True)
        write_csv(args.output, {"date": panel.time_labels(),
                                **{lab: panel.columns[:, j] for j, lab in enumerate(panel.labels)}})
        return
    level = args.level
    if args.kind == "constant":
        x = synthetic.constant(n, 100.0 if level is None else level, dated=True)
    elif args.kind == "ramp":
        x = synthetic.ramp(n, args.slope, 100.0 if level is None else level, dated=True)
    elif args.kind == "alternating":
        x = synthetic.alternating(n, 1.0 if args.noise is None else args.noise, level or 0.0, dated=True)
    elif args.kind == "exponential":
        x = synthetic.exponential(n, args.rate, 100.0 if level is None else level, dated=True)
    elif args.kind == "sine":
        x, _ = synthetic.noisy_sine(n, args.period, 1.0, 0.05 if args.noise is None else args.noise,
                                    seed=seed, offset=level or 0.0, dated=True)
    else:
        x = synthetic.gold_like(n, seed=seed, dated=True)
    save_csv(x.with_values(x.values, label="price"), args.output)


def _add_estimator_flags(p, window=DEFAULT_WINDOW, ma_window=True):
    p.add_argument("--window", type=int, default=window, help="estimator window N in samples")
    p.add_argument("--degree", type=int, default=None, help="local polynomial degree (0, 1 or 2)")
    p.add_argument("--delay", type=int, default=None, help="evaluation delay in samples (default N//2)")
    if ma_window:
        p.add_argument("--ma-window", type=int, default=None, help="baseline moving-average window")


def _add_io_flags(p):
    p.add_argument("input", help="input CSV with a 'date' column")
    p.add_argument("--output", "-o", required=True, help="output file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--max-gap", type=int, default=10, help="longest gap (steps) to forward-fill")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronicle", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, help_ in (("trend", cmd_trend, "moving average vs algebraic trend"),
                              ("derivative", cmd_derivative, "classical vs algebraic derivative"),
                              ("fluctuations", cmd_fluctuations, "classical vs algebraic residual")):
        p = sub.add_parser(name, help=help_)
        _add_io_flags(p)
        p.add_argument("--column", default=None, help="value column (default: the only one)")
        _add_estimator_flags(p)
        p.set_defaults(func=func, positive=False)

    p = sub.add_parser("volatility", help="log returns, volatility and its prediction")
    _add_io_flags(p)
    p.add_argument("--column", default=None)
    _add_estimator_flags(p, ma_window=False)
    p.add_argument("--delta-t", type=int, default=1, help="return horizon in samples")
    p.add_argument("--horizon", type=int, default=20, help="prediction horizon in samples")
    p.set_defaults(func=cmd_volatility, positive=True)

    p = sub.add_parser("backtest", help="dynamic vs static equal-weight portfolio")
    _add_io_flags(p)
    _add_estimator_flags(p, ma_window=False)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--rebalance-every", type=int, default=20)
    p.add_argument("--delta-t", type=int, default=None,
                   help="return horizon of the Sharpe objective (default: --rebalance-every)")
    p.add_argument("--grad-tol", type=float, default=1e-3)
    p.add_argument("--sharpe-window", type=int, default=250)
    p.add_argument("--capital", type=float, default=100_000.0)
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("synth", help="write a seeded synthetic fixture CSV")
    p.add_argument("kind", choices=SYNTH_KINDS)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--length", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=float, default=None,
                   help="constant level, ramp intercept, initial price or sine offset")
    p.add_argument("--slope", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=0.01, help="daily growth rate (exponential)")
    p.add_argument("--period", type=float, default=200.0)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--drift", type=float, default=0.15, help="annual drift of the dominant asset")
    p.add_argument("--assets", type=int, default=10)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except ChronicleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
