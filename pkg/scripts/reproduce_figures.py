"""Write the data behind the trend, derivative, fluctuation and volatility figures.

The input is a seeded gold-like synthetic series (cubic drift, a yearly
cycle and noise).  Each figure gets one CSV in ``--out-dir``; a short
numeric summary is printed so runs can be compared without plotting.

    python3 scripts/reproduce_figures.py --out-dir figures --seed 1
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from _config import parse_config
from chronicle import synthetic
from chronicle.estimators import (decompose, estimate_derivative, estimate_trend, make_config, moving_average,
                                  moving_average_derivative)
from chronicle.series import lag, write_csv
from chronicle.statistics import (MomentConfig, asset_volatility, log_return, mean_return, predict_volatility,
                                  prediction_offset)


@dataclass(frozen=True)
class FigureConfig:
    out_dir: str = "figures"
    length: int = 4800
    seed: int = 0
    window: int = 100
    degree: int = 1
    ma_window: int = 100
    derivative_ma_window: int = 50
    short_delta_t: int = 1
    long_delta_t: int = 500
    horizon: int = 20


def rms(a) -> float:
    a = np.asarray(a)
    a = a[~np.isnan(a)]
    return math.sqrt(float(np.mean(a * a))) if a.size else math.nan


def run(cfg: FigureConfig) -> dict:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x = synthetic.gold_like(cfg.length, seed=cfg.seed, dated=True)
    est = make_config(cfg.window, cfg.degree)
    dates = x.time_labels()
    summary = {"config": asdict(cfg)}

    trend = estimate_trend(x, est)
    write_csv(out / "trend.csv", {"date": dates, "price": x.values,
                                  "moving_average": moving_average(x, cfg.ma_window).values,
                                  "algebraic_trend": trend.values})

    write_csv(out / "derivative.csv", {
        "date": dates,
        "classical_derivative": moving_average_derivative(x, cfg.derivative_ma_window).values,
        "algebraic_derivative": estimate_derivative(x, est).values,
    })

    dec = decompose(x, est)
    classical = x.values - moving_average(x, cfg.ma_window).values
    write_csv(out / "fluctuations.csv", {"date": dates, "classical_fluctuation": classical,
                                         "algebraic_fluctuation": dec.fluctuation.values})
    summary["fluctuation_rms"] = {"classical": rms(classical), "algebraic": rms(dec.fluctuation.values)}
    # a good residual has small running means: compare the worst 100-step average
    f = dec.fluctuation.values[est.window - 1:]
    c = np.concatenate([[0.0], np.cumsum(f)])
    summary["worst_100_step_fluctuation_mean"] = float(np.max(np.abs(c[100:] - c[:-100])) / 100)

    mc = MomentConfig(est)
    columns = {"date": dates}
    for dt in (cfg.short_delta_t, cfg.long_delta_t):
        if dt >= cfg.length - cfg.window:
            continue
        vol = asset_volatility(x, dt, mc)
        pred = predict_volatility(vol, cfg.horizon, mc)
        off = prediction_offset(cfg.horizon, mc)
        target = lag(pred, off).values
        columns.update({
            f"return_{dt}": log_return(x, dt).normalized.values,
            f"mean_return_{dt}": mean_return(x, dt, mc).values,
            f"volatility_{dt}": vol.values,
            f"predicted_volatility_{dt}": target,
        })
        ok = ~np.isnan(target) & ~np.isnan(vol.values)
        summary[f"prediction_rms_error_{dt}"] = rms(target[ok] - vol.values[ok])
        summary[f"median_volatility_{dt}"] = float(np.nanmedian(vol.values))
    write_csv(out / "volatility.csv", columns)

    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    return summary


if __name__ == "__main__":
    print(json.dumps(run(parse_config(FigureConfig, __doc__.splitlines()[0])), indent=1))
