"""Windowed moments, log returns, volatility, Sharpe ratio and volatility prediction.

Every expectation goes through :func:`chronicle.estimators.estimate_trend`
with the single estimator held by a :class:`MomentConfig`, so that identities
such as ``cov(x, x) == var(x)`` hold exactly on the grid.  All outputs follow
the causal indexing of the estimators (index i holds the value attributed to
``i - eval_delay``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, GridError, SizeError
from .estimators import EstimatorConfig, estimate_derivative, estimate_trend, make_config
from .series import MISSING, Chronicle, log_transform

logger = logging.getLogger(__name__)

TRADING_DAYS = 252
SHARPE_VOL_FLOOR = 1e-9


@dataclass(frozen=True)
class MomentConfig:
    estimator: EstimatorConfig

    @property
    def window(self) -> int:
        return self.estimator.window


def moment_config(window: int = 100, degree: int = 1, eval_delay: int | None = None,
                  step: float = 1.0) -> MomentConfig:
    return MomentConfig(make_config(window, degree, eval_delay, step))


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Log returns over ``delta_t`` samples; ``normalized`` is per day."""

    delta_t: int
    raw: Chronicle
    normalized: Chronicle


def expectation(x: Chronicle, cfg: MomentConfig) -> Chronicle:
    return estimate_trend(x, cfg.estimator)


def _check_pair(x: Chronicle, y: Chronicle) -> None:
    if not x.same_grid(y):
        raise GridError(f"{x.label} and {y.label} are not on the same grid; align them first")


def covariance(x: Chronicle, y: Chronicle, cfg: MomentConfig) -> Chronicle:
    """``E(xy) - E(x) E(y)``."""
    _check_pair(x, y)
    exy = expectation(x.with_values(x.values * y.values), cfg).values
    ex = expectation(x, cfg).values
    ey = ex if y is x else expectation(y, cfg).values
    return x.with_values(exy - ex * ey, label=f"cov({x.label},{y.label})")


def _clamp(var: np.ndarray, label: str) -> tuple[np.ndarray, int]:
    neg = var < 0
    n = int(neg.sum())
    if n:
        logger.debug("%s: clamped %d negative variance samples (min %.3g)", label, n, var[neg].min())
        var = np.where(neg, 0.0, var)
    return var, n


def variance(x: Chronicle, cfg: MomentConfig, return_clamped: bool = False):
    """``E(x^2) - E(x)^2`` with negative values clamped to zero.

    With ``return_clamped=True`` also return how many samples were clamped.
    """
    ex2 = expectation(x.with_values(x.values * x.values), cfg).values
    ex = expectation(x, cfg).values
    var, n = _clamp(ex2 - ex * ex, x.label)
    out = x.with_values(var, label=f"var({x.label})")
    return (out, n) if return_clamped else out


def volatility(x: Chronicle, cfg: MomentConfig, return_clamped: bool = False):
    var, n = variance(x, cfg, return_clamped=True)
    out = var.with_values(np.sqrt(var.values), label=f"vol({x.label})")
    return (out, n) if return_clamped else out


def log_return(x: Chronicle, delta_t: int) -> ReturnSeries:
    """``R(t) = ln(X(t) / X(t - delta_t))`` and its per-day normalization."""
    delta_t = int(delta_t)
    if delta_t <= 0:
        raise ConfigError(f"delta_t must be positive, got {delta_t}")
    if len(x) <= delta_t:
        raise SizeError(f"{x.label}: {len(x)} samples, delta_t={delta_t}")
    v = x.values
    bad = ~np.isnan(v) & (v <= 0)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise DomainError(f"{x.label}: nonpositive price {v[k]!r} at index {k}", k)
    raw = np.full(len(x), MISSING)
    # the ratio form keeps returns invariant to price rescaling up to one rounding
    raw[delta_t:] = np.log(v[delta_t:] / v[:-delta_t])
    raw_c = x.with_values(raw, label=f"R{delta_t}({x.label})")
    return ReturnSeries(delta_t, raw_c, raw_c.with_values(raw / (delta_t * x.step),
                                                          label=f"r{delta_t}({x.label})"))


def mean_return(x: Chronicle, delta_t: int, cfg: MomentConfig) -> Chronicle:
    """Trend of the normalized log return, ``(E(ln X)(t) - E(ln X)(t - dT)) / dT``.

    Computed as E applied to the normalized return, which equals the
    difference of trends by linearity and shift-equivariance of E.  With
    ``delta_t == 0`` returns the instantaneous rate ``d/dt E(ln X)``.
    """
    if int(delta_t) == 0:
        out = estimate_derivative(log_transform(x), cfg.estimator)
    else:
        out = expectation(log_return(x, delta_t).normalized, cfg)
    return out.with_values(out.values, label=f"rbar{int(delta_t)}({x.label})")


def asset_volatility(x: Chronicle, delta_t: int, cfg: MomentConfig, return_clamped: bool = False):
    """Historical volatility ``sqrt(E(r^2) - rbar^2)`` of normalized log returns."""
    r = log_return(x, delta_t).normalized
    er2 = expectation(r.with_values(r.values * r.values), cfg).values
    rbar = expectation(r, cfg).values
    var, n = _clamp(er2 - rbar * rbar, x.label)
    out = x.with_values(np.sqrt(var), label=f"vol{delta_t}({x.label})")
    return (out, n) if return_clamped else out


def sharpe_ratio(x: Chronicle, delta_t: int, cfg: MomentConfig,
                 vol_floor: float = SHARPE_VOL_FLOOR) -> Chronicle:
    """``rbar / vol``; MISSING wherever the volatility is below ``vol_floor``."""
    rbar = mean_return(x, delta_t, cfg).values
    vol = asset_volatility(x, delta_t, cfg).values
    out = np.full(len(x), MISSING)
    ok = ~np.isnan(vol) & (vol >= vol_floor) & ~np.isnan(rbar)
    out[ok] = rbar[ok] / vol[ok]
    return x.with_values(out, label=f"SR{delta_t}({x.label})")


def annualize_return(rate_per_day: float | np.ndarray, periods: int = TRADING_DAYS):
    return rate_per_day * periods


def annualize_volatility(vol_per_day: float | np.ndarray, periods: int = TRADING_DAYS):
    return vol_per_day * math.sqrt(periods)


def annualize_sharpe(sharpe_per_day: float | np.ndarray, periods: int = TRADING_DAYS):
    return sharpe_per_day * math.sqrt(periods)


def predict_volatility(vol: Chronicle, horizon: int, cfg: MomentConfig) -> Chronicle:
    """Linear extrapolation of the smoothed volatility ``horizon`` steps ahead.

    Index i holds ``E(vol)[i] + horizon * step * dE(vol)/dt[i]``, a prediction
    for grid index ``i - eval_delay + horizon`` (see :func:`prediction_offset`).
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {horizon}")
    if cfg.estimator.degree < 1:
        raise ConfigError("volatility prediction needs an estimator of degree >= 1")
    level = estimate_trend(vol, cfg.estimator).values
    slope = estimate_derivative(vol, cfg.estimator).values
    return vol.with_values(level + horizon * vol.step * slope, label=f"pred{horizon}({vol.label})")


def prediction_offset(horizon: int, cfg: MomentConfig) -> int:
    """Target index minus output index for :func:`predict_volatility`."""
    return int(horizon) - cfg.estimator.eval_delay
