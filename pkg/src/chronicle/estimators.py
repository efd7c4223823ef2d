"""Sliding-window algebraic estimators of trend and derivative.

Each window of N samples is projected by least squares onto polynomials of
degree d centred at the evaluation point, which sits ``eval_delay`` samples
before the newest sample.  The projection is a fixed set of FIR weights per
coefficient, computed once per configuration.  For d = 1 on a continuous
window these weights tend to the classical integral formula

    a_1 = 6 / T^3 * integral_0^T (2 tau - T) x(tau) dtau

(the slope estimator obtained from operational calculus), and for a
symmetric window to Lanczos' ``3/(2h^3) * integral_{-h}^{h} tau x(t+tau) dtau``.

Output convention: estimators are causal.  Output index i is computed from
samples ``i-N+1 .. i`` and is an estimate for grid index ``i - eval_delay``.
The first N-1 outputs are MISSING.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DomainError, SizeError
from .series import MISSING, Chronicle, lag

DEFAULT_WINDOW = 100
DEFAULT_DEGREE = 1


@dataclass(frozen=True, eq=False)
class EstimatorConfig:
    """Window length, polynomial degree, evaluation delay and the derived FIR weights.

    ``weights[j]`` dotted with a window (oldest sample first) yields the
    coefficient ``a_j`` of ``(t - t_eval)**j``, in value / day**j.
    """

    window: int
    degree: int
    eval_delay: int
    step: float
    weights: np.ndarray

    def __repr__(self) -> str:
        return (f"EstimatorConfig(window={self.window}, degree={self.degree}, "
                f"eval_delay={self.eval_delay}, step={self.step})")

    def apply(self, samples) -> np.ndarray:
        return self.weights @ np.asarray(samples, dtype=float)


@dataclass(frozen=True)
class LocalFit:
    coefficients: np.ndarray
    window_end_index: int | None = None

    @property
    def value(self) -> float:
        return float(self.coefficients[0])

    @property
    def slope(self) -> float:
        return float(self.coefficients[1])


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``trend[i] + fluctuation[i] == x[i - eval_delay]`` wherever both are defined."""

    trend: Chronicle
    fluctuation: Chronicle
    config: EstimatorConfig


def window_offsets(window: int, eval_delay: int) -> np.ndarray:
    """Sample offsets of a window, oldest first, relative to the evaluation point."""
    return np.arange(window, dtype=float) - (window - 1) + eval_delay


def make_config(window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE,
                eval_delay: int | None = None, step: float = 1.0) -> EstimatorConfig:
    """Build the least-squares FIR weights for one (window, degree, delay, step).

    ``eval_delay`` defaults to ``window // 2``.
    """
    window, degree = int(window), int(degree)
    if degree not in (0, 1, 2):
        raise ConfigError(f"degree must be 0, 1 or 2, got {degree}")
    if window < degree + 1:
        raise ConfigError(f"window={window} too short for degree {degree} (need >= {degree + 1})")
    if eval_delay is None:
        eval_delay = window // 2
    eval_delay = int(eval_delay)
    if not 0 <= eval_delay < window:
        raise ConfigError(f"eval_delay must lie in [0, {window - 1}], got {eval_delay}")
    if not (np.isfinite(step) and step > 0):
        raise ConfigError(f"step must be positive, got {step}")
    # monomials in offsets scaled by the window length keep the system well conditioned
    scale = float(window)
    u = window_offsets(window, eval_delay) / scale
    basis = np.vander(u, degree + 1, increasing=True)
    w = np.linalg.pinv(basis)
    w /= ((scale * step) ** np.arange(degree + 1))[:, None]
    w.flags.writeable = False
    return EstimatorConfig(window, degree, eval_delay, float(step), w)


def fit_window(samples, config: EstimatorConfig, window_end_index: int | None = None) -> LocalFit:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (config.window,):
        raise SizeError(f"expected {config.window} samples, got {samples.shape}")
    if np.isnan(samples).any():
        raise DomainError("window contains MISSING samples", int(np.flatnonzero(np.isnan(samples))[0]))
    return LocalFit(config.apply(samples), window_end_index)


def _longest_defined_run(values: np.ndarray) -> int:
    ok = ~np.isnan(values)
    best = run = 0
    for flag in ok:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def _check_length(x: Chronicle, window: int) -> None:
    if len(x) < window:
        raise SizeError(f"{x.label}: {len(x)} samples, window needs {window}")
    if _longest_defined_run(x.values) < window:
        raise SizeError(f"{x.label}: no run of {window} consecutive defined samples")


def _check_step(x: Chronicle, config: EstimatorConfig) -> None:
    if not np.isclose(x.step, config.step, rtol=1e-12, atol=0.0):
        raise ConfigError(f"config built for step {config.step}, series has step {x.step}")


def _slide(values: np.ndarray, w: np.ndarray) -> np.ndarray:
    out = np.full(len(values), MISSING)
    out[len(w) - 1:] = sliding_window_view(values, len(w)) @ w
    return out


def coefficient_series(x: Chronicle, config: EstimatorConfig, order: int) -> Chronicle:
    """Causal series of the fitted coefficient ``a_order``."""
    if order > config.degree:
        raise ConfigError(f"coefficient a_{order} needs degree >= {order}, config has {config.degree}")
    _check_step(x, config)
    _check_length(x, config.window)
    return x.with_values(_slide(x.values, config.weights[order]))


def estimate_trend(x: Chronicle, config: EstimatorConfig) -> Chronicle:
    """Algebraic trend E(x); index i holds the fitted value at index i - eval_delay."""
    return _relabel(coefficient_series(x, config, 0), f"E({x.label})")


def estimate_derivative(x: Chronicle, config: EstimatorConfig) -> Chronicle:
    """Slope a_1 (value per day) of the local fit, attributed to index i - eval_delay."""
    if config.degree < 1:
        raise ConfigError("derivative estimation needs degree >= 1")
    return _relabel(coefficient_series(x, config, 1), f"dE({x.label})/dt")


def _relabel(x: Chronicle, label: str) -> Chronicle:
    return x.with_values(x.values, label=label)


def moving_average(x: Chronicle, window: int) -> Chronicle:
    """Trailing unweighted mean; the first window-1 outputs are MISSING."""
    window = int(window)
    if window < 1:
        raise ConfigError(f"moving-average window must be >= 1, got {window}")
    if len(x) < window:
        raise SizeError(f"{x.label}: {len(x)} samples, window needs {window}")
    out = np.full(len(x), MISSING)
    out[window - 1:] = sliding_window_view(x.values, window).mean(axis=1)
    return x.with_values(out, label=f"MA{window}({x.label})")


def moving_average_derivative(x: Chronicle, window: int = 50) -> Chronicle:
    """Two-step technical-analysis derivative: trailing mean, then a one-step difference."""
    ma = moving_average(x, window).values
    out = np.full(len(x), MISSING)
    out[1:] = (ma[1:] - ma[:-1]) / x.step
    return x.with_values(out, label=f"dMA{window}({x.label})/dt")


def decompose(x: Chronicle, config: EstimatorConfig) -> Decomposition:
    trend = estimate_trend(x, config)
    aligned = lag(x, config.eval_delay).values
    fluct = x.with_values(aligned - trend.values, label=f"{x.label} fluctuation")
    return Decomposition(trend, fluct, config)
