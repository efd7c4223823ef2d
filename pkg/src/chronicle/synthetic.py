"""Seeded synthetic fixtures: ramps, noisy sines, a gold-like price and dominance panels."""
from __future__ import annotations

import numpy as np

from .series import AlignedPanel, Chronicle
from .statistics import TRADING_DAYS

BUSINESS_DAY_ORIGIN = np.datetime64("2000-01-03", "D")


def business_dates(n: int, origin=BUSINESS_DAY_ORIGIN) -> np.ndarray:
    return np.busday_offset(origin, np.arange(n), roll="forward")


def _dated(values, label: str, dated: bool) -> Chronicle:
    if not dated:
        return Chronicle(values, label=label)
    dates = business_dates(len(values))
    start = float(np.busday_count(np.datetime64("1970-01-01", "D"), dates[0]))
    return Chronicle(values, label=label, start=start, dates=dates, calendar="B")


def rademacher(n: int, rng: np.random.Generator) -> np.ndarray:
    """Independent +1/-1 signs."""
    return rng.choice(np.array([-1.0, 1.0]), size=n)


def constant(n: int, value: float = 1.0, dated: bool = False) -> Chronicle:
    return _dated(np.full(n, float(value)), "constant", dated)


def ramp(n: int, slope: float = 1.0, intercept: float = 0.0, dated: bool = False) -> Chronicle:
    return _dated(intercept + slope * np.arange(n, dtype=float), "ramp", dated)


def alternating(n: int, amplitude: float = 1.0, center: float = 0.0, dated: bool = False) -> Chronicle:
    return _dated(center + amplitude * (-1.0) ** np.arange(n), "alternating", dated)


def exponential(n: int, rate: float = 0.01, initial: float = 100.0, dated: bool = False) -> Chronicle:
    return _dated(initial * np.exp(rate * np.arange(n, dtype=float)), "exponential", dated)


def noisy_sine(n: int = 2000, period: float = 200.0, amplitude: float = 1.0, noise: float = 0.05,
               seed: int = 0, offset: float = 0.0, dated: bool = False):
    """Sine with random phase plus random-sign noise of fixed magnitude.

    Returns ``(chronicle, derivative)`` where ``derivative`` is the exact
    derivative of the noise-free sine on the grid, per step.
    """
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2 * np.pi)
    k = np.arange(n, dtype=float)
    omega = 2 * np.pi / period
    clean = offset + amplitude * np.sin(omega * k + phase)
    x = clean + noise * rademacher(n, rng)
    return _dated(x, "noisy_sine", dated), amplitude * omega * np.cos(omega * k + phase)


def gold_like(n: int = 4800, seed: int = 0, dated: bool = False) -> Chronicle:
    """A positive daily price with an accelerating trend, a yearly cycle and rapid noise.

    Roughly the shape of gold between the early 1990s and 2010: flat near
    350 for years, then a climb past 1200.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float) / n
    trend = 330.0 + 900.0 * t ** 3
    cycle = 15.0 * np.sin(2 * np.pi * np.arange(n) / TRADING_DAYS + rng.uniform(0, 2 * np.pi))
    noise = (4.0 + 8.0 * t) * rademacher(n, rng) * rng.uniform(0.5, 1.5, size=n)
    return _dated(trend + cycle + noise, "gold", dated)


def gbm_prices(n: int, drift: float, vol: float, rng: np.random.Generator | None = None,
               shocks: np.ndarray | None = None, initial: float = 100.0) -> np.ndarray:
    """Geometric price path with annual ``drift`` and daily log-volatility ``vol``."""
    if shocks is None:
        shocks = rng.standard_normal(n - 1)
    steps = drift / TRADING_DAYS + vol * shocks
    return initial * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))


def dominance_panel(n: int = 2000, drifts=(0.15, 0.0), vol: float = 0.01, seed: int = 0,
                    shared_noise: bool = True, dated: bool = False) -> AlignedPanel:
    """Assets that differ only in drift.

    With ``shared_noise`` every asset carries the same fluctuation path, so
    the higher-drift asset dominates at every instant.
    """
    rng = np.random.default_rng(seed)
    common = rng.standard_normal(n - 1)
    cols = [gbm_prices(n, mu, vol, shocks=common if shared_noise else rng.standard_normal(n - 1))
            for mu in drifts]
    labels = tuple(f"A{i}" for i in range(len(drifts)))
    return _panel(labels, np.column_stack(cols), dated)


def random_panel(n: int = 2000, n_assets: int = 10, seed: int = 0, dated: bool = False) -> AlignedPanel:
    """Independent geometric paths with drifts in [-0.1, 0.25]/yr and vols in [0.5%, 2%]/day."""
    rng = np.random.default_rng(seed)
    drifts = rng.uniform(-0.10, 0.25, n_assets)
    vols = rng.uniform(0.005, 0.02, n_assets)
    inits = rng.uniform(10.0, 500.0, n_assets)
    cols = [gbm_prices(n, mu, s, rng=rng, initial=p0) for mu, s, p0 in zip(drifts, vols, inits)]
    labels = tuple(f"S{i}" for i in range(n_assets))
    return _panel(labels, np.column_stack(cols), dated)


def _panel(labels, cols, dated: bool) -> AlignedPanel:
    if not dated:
        return AlignedPanel(labels, cols)
    dates = business_dates(cols.shape[0])
    start = float(np.busday_count(np.datetime64("1970-01-01", "D"), dates[0]))
    return AlignedPanel(labels, cols, start=start, dates=dates, calendar="B")
