"""Portfolio state, Sharpe-surface partials, no-leverage rebalancing and the backtest engine.

Legs are (asset, strategy) pairs flattened into one vector; a panel column
holds the price (or strategy equity) of each leg.  Holdings are units of a
leg and never go negative.  Rebalancing trades at the current sample's price
with no costs and satisfies ``sum(P_i * dx_i) == 0``.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DomainError, GridError, SizeError
from .series import AlignedPanel, Chronicle, write_csv, write_json
from .statistics import MomentConfig, TRADING_DAYS, moment_config, sharpe_ratio

logger = logging.getLogger(__name__)


def parse_legs(labels: Sequence[str]) -> tuple[tuple[int, int], ...]:
    """Map ``"ASSET"`` / ``"ASSET:STRATEGY"`` labels to (asset, strategy) index pairs."""
    assets: dict[str, int] = {}
    strategies: dict[str, int] = {}
    legs = []
    for label in labels:
        asset, _, strat = label.partition(":")
        i = assets.setdefault(asset, len(assets))
        j = strategies.setdefault(strat, len(strategies))
        legs.append((i, j))
    return tuple(legs)


@dataclass(frozen=True, eq=False)
class PortfolioState:
    holdings: np.ndarray
    prices: np.ndarray
    time_index: int = 0
    legs: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        h = np.array(self.holdings, dtype=float).reshape(-1)
        p = np.array(self.prices, dtype=float).reshape(-1)
        if h.shape != p.shape:
            raise GridError(f"{len(h)} holdings for {len(p)} prices")
        if (h < 0).any() or np.isnan(h).any():
            raise DomainError("holdings must be nonnegative", int(np.flatnonzero(~(h >= 0))[0]))
        if not (p > 0).all():
            raise DomainError("prices must be positive", int(np.flatnonzero(~(p > 0))[0]))
        legs = self.legs if self.legs is not None else tuple((i, 0) for i in range(len(h)))
        if len(legs) != len(h):
            raise GridError(f"{len(legs)} legs for {len(h)} holdings")
        h.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "holdings", h)
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "legs", tuple(tuple(leg) for leg in legs))

    @property
    def value(self) -> float:
        return portfolio_value(self)

    def replace(self, holdings) -> PortfolioState:
        return PortfolioState(holdings, self.prices, self.time_index, self.legs)


def portfolio_value(state: PortfolioState) -> float:
    """``sum_i x_i * P_i``, correctly rounded (independent of leg order)."""
    return math.fsum(state.holdings * state.prices)


@dataclass(frozen=True)
class RebalancePolicy:
    """Parameters of the gradient rules.

    ``delta_t`` is the rebalance interval; holdings stay constant in between.
    The Sharpe objective uses log returns over ``return_horizon`` samples,
    which defaults to ``delta_t``.  ``eta`` is the fraction of portfolio value
    moved per unit of centred partial; ``eta == 0`` disables trading.
    """

    delta_t: int = 20
    eta: float = 0.05
    epsilon: float = 0.01
    grad_tol: float = 1e-3
    sharpe_window: int = 250
    moment_cfg: MomentConfig = field(default_factory=lambda: moment_config(100, 0))
    return_horizon: int | None = None

    @property
    def horizon(self) -> int:
        return self.delta_t if self.return_horizon is None else self.return_horizon

    def __post_init__(self):
        if int(self.delta_t) < 1:
            raise ConfigError(f"delta_t must be >= 1, got {self.delta_t}")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.grad_tol > 0:
            raise ConfigError(f"grad_tol must be > 0, got {self.grad_tol}")
        if self.return_horizon is not None and int(self.return_horizon) < 1:
            raise ConfigError(f"return_horizon must be >= 1, got {self.return_horizon}")
        need = self.moment_cfg.window + self.horizon
        if self.sharpe_window < need:
            raise ConfigError(f"sharpe_window={self.sharpe_window} shorter than moment window "
                              f"+ return horizon = {need}")


def policy_dict(policy: RebalancePolicy) -> dict:
    est = policy.moment_cfg.estimator
    return {"delta_t": policy.delta_t, "return_horizon": policy.horizon, "eta": policy.eta,
            "epsilon": policy.epsilon, "grad_tol": policy.grad_tol, "sharpe_window": policy.sharpe_window,
            "moment_window": est.window, "moment_degree": est.degree, "moment_delay": est.eval_delay}


# ---------------------------------------------------------------------------
# Sharpe surface

def sharpe_objective(weights, panel: AlignedPanel, t: int, policy: RebalancePolicy) -> float:
    """Sharpe ratio at ``t`` of the portfolio held constant over the trailing window.

    Returns NaN (MISSING) when the volatility guard trips.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (panel.n_series,):
        raise GridError(f"{len(w)} weights for {panel.n_series} legs")
    if (w < 0).any() or not (w > 0).any():
        raise DomainError("weights must be nonnegative and not all zero")
    t = int(t)
    lo = t - policy.sharpe_window + 1
    if lo < 0 or t >= len(panel):
        raise SizeError(f"t={t} needs {policy.sharpe_window} samples of history within a "
                        f"panel of length {len(panel)}")
    value = Chronicle(panel.columns[lo:t + 1] @ w, label="portfolio", step=panel.step)
    return float(sharpe_ratio(value, policy.horizon, policy.moment_cfg).values[-1])


class Partials(NamedTuple):
    """Partials of the Sharpe objective and which legs used a one-sided difference."""

    gradient: np.ndarray
    one_sided: np.ndarray


def sharpe_partials(state: PortfolioState, panel: AlignedPanel, policy: RebalancePolicy,
                    max_workers: int | None = None) -> Partials:
    """Finite-difference partials of the Sharpe objective, one per leg.

    Leg i is perturbed by ``epsilon * V / P_i`` units, i.e. by ``epsilon`` of
    portfolio value, and the difference is divided by ``epsilon``: the result
    is ``dy/dx_i * V / P_i``, the partial in value-weight coordinates.  Legs
    too small for the downward perturbation get a forward difference.  A
    MISSING objective yields a zero partial.
    """
    x = state.holdings
    P = state.prices
    V = portfolio_value(state)
    eps = policy.epsilon
    t = state.time_index
    if V <= 0:
        raise DomainError("portfolio value must be positive")
    n = len(x)
    h = eps * V / P
    one_sided = x - h < 0

    def objective(w):
        return sharpe_objective(w, panel, t, policy)

    def partial(i):
        up = x.copy()
        up[i] += h[i]
        y_up = objective(up)
        if one_sided[i]:
            return (y_up - base) / eps
        down = x.copy()
        down[i] -= h[i]
        return (y_up - objective(down)) / (2 * eps)

    base = objective(x) if one_sided.any() else math.nan
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            grads = list(pool.map(partial, range(n)))
    else:
        grads = [partial(i) for i in range(n)]
    g = np.array(grads, dtype=float)
    bad = np.isnan(g)
    if bad.any():
        logger.warning("t=%d: Sharpe objective undefined for %d legs; partials set to 0", t, int(bad.sum()))
        g[bad] = 0.0
    if one_sided.any():
        logger.debug("t=%d: one-sided differences for legs %s", t, np.flatnonzero(one_sided).tolist())
    return Partials(g, one_sided)


# ---------------------------------------------------------------------------
# rebalancing rules

@dataclass(frozen=True, eq=False)
class RebalanceInfo:
    dx: np.ndarray
    lam: float
    active: np.ndarray
    clipped: np.ndarray
    noop: bool
    reason: str = ""


def rebalance_step(state: PortfolioState, gradient, policy: RebalancePolicy,
                   return_info: bool = False):
    """Apply the sign rules under the no-leverage constraint.

    Active legs (``|g| >= grad_tol``) move by ``eta * V * (g_i - lam) / P_i``
    with ``lam`` the mean active partial, so value is conserved.  If every
    active partial is negative, the near-flat legs join the active set and
    receive the freed value.  Legs that would go short are closed out and
    ``lam`` is re-solved over the rest so the freed value is redeployed.
    """
    g = np.asarray(gradient, dtype=float)
    x, P = state.holdings, state.prices
    if g.shape != x.shape:
        raise GridError(f"{len(g)} partials for {len(x)} legs")
    n = len(x)
    scale = policy.eta * portfolio_value(state)

    def done(dx, lam, active, clipped, noop, reason=""):
        new = state if noop else state.replace(x + dx)
        if reason:
            logger.info("rebalance at t=%d skipped: %s", state.time_index, reason)
        info = RebalanceInfo(dx, lam, active, clipped, noop, reason)
        return (new, info) if return_info else new

    zeros = np.zeros(n)
    active = np.abs(g) >= policy.grad_tol
    clipped = np.zeros(n, dtype=bool)
    if scale == 0:
        return done(zeros, 0.0, active, clipped, True)
    if not active.any():
        return done(zeros, 0.0, active, clipped, True, "all partials below grad_tol")
    if (g[active] < 0).all() and not active.all():
        active = np.ones(n, dtype=bool)
    if active.sum() == 1:
        return done(zeros, float(g[active][0]), active, clipped, True, "a single active leg cannot trade")

    act = active.copy()
    freed = 0.0
    dx = zeros.copy()
    while True:
        m = int(act.sum())
        if m == 0:
            return done(zeros, 0.0, active, clipped, True, "no feasible active leg")
        lam = math.fsum(g[act]) / m - freed / (scale * m)
        trial = np.where(act, scale * (g - lam) / P, 0.0)
        short = act & (x + trial < 0)
        if not short.any():
            dx[act] = trial[act]
            break
        dx[short] = -x[short]
        clipped |= short
        act &= ~short
        freed += math.fsum(P[short] * x[short])
    return done(dx, lam, active, clipped, False)


# ---------------------------------------------------------------------------
# backtest

def max_drawdown(equity) -> float:
    """Largest peak-to-trough loss ``max_t 1 - E(t) / max_{s<=t} E(s)``."""
    e = np.asarray(equity.values if isinstance(equity, Chronicle) else equity, dtype=float)
    if e.size == 0:
        raise SizeError("empty equity curve")
    if np.isnan(e).any() or (e <= 0).any():
        raise DomainError("equity must be positive and defined")
    return float(np.max(1.0 - e / np.maximum.accumulate(e)))


def annualized_return(equity, periods: int = TRADING_DAYS) -> float:
    """Geometric growth rate per year of an equity curve sampled once per period."""
    e = np.asarray(equity, dtype=float)
    if len(e) < 2:
        return math.nan
    return float((e[-1] / e[0]) ** (periods / (len(e) - 1)) - 1.0)


def annualized_sharpe(equity, periods: int = TRADING_DAYS) -> float:
    """Mean over standard deviation of one-period log returns, times sqrt(periods)."""
    e = np.asarray(equity, dtype=float)
    if len(e) < 3:
        return math.nan
    r = np.log(e[1:] / e[:-1])
    sd = r.std(ddof=1)
    if not sd > 0:
        return math.nan
    return float(r.mean() / sd * math.sqrt(periods))


def equity_metrics(equity, periods: int = TRADING_DAYS) -> dict[str, float]:
    e = np.asarray(equity, dtype=float)
    return {
        "annualized_return": annualized_return(e, periods),
        "annualized_sharpe": annualized_sharpe(e, periods),
        "max_drawdown": max_drawdown(e),
    }


@dataclass(frozen=True, eq=False)
class BacktestReport:
    labels: tuple[str, ...]
    equity: Chronicle
    weights_history: np.ndarray
    baseline_equity: Chronicle
    annualized_return: float
    annualized_sharpe: float
    max_drawdown: float
    baseline_metrics: dict[str, float]
    rebalance_indices: tuple[int, ...]
    conservation_error: float
    initial_capital: float
    policy: RebalancePolicy
    prices: np.ndarray

    @property
    def metrics(self) -> dict[str, float]:
        return {"annualized_return": self.annualized_return,
                "annualized_sharpe": self.annualized_sharpe,
                "max_drawdown": self.max_drawdown}

    @property
    def final_weights(self) -> np.ndarray:
        """Value weights at the last sample."""
        v = self.weights_history[-1] * self.prices[-1]
        return v / v.sum()

    def summary(self) -> dict:
        return {
            "metrics": self.metrics,
            "baseline_metrics": dict(self.baseline_metrics),
            "initial_capital": self.initial_capital,
            "final_equity": float(self.equity.values[-1]),
            "final_baseline_equity": float(self.baseline_equity.values[-1]),
            "rebalances": len(self.rebalance_indices),
            "conservation_error": self.conservation_error,
            "policy": policy_dict(self.policy),
        }

    def columns(self) -> dict[str, list]:
        cols = {"date": self.equity.time_labels(),
                "equity": self.equity.values,
                "baseline_equity": self.baseline_equity.values}
        for j, label in enumerate(self.labels):
            cols[f"x:{label}"] = self.weights_history[:, j]
        return cols

    def to_csv(self, path) -> None:
        write_csv(path, self.columns())

    def to_json(self, path, include_series: bool = True) -> None:
        obj = self.summary()
        if include_series:
            cols = self.columns()
            obj["labels"] = list(self.labels)
            obj["rebalance_indices"] = list(self.rebalance_indices)
            obj["time"] = cols.pop("date")
            obj["equity"] = cols.pop("equity")
            obj["baseline_equity"] = cols.pop("baseline_equity")
            obj["holdings"] = {k[2:]: v for k, v in cols.items()}
        write_json(path, obj)


def _simulate(panel: AlignedPanel, policy: RebalancePolicy, x0: np.ndarray, legs,
              max_workers: int | None):
    T = len(panel)
    prices = panel.columns
    first = policy.sharpe_window - 1
    x = x0.copy()
    history = np.empty((T, len(x0)))
    equity = np.empty(T)
    rebalances = []
    worst = 0.0
    trading = policy.eta > 0
    for t in range(T):
        if trading and t >= first and (t - first) % policy.delta_t == 0:
            state = PortfolioState(x, prices[t], t, legs)
            grad = sharpe_partials(state, panel, policy, max_workers=max_workers).gradient
            new = rebalance_step(state, grad, policy)
            before, after = state.value, new.value
            worst = max(worst, abs(after - before) / before)
            x = np.array(new.holdings)
            rebalances.append(t)
        history[t] = x
        equity[t] = prices[t] @ x
    return equity, history, tuple(rebalances), worst


def run_backtest(panel: AlignedPanel, policy: RebalancePolicy | None = None,
                 initial_capital: float = 100_000.0, max_workers: int | None = None) -> BacktestReport:
    """Run the dynamic policy and the static equal-weight baseline on the same panel.

    The portfolio starts equally weighted by value at the first sample.  The
    first rebalance happens once ``sharpe_window`` samples are available,
    then every ``delta_t`` samples.
    """
    policy = policy or RebalancePolicy()
    if not initial_capital > 0:
        raise ConfigError("initial_capital must be positive")
    T, n = panel.columns.shape
    if T < policy.sharpe_window + policy.delta_t:
        raise SizeError(f"panel of {T} samples is shorter than sharpe_window + delta_t = "
                        f"{policy.sharpe_window + policy.delta_t}")
    legs = parse_legs(panel.labels)
    x0 = initial_capital / n / panel.columns[0]
    equity, history, rebalances, worst = _simulate(panel, policy, x0, legs, max_workers)
    static = dataclasses.replace(policy, eta=0.0)
    base_equity, _, _, _ = _simulate(panel, static, x0, legs, None)
    grid = dict(start=panel.start, step=panel.step, dates=panel.dates, calendar=panel.calendar)
    m = equity_metrics(equity)
    report = BacktestReport(
        labels=panel.labels,
        equity=Chronicle(equity, label="equity", **grid),
        weights_history=history,
        baseline_equity=Chronicle(base_equity, label="baseline_equity", **grid),
        annualized_return=m["annualized_return"],
        annualized_sharpe=m["annualized_sharpe"],
        max_drawdown=m["max_drawdown"],
        baseline_metrics=equity_metrics(base_equity),
        rebalance_indices=rebalances,
        conservation_error=worst,
        initial_capital=float(initial_capital),
        policy=policy,
        prices=panel.columns,
    )
    return report
