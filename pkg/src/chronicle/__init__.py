"""Model-free trend, volatility and portfolio tools built on sliding-window algebraic estimators."""
from .errors import (ChronicleError, ConfigError, DataQualityError, DomainError, FormatError, GridError,
                     SizeError)
from .estimators import (Decomposition, EstimatorConfig, LocalFit, decompose, estimate_derivative,
                         estimate_trend, fit_window, make_config, moving_average,
                         moving_average_derivative)
from .portfolio import (BacktestReport, PortfolioState, RebalancePolicy, max_drawdown, portfolio_value,
                        rebalance_step, run_backtest, sharpe_objective, sharpe_partials)
from .series import (MISSING, AlignedPanel, Chronicle, align, exp_transform, lag, load_csv,
                     load_panel_csv, log_transform)
from .statistics import (MomentConfig, ReturnSeries, asset_volatility, covariance, log_return,
                         mean_return, moment_config, predict_volatility, sharpe_ratio, variance,
                         volatility)

__version__ = "0.1.0"

__all__ = [
    "ChronicleError", "ConfigError", "DataQualityError", "DomainError", "FormatError", "GridError", "SizeError",
    "Decomposition", "EstimatorConfig", "LocalFit", "decompose", "estimate_derivative", "estimate_trend",
    "fit_window", "make_config", "moving_average", "moving_average_derivative",
    "BacktestReport", "PortfolioState", "RebalancePolicy", "max_drawdown", "portfolio_value", "rebalance_step",
    "run_backtest", "sharpe_objective", "sharpe_partials",
    "MISSING", "AlignedPanel", "Chronicle", "align", "exp_transform", "lag", "load_csv", "load_panel_csv",
    "log_transform",
    "MomentConfig", "ReturnSeries", "asset_volatility", "covariance", "log_return", "mean_return",
    "moment_config", "predict_volatility", "sharpe_ratio", "variance", "volatility",
]
