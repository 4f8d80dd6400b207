"""EUR/USD directional forecasting and trading-simulation pipeline.

Feature engineering (technical indicators, support/resistance, Fibonacci
levels, divergence states, macro alignment), directional-index labeling,
a from-scratch stacked-LSTM classifier with compiled recurrence kernels,
hyperparameter grid search with overfitting-aware selection, and two
trading-simulation regimes with cost accounting.
"""

from ._backend import backend_name

__all__ = ["backend_name"]
__version__ = "0.1.0"
