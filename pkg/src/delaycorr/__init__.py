"""Delay-correlation channel estimation for high-mobility array receivers.

Channel statistics, two-step MMSE estimation, asymptotic MSE, BER and
spectral-efficiency metrics, a pilot-overhead tradeoff sweep and a seeded
Monte Carlo harness.
"""

from .asymptotic import sigma_d_asymptotic, sigma_p_asymptotic
from .channel import LinkBudget, PilotLayout, layout_for_delta, make_layout, sample_channel, transmit
from .correlation import ScenarioParams, build_correlation_set
from .errors import ConfigError, DelayCorrError, NumericalError
from .estimator import build_context, estimate_frame, finite_mse
from .metrics import MetricPoint, evaluate_point
from .montecarlo import EmpiricalReport, TrialConfig, run
from .tradeoff import TradeoffCurve, build_tradeoff

__version__ = "0.1.0"

__all__ = [
    "ScenarioParams", "build_correlation_set", "PilotLayout", "make_layout", "layout_for_delta",
    "LinkBudget", "sample_channel", "transmit", "build_context", "estimate_frame", "finite_mse",
    "sigma_p_asymptotic", "sigma_d_asymptotic", "MetricPoint", "evaluate_point",
    "TradeoffCurve", "build_tradeoff", "TrialConfig", "EmpiricalReport", "run",
    "DelayCorrError", "NumericalError", "ConfigError",
]
