"""Performance of multihop decode-and-forward relay chains over Weibull fading."""

from .allocation import AllocationResult, allocate_ber_optimal, allocate_ee_optimal
from .channel import HopChain, HopSnr, LinkBudget, WeibullHop, avg_snr_linear, hop_snr, phi
from .metrics import METRIC_KINDS, MetricResult, MetricSpec, evaluate
from .simulate import McConfig, McEstimate, mc_metric
from .specfun import BivFoxHParams, FoxHParams, bivariate_fox_h, fox_h, meijer_g

__version__ = "0.1.0"

__all__ = [
    "LinkBudget", "WeibullHop", "HopChain", "HopSnr", "avg_snr_linear", "hop_snr", "phi",
    "MetricSpec", "MetricResult", "evaluate", "METRIC_KINDS",
    "McConfig", "McEstimate", "mc_metric",
    "AllocationResult", "allocate_ber_optimal", "allocate_ee_optimal",
    "FoxHParams", "BivFoxHParams", "fox_h", "bivariate_fox_h", "meijer_g",
]
