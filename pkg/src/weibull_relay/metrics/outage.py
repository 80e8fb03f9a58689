"""End-to-end outage of a decode-and-forward chain."""

from __future__ import annotations

import math

from .common import as_snrs, check_mode

__all__ = ["outage", "min_hops"]


def _exponent(snrs, gamma_th):
    return math.fsum(gamma_th ** s.alpha / s.phi for s in snrs)


def outage(chain, gamma_th, mode="exact", budget=None):
    """Probability that the weakest hop SNR falls below ``gamma_th``.

    ``exact`` is ``1 - exp(-sum g^a_i / phi_i)``; ``asymptotic`` is the
    exponent itself (first-order term for small thresholds).
    """
    check_mode(mode)
    if gamma_th < 0:
        raise ValueError(f"gamma_th must be non-negative, got {gamma_th!r}")
    x = _exponent(as_snrs(chain, budget), gamma_th)
    if mode == "asymptotic":
        return x
    return -math.expm1(-x)


def min_hops(phi, alpha, gamma_th, target):
    """Largest hop count of identical hops meeting ``target`` outage to first order.

    A result of 0 means the target cannot be met even by a single hop.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target outage must lie in (0, 1), got {target!r}")
    if not gamma_th > 0:
        raise ValueError("gamma_th must be positive")
    return int(math.floor(phi * target / gamma_th ** alpha))
