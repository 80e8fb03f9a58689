"""Finite-blocklength block error rate over Weibull hops.

The normal-approximation error ``Q((C(g) - R) / sqrt(V(g)/l))`` is
replaced by its linearization around ``g_th = 2^R - 1``: one below
``g_minus``, zero above ``g_plus`` and a straight line between them.
Averaging over the SNR law then reduces to ``lam sqrt(l) int F(g) dg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from ..specfun import upper_incomplete_gamma
from .common import as_snr, as_snrs

__all__ = ["BlerParams", "bler_hop", "bler_e2e", "bler_e2e_inclusion_exclusion",
           "bler_linearized_q", "bler_normal_q"]

_SERIES_SWITCH = 0.1
_SERIES_TERMS = 40


@dataclass(frozen=True)
class BlerParams:
    """Rate ``rate`` (bits per channel use) and block length ``block_length``."""

    rate: float
    block_length: int

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate!r}")
        if isinstance(self.block_length, bool) or int(self.block_length) != self.block_length \
                or self.block_length < 1:
            raise ValueError(f"block_length must be a positive integer, got {self.block_length!r}")

    @property
    def gamma_th(self):
        return 2.0 ** self.rate - 1.0

    @property
    def lam(self):
        return 1.0 / (2.0 * math.pi * math.sqrt(2.0 ** (2.0 * self.rate) - 1.0))

    @property
    def half_width(self):
        return 1.0 / (2.0 * self.lam * math.sqrt(self.block_length))

    @property
    def gamma_minus(self):
        return self.gamma_th - self.half_width

    @property
    def gamma_plus(self):
        return self.gamma_th + self.half_width

    @property
    def slope(self):
        return self.lam * math.sqrt(self.block_length)


def bler_linearized_q(g, params: BlerParams):
    """Piecewise-linear stand-in for the normal-approximation block error."""
    if g <= params.gamma_minus:
        return 1.0
    if g >= params.gamma_plus:
        return 0.0
    return 0.5 - params.slope * (g - params.gamma_th)


def bler_normal_q(g, params: BlerParams):
    """Normal-approximation block error ``Q((C - R)/sqrt(V/l))`` at SNR ``g``."""
    if g <= 0:
        return 1.0
    cap = math.log2(1.0 + g)
    disp = g * (g + 2.0) / (g + 1.0) ** 2 * math.log2(math.e) ** 2
    arg = (cap - params.rate) / math.sqrt(disp / params.block_length)
    return 0.5 * math.erfc(arg / math.sqrt(2.0))


def _cdf_integral(alpha, phi, lo, hi):
    """``int_lo^hi (1 - exp(-g^alpha/phi)) dg`` for ``0 <= lo < hi``."""
    x_hi = hi ** alpha / phi
    if x_hi < _SERIES_SWITCH:
        # alternating series in x = g^alpha/phi, free of cancellation here
        total = 0.0
        term_coef = 1.0
        for k in range(1, _SERIES_TERMS):
            term_coef /= k * phi
            p = alpha * k + 1.0
            piece = term_coef * (hi ** p - lo ** p) / p
            total += piece if k % 2 else -piece
            if abs(piece) <= 1e-17 * abs(total):
                break
        return total
    s = 1.0 / alpha
    scale = phi ** s / alpha
    inner = upper_incomplete_gamma(s, lo ** alpha / phi) - upper_incomplete_gamma(s, x_hi)
    return (hi - lo) - scale * inner


def bler_hop(hop, params: BlerParams, *, budget=None):
    """Average linearized block error of one hop.

    When ``g_minus <= 0`` the constant branch is unreachable and the integral
    runs over ``[0, g_plus]`` instead.
    """
    s = as_snr(hop, budget)
    lo = max(params.gamma_minus, 0.0)
    value = params.slope * _cdf_integral(s.alpha, s.phi, lo, params.gamma_plus)
    return min(max(value, 0.0), 1.0)


def bler_e2e(per_hop):
    """Cumulative block error along the chain, ``E_k = E_{k-1} + (1 - E_{k-1}) e_k``."""
    vals = [float(e) for e in per_hop]
    if not vals:
        raise ValueError("at least one hop is required")
    total = 0.0
    for e in vals:
        if not 0.0 <= e <= 1.0:
            raise ValueError(f"per-hop BLER must lie in [0, 1], got {e!r}")
        total = total + (1.0 - total) * e
    return total


def bler_e2e_inclusion_exclusion(per_hop):
    """The same quantity expanded as an alternating sum over hop subsets."""
    vals = [float(e) for e in per_hop]
    total = 0.0
    for k in range(1, len(vals) + 1):
        sign = 1.0 if k % 2 else -1.0
        total += sign * math.fsum(math.prod(c) for c in combinations(vals, k))
    return total


def bler_chain(chain, params: BlerParams, *, budget=None):
    return bler_e2e([bler_hop(s, params) for s in as_snrs(chain, budget)])
