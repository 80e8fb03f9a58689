"""Average symbol error rate of square M-QAM over Weibull hops.

The SER of a square constellation splits into Q-function moments

    I(C)    = E[Q(C sqrt(g))]
    I(A, B) = E[Q(A sqrt(g)) Q(B sqrt(g))]

and per hop ``SER = 4 q I(A) - 4 q^2 I(A, A)`` with ``q = 1 - 1/sqrt(M)``.
"""

from __future__ import annotations

import math
from functools import lru_cache

from ..specfun import BivFoxHParams, FoxHParams, bivariate_fox_h, meijer_g
from .ber import zeta, zeta_asymptotic
from .common import as_snr, as_snrs, check_mode
from .qam import validate_order

__all__ = [
    "q_moment",
    "q_moment_asymptotic",
    "q_pair_moment",
    "q_pair_moment_asymptotic",
    "q_pair_moment_asymptotic_printed",
    "ser_hop",
    "ser_e2e",
    "qam_distance_factor",
]

_ERFC_KERNEL = FoxHParams(2, 0, ((1.0, 1.0),), ((0.0, 1.0), (0.5, 1.0)))


def qam_distance_factor(M, snr_convention="per_bit"):
    """``A`` such that the per-axis error is ``Q(A sqrt(g))``."""
    M = validate_order(M)
    k = math.log2(M) if snr_convention == "per_bit" else 1.0
    return math.sqrt(3.0 * k / (M - 1))


def _check_pair(A, B):
    if A < 0 or B < 0:
        raise ValueError("A and B must be non-negative")
    if A == 0 and B == 0:
        raise ValueError("A and B cannot both be zero")


def q_moment(alpha, phi, C):
    """``E[Q(C sqrt(g))]``; equals half the erfc moment at ``omega = C^2 / 2``."""
    if not C > 0:
        raise ValueError("C must be positive")
    return 0.5 * zeta(alpha, phi, 0.5 * C * C)


def q_moment_asymptotic(alpha, phi, C):
    return 0.5 * zeta_asymptotic(alpha, phi, 0.5 * C * C)


@lru_cache(maxsize=1024)
def _pair_exact(alpha, phi, A, B):
    params = BivFoxHParams(1, ((0.0, 1.0 / alpha, 1.0 / alpha),), (), _ERFC_KERNEL, _ERFC_KERNEL)
    scale = phi ** (1.0 / alpha)
    return bivariate_fox_h(params, 0.5 * A * A * scale, 0.5 * B * B * scale) / (4.0 * math.pi)


def q_pair_moment(alpha, phi, A, B):
    """``E[Q(A sqrt(g)) Q(B sqrt(g))]``; falls back to the single moment when one
    coefficient is zero (``Q(0) = 1/2``)."""
    _check_pair(A, B)
    if A == 0 or B == 0:
        return 0.5 * q_moment(alpha, phi, max(A, B))
    return _pair_exact(alpha, phi, float(A), float(B))


def q_pair_moment_asymptotic(alpha, phi, A, B):
    """Leading high-SNR term of :func:`q_pair_moment`.

    Closing the contour on the first right pole of the Weibull Mellin factor
    leaves ``E_0[Q Q g^{-alpha}]``-type weight times a Meijer G in ``(B/A)^2``.
    """
    _check_pair(A, B)
    if A == 0 or B == 0:
        return 0.5 * q_moment_asymptotic(alpha, phi, max(A, B))
    a = alpha
    g = meijer_g(2, 2, (0.5 - a, 1.0 - a, 1.0), (0.0, 0.5, -a), (B / A) ** 2)
    return a * 2.0 ** (a - 1.0) / (2.0 * math.pi * phi * A ** (2 * a)) * g


def q_pair_moment_asymptotic_printed(alpha, phi, A, B):
    """An alternative asymptote with a leading minus sign, kept for comparison in the tests:

        -a/(8 phi pi^2) (2/A)^a G^{22}_{33}[B/A | a, 1/2+a, 1; 0, 1/2, 1+a]

    For ``alpha >= 1/2`` its Meijer G has no separating vertical contour and
    :class:`~weibull_relay.specfun.ContourSeparationError` is raised.
    """
    a = alpha
    g = meijer_g(2, 2, (a, 0.5 + a, 1.0), (0.0, 0.5, 1.0 + a), B / A)
    return -a / (8.0 * phi * math.pi ** 2) * (2.0 / A) ** a * g


def ser_hop(hop, M, mode="exact", *, snr_convention="per_bit", budget=None):
    """Average SER of one hop."""
    check_mode(mode)
    s = as_snr(hop, budget)
    A = qam_distance_factor(M, snr_convention)
    q = 1.0 - 1.0 / math.sqrt(M)
    if mode == "exact":
        single = q_moment(s.alpha, s.phi, A)
        pair = q_pair_moment(s.alpha, s.phi, A, A)
    else:
        single = q_moment_asymptotic(s.alpha, s.phi, A)
        pair = q_pair_moment_asymptotic(s.alpha, s.phi, A, A)
    value = 4.0 * q * single - 4.0 * q * q * pair
    if mode == "exact":
        return min(max(value, 0.0), 1.0)
    return value


def ser_e2e(per_hop_sers):
    """A symbol survives the chain only if every hop decodes it correctly."""
    sers = [float(p) for p in per_hop_sers]
    if not sers:
        raise ValueError("at least one hop is required")
    for p in sers:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"per-hop SER must lie in [0, 1], got {p!r}")
    return -math.expm1(math.fsum(math.log1p(-p) for p in sers)) if all(p < 1 for p in sers) else 1.0


def ser_e2e_chain(chain, M, mode="exact", *, snr_convention="per_bit", budget=None):
    per_hop = [ser_hop(s, M, mode, snr_convention=snr_convention) for s in as_snrs(chain, budget)]
    if mode == "asymptotic":
        return math.fsum(per_hop)
    return ser_e2e(per_hop)
