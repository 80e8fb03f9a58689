"""Average bit error rate of M-QAM over Weibull hops.

Each hop BER is a weighted sum of the erfc moments

    zeta(omega) = E[erfc(sqrt(omega g))]

under the hop's SNR law.  Perfect CSI uses a single Fox H; outdated CSI
uses a bivariate H; beamforming averages over the Marchenko-Pastur law.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

from scipy import integrate

from ..specfun import BivFoxHParams, FoxHParams, bivariate_fox_h, erfc, fox_h
from .common import as_snr, as_snrs, check_mode
from .qam import qam_coefficients

__all__ = [
    "zeta",
    "zeta_asymptotic",
    "ber_hop",
    "ber_hop_terms",
    "ber_e2e",
    "ber_e2e_asymptotic",
    "diversity_order",
    "outdated_ratio_pdf",
    "outdated_snr_cdf",
    "zeta_outdated",
    "ber_hop_outdated_csi",
    "mp_density",
    "mp_normalization",
    "beam_j",
    "ber_hop_beamforming",
]

_SQRT_PI = math.sqrt(math.pi)


@lru_cache(maxsize=4096)
def zeta(alpha, phi, omega):
    """``E[erfc(sqrt(omega g))]`` for a Weibull SNR with shape ``alpha``, scale ``phi``."""
    a = alpha
    params = FoxHParams(1, 2, ((1.0 - a, a), (0.5 - a, a)), ((0.0, 1.0), (-a, a)))
    z = omega ** -a / phi
    return a * z / _SQRT_PI * fox_h(params, z)


def zeta_asymptotic(alpha, phi, omega):
    """Leading high-SNR term of :func:`zeta`."""
    return math.gamma(0.5 + alpha) * omega ** -alpha / (_SQRT_PI * phi)


def ber_hop_terms(M, snr_convention="per_bit"):
    return qam_coefficients(M, snr_convention).merged_terms()


def ber_hop(hop, M, mode="exact", *, snr_convention="per_bit", budget=None):
    """Average BER of one hop."""
    check_mode(mode)
    s = as_snr(hop, budget)
    f = zeta if mode == "exact" else zeta_asymptotic
    total = math.fsum(w * f(s.alpha, s.phi, om) for w, om in ber_hop_terms(M, snr_convention))
    if mode == "exact":
        return min(max(total, 0.0), 0.5)
    return total


def ber_e2e(per_hop_bers):
    """Combine per-hop BERs of regenerative relays.

    Each bit is flipped an odd number of times along the chain:
    ``sum_i p_i prod_{j>i} (1 - 2 p_j)``.
    """
    bers = [float(p) for p in per_hop_bers]
    if not bers:
        raise ValueError("at least one hop is required")
    for p in bers:
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"per-hop BER must lie in [0, 0.5], got {p!r}")
    total = 0.0
    for p in bers:
        # fold left: adding a hop maps e -> e (1 - 2p) + p
        total = total * (1.0 - 2.0 * p) + p
    return total


def ber_e2e_asymptotic(chain, M, *, snr_convention="per_bit", budget=None):
    """High-SNR end-to-end BER: the sum of per-hop asymptotes."""
    return math.fsum(ber_hop(s, M, "asymptotic", snr_convention=snr_convention)
                     for s in as_snrs(chain, budget))


def diversity_order(chain, budget=None):
    return min(s.alpha for s in as_snrs(chain, budget))


# ---------------------------------------------------------------------------
# Outdated CSI
# ---------------------------------------------------------------------------

def outdated_ratio_pdf(z, alpha, rho):
    """Density of ``G = |g|^2 / |g_est|^2`` for correlation ``rho``."""
    if z <= 0.0:
        return 0.0
    za = z ** alpha
    den = za * za + (2.0 - 4.0 * rho) * za + 1.0
    return alpha * (1.0 - rho) * z ** (alpha - 1.0) * (za + 1.0) / den ** 1.5


def outdated_snr_cdf(g, alpha, avg_snr, rho):
    """CDF of the post-equalization SNR ``avg_snr * G``."""
    if g <= 0.0:
        return 0.0
    # work with x = (g / avg_snr)^alpha to avoid overflow at large SNR
    x = (g / avg_snr) ** alpha
    return 0.5 + 0.5 * (x - 1.0) / math.sqrt(x * x + (2.0 - 4.0 * rho) * x + 1.0)


@lru_cache(maxsize=4096)
def zeta_outdated(alpha, avg_snr, omega, rho):
    """``E[erfc(sqrt(omega avg_snr G))]`` with ``G`` the outdated-CSI gain ratio."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho!r}")
    a = alpha
    x = 1.0 / (omega * avg_snr * (1.0 - rho) ** (1.0 / a))
    first = FoxHParams(1, 2, ((1.0, 1.0), (0.5, 1.0)),
                       ((1.0, 1.0 / a), (0.0, 1.0), (1.0, 1.0 / a)))
    if rho == 0.0:
        # the second variable drops out: Gamma(-tau) residue at tau = 0
        single = FoxHParams(1, 3, ((1.0, 1.0), (0.5, 1.0), (0.0, 1.0 / a)),
                            ((1.0, 1.0 / a), (0.0, 1.0)))
        return fox_h(single, x) / _SQRT_PI
    second = FoxHParams(1, 0, (), ((0.0, 1.0), (0.0, 1.0)))
    params = BivFoxHParams(2, ((0.0, 1.0 / a, 1.0), (1.0, 1.0 / a, 1.0)), (), first, second)
    return bivariate_fox_h(params, x, rho / (1.0 - rho)) / _SQRT_PI


def ber_hop_outdated_csi(hop, M, rho, *, snr_convention="per_bit", budget=None):
    """Average BER of one hop equalized with an outdated channel estimate."""
    s = as_snr(hop, budget)
    total = math.fsum(w * zeta_outdated(s.alpha, s.avg_snr, om, rho)
                      for w, om in ber_hop_terms(M, snr_convention))
    return min(max(total, 0.0), 0.5)


# ---------------------------------------------------------------------------
# Beamforming over r parallel eigen-channels
# ---------------------------------------------------------------------------

def _mp_edges(c):
    return (1.0 - math.sqrt(c)) ** 2, (1.0 + math.sqrt(c)) ** 2


def mp_density(u, c, s=1.0):
    """Continuous part of the Marchenko-Pastur law at ``u`` (unit-mean SNR scale)."""
    a, b = _mp_edges(c)
    if not a < u < b:
        return 0.0
    return math.sqrt((b - u) * (u - a)) / (2.0 * math.pi * c * s * s * u)


def mp_normalization(c, s=1.0):
    a, b = _mp_edges(c)

    def f(theta):
        st, ct = math.sin(theta), math.cos(theta)
        u = a + (b - a) * st * st
        return 2.0 * (b - a) ** 2 * st * st * ct * ct / u

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-12, limit=200)
    return val / (2.0 * math.pi * c * s * s)


def beam_j(a_p, b_p, omega):
    """``int_{a'}^{b'} sqrt((1 - x/b')(x/a' - 1)) erfc(sqrt(omega x)) / x dx``.

    The substitution ``x = a' + (b' - a') sin^2 t`` removes the square-root
    endpoint behaviour.
    """
    width = b_p - a_p
    scale = width * width / math.sqrt(a_p * b_p)

    def f(theta):
        st, ct = math.sin(theta), math.cos(theta)
        x = a_p + width * st * st
        return 2.0 * st * st * ct * ct / x * erfc(math.sqrt(omega * x))

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-11, limit=200)
    return scale * val


def ber_hop_beamforming(hop, M, t, r, s=1.0, *, snr_convention="per_bit", budget=None):
    """Average BER per stream of an SVD-beamformed hop with ``t`` transmit and
    ``r < t`` receive antennas, in the large-array limit."""
    if not (isinstance(t, int) and isinstance(r, int)) or r < 1 or t < 1:
        raise ValueError("t and r must be positive integers")
    if not r < t:
        raise ValueError(f"need r < t, got r={r}, t={t}")
    if not s > 0:
        raise ValueError("s must be positive")
    c = r / t
    norm = mp_normalization(c, s)
    if abs(norm - 1.0) > 1e-6:
        warnings.warn(f"Marchenko-Pastur density integrates to {norm:.6g}, not 1, for s={s:g}; "
                      "the s^2 factor in the density is ambiguous", RuntimeWarning, stacklevel=2)
    snr = as_snr(hop, budget)
    a, b = _mp_edges(c)
    a_p, b_p = a * snr.avg_snr, b * snr.avg_snr
    pref = math.sqrt(a * b) / (2.0 * math.pi * c * s * s)
    total = math.fsum(w * pref * beam_j(a_p, b_p, om)
                      for w, om in ber_hop_terms(M, snr_convention))
    return min(max(total, 0.0), 0.5)
