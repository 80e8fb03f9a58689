"""Square M-QAM error probabilities over AWGN with Gray mapping.

The bit error probability uses the Cho-Yoon decomposition

    P_b(g) = 1/(sqrt(M) log2 sqrt(M)) sum_m sum_{n=0}^{nu_m} Phi_{m,n} erfc(sqrt(omega_n g))

with ``omega_n = 3 (2n+1)^2 k / (2M - 2)``, where ``k = log2 M`` when ``g`` is
the SNR per bit and ``k = 1`` when ``g`` is the SNR per symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..specfun import erfc

__all__ = ["QamCoefficients", "qam_coefficients", "qam_ber_awgn", "qam_ser_awgn",
           "validate_order", "SNR_CONVENTIONS"]

SNR_CONVENTIONS = ("per_bit", "per_symbol")


def validate_order(M):
    """Return ``M`` as an int if it is a square power of two >= 4, else raise."""
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) and not float(M).is_integer():
        raise ValueError(f"modulation order must be an integer, got {M!r}")
    M = int(M)
    k = M.bit_length() - 1
    if M < 4 or M != 1 << k or k % 2:
        raise ValueError(f"modulation order must be a square power of two >= 4, got {M}")
    return M


@dataclass(frozen=True)
class QamCoefficients:
    """Cho-Yoon tables for one modulation order.

    ``terms`` lists ``(weight, omega)`` pairs with the common prefactor
    ``1/(sqrt(M) log2 sqrt(M))`` already folded into ``weight``.
    """

    M: int
    snr_convention: str
    nu: tuple
    omega: tuple
    phi_table: tuple
    terms: tuple

    @property
    def bits_per_axis(self):
        return int(round(math.log2(math.sqrt(self.M))))

    @property
    def prefactor(self):
        return 1.0 / (math.sqrt(self.M) * self.bits_per_axis)

    def merged_terms(self):
        """Weights summed over ``m`` for each distinct ``omega_n``."""
        acc = {}
        for w, om in self.terms:
            acc[om] = acc.get(om, 0.0) + w
        return tuple((w, om) for om, w in sorted(acc.items()) if w != 0.0)


@lru_cache(maxsize=64)
def qam_coefficients(M, snr_convention="per_bit"):
    M = validate_order(M)
    if snr_convention not in SNR_CONVENTIONS:
        raise ValueError(f"snr_convention must be one of {SNR_CONVENTIONS}, got {snr_convention!r}")
    sq = math.isqrt(M)
    bits = int(round(math.log2(sq)))
    k = math.log2(M) if snr_convention == "per_bit" else 1.0
    nu = tuple(int((1 - 2.0 ** -m) * sq) - 1 for m in range(1, bits + 1))
    n_max = max(nu)
    omega = tuple(3.0 * (2 * n + 1) ** 2 * k / (2 * M - 2) for n in range(n_max + 1))
    table = []
    terms = []
    pref = 1.0 / (sq * bits)
    for m in range(1, bits + 1):
        row = []
        for n in range(nu[m - 1] + 1):
            f = (n * 2 ** (m - 1)) // sq
            weight = (-1) ** f * (2 ** (m - 1) - math.floor(n * 2 ** (m - 1) / sq + 0.5))
            row.append(weight)
            if weight:
                terms.append((pref * weight, omega[n]))
        table.append(tuple(row))
    return QamCoefficients(M, snr_convention, nu, omega, tuple(table), tuple(terms))


def qam_ber_awgn(M, gamma, snr_convention="per_bit"):
    """Exact Gray-coded square M-QAM bit error probability at SNR ``gamma``."""
    coeffs = qam_coefficients(M, snr_convention)
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    total = np.zeros_like(g)
    for w, om in coeffs.terms:
        total = total + w * erfc(np.sqrt(om * g))
    out = np.clip(total, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def qam_ser_awgn(M, gamma, snr_convention="per_bit"):
    """Exact square M-QAM symbol error probability at SNR ``gamma``."""
    M = validate_order(M)
    k = math.log2(M) if snr_convention == "per_bit" else 1.0
    q = 1.0 - 1.0 / math.sqrt(M)
    g = np.asarray(gamma, dtype=float)
    p = 0.5 * erfc(np.sqrt(1.5 * k * g / (M - 1)))
    out = 4.0 * q * p - 4.0 * q * q * p * p
    return float(out) if np.ndim(out) == 0 else out
