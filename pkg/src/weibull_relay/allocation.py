"""Transmit-power split across hops under a total budget.

Both objectives depend on the powers only through

    S(P) = sum_i a_i P_i^-alpha,   a_i = (P_i / (avg_snr_i Omega_i^2))^alpha

(evaluated at the chain's current powers, so ``a_i`` is a fixed channel
constant).  The high-SNR BER is proportional to ``S`` and the high-SNR EE
is ``(psi0(1) - ln S) / (alpha P_T)``; with ``sum P_i = p_max`` both are
optimised by ``P_k ∝ a_k^(1/(alpha+1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import HopChain, avg_snr_linear
from .metrics.capacity import PowerInventory, dbm_to_w
from .metrics.qam import qam_coefficients
from .specfun import digamma

__all__ = [
    "AllocationResult",
    "channel_constants",
    "ber_objective",
    "ee_objective",
    "allocate_ber_optimal",
    "allocate_ee_optimal",
    "split_by_weights",
    "w_to_dbm",
]


def w_to_dbm(p_w):
    return 10.0 * math.log10(p_w) + 30.0


@dataclass
class AllocationResult:
    powers: list
    multiplier: float
    objective_before: float
    objective_after: float
    kkt_residual: float

    def powers_dbm(self):
        return [w_to_dbm(p) for p in self.powers]


def _common_alpha(chain: HopChain):
    alphas = {h.alpha for h in chain.hops}
    if len(alphas) != 1:
        raise ValueError(f"power allocation needs a common alpha, got {sorted(alphas)}")
    return alphas.pop()


def channel_constants(chain: HopChain):
    """Return ``(alpha, a)`` with ``1/phi_i = a_i P_i^-alpha`` for powers in watts."""
    alpha = _common_alpha(chain)
    a = []
    for hop in chain.hops:
        p_w = dbm_to_w(hop.tx_power_dbm)
        c = p_w / (avg_snr_linear(hop, chain.budget) * hop.omega ** 2)
        a.append(c ** alpha)
    return alpha, np.array(a)


def _ber_weight(alpha, M, snr_convention="per_bit"):
    coeffs = qam_coefficients(M, snr_convention)
    s = math.fsum(w * om ** -alpha for w, om in coeffs.merged_terms())
    return math.gamma(0.5 + alpha) / math.sqrt(math.pi) * s


def ber_objective(powers, alpha, a, M, snr_convention="per_bit"):
    """High-SNR end-to-end BER for the given powers (watts); broadcasts over rows."""
    p = np.asarray(powers, dtype=float)
    return _ber_weight(alpha, M, snr_convention) * np.sum(a * p ** -alpha, axis=-1)


def ee_objective(powers, alpha, a, circuit_w):
    """High-SNR end-to-end EE for the given powers (watts); broadcasts over rows."""
    p = np.asarray(powers, dtype=float)
    p_t = circuit_w + np.sum(p, axis=-1)
    return (digamma(1.0) - np.log(np.sum(a * p ** -alpha, axis=-1))) / (alpha * p_t)


def split_by_weights(weights, p_max):
    """Split ``p_max`` proportionally to ``weights`` with the sum exact to rounding."""
    w = np.asarray(weights, dtype=float)
    if np.all(w == w[0]):
        # identical hops: exactly equal shares
        return np.full(len(w), p_max / len(w))
    powers = p_max * w / math.fsum(w)
    # push the rounding residue onto the largest share
    k = int(np.argmax(powers))
    powers[k] = p_max - math.fsum(np.delete(powers, k))
    return powers


def _check_budget(p_max):
    if not (p_max > 0 and math.isfinite(p_max)):
        raise ValueError(f"p_max must be positive and finite, got {p_max!r}")


def allocate_ber_optimal(chain: HopChain, M, p_max, snr_convention="per_bit"):
    """Powers (watts) minimising the high-SNR end-to-end BER with ``sum P = p_max``."""
    _check_budget(p_max)
    alpha, a = channel_constants(chain)
    n = len(a)
    uniform = np.full(n, p_max / n)
    before = float(ber_objective(uniform, alpha, a, M, snr_convention))
    if n == 1:
        powers = np.array([float(p_max)])
        return AllocationResult(powers.tolist(), 0.0, before, before, 0.0)
    k = _ber_weight(alpha, M, snr_convention)
    big_a = (k * a) ** (1.0 / (alpha + 1.0))
    powers = split_by_weights(big_a, p_max)
    lam = alpha * (math.fsum(big_a) / p_max) ** (alpha + 1.0)
    grad = -alpha * k * a * powers ** (-alpha - 1.0)
    residual = float(np.max(np.abs(grad + lam)) / lam)
    after = float(ber_objective(powers, alpha, a, M, snr_convention))
    return AllocationResult(powers.tolist(), lam, before, after, residual)


def allocate_ee_optimal(chain: HopChain, inventory: PowerInventory, p_max):
    """Powers (watts) maximising the high-SNR end-to-end EE with ``sum P = p_max``."""
    _check_budget(p_max)
    alpha, a = channel_constants(chain)
    n = len(a)
    circuit = inventory.circuit_power(n)
    uniform = np.full(n, p_max / n)
    before = float(ee_objective(uniform, alpha, a, circuit))
    if n == 1:
        powers = np.array([float(p_max)])
        return AllocationResult(powers.tolist(), 1.0 / ((circuit + p_max) * p_max), before, before, 0.0)
    ratios = np.array([math.fsum((a / ak) ** (1.0 / (alpha + 1.0))) for ak in a])
    powers = split_by_weights(1.0 / ratios, p_max)
    p_t = circuit + p_max
    lam = 1.0 / (p_t * p_max)
    # gradient of the EE with P_T held at its constrained value
    s = np.sum(a * powers ** -alpha)
    grad = a * powers ** (-alpha - 1.0) / (p_t * s)
    residual = float(np.max(np.abs(grad - lam)) / lam)
    after = float(ee_objective(powers, alpha, a, circuit))
    return AllocationResult(powers.tolist(), lam, before, after, residual)
