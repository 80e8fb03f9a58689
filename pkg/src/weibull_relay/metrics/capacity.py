"""Ergodic capacity per hop and end-to-end energy efficiency."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ..specfun import FoxHParams, digamma, fox_h
from .common import as_snr, as_snrs, check_mode, common_alpha

__all__ = ["capacity_hop", "capacity_e2e", "PowerInventory", "ee_e2e", "total_power_w",
           "dbm_to_w", "ee_psi"]

_LN2 = math.log(2.0)


def dbm_to_w(p_dbm):
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


@lru_cache(maxsize=4096)
def _capacity_exact(alpha, phi):
    a = alpha
    params = FoxHParams(3, 1, ((-a, a), (1.0 - a, a)), ((0.0, 1.0), (-a, a), (-a, a)))
    return a / (phi * _LN2) * fox_h(params, 1.0 / phi)


def capacity_hop(hop, mode="exact", *, budget=None):
    """Mean of ``log2(1 + g)`` for one hop, in bits/s/Hz."""
    check_mode(mode)
    s = as_snr(hop, budget)
    if mode == "exact":
        return _capacity_exact(s.alpha, s.phi)
    return digamma(1.0) / (s.alpha * _LN2) + math.log2(s.phi) / s.alpha


def capacity_e2e(chain, mode="exact", *, budget=None):
    """Bottleneck capacity of the chain: the minimum over hops."""
    return min(capacity_hop(s, mode) for s in as_snrs(chain, budget))


@dataclass(frozen=True)
class PowerInventory:
    """Circuit power per node in watts, by activity."""

    tx: float = 0.0
    rx: float = 0.0
    modulation: float = 0.0
    demodulation: float = 0.0
    idle: float = 0.0

    def __post_init__(self):
        for name in ("tx", "rx", "modulation", "demodulation", "idle"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} circuit power must be non-negative")

    @classmethod
    def uniform(cls, per_node_w=0.5):
        """Every node (source, relays, destination) draws ``per_node_w``."""
        return cls(idle=per_node_w)

    def circuit_power(self, n_hops):
        """Total circuit power of an ``n_hops`` chain with identical nodes."""
        return n_hops * (self.tx + self.rx + self.modulation + self.demodulation) \
            + (n_hops + 1) * self.idle


def total_power_w(chain, inventory: PowerInventory):
    hops = chain.hops
    return inventory.circuit_power(len(hops)) + math.fsum(dbm_to_w(h.tx_power_dbm) for h in hops)


def ee_psi(snrs):
    return 1.0 / math.fsum(1.0 / s.phi for s in snrs)


@lru_cache(maxsize=4096)
def _ee_kernel(alpha, psi):
    params = FoxHParams(2, 1, ((0.0, alpha),), ((0.0, 1.0), (0.0, alpha)))
    return fox_h(params, 1.0 / psi)


def ee_e2e(chain, inventory: PowerInventory, mode="exact", *, total_power=None, budget=None):
    """Mean of ``ln(1 + min_i g_i) / P_T`` (nats per joule per hertz).

    ``chain`` is a :class:`HopChain`; ``total_power`` overrides the power
    inventory when the SNRs were given directly.
    """
    check_mode(mode)
    snrs = as_snrs(chain, budget)
    alpha = common_alpha(snrs)
    p_t = total_power if total_power is not None else total_power_w(chain, inventory)
    if not p_t > 0:
        raise ValueError("total power must be positive")
    if mode == "exact":
        return _ee_kernel(alpha, ee_psi(snrs)) / p_t
    return (digamma(1.0) - math.log(math.fsum(1.0 / s.phi for s in snrs))) / (alpha * p_t)
