"""Link budget and Weibull SNR parameterization for each hop.

All powers are in dB units unless the name says otherwise.  The path-loss
model is a close-in reference law with a free-space frequency term
referenced to 28 GHz:

    PL(d, f) = PL_ref + 10 n log10(d) + 20 log10(f / 28) + blockage(d)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

__all__ = [
    "LinkBudget",
    "WeibullHop",
    "HopChain",
    "HopSnr",
    "noise_power_dbm",
    "path_loss_db",
    "avg_snr_db",
    "avg_snr_linear",
    "phi",
    "hop_snr",
    "db_to_linear",
    "linear_to_db",
    "FREE_SPACE_REF_28GHZ_DB",
]

# free-space loss at 1 m and 28 GHz: 20 log10(4 pi / lambda) = 32.44 + 20 log10(f_GHz)
FREE_SPACE_REF_28GHZ_DB = 32.4 + 20.0 * math.log10(28.0)


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class LinkBudget:
    """Receiver and propagation constants shared by every hop."""

    frequency_ghz: float = 28.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 5.0
    rx_frontend_loss_db: float = 4.0
    antenna_element_gain_db: float = 5.0
    pathloss_exponent: float = 2.0
    pathloss_ref_db_at_1m: float = FREE_SPACE_REF_28GHZ_DB
    blockage_db_per_m: float = 0.0

    def __post_init__(self):
        if not self.frequency_ghz > 0:
            raise ValueError(f"frequency_ghz must be positive, got {self.frequency_ghz!r}")
        if not self.pathloss_exponent >= 1:
            raise ValueError(f"pathloss_exponent must be >= 1, got {self.pathloss_exponent!r}")
        if self.blockage_db_per_m < 0:
            raise ValueError("blockage_db_per_m must be non-negative")


@dataclass(frozen=True)
class WeibullHop:
    """One hop: SNR-domain Weibull shape ``alpha`` (= beta/2), scale ``omega``
    and the link-budget inputs of its transmitter."""

    alpha: float
    omega: float = 1.0
    distance_m: float = 100.0
    bandwidth_hz: float = 200e6
    tx_power_dbm: float = 23.0
    extra_loss_factor: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "omega", "distance_m", "bandwidth_hz", "extra_loss_factor"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError("tx_power_dbm must be finite")

    @classmethod
    def from_beta(cls, beta, **kwargs):
        """Build a hop from the amplitude-domain shape ``beta``."""
        return cls(alpha=beta / 2.0, **kwargs)

    @property
    def beta(self):
        return 2.0 * self.alpha


@dataclass(frozen=True)
class HopChain:
    """Ordered source-to-destination route."""

    hops: tuple
    budget: LinkBudget = field(default_factory=LinkBudget)

    def __post_init__(self):
        hops = tuple(self.hops)
        if len(hops) < 1:
            raise ValueError("a chain needs at least one hop")
        for hop in hops:
            if not isinstance(hop, WeibullHop):
                raise TypeError(f"expected WeibullHop, got {type(hop).__name__}")
        object.__setattr__(self, "hops", hops)

    @classmethod
    def identical(cls, n, hop, budget=None):
        return cls(tuple([hop] * n), budget or LinkBudget())

    def __len__(self):
        return len(self.hops)

    def __iter__(self):
        return iter(self.hops)

    def snrs(self):
        """Per-hop :class:`HopSnr` values."""
        return [hop_snr(hop, self.budget) for hop in self.hops]

    def with_tx_power(self, powers_dbm: Sequence[float]):
        if len(powers_dbm) != len(self.hops):
            raise ValueError("one transmit power per hop is required")
        return replace(self, hops=tuple(replace(h, tx_power_dbm=float(p))
                                        for h, p in zip(self.hops, powers_dbm)))

    def alphas(self):
        return [h.alpha for h in self.hops]


@dataclass(frozen=True)
class HopSnr:
    """Weibull SNR law of a hop: CDF ``1 - exp(-g^alpha / phi)``."""

    alpha: float
    phi: float
    avg_snr: float = float("nan")

    def __post_init__(self):
        if not self.alpha > 0 or not self.phi > 0:
            raise ValueError(f"alpha and phi must be positive, got {self.alpha!r}, {self.phi!r}")

    @classmethod
    def from_avg_snr(cls, alpha, avg_snr, omega=1.0):
        return cls(alpha, (avg_snr * omega * omega) ** alpha, avg_snr)

    def cdf(self, g):
        return -math.expm1(-(g ** self.alpha) / self.phi)

    def pdf(self, g):
        a = self.alpha
        return a / self.phi * g ** (a - 1) * math.exp(-(g ** a) / self.phi)


def noise_power_dbm(bandwidth_hz, noise_figure_db=0.0, noise_psd_dbm_hz=-174.0):
    """Thermal noise power over ``bandwidth_hz`` plus the receiver noise figure."""
    if not bandwidth_hz > 0:
        raise ValueError(f"bandwidth_hz must be positive, got {bandwidth_hz!r}")
    return noise_psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def path_loss_db(budget: LinkBudget, distance_m):
    if not distance_m > 0:
        raise ValueError(f"distance_m must be positive, got {distance_m!r}")
    return (budget.pathloss_ref_db_at_1m
            + 10.0 * budget.pathloss_exponent * math.log10(distance_m)
            + 20.0 * math.log10(budget.frequency_ghz / 28.0)
            + budget.blockage_db_per_m * distance_m)


def avg_snr_db(hop: WeibullHop, budget: LinkBudget):
    """Average received SNR of a hop in dB (before ``extra_loss_factor``)."""
    noise = noise_power_dbm(hop.bandwidth_hz, budget.noise_figure_db, budget.noise_psd_dbm_hz)
    return (hop.tx_power_dbm - path_loss_db(budget, hop.distance_m) - noise
            - budget.rx_frontend_loss_db + budget.antenna_element_gain_db)


def avg_snr_linear(hop: WeibullHop, budget: LinkBudget):
    return db_to_linear(avg_snr_db(hop, budget)) * hop.extra_loss_factor


def phi(hop: WeibullHop, budget: LinkBudget):
    """Composite scale ``(avg_snr * omega^2)^alpha``."""
    return (avg_snr_linear(hop, budget) * hop.omega ** 2) ** hop.alpha


def hop_snr(hop: WeibullHop, budget: LinkBudget):
    g = avg_snr_linear(hop, budget)
    return HopSnr(hop.alpha, (g * hop.omega ** 2) ** hop.alpha, g)
