"""End-to-end and per-hop performance metrics of multihop Weibull chains."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .ber import (ber_e2e, ber_e2e_asymptotic, ber_hop, ber_hop_beamforming,
                  ber_hop_outdated_csi, beam_j, diversity_order, mp_density,
                  mp_normalization, outdated_ratio_pdf, outdated_snr_cdf, zeta,
                  zeta_asymptotic, zeta_outdated)
from .bler import (BlerParams, bler_chain, bler_e2e, bler_e2e_inclusion_exclusion, bler_hop,
                   bler_linearized_q, bler_normal_q)
from .capacity import PowerInventory, capacity_e2e, capacity_hop, dbm_to_w, ee_e2e, total_power_w
from .common import as_snr, as_snrs
from .outage import min_hops, outage
from .qam import QamCoefficients, qam_ber_awgn, qam_coefficients, qam_ser_awgn, validate_order
from .ser import (q_moment, q_moment_asymptotic, q_pair_moment, q_pair_moment_asymptotic,
                  q_pair_moment_asymptotic_printed, qam_distance_factor, ser_e2e,
                  ser_e2e_chain, ser_hop)

__all__ = [
    "MetricSpec", "MetricResult", "evaluate", "METRIC_KINDS", "supported_methods",
    "outage", "min_hops", "qam_ber_awgn", "qam_ser_awgn", "qam_coefficients", "QamCoefficients",
    "validate_order", "zeta", "zeta_asymptotic", "ber_hop", "ber_e2e", "ber_e2e_asymptotic",
    "diversity_order", "outdated_ratio_pdf", "outdated_snr_cdf", "zeta_outdated",
    "ber_hop_outdated_csi", "mp_density", "mp_normalization", "beam_j", "ber_hop_beamforming",
    "q_moment", "q_moment_asymptotic", "q_pair_moment", "q_pair_moment_asymptotic",
    "q_pair_moment_asymptotic_printed", "qam_distance_factor", "ser_hop", "ser_e2e",
    "ser_e2e_chain", "BlerParams", "bler_hop", "bler_e2e", "bler_e2e_inclusion_exclusion",
    "bler_chain", "bler_linearized_q", "bler_normal_q", "capacity_hop", "capacity_e2e",
    "PowerInventory", "ee_e2e", "total_power_w", "dbm_to_w", "as_snr", "as_snrs",
]

# kind -> (required parameters, methods with a closed form)
METRIC_KINDS = {
    "outage": (("gamma_th",), ("exact", "asymptotic")),
    "ber": (("M",), ("exact", "asymptotic")),
    "ber_outdated": (("M", "rho"), ("exact",)),
    "ber_beamforming": (("M", "t", "r"), ("exact",)),
    "ser": (("M",), ("exact", "asymptotic")),
    "bler": (("rate", "block_length"), ("exact",)),
    "capacity": ((), ("exact", "asymptotic")),
    "ee": ((), ("exact", "asymptotic")),
}


@dataclass(frozen=True)
class MetricSpec:
    """A metric kind plus its parameters (``gamma_th`` is linear)."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}; "
                             f"expected one of {sorted(METRIC_KINDS)}")
        required, _ = METRIC_KINDS[self.kind]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise ValueError(f"metric {self.kind!r} is missing parameters {missing}")
        if "M" in self.params:
            validate_order(self.params["M"])
        if self.kind == "bler":
            BlerParams(self.params["rate"], self.params["block_length"])
        if self.kind == "ber_outdated" and not 0.0 <= self.params["rho"] < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.kind == "ber_beamforming" and not self.params["r"] < self.params["t"]:
            raise ValueError("beamforming needs r < t")

    def get(self, key, default=None):
        return self.params.get(key, default)

    @property
    def snr_convention(self):
        return self.params.get("snr_convention", "per_bit")

    def inventory(self):
        return PowerInventory.uniform(self.params.get("circuit_power_w", 0.5))


@dataclass
class MetricResult:
    """A metric value tagged with how it was obtained."""

    value: float
    method: str
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def half_width(self):
        return self.diagnostics.get("half_width")


def supported_methods(kind):
    return METRIC_KINDS[kind][1] + ("mc",)


def _closed_form(chain, spec: MetricSpec, mode):
    kind = spec.kind
    conv = spec.snr_convention
    snrs = as_snrs(chain)
    if kind == "outage":
        return outage(snrs, spec.params["gamma_th"], mode)
    if kind == "ber":
        if mode == "asymptotic":
            return ber_e2e_asymptotic(snrs, spec.params["M"], snr_convention=conv)
        return ber_e2e([ber_hop(s, spec.params["M"], snr_convention=conv) for s in snrs])
    if kind == "ber_outdated":
        return ber_e2e([ber_hop_outdated_csi(s, spec.params["M"], spec.params["rho"],
                                             snr_convention=conv) for s in snrs])
    if kind == "ber_beamforming":
        return ber_e2e([ber_hop_beamforming(s, spec.params["M"], int(spec.params["t"]),
                                            int(spec.params["r"]), spec.get("s", 1.0),
                                            snr_convention=conv) for s in snrs])
    if kind == "ser":
        return ser_e2e_chain(snrs, spec.params["M"], mode, snr_convention=conv)
    if kind == "bler":
        params = BlerParams(spec.params["rate"], int(spec.params["block_length"]))
        return bler_e2e([bler_hop(s, params) for s in snrs])
    if kind == "capacity":
        return capacity_e2e(snrs, mode)
    if kind == "ee":
        return ee_e2e(chain, spec.inventory(), mode)
    raise ValueError(kind)


def evaluate(chain, spec: MetricSpec, method="exact", mc=None):
    """Evaluate ``spec`` on ``chain`` by ``method`` (exact, asymptotic or mc)."""
    if method == "mc":
        from ..simulate import McConfig, mc_metric
        est = mc_metric(chain, spec, mc or McConfig())
        return MetricResult(est.mean, "monte-carlo",
                            {"half_width": est.half_width, "trials": est.trials_used,
                             "resolved": est.resolved})
    if method not in METRIC_KINDS[spec.kind][1]:
        raise ValueError(f"metric {spec.kind!r} has no {method!r} form")
    return MetricResult(_closed_form(chain, spec, method), method, {"hops": len(as_snrs(chain))})
