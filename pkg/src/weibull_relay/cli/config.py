"""Scenario files: TOML in, validated :class:`Scenario` out, and back.

Layout::

    [scenario]   name, methods = ["exact", "asymptotic", "mc"]
    [budget]     frequency, noise_psd, noise_figure, rx_frontend_loss,
                 antenna_element_gain, pathloss_exponent, pathloss_ref, blockage
    [chain]      hops, beta, omega, distance, bandwidth, eirp, extra_loss_factor
                 (each a scalar or one entry per hop)
    [sweep]      variable = eirp | distance | bandwidth | hops,
                 start, stop, points, scale = linear | dB
    [[metrics]]  kind, optional label, then the metric's parameters
    [mc]         trials, seed, confidence_sigma, ber_mc_mode, bler_mc_mode,
                 beam_mc_mode (any McConfig field)
    [[cases]]    name plus optional budget / chain overrides
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np
import tomli
import tomli_w

from ..channel import FREE_SPACE_REF_28GHZ_DB, HopChain, LinkBudget, WeibullHop
from ..metrics import METRIC_KINDS, MetricSpec
from ..simulate import McConfig
from .units import UnitError, format_quantity, parse_quantity

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "Scenario",
    "SweepSpec",
    "MetricEntry",
    "CaseSpec",
    "load_scenario",
    "parse_scenario",
    "scenario_to_toml",
    "SWEEP_VARIABLES",
]

METHODS = ("exact", "asymptotic", "mc")
SWEEP_VARIABLES = {
    "eirp": ("power_dbm", "eirp_dbm"),
    "distance": ("distance_m", "distance_m"),
    "bandwidth": ("frequency_hz", "bandwidth_hz"),
    "hops": (None, "hops"),
}

_BUDGET_FIELDS = {
    # toml key: (LinkBudget field, quantity or None for plain numbers)
    "frequency": ("frequency_ghz", "frequency_ghz"),
    "noise_psd": ("noise_psd_dbm_hz", "psd_dbm_hz"),
    "noise_figure": ("noise_figure_db", "ratio_db"),
    "rx_frontend_loss": ("rx_frontend_loss_db", "ratio_db"),
    "antenna_element_gain": ("antenna_element_gain_db", "ratio_db"),
    "pathloss_exponent": ("pathloss_exponent", None),
    "pathloss_ref": ("pathloss_ref_db_at_1m", "ratio_db"),
    "blockage": ("blockage_db_per_m", "loss_db_per_m"),
}

_CHAIN_FIELDS = {
    "beta": None,
    "omega": None,
    "distance": "distance_m",
    "bandwidth": "frequency_hz",
    "eirp": "power_dbm",
    "extra_loss_factor": None,
}

# metric parameters that carry units: name -> quantity
_METRIC_UNIT_PARAMS = {
    "gamma_th": "ratio_db",
    "circuit_power": "power_w",
}  # gamma_th is kept in dB here and linearized in MetricEntry.spec()
_METRIC_INT_PARAMS = ("M", "t", "r", "block_length")
_METRIC_FLOAT_PARAMS = ("rho", "s", "rate")
_METRIC_STR_PARAMS = {"snr_convention": ("per_bit", "per_symbol"),
                      "allocation": ("uniform", "ber_optimal", "ee_optimal")}
_RATIO_KIND = "capacity_ratio"


class ConfigParseError(ValueError):
    """The file is not valid TOML."""


class ConfigValidationError(ValueError):
    """The file parses but does not describe a valid scenario."""


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self):
        if self.scale == "linear":
            vals = np.linspace(self.start, self.stop, self.points)
        else:
            vals = np.geomspace(self.start, self.stop, self.points)
        if self.variable == "hops":
            ints = np.rint(vals)
            if np.any(np.abs(vals - ints) > 1e-9):
                raise ConfigValidationError("a hops sweep must land on integers")
            return [int(v) for v in ints]
        return [float(v) for v in vals]

    @property
    def column(self):
        return SWEEP_VARIABLES[self.variable][1]


@dataclass(frozen=True)
class MetricEntry:
    kind: str
    label: str
    params: tuple  # sorted (key, value) pairs in library units

    def param_dict(self):
        return dict(self.params)

    def spec(self):
        """Library :class:`MetricSpec` (not defined for the band-ratio pseudo-metric)."""
        params = {k: v for k, v in self.params if k not in ("allocation", "f1", "f2")}
        if "gamma_th" in params:
            params["gamma_th"] = 10.0 ** (params["gamma_th"] / 10.0)
        if "circuit_power" in params:
            params["circuit_power_w"] = params.pop("circuit_power")
        return MetricSpec(self.kind, params)

    @property
    def methods(self):
        if self.kind == _RATIO_KIND:
            return ("exact", "asymptotic")
        return METRIC_KINDS[self.kind][1] + ("mc",)


@dataclass(frozen=True)
class CaseSpec:
    name: str
    budget: tuple = ()  # (LinkBudget field, value) overrides
    chain: tuple = ()   # (chain key, value or tuple) overrides


@dataclass(frozen=True)
class Scenario:
    name: str
    methods: tuple
    budget: LinkBudget
    hops: int
    chain: tuple  # sorted (key, tuple of per-hop values)
    sweep: SweepSpec
    metrics: tuple
    mc: McConfig
    cases: tuple = field(default_factory=tuple)

    def chain_dict(self):
        return dict(self.chain)

    def case_list(self):
        return self.cases or (CaseSpec("base"),)

    def build_chain(self, case: CaseSpec, sweep_value=None):
        """Hop chain for one case at one sweep value."""
        budget = replace(self.budget, **dict(case.budget))
        per_hop = self.chain_dict()
        per_hop.update(dict(case.chain))
        n = self.hops
        if self.sweep.variable == "hops" and sweep_value is not None:
            n = int(sweep_value)
            for key, vals in per_hop.items():
                if len(set(vals)) != 1:
                    raise ConfigValidationError(
                        f"chain.{key} must be a scalar when sweeping the hop count")
                per_hop[key] = (vals[0],) * n
        hops = []
        for i in range(n):
            kw = {k: v[i] for k, v in per_hop.items()}
            if sweep_value is not None and self.sweep.variable != "hops":
                kw[self.sweep.variable] = sweep_value
            hops.append(WeibullHop(alpha=kw["beta"] / 2.0, omega=kw["omega"],
                                   distance_m=kw["distance"], bandwidth_hz=kw["bandwidth"],
                                   tx_power_dbm=kw["eirp"],
                                   extra_loss_factor=kw["extra_loss_factor"]))
        return HopChain(tuple(hops), budget)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _fail(msg):
    raise ConfigValidationError(msg)


def _quantity(value, quantity, where):
    try:
        return parse_quantity(value, quantity)
    except UnitError as exc:
        _fail(f"{where}: {exc}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{where}: expected a plain number, got {value!r}")
    return float(value)


def _parse_budget_table(table, where):
    out = {}
    for key, value in table.items():
        if key not in _BUDGET_FIELDS:
            _fail(f"{where}: unknown key {key!r}")
        attr, quantity = _BUDGET_FIELDS[key]
        if quantity is None:
            out[attr] = _number(value, f"{where}.{key}")
        else:
            out[attr] = _quantity(value, quantity, f"{where}.{key}")
    return out


def _parse_chain_value(key, value, n, where):
    quantity = _CHAIN_FIELDS[key]
    items = value if isinstance(value, list) else [value]
    if isinstance(value, list) and len(items) != n:
        _fail(f"{where}.{key}: expected {n} per-hop entries, got {len(items)}")
    parsed = tuple(_number(v, f"{where}.{key}") if quantity is None
                   else _quantity(v, quantity, f"{where}.{key}") for v in items)
    return parsed if len(parsed) == n else parsed * n


def _parse_metric(table, index):
    where = f"metrics[{index}]"
    if "kind" not in table:
        _fail(f"{where}: missing 'kind'")
    kind = table["kind"]
    if kind not in METRIC_KINDS and kind != _RATIO_KIND:
        _fail(f"{where}: unknown kind {kind!r}")
    params = {}
    label = table.get("label")
    for key, value in table.items():
        if key in ("kind", "label"):
            continue
        if key in _METRIC_UNIT_PARAMS:
            params[key] = _quantity(value, _METRIC_UNIT_PARAMS[key], f"{where}.{key}")
        elif key in _METRIC_INT_PARAMS:
            if isinstance(value, bool) or not isinstance(value, int):
                _fail(f"{where}.{key}: expected an integer, got {value!r}")
            params[key] = int(value)
        elif key in _METRIC_FLOAT_PARAMS:
            params[key] = _number(value, f"{where}.{key}")
        elif key in _METRIC_STR_PARAMS:
            if value not in _METRIC_STR_PARAMS[key]:
                _fail(f"{where}.{key}: must be one of {_METRIC_STR_PARAMS[key]}")
            params[key] = value
        elif key in ("f1", "f2") and kind == _RATIO_KIND:
            params[key] = _quantity(value, "frequency_ghz", f"{where}.{key}")
        else:
            _fail(f"{where}: unknown parameter {key!r}")
    entry_params = tuple(sorted(params.items()))
    if kind == _RATIO_KIND:
        for key in ("f1", "f2"):
            if key not in params:
                _fail(f"{where}: capacity_ratio needs {key}")
    else:
        try:
            MetricEntry(kind, "", entry_params).spec()
        except ValueError as exc:
            _fail(f"{where}: {exc}")
    if label is None:
        label = kind + "".join(f"_{k}{_label_value(v)}" for k, v in sorted(params.items())
                               if k in ("M", "rho", "t", "r", "allocation"))
    if not isinstance(label, str) or not label.replace("_", "").replace("-", "").replace(".", "").isalnum():
        _fail(f"{where}: label must be alphanumeric with _ - ., got {label!r}")
    return MetricEntry(kind, label, entry_params)


def _label_value(v):
    return f"{v:g}" if isinstance(v, float) else str(v)


def parse_scenario(data: dict) -> Scenario:
    """Validate a TOML document already loaded into ``data``."""
    known = {"scenario", "budget", "chain", "sweep", "metrics", "mc", "cases"}
    extra = set(data) - known
    if extra:
        _fail(f"unknown top-level tables {sorted(extra)}")
    head = data.get("scenario") or _fail("missing [scenario] table")
    name = head.get("name") or _fail("scenario.name is required")
    if not isinstance(name, str) or not name.replace("_", "").replace("-", "").isalnum():
        _fail(f"scenario.name must be alphanumeric with _ or -, got {name!r}")
    methods = head.get("methods", list(METHODS))
    if not isinstance(methods, list) or not methods:
        _fail("scenario.methods must be a non-empty list")
    for m in methods:
        if m not in METHODS:
            _fail(f"scenario.methods: unknown method {m!r}")
    methods = tuple(m for m in METHODS if m in methods)

    try:
        budget = LinkBudget(**_parse_budget_table(data.get("budget", {}), "budget"))
    except ValueError as exc:
        _fail(f"budget: {exc}")

    chain_table = dict(data.get("chain") or _fail("missing [chain] table"))
    n = chain_table.pop("hops", None)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        _fail(f"chain.hops must be a positive integer, got {n!r}")
    defaults = {"omega": 1.0, "extra_loss_factor": 1.0}
    for key in chain_table:
        if key not in _CHAIN_FIELDS:
            _fail(f"chain: unknown key {key!r}")
    chain = {}
    for key in _CHAIN_FIELDS:
        if key in chain_table:
            chain[key] = _parse_chain_value(key, chain_table[key], n, "chain")
        elif key in defaults:
            chain[key] = (defaults[key],) * n
        else:
            _fail(f"chain.{key} is required")

    sw = data.get("sweep") or _fail("missing [sweep] table")
    var = sw.get("variable")
    if var not in SWEEP_VARIABLES:
        _fail(f"sweep.variable must be one of {sorted(SWEEP_VARIABLES)}, got {var!r}")
    quantity = SWEEP_VARIABLES[var][0]
    for key in ("start", "stop", "points"):
        if key not in sw:
            _fail(f"sweep.{key} is required")
    if quantity is None:
        start, stop = _number(sw["start"], "sweep.start"), _number(sw["stop"], "sweep.stop")
    else:
        start = _quantity(sw["start"], quantity, "sweep.start")
        stop = _quantity(sw["stop"], quantity, "sweep.stop")
    points = sw["points"]
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        _fail(f"sweep.points must be an integer >= 2, got {points!r}")
    scale = sw.get("scale", "linear")
    if scale not in ("linear", "dB"):
        _fail(f"sweep.scale must be 'linear' or 'dB', got {scale!r}")
    if scale == "dB" and not (start > 0 and stop > 0):
        _fail("a dB-scaled sweep needs positive start and stop")
    unknown = set(sw) - {"variable", "start", "stop", "points", "scale"}
    if unknown:
        _fail(f"sweep: unknown keys {sorted(unknown)}")
    sweep = SweepSpec(var, start, stop, points, scale)
    sweep.values()

    metric_tables = data.get("metrics") or _fail("at least one [[metrics]] entry is required")
    metrics = tuple(_parse_metric(t, i) for i, t in enumerate(metric_tables))
    labels = [m.label for m in metrics]
    if len(set(labels)) != len(labels):
        _fail(f"metric labels must be unique, got {labels}")

    mc_table = dict(data.get("mc", {}))
    unknown = set(mc_table) - {f.name for f in fields(McConfig)}
    if unknown:
        _fail(f"mc: unknown keys {sorted(unknown)}")
    try:
        mc = McConfig(**mc_table)
    except (TypeError, ValueError) as exc:
        _fail(f"mc: {exc}")

    cases = []
    for i, case in enumerate(data.get("cases", [])):
        cname = case.get("name")
        if not isinstance(cname, str) or not cname.replace("_", "").replace("-", "").isalnum():
            _fail(f"cases[{i}].name must be alphanumeric with _ or -")
        unknown = set(case) - {"name", "budget", "chain"}
        if unknown:
            _fail(f"cases[{i}]: unknown keys {sorted(unknown)}")
        b = tuple(sorted(_parse_budget_table(case.get("budget", {}), f"cases[{i}].budget").items()))
        c_tab = case.get("chain", {})
        for key in c_tab:
            if key not in _CHAIN_FIELDS:
                _fail(f"cases[{i}].chain: unknown key {key!r}")
        c = tuple(sorted((k, _parse_chain_value(k, v, n, f"cases[{i}].chain"))
                         for k, v in c_tab.items()))
        cases.append(CaseSpec(cname, b, c))
    if len({c.name for c in cases}) != len(cases):
        _fail("case names must be unique")

    scenario = Scenario(name, methods, budget, n, tuple(sorted(chain.items())), sweep,
                        metrics, mc, tuple(cases))
    # build every case once so bad values surface as validation errors
    for case in scenario.case_list():
        try:
            replace(budget, **dict(case.budget))
            scenario.build_chain(case, sweep.values()[0])
        except ValueError as exc:
            _fail(f"case {case.name!r}: {exc}")
    return scenario


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    return parse_scenario(data)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _budget_to_table(items):
    out = {}
    lookup = {attr: (key, q) for key, (attr, q) in _BUDGET_FIELDS.items()}
    for attr, value in items:
        key, quantity = lookup[attr]
        if quantity is None:
            out[key] = value
        else:
            out[key] = format_quantity(value, quantity)
    return out


def _chain_to_table(items):
    out = {}
    for key, vals in items:
        quantity = _CHAIN_FIELDS[key]
        enc = [v if quantity is None else format_quantity(v, quantity) for v in vals]
        out[key] = enc
    return out


def scenario_to_toml(sc: Scenario) -> str:
    """Serialize ``sc`` so that ``parse_scenario`` reproduces it exactly."""
    budget_items = [(f.name, getattr(sc.budget, f.name)) for f in fields(LinkBudget)]
    doc = {
        "scenario": {"name": sc.name, "methods": list(sc.methods)},
        "budget": _budget_to_table(budget_items),
        "chain": {"hops": sc.hops, **_chain_to_table(sc.chain)},
    }
    quantity = SWEEP_VARIABLES[sc.sweep.variable][0]
    doc["sweep"] = {
        "variable": sc.sweep.variable,
        "start": sc.sweep.start if quantity is None else format_quantity(sc.sweep.start, quantity),
        "stop": sc.sweep.stop if quantity is None else format_quantity(sc.sweep.stop, quantity),
        "points": sc.sweep.points,
        "scale": sc.sweep.scale,
    }
    metrics = []
    for m in sc.metrics:
        t = {"kind": m.kind, "label": m.label}
        for k, v in m.params:
            if k == "gamma_th":
                t[k] = format_quantity(v, "ratio_db")
            elif k == "circuit_power":
                t[k] = format_quantity(v, "power_w")
            elif k in ("f1", "f2"):
                t[k] = format_quantity(v, "frequency_ghz")
            else:
                t[k] = v
        metrics.append(t)
    doc["metrics"] = metrics
    doc["mc"] = {f.name: getattr(sc.mc, f.name) for f in fields(McConfig)}
    if sc.cases:
        doc["cases"] = [{"name": c.name, "budget": _budget_to_table(c.budget),
                         "chain": _chain_to_table(c.chain)} for c in sc.cases]
    return tomli_w.dumps(doc)


def roundtrip(sc: Scenario) -> Scenario:
    return parse_scenario(tomli.loads(scenario_to_toml(sc)))


# re-exported for scenario authors
DEFAULT_PATHLOSS_REF_DB = FREE_SPACE_REF_28GHZ_DB
