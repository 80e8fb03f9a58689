"""Strict parsing of quantity strings such as ``"23 dBm"`` or ``"200 MHz"``."""

from __future__ import annotations

import math
import re

__all__ = ["UnitError", "parse_quantity", "format_quantity", "QUANTITIES"]


class UnitError(ValueError):
    """A quantity string is malformed or carries the wrong unit."""


# quantity -> (canonical unit, {unit: converter to canonical})
QUANTITIES = {
    "power_dbm": ("dBm", {
        "dBm": lambda v: v,
        "W": lambda v: 10.0 * math.log10(v) + 30.0,
        "mW": lambda v: 10.0 * math.log10(v),
    }),
    "power_w": ("W", {
        "W": lambda v: v,
        "mW": lambda v: v * 1e-3,
        "dBm": lambda v: 10.0 ** ((v - 30.0) / 10.0),
    }),
    "ratio_db": ("dB", {"dB": lambda v: v}),
    "psd_dbm_hz": ("dBm/Hz", {"dBm/Hz": lambda v: v}),
    "frequency_hz": ("Hz", {
        "Hz": lambda v: v,
        "kHz": lambda v: v * 1e3,
        "MHz": lambda v: v * 1e6,
        "GHz": lambda v: v * 1e9,
    }),
    "frequency_ghz": ("GHz", {
        "GHz": lambda v: v,
        "MHz": lambda v: v / 1e3,
        "kHz": lambda v: v / 1e6,
        "Hz": lambda v: v / 1e9,
    }),
    "distance_m": ("m", {"m": lambda v: v, "km": lambda v: v * 1e3}),
    "loss_db_per_m": ("dB/m", {"dB/m": lambda v: v}),
}

_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]+)\s*$")


def parse_quantity(text, quantity):
    """Return the value of ``text`` in the canonical unit of ``quantity``."""
    canonical, table = QUANTITIES[quantity]
    if not isinstance(text, str):
        raise UnitError(f"expected a string with a unit ({', '.join(table)}), got {text!r}")
    match = _PATTERN.match(text)
    if not match:
        raise UnitError(f"cannot parse quantity {text!r}; expected '<number> <unit>'")
    value = float(match.group(1))
    unit = match.group(2)
    if unit not in table:
        raise UnitError(f"unit {unit!r} in {text!r} is not one of {', '.join(table)}")
    if unit in ("W", "mW") and quantity == "power_dbm" and not value > 0:
        raise UnitError(f"power {text!r} must be positive to convert to dBm")
    return float(table[unit](value))


def format_quantity(value, quantity):
    """Inverse of :func:`parse_quantity` in the canonical unit (exact round trip)."""
    canonical, _ = QUANTITIES[quantity]
    return f"{float(value)!r} {canonical}"
