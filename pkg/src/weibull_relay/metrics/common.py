"""Shared argument handling for the metric functions."""

from __future__ import annotations

from ..channel import HopChain, HopSnr, LinkBudget, WeibullHop, hop_snr

MODES = ("exact", "asymptotic")


def as_snr(hop, budget=None):
    """Accept a :class:`HopSnr` or a :class:`WeibullHop` (with optional budget)."""
    if isinstance(hop, HopSnr):
        return hop
    if isinstance(hop, WeibullHop):
        return hop_snr(hop, budget or LinkBudget())
    raise TypeError(f"expected HopSnr or WeibullHop, got {type(hop).__name__}")


def as_snrs(chain, budget=None):
    """Per-hop :class:`HopSnr` list from a chain, a single hop or a sequence of hops."""
    if isinstance(chain, HopChain):
        return chain.snrs()
    if isinstance(chain, (HopSnr, WeibullHop)):
        return [as_snr(chain, budget)]
    out = [as_snr(h, budget) for h in chain]
    if not out:
        raise ValueError("at least one hop is required")
    return out


def check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def common_alpha(snrs):
    alphas = {s.alpha for s in snrs}
    if len(alphas) != 1:
        raise ValueError(f"this metric needs a common alpha across hops, got {sorted(alphas)}")
    return alphas.pop()
