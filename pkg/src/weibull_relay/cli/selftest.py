"""Quick numerical sanity checks of the special-function layer."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from ..metrics import zeta
from ..specfun import FoxHParams, fox_h

__all__ = ["IDENTITIES", "run_selftest"]

# name, H parameters, reference function, argument grid
IDENTITIES = (
    ("exp(-z)", FoxHParams(1, 0, (), ((0.0, 1.0),)), lambda z: math.exp(-z),
     np.geomspace(1e-3, 30.0, 200)),
    ("erfc(sqrt z)", FoxHParams(2, 0, ((1.0, 1.0),), ((0.0, 1.0), (0.5, 1.0))),
     lambda z: math.sqrt(math.pi) * special.erfc(math.sqrt(z)), np.geomspace(1e-3, 30.0, 200)),
    ("log(1+z)", FoxHParams(1, 2, ((1.0, 1.0), (1.0, 1.0)), ((1.0, 1.0), (0.0, 1.0))),
     lambda z: math.log1p(z), np.geomspace(1e-3, 1e3, 200)),
)


def _zeta_quadrature(alpha, phi, omega):
    # E[erfc(sqrt(omega g))] with g Weibull, integrated in u = g^alpha / phi
    f = lambda u: special.erfc(math.sqrt(omega * (phi * u) ** (1.0 / alpha))) * math.exp(-u)
    return integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)[0]


def run_selftest(tol=1e-9, log=print):
    """Print one line per check; return True when all pass."""
    ok = True
    for name, params, ref, grid in IDENTITIES:
        worst = max(abs(fox_h(params, z) / ref(z) - 1.0) for z in grid)
        good = worst < tol
        ok &= good
        log(f"{'PASS' if good else 'FAIL'} H identity {name}: worst rel err {worst:.2e}")
    worst = 0.0
    for alpha in (0.5, 1.0, 1.5):
        for phi in (1.0, 100.0):
            got = zeta(alpha, phi, 0.5)
            worst = max(worst, abs(got / _zeta_quadrature(alpha, phi, 0.5) - 1.0))
    good = worst < 1e-8
    ok &= good
    log(f"{'PASS' if good else 'FAIL'} erfc moment vs quadrature: worst rel err {worst:.2e}")
    return ok
