"""Special functions used by the closed-form metrics.

Complex gamma, digamma and the upper incomplete gamma are thin wrappers
around :mod:`scipy.special` with domain checks.  ``erfc`` is evaluated
directly (power series below 3, continued fraction above) so that the Fox H
representation of erfc can be tested against an independent value.

The single and bivariate Fox H-functions are evaluated as Mellin-Barnes
integrals along vertical lines with an adaptively refined trapezoid rule.
With the kernel written as

    K(s) = prod_{j<m} G(b_j + B_j s) prod_{j<n} G(1 - a_j - A_j s)
           / prod_{j>=m} G(1 - b_j - B_j s) prod_{j>=n} G(a_j + A_j s)

the function is ``H(z) = 1/(2 pi i) int_L K(s) z^{-s} ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, special

__all__ = [
    "SpecialFunctionError",
    "PoleError",
    "ContourSeparationError",
    "NonConvergenceError",
    "complex_gamma",
    "digamma",
    "upper_incomplete_gamma",
    "erfc",
    "FoxHParams",
    "BivFoxHParams",
    "HDiagnostics",
    "fox_h",
    "bivariate_fox_h",
    "meijer_g",
]


class SpecialFunctionError(ArithmeticError):
    """Base class for evaluation failures in this module."""


class PoleError(SpecialFunctionError, ValueError):
    """Gamma evaluated at one of its poles."""


class ContourSeparationError(SpecialFunctionError):
    """No vertical line separates the left and right pole families."""


class NonConvergenceError(SpecialFunctionError):
    """The contour quadrature did not reach the requested accuracy."""


# ---------------------------------------------------------------------------
# Elementary kernels
# ---------------------------------------------------------------------------

def complex_gamma(z):
    """Gamma function for a complex (or real) argument.

    Raises :class:`PoleError` at non-positive integers.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"gamma has a pole at z={z.real:g}")
    return complex(np.exp(special.loggamma(z)))


def digamma(x):
    """Digamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"digamma is only defined here for x > 0, got {x!r}")
    return float(special.digamma(x))


def upper_incomplete_gamma(s, x):
    """Non-normalized upper incomplete gamma ``int_x^inf t^(s-1) e^-t dt``."""
    s = float(s)
    x = float(x)
    if not s > 0.0:
        raise ValueError(f"upper_incomplete_gamma needs s > 0, got {s!r}")
    if x < 0.0:
        raise ValueError(f"upper_incomplete_gamma needs x >= 0, got {x!r}")
    q = special.gammaincc(s, x)
    if q == 0.0:
        return 0.0
    return float(math.exp(special.gammaln(s) + math.log(q)))


_SQRT_PI = math.sqrt(math.pi)
_ERFC_SWITCH = 3.0
_SERIES_TERMS = 90
_CF_DEPTH = 80


def _erf_series(x):
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!, all terms positive
    term = x.copy()
    total = x.copy()
    two_x2 = 2.0 * x * x
    for n in range(1, _SERIES_TERMS):
        term = term * two_x2 / (2 * n + 1)
        total += term
    return 2.0 / _SQRT_PI * np.exp(-x * x) * total


def _erfc_contfrac(x):
    # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tail = np.zeros_like(x)
    for k in range(_CF_DEPTH, 0, -1):
        tail = (0.5 * k) / (x + tail)
    return np.exp(-x * x) / _SQRT_PI / (x + tail)


def erfc(x):
    """Complementary error function, evaluated without scipy.

    Accepts scalars or arrays; returns the same shape.
    """
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    out = np.empty_like(ax)
    low = ax < _ERFC_SWITCH
    if np.any(low):
        out[low] = 1.0 - _erf_series(ax[low])
    if np.any(~low):
        out[~low] = _erfc_contfrac(ax[~low])
    out = np.where(arr < 0, 2.0 - out, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Parameter containers
# ---------------------------------------------------------------------------

def _pairs(values, name):
    out = []
    for item in values:
        a, A = item
        a, A = float(a), float(A)
        if not A > 0.0:
            raise ValueError(f"{name}: linear coefficients must be positive, got {A!r}")
        out.append((a, A))
    return tuple(out)


@dataclass(frozen=True)
class FoxHParams:
    """Orders and coefficients of ``H^{m,n}_{p,q}[z | (a_j,A_j); (b_j,B_j)]``."""

    m: int
    n: int
    upper: tuple = ()
    lower: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "upper", _pairs(self.upper, "upper"))
        object.__setattr__(self, "lower", _pairs(self.lower, "lower"))
        if self.m < 0 or self.n < 0:
            raise ValueError("orders must be non-negative")
        if self.m > self.q or self.n > self.p:
            raise ValueError(
                f"need m <= q and n <= p, got m={self.m}, n={self.n}, p={self.p}, q={self.q}")

    @property
    def p(self):
        return len(self.upper)

    @property
    def q(self):
        return len(self.lower)

    @property
    def a_star(self):
        """Exponential decay rate parameter of the kernel along vertical lines."""
        up = [A for _, A in self.upper]
        lo = [B for _, B in self.lower]
        return sum(up[:self.n]) - sum(up[self.n:]) + sum(lo[:self.m]) - sum(lo[self.m:])

    def pole_gap(self):
        """Return ``(left, right)``: the rightmost left pole and leftmost right pole."""
        left = max((-b / B for b, B in self.lower[:self.m]), default=-math.inf)
        right = min(((1.0 - a) / A for a, A in self.upper[:self.n]), default=math.inf)
        return left, right

    def check_separation(self):
        left, right = self.pole_gap()
        if not left < right:
            raise ContourSeparationError(
                f"left poles reach {left:g} but right poles start at {right:g}")
        return left, right

    def log_kernel(self, s):
        s = np.asarray(s, dtype=complex)
        acc = np.zeros_like(s)
        for j, (b, B) in enumerate(self.lower):
            if j < self.m:
                acc += special.loggamma(b + B * s)
            else:
                acc -= _loggamma_den(1.0 - b - B * s)
        for j, (a, A) in enumerate(self.upper):
            if j < self.n:
                acc += special.loggamma(1.0 - a - A * s)
            else:
                acc -= _loggamma_den(a + A * s)
        return acc


def _loggamma_den(w):
    # 1/Gamma vanishes at the poles; loggamma returns nan/inf there
    lg = special.loggamma(w)
    return np.where(np.isfinite(lg), lg, np.inf + 0j)


def _triples(values, name):
    out = []
    for item in values:
        a, A1, A2 = (float(v) for v in item)
        if A1 < 0.0 or A2 < 0.0 or (A1 == 0.0 and A2 == 0.0):
            raise ValueError(f"{name}: joint coefficients must be non-negative and not both zero")
        out.append((a, A1, A2))
    return tuple(out)


@dataclass(frozen=True)
class BivFoxHParams:
    """Two-variable H-function parameters.

    The joint group couples both contour variables:
    ``joint_upper`` holds ``(a, A1, A2)`` entering as ``G(1 - a - A1 s - A2 t)``
    for the first ``n0`` entries (numerator) and ``1/G(a + A1 s + A2 t)`` for
    the rest; ``joint_lower`` holds ``(b, B1, B2)`` entering as
    ``1/G(1 - b - B1 s - B2 t)``.  ``first`` and ``second`` are the
    single-variable kernels in ``s`` and ``t``; the integrand carries
    ``x^{-s} y^{-t}``.
    """

    n0: int
    joint_upper: tuple
    joint_lower: tuple
    first: FoxHParams
    second: FoxHParams | None = None

    def __post_init__(self):
        object.__setattr__(self, "joint_upper", _triples(self.joint_upper, "joint_upper"))
        object.__setattr__(self, "joint_lower", _triples(self.joint_lower, "joint_lower"))
        if not 0 <= self.n0 <= len(self.joint_upper):
            raise ValueError("n0 must lie between 0 and len(joint_upper)")

    @property
    def second_is_empty(self):
        return self.second is None or (self.second.p == 0 and self.second.q == 0)

    def depends_on_second(self):
        if not self.second_is_empty:
            return True
        return any(A2 != 0.0 for _, _, A2 in self.joint_upper + self.joint_lower)

    def a_stars(self):
        """Decay parameters along the ``s`` and ``t`` directions."""
        a1 = self.first.a_star
        a2 = 0.0 if self.second is None else self.second.a_star
        for j, (_, A1, A2) in enumerate(self.joint_upper):
            sign = 1.0 if j < self.n0 else -1.0
            a1 += sign * A1
            a2 += sign * A2
        for _, B1, B2 in self.joint_lower:
            a1 -= B1
            a2 -= B2
        return a1, a2

    def log_kernel(self, s, t):
        s = np.asarray(s, dtype=complex)
        t = np.asarray(t, dtype=complex)
        acc = self.first.log_kernel(s)
        if self.second is not None:
            acc = acc + self.second.log_kernel(t)
        for j, (a, A1, A2) in enumerate(self.joint_upper):
            if j < self.n0:
                acc = acc + special.loggamma(1.0 - a - A1 * s - A2 * t)
            else:
                acc = acc - _loggamma_den(a + A1 * s + A2 * t)
        for b, B1, B2 in self.joint_lower:
            acc = acc - _loggamma_den(1.0 - b - B1 * s - B2 * t)
        return acc

    def pole_constraints(self):
        """Linear forms ``beta + w . (c1, c2)`` that must stay positive on the contour."""
        rows = []
        for b, B in self.first.lower[:self.first.m]:
            rows.append((b, B, 0.0))
        for a, A in self.first.upper[:self.first.n]:
            rows.append((1.0 - a, -A, 0.0))
        if self.second is not None:
            for b, B in self.second.lower[:self.second.m]:
                rows.append((b, 0.0, B))
            for a, A in self.second.upper[:self.second.n]:
                rows.append((1.0 - a, 0.0, -A))
        for a, A1, A2 in self.joint_upper[:self.n0]:
            rows.append((1.0 - a, -A1, -A2))
        return rows

    def merged_first(self):
        """Single-variable parameters when nothing depends on ``t``."""
        if self.depends_on_second():
            raise ValueError("the second variable is present; no structural reduction")
        up_n = list(self.first.upper[:self.first.n])
        up_rest = list(self.first.upper[self.first.n:])
        for j, (a, A1, _) in enumerate(self.joint_upper):
            (up_n if j < self.n0 else up_rest).append((a, A1))
        lower = list(self.first.lower)
        for b, B1, _ in self.joint_lower:
            lower.append((b, B1))
        return FoxHParams(self.first.m, len(up_n), tuple(up_n + up_rest), tuple(lower))


@dataclass
class HDiagnostics:
    """What the contour quadrature did, for reporting alongside a value."""

    contour: tuple
    step: tuple
    half_length: tuple
    nodes: int
    error_estimate: float
    imag_residual: float
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Single Fox H
# ---------------------------------------------------------------------------

_SEARCH_SPAN = 40.0
_MAX_LEVELS = 14
_MAX_TAIL_DOUBLINGS = 12
_ACCEPT_RTOL = 1e-8


def _choose_abscissa(logk, lnz, left, right):
    """Pick the line inside the pole gap that minimises |K(c) z^-c|.

    The search is kept a quarter-gap away from both pole families.  On an
    unbounded side the bracket is widened until the minimiser is interior.
    """

    def objective(c):
        return float(np.real(logk(np.array([c + 0j]))[0])) - c * lnz

    span = _SEARCH_SPAN
    for _ in range(10):
        if math.isinf(left) and math.isinf(right):
            lo, hi = -span, span
        elif math.isinf(left):
            lo, hi = right - span, right - 0.5
        elif math.isinf(right):
            lo, hi = left + 0.5, left + span
        else:
            margin = 0.25 * (right - left)
            lo, hi = left + margin, right - margin
        res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-6 * max(1.0, hi - lo)})
        c = float(res.x)
        at_open_edge = ((math.isinf(right) and hi - c < 1e-3 * span)
                        or (math.isinf(left) and c - lo < 1e-3 * span))
        if not at_open_edge:
            break
        span *= 4.0
    return c


def _line_integral(g, c, dist, a_star, rtol):
    """Trapezoid rule for ``1/(2 pi) int g(t) dt`` over the real line.

    ``g`` maps real ``t`` arrays to complex integrand values.  The step is
    halved until two levels agree, the half-length grows until the
    extrapolated tail is negligible.
    """
    h0 = min(0.5, dist / 2.0)
    half_length = max(8.0, 30.0 / max(a_star, 1e-3))
    for _ in range(_MAX_TAIL_DOUBLINGS):
        k = int(math.ceil(half_length / h0))
        t = h0 * np.arange(-k, k + 1)
        vals = g(t)
        mags = np.abs(vals)
        if max(mags[0], mags[-1]) > 1e-17 * mags.max():
            half_length *= 2.0
            continue
        total = vals.sum()
        abs_total = np.abs(vals).sum()
        est = h0 * total
        h = h0
        prev = est
        err = math.inf
        converged = False
        for _level in range(_MAX_LEVELS):
            h /= 2.0
            tm = h * (2 * np.arange(-k * (2 ** (_level)), k * (2 ** (_level))) + 1)
            mid = g(tm)
            total = total + mid.sum()
            abs_total += np.abs(mid).sum()
            est = h * total
            err = abs(est - prev)
            scale = abs(est)
            if err <= rtol * scale or (scale == 0.0 and err == 0.0):
                converged = True
                break
            prev = est
        # tail extrapolation from the last stretch of the integrand
        edge = np.abs(g(np.array([-half_length, -0.9 * half_length,
                                  0.9 * half_length, half_length])))
        tail = 0.0
        for inner, outer in ((edge[1], edge[0]), (edge[2], edge[3])):
            if outer == 0.0:
                continue
            if inner <= outer:
                tail = math.inf
                break
            rate = math.log(inner / outer) / (0.1 * half_length)
            tail += outer / rate
        cancel = np.finfo(float).eps * h * abs_total
        scale = abs(est)
        if converged and tail <= rtol * scale:
            nodes = 2 * k * 2 ** (_level + 1) + 1
            return est / (2 * math.pi), (err + tail + cancel) / (2 * math.pi), h, half_length, nodes
        if not converged:
            raise NonConvergenceError(
                f"trapezoid refinement stalled on Re(s)={c:g} (last change {err:.3g})")
        half_length *= 2.0
    raise NonConvergenceError(f"contour tail not negligible on Re(s)={c:g}")


def fox_h(params: FoxHParams, z, *, rtol=1e-10, full_output=False):
    """Evaluate the Fox H-function at a real ``z > 0``.

    Returns the real value; with ``full_output=True`` returns
    ``(value, HDiagnostics)``.
    """
    z = float(z)
    if not z > 0.0:
        raise ValueError(f"fox_h needs z > 0, got {z!r}")
    left, right = params.check_separation()
    a_star = params.a_star
    if not a_star > 0.0:
        raise NonConvergenceError(
            f"kernel does not decay along vertical lines (a*={a_star:g})")
    lnz = math.log(z)
    c = _choose_abscissa(params.log_kernel, lnz, left, right)
    dist = min(c - left, right - c)

    def g(t):
        s = c + 1j * t
        return np.exp(params.log_kernel(s) - s * lnz)

    raw, err, h, half_length, nodes = _line_integral(g, c, dist, a_star, rtol)
    value = raw.real
    imag = abs(raw.imag)
    if imag > 1e-8 * (1.0 + abs(value)):
        raise NonConvergenceError(f"imaginary residual {imag:.3g} on a real-valued H")
    rel = err / abs(value) if value != 0.0 else math.inf
    if rel > max(_ACCEPT_RTOL, rtol):
        raise NonConvergenceError(
            f"estimated relative error {rel:.3g} exceeds tolerance at z={z:g}")
    if full_output:
        diag = HDiagnostics((c,), (h,), (half_length,), nodes, rel, imag)
        return value, diag
    return value


def meijer_g(m, n, a, b, z, **kwargs):
    """Meijer G-function ``G^{m,n}_{p,q}[z | a; b]`` as a Fox H with unit coefficients."""
    params = FoxHParams(m, n, tuple((float(x), 1.0) for x in a),
                        tuple((float(x), 1.0) for x in b))
    return fox_h(params, z, **kwargs)


# ---------------------------------------------------------------------------
# Bivariate Fox H
# ---------------------------------------------------------------------------

_BOX = 30.0


def _bivariate_contour(params, lnx, lny):
    rows = params.pole_constraints()
    if not rows:
        raise ContourSeparationError("no poles constrain the contours; kernel is entire")
    # Chebyshev-centre LP: maximise delta s.t. beta + w.c >= delta |w|
    a_ub, b_ub = [], []
    for beta, w1, w2 in rows:
        norm = math.hypot(w1, w2)
        a_ub.append([-w1, -w2, norm])
        b_ub.append(beta)
    res = optimize.linprog([0.0, 0.0, -1.0], A_ub=a_ub, b_ub=b_ub,
                           bounds=[(-_BOX, _BOX), (-_BOX, _BOX), (None, 1.0)],
                           method="highs")
    if res.status != 0 or not res.x[2] > 1e-9:
        raise ContourSeparationError("no pair of vertical lines separates the pole families")
    center = res.x[:2]
    delta = res.x[2]

    def objective(c):
        return float(np.real(params.log_kernel(c[0] + 0j, c[1] + 0j))) - c[0] * lnx - c[1] * lny

    cons = [{"type": "ineq",
             "fun": (lambda c, beta=beta, w1=w1, w2=w2:
                     beta + w1 * c[0] + w2 * c[1] - 0.25 * delta * math.hypot(w1, w2))}
            for beta, w1, w2 in rows]
    box = [(center[0] - _BOX, center[0] + _BOX), (center[1] - _BOX, center[1] + _BOX)]
    best = center
    try:
        opt = optimize.minimize(objective, center, method="SLSQP", constraints=cons,
                                bounds=box, options={"maxiter": 200, "ftol": 1e-10})
        if opt.success and all(f["fun"](opt.x) >= -1e-9 for f in cons) \
                and objective(opt.x) <= objective(center):
            best = opt.x
    except (ValueError, FloatingPointError):
        pass
    # distance from the contour to the nearest pole hyperplane, per axis
    d1 = d2 = math.inf
    for beta, w1, w2 in rows:
        slack = beta + w1 * best[0] + w2 * best[1]
        if w1 != 0.0:
            d1 = min(d1, slack / abs(w1))
        if w2 != 0.0:
            d2 = min(d2, slack / abs(w2))
    d1 = min(d1, 1.0)
    d2 = min(d2, 1.0)
    return float(best[0]), float(best[1]), d1, d2


def _grid_sum(g, h1, h2, k1, k2, chunk=400_000):
    t1 = h1 * np.arange(-k1, k1 + 1)
    t2 = h2 * np.arange(-k2, k2 + 1)
    rows_per = max(1, chunk // t2.size)
    total = 0j
    abs_total = 0.0
    row_max = np.zeros(t1.size)
    for start in range(0, t1.size, rows_per):
        block = g(t1[start:start + rows_per, None], t2[None, :])
        total += block.sum()
        mag = np.abs(block)
        abs_total += mag.sum()
        row_max[start:start + rows_per] = mag.max(axis=1)
    col_edge = np.abs(g(t1[:, None], t2[None, [0, -1]])).max()
    return total, abs_total, row_max, col_edge


def bivariate_fox_h(params: BivFoxHParams, x, y, *, rtol=1e-7, full_output=False):
    """Evaluate the bivariate H-function at ``x, y > 0`` by a double contour integral.

    When nothing depends on the second variable the integral collapses to
    a single Fox H in ``x``.
    """
    x = float(x)
    y = float(y)
    if not x > 0.0 or not y > 0.0:
        raise ValueError(f"bivariate_fox_h needs x, y > 0, got {x!r}, {y!r}")
    if not params.depends_on_second():
        return fox_h(params.merged_first(), x, rtol=min(rtol, 1e-10), full_output=full_output)
    a1, a2 = params.a_stars()
    if not (a1 > 0.0 and a2 > 0.0):
        raise NonConvergenceError(f"kernel does not decay (a*=({a1:g}, {a2:g}))")
    lnx, lny = math.log(x), math.log(y)
    c1, c2, d1, d2 = _bivariate_contour(params, lnx, lny)

    def g(t1, t2):
        s = c1 + 1j * t1
        t = c2 + 1j * t2
        return np.exp(params.log_kernel(s, t) - s * lnx - t * lny)

    half1 = max(6.0, 24.0 / a1)
    half2 = max(6.0, 24.0 / a2)
    h1, h2 = min(0.5, 0.75 * d1), min(0.5, 0.75 * d2)
    for _ in range(8):
        k1, k2 = int(math.ceil(half1 / h1)), int(math.ceil(half2 / h2))
        total, abs_total, row_max, col_edge = _grid_sum(g, h1, h2, k1, k2)
        peak = row_max.max()
        if peak == 0.0:
            raise NonConvergenceError("integrand vanishes on the contour grid")
        grow = False
        if max(row_max[0], row_max[-1]) > 1e-13 * peak:
            half1 *= 1.5
            grow = True
        if col_edge > 1e-13 * peak:
            half2 *= 1.5
            grow = True
        if not grow:
            break
    else:
        raise NonConvergenceError("double contour tails are not negligible")
    prev = h1 * h2 * total
    for _level in range(6):
        h1 /= 2.0
        h2 /= 2.0
        k1, k2 = 2 * k1, 2 * k2
        total, abs_total, _, _ = _grid_sum(g, h1, h2, k1, k2)
        est = h1 * h2 * total
        err = abs(est - prev)
        # trapezoid error on analytic integrands squares with each halving,
        # so a change of sqrt(rtol) between levels leaves ~rtol on the finer one
        if err <= 0.1 * math.sqrt(rtol) * abs(est):
            break
        prev = est
    else:
        raise NonConvergenceError(
            f"double trapezoid refinement stalled (last change {err:.3g})")
    raw = est / (2 * math.pi) ** 2
    value = raw.real
    imag = abs(raw.imag)
    if imag > 1e-8 * (1.0 + abs(value)):
        raise NonConvergenceError(f"imaginary residual {imag:.3g} on a real-valued H")
    if value == 0.0:
        raise NonConvergenceError("double contour integral cancelled to zero")
    change = err / (2 * math.pi) ** 2 / abs(value)
    rel = change * change + np.finfo(float).eps * h1 * h2 * abs_total / abs(est)
    if rel > 1e-6:
        raise NonConvergenceError(f"estimated relative error {rel:.3g} exceeds 1e-6")
    if full_output:
        nodes = (2 * k1 + 1) * (2 * k2 + 1)
        return value, HDiagnostics((c1, c2), (h1, h2), (half1, half2), nodes, rel, imag)
    return value


def fox_h_pairs(m, n, upper: Sequence, lower: Sequence, z, **kwargs):
    """Shorthand: ``fox_h(FoxHParams(m, n, upper, lower), z)``."""
    return fox_h(FoxHParams(m, n, tuple(upper), tuple(lower)), z, **kwargs)
