import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from weibull_relay.specfun import (BivFoxHParams, ContourSeparationError, FoxHParams, PoleError,
                                   bivariate_fox_h, complex_gamma, digamma, erfc, fox_h,
                                   meijer_g, upper_incomplete_gamma)

EXP = FoxHParams(1, 0, (), ((0.0, 1.0),))
ERFC = FoxHParams(2, 0, ((1.0, 1.0),), ((0.0, 1.0), (0.5, 1.0)))
LOG1P = FoxHParams(1, 2, ((1.0, 1.0), (1.0, 1.0)), ((1.0, 1.0), (0.0, 1.0)))


# --- elementary kernels -----------------------------------------------------

@given(st.floats(0.05, 20.0), st.floats(-20.0, 20.0))
def test_gamma_recurrence(x, y):
    z = complex(x, y)
    lhs = complex_gamma(z + 1)
    assert abs(lhs - z * complex_gamma(z)) <= 1e-12 * abs(lhs) + 1e-300


@given(st.floats(0.01, 0.99), st.floats(-3.0, 3.0))
def test_gamma_reflection(x, y):
    z = complex(x, y)
    rhs = math.pi / complex(mpmath.sin(mpmath.pi * mpmath.mpc(z)))
    assert abs(complex_gamma(z) * complex_gamma(1 - z) / rhs - 1) < 1e-12


@pytest.mark.parametrize("z", [0, -1, -7])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        complex_gamma(z)


def test_gamma_against_mpmath():
    for z in (0.5, 3.7 + 2j, -2.5 + 0.1j, 12 - 30j):
        assert abs(complex_gamma(z) / complex(mpmath.gamma(z)) - 1) < 1e-12


def test_digamma_values():
    assert digamma(1.0) == pytest.approx(-np.euler_gamma, rel=1e-15)
    for x in (0.3, 1.7, 25.0):
        assert digamma(x + 1) == pytest.approx(digamma(x) + 1 / x, rel=1e-13)
    with pytest.raises(ValueError):
        digamma(0.0)


@given(st.floats(0.1, 8.0), st.floats(0.0, 40.0))
def test_incomplete_gamma_recurrence(s, x):
    lhs = upper_incomplete_gamma(s + 1, x)
    rhs = s * upper_incomplete_gamma(s, x) + x ** s * math.exp(-x)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-300)


@pytest.mark.parametrize("s,x", [(0.5, 0.2), (2.0, 3.0), (1.0 / 3.0, 10.0), (4.5, 0.0)])
def test_incomplete_gamma_quadrature(s, x):
    ref = integrate.quad(lambda t: t ** (s - 1) * math.exp(-t), x, math.inf, epsrel=1e-13)[0]
    assert upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-10)


def test_incomplete_gamma_domain():
    with pytest.raises(ValueError):
        upper_incomplete_gamma(0.0, 1.0)
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.0, -1.0)


def test_erfc_against_scipy():
    x = np.concatenate([np.linspace(-6, 6, 601), np.geomspace(1e-8, 26, 300)])
    got = np.array([erfc(v) for v in x])
    np.testing.assert_allclose(got, special.erfc(x), rtol=1e-10)


@given(st.floats(-5.0, 5.0))
def test_erfc_symmetry(x):
    assert erfc(x) + erfc(-x) == pytest.approx(2.0, rel=1e-13)


# --- Fox H --------------------------------------------------------------------

@pytest.mark.parametrize("params,ref,grid", [
    (EXP, lambda z: math.exp(-z), np.geomspace(1e-4, 40, 200)),
    (ERFC, lambda z: math.sqrt(math.pi) * special.erfc(math.sqrt(z)), np.geomspace(1e-4, 40, 200)),
    (LOG1P, math.log1p, np.geomspace(1e-4, 1e4, 200)),
])
def test_elementary_identities(params, ref, grid):
    rel = [abs(fox_h(params, z) / ref(z) - 1) for z in grid]
    assert max(rel) < 1e-8


@given(st.floats(0.3, 3.0), st.floats(0.01, 30.0))
def test_scaling_property(k, z):
    # H[z | (a,A); (b,B)] = k H[z^k | (a,kA); (b,kB)]
    scaled = FoxHParams(ERFC.m, ERFC.n, tuple((a, k * A) for a, A in ERFC.upper),
                        tuple((b, k * B) for b, B in ERFC.lower))
    assert fox_h(ERFC, z) == pytest.approx(k * fox_h(scaled, z ** k), rel=1e-9)


@given(st.floats(-0.9, 0.9), st.floats(0.01, 100.0))
def test_power_shift_property(sigma, z):
    # z^sigma H[z | (a,A); (b,B)] = H[z | (a + sigma A, A); (b + sigma B, B)]
    shifted = FoxHParams(LOG1P.m, LOG1P.n, tuple((a + sigma * A, A) for a, A in LOG1P.upper),
                         tuple((b + sigma * B, B) for b, B in LOG1P.lower))
    assert z ** sigma * fox_h(LOG1P, z) == pytest.approx(fox_h(shifted, z), rel=1e-9)


@given(st.floats(0.01, 100.0))
def test_inversion_property(z):
    # H^{m,n}_{p,q}[z | a; b] = H^{n,m}_{q,p}[1/z | 1-b; 1-a]
    inv = FoxHParams(LOG1P.n, LOG1P.m, tuple((1 - b, B) for b, B in LOG1P.lower),
                     tuple((1 - a, A) for a, A in LOG1P.upper))
    assert fox_h(LOG1P, z) == pytest.approx(fox_h(inv, 1 / z), rel=1e-9)


@pytest.mark.parametrize("m,n,a,b,z", [
    (2, 2, (0.1, 0.6, 1.0), (0.0, 0.5, -0.4), 0.7),
    (1, 1, (0.3,), (0.0, -0.2), 2.5),
    (3, 1, (-0.5, 0.5), (0.0, -0.5, -0.5), 0.05),
    (2, 0, (), (0.25, 0.75), 4.0),
])
def test_meijer_g_against_mpmath(m, n, a, b, z):
    ap = [list(a[:n]), list(a[n:])]
    bq = [list(b[:m]), list(b[m:])]
    ref = float(mpmath.meijerg(ap, bq, z))
    assert meijer_g(m, n, a, b, z) == pytest.approx(ref, rel=1e-9)


def test_full_output_diagnostics():
    value, diag = fox_h(ERFC, 2.0, full_output=True)
    assert value == pytest.approx(math.sqrt(math.pi) * special.erfc(math.sqrt(2.0)), rel=1e-10)
    assert diag.error_estimate < 1e-9 and diag.nodes > 0
    left, right = ERFC.pole_gap()
    assert left < diag.contour[0] < right


def test_no_separating_contour_raises():
    bad = FoxHParams(1, 1, ((0.0, 1.0),), ((-1.5, 1.0),))  # left pole 1.5 > right pole 1
    with pytest.raises(ContourSeparationError):
        fox_h(bad, 1.0)


def test_invalid_orders():
    with pytest.raises(ValueError):
        FoxHParams(2, 0, (), ((0.0, 1.0),))
    with pytest.raises(ValueError):
        FoxHParams(1, 0, (), ((0.0, -1.0),))
    with pytest.raises(ValueError):
        fox_h(EXP, 0.0)


# --- bivariate H ----------------------------------------------------------------

def test_bivariate_without_joint_terms_factorizes():
    params = BivFoxHParams(0, (), (), ERFC, EXP)
    x, y = 0.8, 1.7
    assert bivariate_fox_h(params, x, y) == pytest.approx(fox_h(ERFC, x) * fox_h(EXP, y), rel=1e-6)


def test_bivariate_reduces_when_second_absent():
    params = BivFoxHParams(0, (), (), ERFC, None)
    assert bivariate_fox_h(params, 0.3, 5.0) == pytest.approx(fox_h(ERFC, 0.3), rel=1e-10)


@pytest.mark.parametrize("x,y", [(0.5, 0.5), (0.2, 3.0), (4.0, 1.0)])
def test_bivariate_beta_type_identity(x, y):
    # (1/2 pi i)^2 int int G(s)G(t)G(1 - s - t) x^-s y^-t = 1/(1 + x + y), by Mellin-Barnes
    params = BivFoxHParams(1, ((0.0, 1.0, 1.0),), (), FoxHParams(1, 0, (), ((0.0, 1.0),)),
                           FoxHParams(1, 0, (), ((0.0, 1.0),)))
    assert bivariate_fox_h(params, x, y) == pytest.approx(1.0 / (1.0 + x + y), rel=1e-6)
