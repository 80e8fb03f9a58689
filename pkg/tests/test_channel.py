import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from weibull_relay.channel import (FREE_SPACE_REF_28GHZ_DB, HopChain, HopSnr, LinkBudget,
                                   WeibullHop, avg_snr_db, avg_snr_linear, db_to_linear,
                                   hop_snr, linear_to_db, noise_power_dbm, path_loss_db, phi)


def test_noise_power():
    assert noise_power_dbm(1.0) == pytest.approx(-174.0)
    assert noise_power_dbm(200e6, 5.0) == pytest.approx(-174.0 + 10 * math.log10(200e6) + 5.0)


def test_free_space_reference():
    assert FREE_SPACE_REF_28GHZ_DB == pytest.approx(32.4 + 20 * math.log10(28.0), abs=1e-12)
    b = LinkBudget()
    assert path_loss_db(b, 1.0) == pytest.approx(FREE_SPACE_REF_28GHZ_DB)
    assert path_loss_db(b, 100.0) - path_loss_db(b, 10.0) == pytest.approx(20.0)


def test_frequency_adds_free_space_term():
    lo, hi = LinkBudget(frequency_ghz=28.0), LinkBudget(frequency_ghz=73.0)
    assert path_loss_db(hi, 50.0) - path_loss_db(lo, 50.0) == pytest.approx(20 * math.log10(73 / 28))


def test_avg_snr_budget_terms():
    hop = WeibullHop(alpha=1.0, distance_m=100.0, bandwidth_hz=200e6, tx_power_dbm=30.0)
    b = LinkBudget()
    expected = 30.0 - path_loss_db(b, 100.0) - noise_power_dbm(200e6, 5.0) - 4.0 + 5.0
    assert avg_snr_db(hop, b) == pytest.approx(expected)
    assert avg_snr_linear(hop, b) == pytest.approx(db_to_linear(expected))


@given(st.floats(1e3, 1e9), st.floats(-30, 90))
def test_bandwidth_shift(bw, eirp):
    b = LinkBudget()
    h1 = WeibullHop(alpha=1.0, bandwidth_hz=bw, tx_power_dbm=eirp)
    h2 = WeibullHop(alpha=1.0, bandwidth_hz=10 * bw, tx_power_dbm=eirp + 10.0)
    assert avg_snr_db(h1, b) == pytest.approx(avg_snr_db(h2, b), abs=1e-9)


def test_extra_loss_factor_scales_linear_snr():
    b = LinkBudget()
    h = WeibullHop(alpha=1.0)
    h2 = WeibullHop(alpha=1.0, extra_loss_factor=0.5)
    assert avg_snr_linear(h2, b) == pytest.approx(0.5 * avg_snr_linear(h, b))


def test_blockage_hook():
    b = LinkBudget(blockage_db_per_m=0.01)
    assert path_loss_db(b, 300.0) - path_loss_db(LinkBudget(), 300.0) == pytest.approx(3.0)


def test_phi_definition():
    h = WeibullHop(alpha=1.5, omega=0.8)
    b = LinkBudget()
    assert phi(h, b) == pytest.approx((avg_snr_linear(h, b) * 0.64) ** 1.5)
    s = hop_snr(h, b)
    assert s.alpha == 1.5 and s.phi == pytest.approx(phi(h, b))


@given(st.floats(0.2, 4.0), st.floats(0.1, 1e4), st.floats(0.05, 3.0))
def test_hop_snr_pdf_is_cdf_derivative(alpha, scale, frac):
    s = HopSnr(alpha, scale)
    x = frac * scale ** (1 / alpha)
    h = 1e-5 * x
    slope = (s.cdf(x + h) - s.cdf(x - h)) / (2 * h)
    assert s.pdf(x) == pytest.approx(slope, rel=1e-6)


def test_hop_snr_pdf_normalized():
    s = HopSnr(1.3, 40.0)
    total = integrate.quad(s.pdf, 0, math.inf, epsrel=1e-11, limit=200)[0]
    assert total == pytest.approx(1.0, rel=1e-9)


def test_beta_convention():
    h = WeibullHop.from_beta(2.0)
    assert h.alpha == 1.0 and h.beta == 2.0


def test_db_roundtrip():
    for x in (1e-6, 0.3, 1.0, 1e9):
        assert db_to_linear(linear_to_db(x)) == pytest.approx(x, rel=1e-14)


@pytest.mark.parametrize("kwargs", [dict(alpha=0.0), dict(alpha=1.0, distance_m=-1.0),
                                    dict(alpha=1.0, bandwidth_hz=0.0),
                                    dict(alpha=1.0, tx_power_dbm=math.inf)])
def test_hop_validation(kwargs):
    with pytest.raises(ValueError):
        WeibullHop(**kwargs)


def test_budget_and_chain_validation():
    with pytest.raises(ValueError):
        LinkBudget(frequency_ghz=0.0)
    with pytest.raises(ValueError):
        HopChain(())
    with pytest.raises(TypeError):
        HopChain((1.0,))
    chain = HopChain.identical(3, WeibullHop(alpha=1.0))
    assert len(chain) == 3
    moved = chain.with_tx_power([10.0, 20.0, 30.0])
    assert [h.tx_power_dbm for h in moved] == [10.0, 20.0, 30.0]
    with pytest.raises(ValueError):
        chain.with_tx_power([1.0])
