import math

import numpy as np
import pytest
from scipy import stats

from weibull_relay.channel import HopChain, HopSnr, WeibullHop
from weibull_relay.metrics import (BlerParams, MetricSpec, bler_e2e, bler_hop, ber_e2e, ber_hop,
                                   ber_hop_beamforming, ber_hop_outdated_csi, capacity_e2e,
                                   ee_e2e, outage, qam_ber_awgn, qam_ser_awgn, ser_e2e_chain)
from weibull_relay.metrics import PowerInventory
from weibull_relay.simulate import (McConfig, _merge, make_rng, mc_metric, sample_mp_law_snr,
                                    sample_outdated_gain, sample_snr, simulate_qam_chain,
                                    tilted_exponentials)

MC = McConfig(trials=200_000, seed=99)


def test_sample_snr_ks():
    hop = HopSnr(1.7, 30.0)
    x = sample_snr(hop, make_rng(1), 20_000)
    res = stats.kstest(x, lambda g: -np.expm1(-(g ** hop.alpha) / hop.phi))
    assert res.pvalue > 1e-3


def test_outdated_gain_ks():
    from weibull_relay.metrics import outdated_snr_cdf
    g = sample_outdated_gain(1.2, 0.6, make_rng(2), 20_000)
    res = stats.kstest(g, np.vectorize(lambda v: outdated_snr_cdf(v, 1.2, 1.0, 0.6)))
    assert res.pvalue > 1e-3


def test_tilted_exponentials_are_unbiased():
    e, w = tilted_exponentials([0.01, 0.2, 1.0], make_rng(3), 400_000)
    assert w.max() <= 2.0
    for j in range(3):
        for x in (0.001, 0.05, 1.0):
            est = np.mean(w * (e[:, j] <= x))
            se = np.std(w * (e[:, j] <= x)) / math.sqrt(len(w))
            assert abs(est - (-math.expm1(-x))) < 5 * se + 1e-12


def test_untilted_weights_are_one():
    e, w = tilted_exponentials([1.0, 1.0], make_rng(4), 1000)
    assert np.all(w == 1.0)


def test_mp_law_sampler_moments():
    u, w = sample_mp_law_snr(1.0, 0.5, 1.0, make_rng(5), 400_000)
    assert np.mean(w) == pytest.approx(1.0, abs=5e-3)       # density mass
    assert np.mean(w * u) == pytest.approx(1.0, abs=5e-3)   # unit-mean law
    assert np.mean(w * u * u) == pytest.approx(1.5, abs=1e-2)  # second moment 1 + c


@pytest.mark.parametrize("M", [4, 16, 64])
def test_symbol_simulation_matches_awgn(M):
    g = 10 ** 0.8
    n = 200_000
    bits, syms = simulate_qam_chain(M, np.full((n, 1), g), make_rng(6))
    for est, ref in ((bits.mean(), qam_ber_awgn(M, g)), (syms.mean(), qam_ser_awgn(M, g))):
        sd = math.sqrt(ref * (1 - ref) / n)
        assert abs(est - ref) < 4 * sd


def test_merge_matches_numpy():
    x = make_rng(7).normal(size=10_001)[:, None]
    acc = (0, 0.0, 0.0)
    for chunk in np.array_split(x, 7):
        m = chunk.mean(axis=0)
        acc = _merge(acc, (len(chunk), m, ((chunk - m) ** 2).sum(axis=0)))
    n, mean, m2 = acc
    assert n == len(x)
    assert mean[0] == pytest.approx(x.mean(), rel=1e-12)
    assert m2[0] / (n - 1) == pytest.approx(x.var(ddof=1), rel=1e-12)


def test_determinism():
    chain = HopChain.identical(2, WeibullHop(1.0, tx_power_dbm=40.0))
    spec = MetricSpec("ber", {"M": 16})
    a = mc_metric(chain, spec, MC)
    b = mc_metric(chain, spec, MC)
    assert a == b
    c = mc_metric(chain, spec, McConfig(trials=200_000, seed=100))
    assert c.mean != a.mean


def test_parallel_workers_reproducible():
    chain = HopChain.identical(2, WeibullHop(1.0, tx_power_dbm=40.0))
    spec = MetricSpec("outage", {"gamma_th": 1.0})
    cfg = McConfig(trials=100_000, seed=5, workers=2)
    a, b = mc_metric(chain, spec, cfg), mc_metric(chain, spec, cfg)
    assert a == b
    assert a.contains(outage(chain.snrs(), 1.0))


def _assert_covers(est, exact):
    assert est.contains(exact), (est, exact)


@pytest.mark.parametrize("eirp", [10.0, 35.0, 70.0])
def test_mc_covers_closed_forms(eirp):
    chain = HopChain((WeibullHop(1.0, distance_m=80.0, tx_power_dbm=eirp),
                      WeibullHop(1.0, distance_m=120.0, tx_power_dbm=eirp)))
    snrs = chain.snrs()
    cases = [
        (MetricSpec("outage", {"gamma_th": 1.0}), outage(snrs, 1.0)),
        (MetricSpec("ber", {"M": 16}), ber_e2e([ber_hop(s, 16) for s in snrs])),
        (MetricSpec("ser", {"M": 16}), ser_e2e_chain(snrs, 16)),
        (MetricSpec("bler", {"rate": 1.0, "block_length": 100}),
         bler_e2e([bler_hop(s, BlerParams(1.0, 100)) for s in snrs])),
        (MetricSpec("capacity"), capacity_e2e(snrs)),
        (MetricSpec("ee", {"circuit_power_w": 0.5}), ee_e2e(chain, PowerInventory.uniform(0.5))),
        (MetricSpec("ber_outdated", {"M": 4, "rho": 0.9}),
         ber_e2e([ber_hop_outdated_csi(s, 4, 0.9) for s in snrs])),
        (MetricSpec("ber_beamforming", {"M": 16, "t": 16, "r": 8}),
         ber_e2e([ber_hop_beamforming(s, 16, 16, 8) for s in snrs])),
    ]
    for spec, exact in cases:
        _assert_covers(mc_metric(chain, spec, MC), exact)


def test_symbol_mode_covers_closed_form():
    chain = HopChain.identical(2, WeibullHop(1.0, tx_power_dbm=30.0))
    cfg = McConfig(trials=200_000, seed=11, ber_mc_mode="symbol")
    exact = ber_e2e([ber_hop(s, 16) for s in chain.snrs()])
    _assert_covers(mc_metric(chain, MetricSpec("ber", {"M": 16}), cfg), exact)


def test_rare_event_resolution():
    # at ~1e-8 the weighted estimator still resolves the value
    chain = HopChain.identical(2, WeibullHop(1.0, tx_power_dbm=90.0))
    exact = ber_e2e([ber_hop(s, 4) for s in chain.snrs()])
    est = mc_metric(chain, MetricSpec("ber", {"M": 4}), MC)
    assert exact < 1e-7 and est.resolved and est.contains(exact)


def test_config_validation():
    for bad in (dict(trials=0), dict(workers=0), dict(seed=-1), dict(ber_mc_mode="x"),
                dict(bler_mc_mode="x"), dict(beam_mc_mode="x"), dict(confidence_sigma=0.0)):
        with pytest.raises(ValueError):
            McConfig(**bad)
