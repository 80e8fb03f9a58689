"""Monte-Carlo oracle for the closed-form metrics.

Every worker ``w`` draws from its own PCG64 stream seeded ``seed + w``;
trials are processed in fixed-size chunks so a run is bit-reproducible for
a given ``(seed, trials, workers)``.  Chunk statistics are merged with the
pairwise (Chan) update, which keeps the pooled mean and variance
independent of evaluation order up to rounding.

Rare-event metrics (outage, BER, SER, BLER) are dominated at high SNR by
deep fades on a single hop.  Their per-hop exponentials are drawn from a
defensive mixture: with probability 1/2 every hop follows its own law, and
otherwise one uniformly chosen hop draws ``E`` from an exponential of mean
``mu < 1`` aimed at the SNR that matters for the metric.  Each trial carries
the likelihood ratio ``p/q <= 2``, so the estimator stays unbiased and its
sample variance stays honest.  When every ``mu`` is 1 the weights are
exactly 1 and the draws reduce to plain sampling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import HopChain, HopSnr
from .metrics import MetricSpec, as_snrs
from .metrics.bler import BlerParams
from .metrics.capacity import PowerInventory, total_power_w
from .metrics.qam import qam_coefficients, validate_order

__all__ = [
    "McConfig",
    "McEstimate",
    "make_rng",
    "sample_snr",
    "sample_correlated_snr_pair",
    "sample_mp_snr",
    "simulate_qam_chain",
    "mc_metric",
    "BER_MC_MODES",
    "BLER_MC_MODES",
    "BEAM_MC_MODES",
    "sample_mp_law_snr",
    "tilted_exponentials",
]

BER_MC_MODES = ("analytic-conditional", "symbol")
BLER_MC_MODES = ("linearized", "exact-q")
BEAM_MC_MODES = ("mp-law", "wishart")
_CHUNK = 1 << 16
# deep-fade proposal mean, in multiples of the exponential at the critical SNR
_TILT_SPAN = 4.0
_PROB_KINDS = ("outage", "ber", "ser", "ber_outdated", "ber_beamforming", "bler")


@dataclass(frozen=True)
class McConfig:
    trials: int = 1_000_000
    seed: int = 12345
    confidence_sigma: float = 3.0
    workers: int = 1
    ber_mc_mode: str = "analytic-conditional"
    bler_mc_mode: str = "linearized"
    beam_mc_mode: str = "mp-law"

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError("workers must be a positive integer")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.ber_mc_mode not in BER_MC_MODES:
            raise ValueError(f"ber_mc_mode must be one of {BER_MC_MODES}")
        if self.bler_mc_mode not in BLER_MC_MODES:
            raise ValueError(f"bler_mc_mode must be one of {BLER_MC_MODES}")
        if self.beam_mc_mode not in BEAM_MC_MODES:
            raise ValueError(f"beam_mc_mode must be one of {BEAM_MC_MODES}")
        if not self.confidence_sigma > 0:
            raise ValueError("confidence_sigma must be positive")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width: float
    trials_used: int

    @property
    def resolved(self):
        """False when the interval is as wide as the estimate itself."""
        return self.half_width < abs(self.mean)

    def contains(self, value):
        return abs(value - self.mean) <= self.half_width


def make_rng(seed, worker=0):
    return np.random.Generator(np.random.PCG64(seed + worker))


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def sample_snr(hop: HopSnr, rng, size=None):
    """Inverse-transform draw ``(phi E)^(1/alpha)`` with ``E`` unit exponential."""
    e = rng.standard_exponential(size)
    return (hop.phi * e) ** (1.0 / hop.alpha)


def _correlated_exponentials(rho, rng, size):
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho!r}")
    shape = (size, 2) if size is not None else (2,)
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    x /= math.sqrt(2.0)
    h1 = x[..., 0]
    h2 = math.sqrt(rho) * h1 + math.sqrt(1.0 - rho) * x[..., 1]
    return np.abs(h1) ** 2, np.abs(h2) ** 2


def sample_correlated_snr_pair(hop: HopSnr, rho, rng, size=None):
    """Pair of Weibull SNRs built from complex Gaussians with correlation ``sqrt(rho)``,
    so the squared magnitudes have power correlation ``rho``."""
    e1, e2 = _correlated_exponentials(rho, rng, size)
    k = 1.0 / hop.alpha
    return (hop.phi * e1) ** k, (hop.phi * e2) ** k


def sample_outdated_gain(alpha, rho, rng, size=None):
    """Gain ratio ``G = |g|^2 / |g_est|^2`` of the outdated-CSI model."""
    e1, e2 = _correlated_exponentials(rho, rng, size)
    return (e1 / e2) ** (1.0 / alpha)


def sample_mp_snr(avg_snr, t, r, rng, size):
    """Per-stream SNRs ``avg_snr * eig(H H^H / t)`` for ``r x t`` Gaussian channels.

    Returns ``size`` draws, each a uniformly chosen eigenvalue of a fresh matrix.
    """
    out = np.empty(size)
    block = max(1, 4096 // r)
    idx = 0
    while idx < size:
        n = min(block, size - idx)
        h = (rng.standard_normal((n, r, t)) + 1j * rng.standard_normal((n, r, t))) / math.sqrt(2.0)
        eig = np.linalg.eigvalsh(h @ np.conj(np.swapaxes(h, 1, 2)) / t)
        pick = rng.integers(0, r, size=n)
        out[idx:idx + n] = eig[np.arange(n), pick]
        idx += n
    return avg_snr * out


def _mp_edges(c):
    return (1.0 - math.sqrt(c)) ** 2, (1.0 + math.sqrt(c)) ** 2


def sample_mp_law_snr(avg_snr, c, s, rng, size):
    """Weighted draws ``(avg_snr * u, w)`` for the Marchenko-Pastur law of ratio ``c``.

    ``u`` comes from a half/half mixture of a Beta(3/2, 3/2) on the support
    and a Gamma(3/2) hugging the lower edge on the scale ``1/avg_snr``; the
    weight is the MP density (with its ``1/s^2`` factor) over the proposal.
    """
    a, b = _mp_edges(c)
    width = b - a
    scale = min(width, 1.0 / avg_snr)
    beta = a + width * rng.beta(1.5, 1.5, size)
    edge = a + rng.gamma(1.5, scale, size)
    u = np.where(rng.random(size) < 0.5, beta, edge)
    inside = u < b
    x = np.where(inside, u - a, 0.0)
    root = np.sqrt(x * np.maximum(b - u, 0.0))
    p = root / (2.0 * math.pi * c * s * s * u)
    q_beta = 8.0 * root / (math.pi * width * width)
    q_edge = np.sqrt(x) * np.exp(-x / scale) / (special.gamma(1.5) * scale ** 1.5)
    q = 0.5 * q_beta + 0.5 * q_edge
    w = np.divide(p, q, out=np.zeros_like(p), where=inside & (q > 0))
    return avg_snr * u, w


def tilted_exponentials(mus, rng, n):
    """Unit exponentials ``(n, hops)`` under the one-hop deep-fade mixture, and weights."""
    mus = np.minimum(np.asarray(mus, dtype=float), 1.0)
    hops = len(mus)
    e = rng.standard_exponential((n, hops))
    tilt = rng.random(n) < 0.5
    pick = rng.integers(0, hops, n)
    rows = np.nonzero(tilt)[0]
    e[rows, pick[rows]] *= mus[pick[rows]]
    # tilted over nominal density per hop; the exponent is never positive
    ratio = np.exp(e * (1.0 - 1.0 / mus)) / mus
    return e, 1.0 / (0.5 + 0.5 * ratio.mean(axis=1))


def _critical_snr(kind, params, conv):
    """SNR below which a hop dominates the metric."""
    if kind == "outage":
        return params["gamma_th"]
    if kind == "bler":
        bp = BlerParams(params["rate"], int(params["block_length"]))
        return max(bp.gamma_plus, bp.gamma_th)
    M = params["M"]
    if kind == "ser":
        k = math.log2(M) if conv == "per_bit" else 1.0
        return (M - 1) / (1.5 * k)
    return 1.0 / min(om for _, om in qam_coefficients(M, conv).merged_terms())


def _tilt_means(snrs, g_c):
    return [min(1.0, _TILT_SPAN * g_c ** s.alpha / s.phi) for s in snrs]


# ---------------------------------------------------------------------------
# Symbol-level square QAM with Gray labels per axis
# ---------------------------------------------------------------------------

def _axis_tables(levels):
    idx = np.arange(levels)
    gray = idx ^ (idx >> 1)
    inverse = np.empty(levels, dtype=np.int64)
    inverse[gray] = idx
    popcount = np.array([bin(i).count("1") for i in range(levels)])
    return gray, inverse, popcount


def simulate_qam_chain(M, snrs_per_hop, rng, snr_convention="per_bit"):
    """Send one random Gray-coded symbol per trial through regenerating hops.

    ``snrs_per_hop`` has shape ``(trials, hops)``.  Returns per-trial
    ``(bit_error_fraction, symbol_error)`` after the last hop.
    """
    M = validate_order(M)
    levels = math.isqrt(M)
    k = math.log2(M)
    gray, inverse, popcount = _axis_tables(levels)
    n = snrs_per_hop.shape[0]
    src = rng.integers(0, levels, size=(n, 2))
    labels = src.copy()
    es = 2.0 * (M - 1) / 3.0
    for h in range(snrs_per_hop.shape[1]):
        snr_sym = snrs_per_hop[:, h] * (k if snr_convention == "per_bit" else 1.0)
        sigma = np.sqrt(es / (2.0 * np.maximum(snr_sym, 1e-300)))
        x = 2.0 * inverse[labels] - (levels - 1)
        y = x + sigma[:, None] * rng.standard_normal((n, 2))
        detected = np.clip(np.rint((y + (levels - 1)) / 2.0), 0, levels - 1).astype(np.int64)
        labels = gray[detected]
    bit_errors = popcount[src ^ labels].sum(axis=1) / k
    sym_errors = np.any(src != labels, axis=1).astype(float)
    return bit_errors, sym_errors


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

def _conditional_ber(M, g, conv):
    # scipy's erfc keeps this oracle independent of the closed-form kernels
    total = np.zeros_like(g)
    for w, om in qam_coefficients(M, conv).merged_terms():
        total += w * special.erfc(np.sqrt(om * g))
    return np.clip(total, 0.0, 0.5)


def _conditional_ser(M, g, conv):
    k = math.log2(M) if conv == "per_bit" else 1.0
    q = 1.0 - 1.0 / math.sqrt(M)
    p = 0.5 * special.erfc(np.sqrt(1.5 * k * g / (M - 1)))
    return 4.0 * q * p - 4.0 * q * q * p * p


def _fold_ber(p):
    total = np.zeros(p.shape[0])
    for j in range(p.shape[1]):
        total = total * (1.0 - 2.0 * p[:, j]) + p[:, j]
    return total


def _fold_any(p):
    return 1.0 - np.prod(1.0 - p, axis=1)


def _draw_snrs(snrs, rng, n):
    return np.column_stack([sample_snr(s, rng, n) for s in snrs])


def _draw_snrs_tilted(snrs, g_c, rng, n):
    e, w = tilted_exponentials(_tilt_means(snrs, g_c), rng, n)
    g = np.column_stack([(s.phi * e[:, j]) ** (1.0 / s.alpha) for j, s in enumerate(snrs)])
    return g, w


def _draw_outdated_tilted(snrs, rho, g_c, rng, n):
    """Outdated-CSI SNRs with the true-channel power drawn from the deep-fade mixture.

    The true gain ``h`` is drawn first (magnitude from the mixture, uniform
    phase) and the estimate from ``h_est | h ~ CN(sqrt(rho) h, 1 - rho)``.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho!r}")
    mus = [min(1.0, _TILT_SPAN * (g_c / s.avg_snr) ** s.alpha) for s in snrs]
    e1, w = tilted_exponentials(mus, rng, n)
    phase = np.exp(2j * math.pi * rng.random(e1.shape))
    h = np.sqrt(e1) * phase
    noise = (rng.standard_normal(e1.shape) + 1j * rng.standard_normal(e1.shape)) / math.sqrt(2.0)
    e2 = np.abs(math.sqrt(rho) * h + math.sqrt(1.0 - rho) * noise) ** 2
    g = np.column_stack([s.avg_snr * (e1[:, j] / e2[:, j]) ** (1.0 / s.alpha)
                         for j, s in enumerate(snrs)])
    return g, w


def _trial_values(kind, params, snrs, mc: McConfig, rng, n, extra):
    """Per-trial samples for one chunk.

    Returns an ``(n, cols)`` array and a flag that is true when the samples
    are unweighted probabilities, which get the ``1/n`` resolution floor.
    """
    conv = params.get("snr_convention", "per_bit")
    if kind == "capacity":
        return np.log1p(_draw_snrs(snrs, rng, n)) / math.log(2.0), False
    if kind == "ee":
        g = _draw_snrs(snrs, rng, n)
        return (np.log1p(g.min(axis=1)) / extra["total_power"])[:, None], False
    if kind not in _PROB_KINDS:
        raise ValueError(f"no Monte-Carlo estimator for {kind!r}")
    g_c = _critical_snr(kind, params, conv)
    w = None
    if kind == "ber_outdated":
        g, w = _draw_outdated_tilted(snrs, params["rho"], g_c, rng, n)
    elif kind == "ber_beamforming":
        t, r = int(params["t"]), int(params["r"])
        if mc.beam_mc_mode == "wishart":
            g = np.column_stack([sample_mp_snr(s.avg_snr, t, r, rng, n) for s in snrs])
        else:
            draws = [sample_mp_law_snr(s.avg_snr, r / t, params.get("s", 1.0), rng, n)
                     for s in snrs]
            g = np.column_stack([d[0] for d in draws])
            w = np.prod(np.column_stack([d[1] for d in draws]), axis=1)
    else:
        g, w = _draw_snrs_tilted(snrs, g_c, rng, n)
    if kind == "outage":
        vals = (g.min(axis=1) <= params["gamma_th"]).astype(float)
    elif kind == "bler":
        bp = BlerParams(params["rate"], int(params["block_length"]))
        if mc.bler_mc_mode == "linearized":
            q = np.clip(0.5 - bp.slope * (g - bp.gamma_th), 0.0, 1.0)
        else:
            q = _normal_q(g, bp)
        vals = _fold_any(q)
    elif mc.ber_mc_mode == "symbol":
        bits, syms = simulate_qam_chain(params["M"], g, rng, conv)
        vals = syms if kind == "ser" else bits
    elif kind == "ser":
        vals = _fold_any(_conditional_ser(params["M"], g, conv))
    else:
        vals = _fold_ber(_conditional_ber(params["M"], g, conv))
    unweighted = w is None or bool(np.all(w == 1.0))
    if not unweighted:
        vals = vals * w
    return vals[:, None], unweighted


def _normal_q(g, bp: BlerParams):
    g = np.maximum(g, 1e-300)
    cap = np.log2(1.0 + g)
    disp = g * (g + 2.0) / (g + 1.0) ** 2 * math.log2(math.e) ** 2
    arg = (cap - bp.rate) / np.sqrt(disp / bp.block_length)
    return 0.5 * special.erfc(arg / math.sqrt(2.0))


def _merge(a, b):
    """Chan's pairwise merge of (count, mean, M2) column statistics."""
    na, ma, sa = a
    nb, mb, sb = b
    if na == 0:
        return b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    m2 = sa + sb + delta * delta * (na * nb / n)
    return n, mean, m2


def _run_stream(args):
    kind, params, snrs, mc, worker, trials, extra = args
    rng = make_rng(mc.seed, worker)
    stats = (0, 0.0, 0.0)
    scale = None
    floor = True
    done = 0
    while done < trials:
        n = min(_CHUNK, trials - done)
        vals, unweighted = _trial_values(kind, params, snrs, mc, rng, n, extra)
        floor = floor and unweighted
        # statistics are kept relative to the first nonzero chunk peak so that
        # squares of very small estimates do not underflow
        peak = np.max(np.abs(vals), axis=0)
        if scale is None:
            scale = np.ones_like(peak)
        fresh = (scale == 1.0) & (peak > 0) & (np.asarray(stats[2]) == 0) \
            & (np.asarray(stats[1]) == 0)
        scale = np.where(fresh, peak, scale)
        v = vals / scale
        mean = v.mean(axis=0)
        m2 = ((v - mean) ** 2).sum(axis=0)
        stats = _merge(stats, (n, mean, m2))
        done += n
    return stats, floor, scale


def _worker_split(trials, workers):
    base, rem = divmod(trials, workers)
    return [base + (1 if w < rem else 0) for w in range(workers)]


def mc_metric(chain, spec: MetricSpec, mc: McConfig = McConfig()) -> McEstimate:
    """Monte-Carlo estimate of ``spec`` on ``chain`` with a ``confidence_sigma`` half-width."""
    snrs = as_snrs(chain)
    extra = {}
    if spec.kind == "ee":
        if len({s.alpha for s in snrs}) != 1:
            raise ValueError("this metric needs a common alpha across hops")
        if not isinstance(chain, HopChain):
            raise TypeError("the ee estimator needs a HopChain for its power inventory")
        inventory = PowerInventory.uniform(spec.get("circuit_power_w", 0.5))
        extra["total_power"] = total_power_w(chain, inventory)
    jobs = [(spec.kind, dict(spec.params), snrs, mc, w, t, extra)
            for w, t in enumerate(_worker_split(int(mc.trials), int(mc.workers))) if t > 0]
    if mc.workers > 1:
        with ProcessPoolExecutor(max_workers=mc.workers) as pool:
            results = list(pool.map(_run_stream, jobs))
    else:
        results = [_run_stream(j) for j in jobs]
    ref = np.max([r[2] for r in results], axis=0)
    stats = (0, 0.0, 0.0)
    floor = spec.kind in _PROB_KINDS
    for (cnt, mean, m2), unweighted, scale in results:
        k = scale / ref
        stats = _merge(stats, (cnt, mean * k, m2 * k * k))
        floor = floor and unweighted
    n, mean, m2 = stats
    mean = mean * ref
    stderr = np.sqrt(m2 / max(n - 1, 1) / n) * ref
    if floor:
        # unweighted probability samples resolve nothing finer than 1/n,
        # even when every trial came out the same
        stderr = np.maximum(stderr, 1.0 / n)
    if spec.kind == "capacity":
        j = int(np.argmin(mean))
        return McEstimate(float(mean[j]), float(mc.confidence_sigma * stderr[j]), n)
    return McEstimate(float(mean[0]), float(mc.confidence_sigma * stderr[0]), n)
