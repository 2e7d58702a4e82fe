"""Extra source noise from second-order subcarrier intermodulation.

All quantities are in shot-noise units.  The modulation is described by the
mean Rayleigh index ``m_bar`` and the Gaussian quadrature variance ``V_A``;
the carrier amplitude is implied by ``V_A = alpha0**2 * sigma**2 / 4``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .spectrum import ChannelPlan, check_index, m2_count

#: second-order Taylor expansion of the phase modulator holds below this index
MAX_TAYLOR_INDEX = 0.02
MIN_TRIALS = 10_000
BLOCK_SIZE = 1 << 15


@dataclass(frozen=True)
class ModulationConfig:
    mean_index: float
    mod_variance: float
    lo_index: float = 0.01

    def __post_init__(self):
        if not self.mean_index > 0:
            raise ValueError(f"mean modulation index must be positive, got {self.mean_index}")
        if not self.mod_variance > 0:
            raise ValueError(f"modulation variance must be positive, got {self.mod_variance}")
        if not self.lo_index > 0:
            raise ValueError(f"LO modulation index must be positive, got {self.lo_index}")
        if self.mean_index > MAX_TAYLOR_INDEX:
            warnings.warn(
                f"mean modulation index {self.mean_index} exceeds {MAX_TAYLOR_INDEX}; "
                "second-order intermodulation model may be inaccurate",
                stacklevel=3,
            )

    @property
    def sigma(self) -> float:
        """Rayleigh scale, from ``m_bar = sigma * sqrt(pi / 2)``."""
        return self.mean_index * math.sqrt(2.0 / math.pi)

    @property
    def carrier_amplitude(self) -> float:
        return 2.0 * math.sqrt(self.mod_variance) / self.sigma


@dataclass(frozen=True)
class NoiseProfile:
    plan: ChannelPlan
    per_channel_ratio: tuple[float, ...]

    def __post_init__(self):
        if len(self.per_channel_ratio) != self.plan.n_channels:
            raise ValueError("one ratio per channel required")

    def m2(self) -> list[int]:
        return [m2_count(self.plan.n_channels, k) for k in self.plan.indices()]

    def rows(self):
        """(k, M2, epsilon_ratio) tuples in channel order."""
        return list(zip(self.plan.indices(), self.m2(), self.per_channel_ratio))


def intermod_noise_ratio(plan: ChannelPlan | int, k: int, cfg: ModulationConfig) -> float:
    """``eps_S(k) / V_A = M2(N, k) * m_bar**2 / (2 pi)``."""
    n = plan if isinstance(plan, int) else plan.n_channels
    return m2_count(n, k) * cfg.mean_index ** 2 / (2.0 * math.pi)


def source_noise(plan: ChannelPlan | int, k: int, cfg: ModulationConfig) -> float:
    """Absolute extra source noise eps_S(k) in shot-noise units."""
    return intermod_noise_ratio(plan, k, cfg) * cfg.mod_variance


def noise_profile(plan: ChannelPlan, cfg: ModulationConfig) -> NoiseProfile:
    ratios = tuple(intermod_noise_ratio(plan, k, cfg) for k in plan.indices())
    return NoiseProfile(plan, ratios)


def bessel_k0(x: float) -> float:
    """Modified Bessel function of the second kind, order zero."""
    if not x > 0:
        raise ValueError(f"K0 needs x > 0, got {x}")
    return float(special.k0(x))


def product_gaussian_pdf(z, sigma: float):
    """Density of ``x * y`` for independent ``x, y ~ N(0, sigma**2)``.

    ``K0(|z| / sigma**2) / (pi sigma**2)``.  The log singularity at ``z = 0`` is
    integrable but not evaluable, so zero is rejected; integrate with open rules.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise ValueError("product Gaussian density diverges at z = 0")
    s2 = sigma * sigma
    out = special.k0(np.abs(z) / s2) / (math.pi * s2)
    return float(out) if out.ndim == 0 else out


def pairwise_term_variance(sigma: float, equal_indices: bool) -> float:
    """Second moment of ``m_r m_s sin(phi_r + phi_s)`` for Rayleigh(sigma) m.

    ``E[m^2]^2 / 2 = 2 sigma^4`` for distinct channels and
    ``E[m^4] / 2 = 4 sigma^4`` when both factors are the same channel.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (4.0 if equal_indices else 2.0) * sigma ** 4


def intermod_pairs(n: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unordered signed pairs {r, s} with r + s == k, plus their multiplicity.

    Ordered pairs with r != s occur twice in the second-order sum; r == s once.
    """
    check_index(n, k)
    rs, ss, weight = [], [], []
    for r in range(-n, n + 1):
        s = k - r
        if r == 0 or s == 0 or abs(s) > n or s < r:
            continue
        rs.append(r)
        ss.append(s)
        weight.append(1.0 if r == s else 2.0)
    return np.array(rs, dtype=int), np.array(ss, dtype=int), np.array(weight)


@dataclass(frozen=True)
class SampleStats:
    trials: int
    mean: float
    variance: float
    excess_kurtosis: float
    mean_stderr: float
    variance_stderr: float
    kurtosis_stderr: float
    expected_variance: float

    def variance_z(self) -> float:
        return (self.variance - self.expected_variance) / self.variance_stderr

    def mean_z(self) -> float:
        return self.mean / self.mean_stderr

    def kurtosis_z(self) -> float:
        return self.excess_kurtosis / self.kurtosis_stderr


def sample_stats(x: np.ndarray, expected_variance: float = float("nan")) -> SampleStats:
    """Moments with influence-function standard errors."""
    x = np.asarray(x, dtype=float)
    n = x.size
    mu = x.mean()
    d = x - mu
    d2 = d * d
    m2 = d2.mean()
    m3 = (d2 * d).mean()
    m4 = (d2 * d2).mean()
    if_m2 = d2 - m2
    if_m4 = d2 * d2 - m4 - 4.0 * m3 * d
    if_kurt = if_m4 / m2 ** 2 - 2.0 * m4 * if_m2 / m2 ** 3
    root_n = math.sqrt(n)
    return SampleStats(
        trials=n,
        mean=float(mu),
        variance=float(m2),
        excess_kurtosis=float(m4 / m2 ** 2 - 3.0),
        mean_stderr=float(math.sqrt(m2) / root_n),
        variance_stderr=float(if_m2.std() / root_n),
        kurtosis_stderr=float(if_kurt.std() / root_n),
        expected_variance=float(expected_variance),
    )


def _draw_block(seed_seq, n, k, size, sigma, alpha0, pairs, quadrature):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    # inverse CDF on u in (0, 1]
    m = sigma * np.sqrt(-2.0 * np.log1p(-rng.random((size, n))))
    phi = 2.0 * np.pi * rng.random((size, n))

    r, s, w = pairs
    ri, si = np.abs(r) - 1, np.abs(s) - 1
    phase = np.sign(r) * phi[:, ri] + np.sign(s) * phi[:, si]
    trig = np.sin if quadrature == "x" else np.cos
    delta = (alpha0 / 8.0) * (m[:, ri] * m[:, si] * trig(phase)) @ w

    mk, pk = m[:, k - 1], phi[:, k - 1]
    signal = (alpha0 / 2.0) * mk * (np.cos(-pk) if quadrature == "x" else np.sin(-pk))
    return signal, delta


def sample_quadrature(plan, k, cfg, trials, seed, quadrature="x", workers=1):
    """Draw ``trials`` realisations of the signal and intermodulation parts.

    Trials are cut into fixed blocks, each with its own stream spawned from
    ``seed``, so the output is bit-identical for any ``workers`` count.
    Returns ``(signal, delta)`` arrays.
    """
    n = plan if isinstance(plan, int) else plan.n_channels
    check_index(n, k)
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if quadrature not in ("x", "p"):
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    pairs = intermod_pairs(n, k)
    n_blocks = -(-trials // BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * (n_blocks - 1) + [trials - BLOCK_SIZE * (n_blocks - 1)]
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    args = [(c, n, k, size, cfg.sigma, cfg.carrier_amplitude, pairs, quadrature)
            for c, size in zip(children, sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda a: _draw_block(*a), args))
    else:
        blocks = [_draw_block(*a) for a in args]
    signal = np.concatenate([b[0] for b in blocks])
    delta = np.concatenate([b[1] for b in blocks])
    return signal, delta


def sample_delta_x(plan, k, cfg, trials, seed, quadrature="x", workers=1) -> SampleStats:
    """Monte-Carlo statistics of the intermodulation noise on channel k."""
    _, delta = sample_quadrature(plan, k, cfg, trials, seed, quadrature, workers)
    return sample_stats(delta, source_noise(plan, k, cfg))


def sample_signal(plan, k, cfg, trials, seed, quadrature="x", workers=1) -> SampleStats:
    """Monte-Carlo statistics of the Gaussian data part of channel k."""
    signal, _ = sample_quadrature(plan, k, cfg, trials, seed, quadrature, workers)
    return sample_stats(signal, cfg.mod_variance)
