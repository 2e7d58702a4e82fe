"""Asymptotic key rates against collective attacks, with reverse reconciliation.

Each subcarrier is treated as an independent GMCS link whose source carries
the extra intermodulation noise ``eps_S``.  That noise enters everywhere via
``V' = V + eps_S``.  Channel excess noise is input-referred:
``chi_line = 1/T - 1 + eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .intermod import ModulationConfig, source_noise
from .spectrum import ChannelPlan

DISCRIMINANT_RTOL = 1e-9


class GainUndefinedError(ArithmeticError):
    """The single-channel reference rate is zero, so the gain has no value."""


@dataclass(frozen=True)
class LinkModel:
    transmittance: float
    excess_noise: float = 0.0
    distance_km: float | None = None

    def __post_init__(self):
        if not 0 < self.transmittance <= 1:
            raise ValueError(f"transmittance must lie in (0, 1], got {self.transmittance}")
        if self.excess_noise < 0:
            raise ValueError(f"excess noise must be >= 0, got {self.excess_noise}")

    @classmethod
    def from_distance(cls, distance_km: float, excess_noise: float = 0.0,
                      loss_db_per_km: float = 0.2) -> "LinkModel":
        if distance_km < 0:
            raise ValueError(f"distance must be >= 0, got {distance_km}")
        t = 10.0 ** (-loss_db_per_km * distance_km / 10.0)
        return cls(t, excess_noise, distance_km)

    @property
    def chi_line(self) -> float:
        return 1.0 / self.transmittance - 1.0 + self.excess_noise


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    electronic_noise: float = 0.0

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"detector efficiency must lie in (0, 1], got {self.efficiency}")
        if self.electronic_noise < 0:
            raise ValueError(f"electronic noise must be >= 0, got {self.electronic_noise}")

    @property
    def chi_h(self) -> float:
        eta = self.efficiency
        return (1.0 - eta + self.electronic_noise) / eta

    @property
    def epr_variance(self) -> float | None:
        """Variance of the EPR ancilla in the entanglement-based detector model.

        Undefined (None) for a unit-efficiency detector; it never enters the rate.
        """
        if self.efficiency == 1.0:
            return None
        return (1.0 - self.efficiency + self.electronic_noise) / (1.0 - self.efficiency)


@dataclass(frozen=True)
class ProtocolParams:
    mod_variance: float = 10.0
    reconciliation_efficiency: float = 0.93
    rep_rate_hz: float = 1e6

    def __post_init__(self):
        if not self.mod_variance > 0:
            raise ValueError(f"modulation variance must be positive, got {self.mod_variance}")
        if not 0 <= self.reconciliation_efficiency <= 1:
            raise ValueError("reconciliation efficiency must lie in [0, 1], "
                             f"got {self.reconciliation_efficiency}")
        if not self.rep_rate_hz > 0:
            raise ValueError(f"repetition rate must be positive, got {self.rep_rate_hz}")

    @property
    def V(self) -> float:
        return self.mod_variance + 1.0


@dataclass(frozen=True)
class KeyRateResult:
    channel_index: int
    source_noise: float
    mutual_info_bits: float
    holevo_bits: float
    key_rate_bits_per_pulse: float
    key_rate_bits_per_sec: float


@dataclass(frozen=True)
class Preset:
    """A named bundle of protocol, detector and channel defaults."""

    params: ProtocolParams
    detector: DetectorModel
    excess_noise: float

    def link(self, distance_km: float) -> LinkModel:
        return LinkModel.from_distance(distance_km, self.excess_noise)


PAPER_SEC6 = Preset(
    params=ProtocolParams(mod_variance=10.0, reconciliation_efficiency=0.93, rep_rate_hz=1e6),
    detector=DetectorModel(efficiency=0.552, electronic_noise=0.015),
    excess_noise=0.02,
)
PRESETS = {"paper-sec6": PAPER_SEC6}


def g_function(x: float) -> float:
    """Entropy of a thermal state with mean photon number x, in bits."""
    if x < 0:
        if x > -1e-12:
            return 0.0
        raise ValueError(f"G(x) needs x >= 0, got {x}")
    if x == 0:
        return 0.0
    # (x+1) log(x+1) - x log x, rearranged into positive terms
    lead = x * math.log1p(1.0 / x) if x >= 1.0 else x * (math.log1p(x) - math.log(x))
    return (lead + math.log1p(x)) / math.log(2.0)


def _guarded_sqrt(value: float, scale: float) -> float:
    if value < 0:
        if value < -DISCRIMINANT_RTOL * scale:
            raise ArithmeticError(f"negative discriminant {value:.3e} in symplectic spectrum")
        return 0.0
    return math.sqrt(value)


@dataclass(frozen=True)
class _Moments:
    """Covariance entries of the two-mode state, with its small differences
    written out so they keep full relative precision near the pure state."""

    a: float        # V' = V + eps_S
    b: float        # T (V' + chi_line)
    c2: float       # T (V'^2 - 1)
    s: float        # sqrt(B) = a b - c2
    a_minus_b: float
    s_minus_1: float
    t_chi: float    # T chi_line

    @property
    def A(self) -> float:
        return self.a ** 2 + self.b ** 2 - 2.0 * self.c2

    @property
    def B(self) -> float:
        return self.s ** 2

    @property
    def trace_gap(self) -> float:
        """(a + b)^2 - 4 c^2, i.e. (lambda_1 + lambda_2)^2."""
        return (self.a + self.b) ** 2 - 4.0 * self.c2


def _moments(params: ProtocolParams, link: LinkModel, eps_s: float) -> _Moments:
    vp = params.V + eps_s
    t, eps = link.transmittance, link.excess_noise
    loss = 1.0 - t
    t_chi = loss + t * eps
    return _Moments(
        a=vp,
        b=t * vp + t_chi,
        c2=t * (vp * vp - 1.0),
        s=t + vp * t_chi,
        a_minus_b=loss * (vp - 1.0) - t * eps,
        s_minus_1=loss * (vp - 1.0) + vp * t * eps,
        t_chi=t_chi,
    )


def symplectic_eigenvalues_state(params: ProtocolParams, link: LinkModel,
                                 eps_s: float = 0.0) -> tuple[float, float, float]:
    """Symplectic spectrum of the shared state after the channel.

    ``lambda_{1,2}^2 = (A +- sqrt(A^2 - 4B)) / 2`` with
    ``A = V'^2 - 2T(V'^2 - 1) + T^2 (V' + chi_line)^2`` and
    ``B = T^2 (1 + V' chi_line)^2``.  The discriminant is evaluated as
    ``(a - b)^2 ((a + b)^2 - 4c^2)``, which is the same polynomial but does not
    lose precision as the state approaches purity.
    """
    m = _moments(params, link, eps_s)
    l1 = 0.5 * (math.sqrt(m.trace_gap) + abs(m.a_minus_b))
    # lambda_1 * lambda_2 = sqrt(B)
    return l1, m.s / l1, 1.0


def symplectic_eigenvalues_conditional(params: ProtocolParams, link: LinkModel,
                                       det: DetectorModel, eps_s: float = 0.0):
    """Symplectic spectrum conditioned on Bob's homodyne outcome.

    ``lambda_{4,5}^2 = (C +- sqrt(C^2 - 4D)) / 2`` with
    ``C = (A chi_h + V' sqrt(B) + T(V' + chi_line)) / (T(V' + chi_line) + chi_h)`` and
    ``D = (sqrt(B) V' + B chi_h) / (T(V' + chi_line) + chi_h)``.
    ``C^2 - 4D`` times the squared denominator is expanded in powers of chi_h
    with every coefficient in product form.
    """
    m = _moments(params, link, eps_s)
    h = det.chi_h
    denom = m.b + h
    c = (m.A * h + m.a * m.s + m.b) / denom
    d = (m.s * m.a + m.B * h) / denom

    n0 = ((m.a * m.a - 1.0) * m.t_chi) ** 2
    n1 = 2.0 * m.a_minus_b * (m.a_minus_b * (m.a * m.s + m.b) + 2.0 * m.s * m.s_minus_1)
    n2 = m.a_minus_b ** 2 * m.trace_gap
    num = n0 + h * (n1 + h * n2)
    root = _guarded_sqrt(num, n0 + h * (abs(n1) + h * n2)) / denom

    l4 = math.sqrt(0.5 * (c + root))
    return l4, math.sqrt(d) / l4, 1.0, 1.0


def mutual_information(params: ProtocolParams, link: LinkModel, det: DetectorModel,
                       eps_s: float = 0.0) -> float:
    """Alice-Bob Shannon information per pulse, in bits."""
    chi_tot = link.chi_line + det.chi_h / link.transmittance
    return 0.5 * math.log2((params.V + eps_s + chi_tot) / (1.0 + eps_s + chi_tot))


def holevo_bound(params: ProtocolParams, link: LinkModel, det: DetectorModel,
                 eps_s: float = 0.0) -> float:
    lam = symplectic_eigenvalues_state(params, link, eps_s)
    cond = symplectic_eigenvalues_conditional(params, link, det, eps_s)
    return (sum(g_function((x - 1.0) / 2.0) for x in lam)
            - sum(g_function((x - 1.0) / 2.0) for x in cond))


def key_rate_from_noise(params: ProtocolParams, link: LinkModel, det: DetectorModel,
                        eps_s: float = 0.0, channel_index: int = 0) -> KeyRateResult:
    """Key rate for a link whose source carries extra noise ``eps_s``."""
    if eps_s < 0:
        raise ValueError(f"source noise must be >= 0, got {eps_s}")
    i_ab = mutual_information(params, link, det, eps_s)
    s_be = holevo_bound(params, link, det, eps_s)
    k = params.reconciliation_efficiency * i_ab - s_be
    return KeyRateResult(channel_index, eps_s, i_ab, s_be, k, params.rep_rate_hz * max(k, 0.0))


def single_channel_rate(params: ProtocolParams, link: LinkModel, det: DetectorModel) -> KeyRateResult:
    return key_rate_from_noise(params, link, det, 0.0, 0)


def _modulation(cfg: ModulationConfig, params: ProtocolParams) -> ModulationConfig:
    if cfg.mod_variance != params.mod_variance:
        raise ValueError("modulation variance differs between ModulationConfig "
                         f"({cfg.mod_variance}) and ProtocolParams ({params.mod_variance})")
    return cfg


def channel_key_rate(plan: ChannelPlan, k: int, cfg: ModulationConfig, params: ProtocolParams,
                     link: LinkModel, det: DetectorModel) -> KeyRateResult:
    eps_s = source_noise(plan, k, _modulation(cfg, params))
    return key_rate_from_noise(params, link, det, eps_s, k)


def total_key_rate(plan: ChannelPlan, cfg: ModulationConfig, params: ProtocolParams,
                   link: LinkModel, det: DetectorModel) -> tuple[float, list[KeyRateResult]]:
    """Sum of per-channel rates in bits/s; negative channels contribute zero."""
    results = [channel_key_rate(plan, k, cfg, params, link, det) for k in plan.indices()]
    return sum(r.key_rate_bits_per_sec for r in results), results


def multichannel_gain(plan: ChannelPlan, cfg: ModulationConfig, params: ProtocolParams,
                      link: LinkModel, det: DetectorModel) -> float:
    """Total multi-channel rate over the single-channel rate at identical parameters.

    Raises GainUndefinedError where the single-channel rate is not positive.
    """
    r_sc = single_channel_rate(params, link, det).key_rate_bits_per_sec
    if r_sc <= 0:
        raise GainUndefinedError(
            f"single-channel key rate is zero at T={link.transmittance:.4g}; gain undefined")
    r_tot, _ = total_key_rate(plan, cfg, params, link, det)
    return r_tot / r_sc
