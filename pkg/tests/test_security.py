import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scmqkd import oracles
from scmqkd.intermod import ModulationConfig, source_noise
from scmqkd.security import (PAPER_SEC6, DetectorModel, GainUndefinedError, LinkModel,
                             ProtocolParams, channel_key_rate, g_function, holevo_bound,
                             key_rate_from_noise, multichannel_gain, mutual_information,
                             single_channel_rate, symplectic_eigenvalues_conditional,
                             symplectic_eigenvalues_state, total_key_rate)
from scmqkd.spectrum import HIGH_PLAN, LOW_PLAN, MEDIUM_PLAN, ChannelPlan

P = PAPER_SEC6.params
DET = PAPER_SEC6.detector
CFG = ModulationConfig(0.01, 10.0)


def test_link_model():
    link = LinkModel.from_distance(50, 0.02)
    assert link.transmittance == pytest.approx(0.1)
    assert link.chi_line == pytest.approx(9.02)
    assert LinkModel.from_distance(0).chi_line == 0
    for bad in [dict(transmittance=0), dict(transmittance=1.1), dict(transmittance=0.5, excess_noise=-1)]:
        with pytest.raises(ValueError):
            LinkModel(**bad)
    with pytest.raises(ValueError):
        LinkModel.from_distance(-1)


def test_detector_model():
    assert DET.chi_h == pytest.approx((1 - 0.552 + 0.015) / 0.552)
    assert DET.epr_variance == pytest.approx((1 - 0.552 + 0.015) / (1 - 0.552))
    ideal = DetectorModel(1.0, 0.02)
    assert ideal.chi_h == pytest.approx(0.02) and ideal.epr_variance is None
    with pytest.raises(ValueError):
        DetectorModel(0.0)


def test_protocol_params():
    assert P.V == 11
    with pytest.raises(ValueError):
        ProtocolParams(10, 1.2)
    with pytest.raises(ValueError):
        ProtocolParams(0)


# -- mutual information ------------------------------------------------------

def test_mutual_information_perfect_link():
    val = mutual_information(ProtocolParams(10), LinkModel(1.0), DetectorModel(1.0, 0.0))
    assert val == pytest.approx(0.5 * math.log2(11), rel=1e-14)


def test_mutual_information_regression():
    # 40-digit evaluation of the closed form
    val = mutual_information(P, LinkModel.from_distance(50, 0.02), DET)
    assert val == pytest.approx(0.31298658661963319, rel=1e-13)


def test_mutual_information_decreases_with_source_noise():
    link = LinkModel.from_distance(50, 0.02)
    assert mutual_information(P, link, DET, 0.0124) < mutual_information(P, link, DET, 0.0)


# -- symplectic spectra --------------------------------------------------------

def test_lossless_channel_is_pure():
    assert symplectic_eigenvalues_state(P, LinkModel(1.0)) == (1.0, 1.0, 1.0)
    l4, l5, l6, l7 = symplectic_eigenvalues_conditional(P, LinkModel(1.0), DET)
    assert l4 == pytest.approx(1.0, abs=1e-12) and l5 == pytest.approx(1.0, abs=1e-12)
    assert (l6, l7) == (1.0, 1.0)


@pytest.mark.parametrize("eps_s", [0.0, 0.01])
def test_vanishing_transmittance_limit(eps_s):
    l1, l2, _ = symplectic_eigenvalues_state(P, LinkModel(1e-6), eps_s)
    assert l1 == pytest.approx(P.V + eps_s, abs=1e-3)
    assert l2 == pytest.approx(1.0, abs=1e-3)


def test_eigenvalue_regression():
    link = LinkModel.from_distance(25, 0.02)
    l1, l2, l3 = symplectic_eigenvalues_state(P, link)
    assert l1 == pytest.approx(7.8399831700695964, rel=1e-12)
    assert l2 == pytest.approx(1.0085853855583125, rel=1e-12)
    l4, l5, _, _ = symplectic_eigenvalues_conditional(P, link, DET)
    assert l4 == pytest.approx(5.2595277509253274, rel=1e-12)
    assert l5 == pytest.approx(1.0032699888265521, rel=1e-12)


def test_perfect_detector_reduction():
    link = LinkModel.from_distance(30, 0.01)
    vp = P.V + 0.003
    t, chi = link.transmittance, link.chi_line
    a = vp ** 2 - 2 * t * (vp ** 2 - 1) + t ** 2 * (vp + chi) ** 2
    b = t ** 2 * (1 + vp * chi) ** 2
    c = (vp * math.sqrt(b) + t * (vp + chi)) / (t * (vp + chi))
    d = math.sqrt(b) * vp / (t * (vp + chi))
    l4, l5, _, _ = symplectic_eigenvalues_conditional(P, link, DetectorModel(1.0, 0.0), 0.003)
    assert l4 ** 2 + l5 ** 2 == pytest.approx(c, rel=1e-12)
    assert (l4 * l5) ** 2 == pytest.approx(d, rel=1e-12)


def test_spectrum_matches_covariance_matrix():
    link = LinkModel.from_distance(35, 0.03)
    va, eps_s = 7.0, 0.01
    v = va + 1 + eps_s
    t, chi = link.transmittance, link.chi_line
    c = math.sqrt(t * (v * v - 1))
    z = np.diag([1.0, -1.0])
    gamma = np.block([[v * np.eye(2), c * z], [c * z, t * (v + chi) * np.eye(2)]])
    num = sorted(oracles.symplectic_spectrum(gamma), reverse=True)
    l1, l2, _ = symplectic_eigenvalues_state(ProtocolParams(va), link, eps_s)
    assert num == pytest.approx([l1, l2], rel=1e-10)


# -- G and Holevo ---------------------------------------------------------------

def test_g_function():
    assert g_function(0) == 0
    assert g_function(1) == 2
    assert g_function(0.5) == pytest.approx(1.3774437510817343, rel=1e-14)
    with pytest.raises(ValueError):
        g_function(-0.1)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_g_nonnegative_increasing(a, b):
    lo, hi = sorted((a, b))
    assert 0 <= g_function(lo) <= g_function(hi)


def test_g_large_argument():
    x = 1e6
    assert g_function(x) == pytest.approx(math.log2(x) + math.log2(math.e), abs=1e-6)


def test_holevo_zero_for_lossless():
    for det in (DET, DetectorModel(0.7, 0.1), DetectorModel(1.0, 0.0)):
        assert holevo_bound(P, LinkModel(1.0), det) == pytest.approx(0.0, abs=1e-12)


def test_holevo_regression():
    assert holevo_bound(P, LinkModel.from_distance(50, 0.02), DET) == pytest.approx(
        0.28220683276370235, rel=1e-12)


def test_holevo_non_decreasing_in_excess_noise():
    vals = [holevo_bound(P, LinkModel.from_distance(50, e), DET) for e in np.linspace(0, 0.1, 41)]
    assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))


# -- key rates ---------------------------------------------------------------------

@pytest.mark.parametrize("dist", [0, 10, 40, 60])
def test_key_rate_matches_covariance_oracle(dist):
    link = PAPER_SEC6.link(dist)
    for eps_s in (0.0, 0.012):
        k = key_rate_from_noise(P, link, DET, eps_s).key_rate_bits_per_pulse
        ref = oracles.covariance_key_rate(10, 0.93, link.transmittance, 0.02, 0.552, 0.015, eps_s)
        assert k == pytest.approx(ref, abs=1e-11)


def test_single_plan_reduces_to_single_channel():
    link = PAPER_SEC6.link(20)
    one = channel_key_rate(ChannelPlan(1), 1, CFG, P, link, DET)
    sc = single_channel_rate(P, link, DET)
    assert one.source_noise == 0
    assert one.key_rate_bits_per_pulse == sc.key_rate_bits_per_pulse
    r_tot, per = total_key_rate(ChannelPlan(1), CFG, P, link, DET)
    assert r_tot == sc.key_rate_bits_per_sec and len(per) == 1


def test_channel_rate_below_single_channel():
    link = PAPER_SEC6.link(20)
    res = channel_key_rate(LOW_PLAN, 5, CFG, P, link, DET)
    sc = single_channel_rate(P, link, DET)
    assert 0 < res.key_rate_bits_per_pulse < sc.key_rate_bits_per_pulse
    assert res.key_rate_bits_per_sec == pytest.approx(1e6 * res.key_rate_bits_per_pulse)
    assert res.source_noise == pytest.approx(source_noise(LOW_PLAN, 5, CFG))
    assert res.key_rate_bits_per_pulse == pytest.approx(
        0.93 * res.mutual_info_bits - res.holevo_bits, abs=1e-15)


def test_worst_channel_dies_before_single_channel():
    res = channel_key_rate(HIGH_PLAN, 1, CFG, P, PAPER_SEC6.link(104), DET)
    assert res.key_rate_bits_per_pulse <= 0
    assert res.key_rate_bits_per_sec == 0
    assert single_channel_rate(P, PAPER_SEC6.link(104), DET).key_rate_bits_per_pulse > 0


def test_mismatched_modulation_variance():
    with pytest.raises(ValueError):
        channel_key_rate(LOW_PLAN, 1, ModulationConfig(0.01, 5.0), P, PAPER_SEC6.link(1), DET)


def test_total_rate_grows_with_channel_count():
    link = PAPER_SEC6.link(50)
    r40, per = total_key_rate(HIGH_PLAN, CFG, P, link, DET)
    r5, _ = total_key_rate(LOW_PLAN, CFG, P, link, DET)
    assert r40 > r5
    assert [r.channel_index for r in per] == list(range(1, 41))
    assert r40 == pytest.approx(sum(max(r.key_rate_bits_per_sec, 0) for r in per))


def test_channel_ordering():
    for plan in (LOW_PLAN, MEDIUM_PLAN, HIGH_PLAN):
        for dist in (0, 30, 60, 90, 100):
            _, per = total_key_rate(plan, CFG, P, PAPER_SEC6.link(dist), DET)
            k = [r.key_rate_bits_per_pulse for r in per]
            assert all(b >= a for a, b in zip(k, k[1:]))


def test_beta_zero_gives_minus_holevo():
    params = ProtocolParams(10, 0.0)
    for dist in (0, 20, 80):
        link = PAPER_SEC6.link(dist)
        res = key_rate_from_noise(params, link, DET, 0.005)
        assert res.key_rate_bits_per_pulse == pytest.approx(-res.holevo_bits)
        assert res.key_rate_bits_per_pulse <= 0


def test_trusted_detector_noise_can_raise_rate_near_cutoff():
    # trusted electronic noise is not monotone harmful under reverse reconciliation
    link = LinkModel.from_distance(108.39935, 0.0433486)
    params = ProtocolParams(10.2209622, 0.95349526)
    low = key_rate_from_noise(params, link, DetectorModel(0.65875108, 0.0026366), 0.0195327)
    high = key_rate_from_noise(params, link, DetectorModel(0.65875108, 0.05), 0.0195327)
    assert 0 < low.key_rate_bits_per_pulse < high.key_rate_bits_per_pulse


# -- gain ----------------------------------------------------------------------------

def test_gain_near_channel_count_for_small_index():
    gain = multichannel_gain(MEDIUM_PLAN, ModulationConfig(0.001, 10.0), P, PAPER_SEC6.link(50), DET)
    assert gain == pytest.approx(15, rel=0.02)
    assert gain < 15


def test_gain_reduced_by_intermodulation():
    link = PAPER_SEC6.link(50)
    for plan in (LOW_PLAN, MEDIUM_PLAN, HIGH_PLAN):
        assert 0 < multichannel_gain(plan, CFG, P, link, DET) < plan.n_channels


def test_gain_zero_and_undefined():
    # past the N=40 cutoff, before the single-channel one
    assert multichannel_gain(HIGH_PLAN, CFG, P, PAPER_SEC6.link(106), DET) == 0
    with pytest.raises(GainUndefinedError):
        multichannel_gain(HIGH_PLAN, CFG, P, PAPER_SEC6.link(115), DET)


@settings(max_examples=60, deadline=None)
@given(st.floats(2, 40), st.floats(0.8, 1.0), st.floats(0, 150), st.floats(0, 0.1),
       st.floats(0.3, 1.0), st.floats(0, 0.2), st.floats(0, 0.05))
def test_eigenvalues_physical(va, beta, dist, eps, eta, vel, eps_s):
    params, link, det = ProtocolParams(va, beta), LinkModel.from_distance(dist, eps), DetectorModel(eta, vel)
    lam = symplectic_eigenvalues_state(params, link, eps_s)
    cond = symplectic_eigenvalues_conditional(params, link, det, eps_s)
    assert min(lam + cond) >= 1 - 1e-12
    assert lam[0] >= lam[1] - 1e-12 and cond[0] >= cond[1] - 1e-12


def test_reduction_absolute_agreement_including_negative_rates():
    # no positivity filter: near the cutoff the rate is a small difference of
    # O(1) entropies, so agreement is measured against the size of those terms
    from scmqkd import oracles
    from scmqkd.verify import random_physical_points

    for va, beta, dist, eps, eta, vel in random_physical_points(40, seed=6, max_km=120):
        link = LinkModel.from_distance(dist, eps)
        det = DetectorModel(eta, vel)
        params = ProtocolParams(va, beta)
        res = key_rate_from_noise(params, link, det)
        ref = oracles.gmcs_key_rate(va, beta, link.transmittance, eps, eta, vel)
        scale = max(symplectic_eigenvalues_state(params, link))
        assert abs(res.key_rate_bits_per_pulse - ref) <= 1e-13 * scale * 10, (va, beta, dist)
