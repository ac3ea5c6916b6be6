import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import i0

from mdiqkd.channel import (
    ChannelParams, FockYieldTable, ProtocolParams, fock_yields, observe_statistics, simulate,
    z_orthogonal_yields,
)
from mdiqkd.sources import PAIRS, SOURCES, coherent_triple, two_pulse_coefficients


def gains(ch, mu_a, mu_b):
    """Coherent-state gains straight from the detector model, no photon-number expansion."""
    eta = ch.arm_transmittance
    u, v, P, pd = eta * mu_a, eta * mu_b, 1 - ch.pd, ch.pd
    qc = 2 * P**2 * math.exp(-(u + v) / 2) * (1 - P * math.exp(-u / 2)) * (1 - P * math.exp(-v / 2))
    qe = 2 * pd * P**2 * math.exp(-(u + v) / 2) * (i0(math.sqrt(u * v)) - P * math.exp(-(u + v) / 2))
    z = (qc + qe, ch.ed * qc + (1 - ch.ed) * qe)
    y = P * math.exp(-(u + v) / 4)
    sx = 2 * y**2 * (1 + 2 * y**2 - 4 * y * i0(math.sqrt(u * v) / 2) + i0(math.sqrt(u * v)))
    tx = ch.e0 * sx - 2 * (ch.e0 - ch.ed) * y**2 * (i0(math.sqrt(u * v)) - 1)
    return {"Z": z, "X": (sx, tx)}


@pytest.mark.parametrize("d", [0.0, 50.0, 100.0, 150.0])
def test_statistics_match_closed_form_gains(d):
    ch = ChannelParams(distance_km=d)
    proto = ProtocolParams(mu_x=0.055, mu_y=0.401, p_x=0.243, p_y=0.681, pX_given_x=0.709, pX_given_y=0.013)
    stats = simulate(ch, proto)
    mu = {"o": 0.0, "x": 0.055, "y": 0.401}
    for lr in PAIRS:
        ref = gains(ch, mu[lr[0]], mu[lr[1]])
        for b in ("Z", "X"):
            assert stats[b].S[lr] == pytest.approx(ref[b][0], rel=1e-9)
            assert stats[b].T[lr] == pytest.approx(ref[b][1], rel=1e-9)


def test_dead_detectors_give_zero_yields():
    ch = ChannelParams(pd=0.0, eta_d=0.0)
    for b in ("X", "Z"):
        assert not fock_yields(ch, b).s.any()


def test_vacuum_pair_monte_carlo():
    # four detectors dark-clicking independently; success = one H and one V click only
    pd = 0.1
    rng = np.random.default_rng(11)
    n = 10_000_000
    clicks = rng.random((n, 4), dtype=np.float32) < pd  # cH, cV, dH, dV
    h = clicks[:, 0].astype(int) + clicks[:, 2]
    v = clicks[:, 1].astype(int) + clicks[:, 3]
    p = float(np.mean((h == 1) & (v == 1)))
    sigma = math.sqrt(p * (1 - p) / n)
    for b in ("X", "Z"):
        s00 = fock_yields(ChannelParams(pd=pd), b).s[0, 0]
        assert abs(s00 - p) < 5 * sigma
        assert f"{s00:.3g}" == f"{p:.3g}" or abs(s00 - p) / p < 2e-3


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (0, 2), (3, 2)])
def test_orthogonal_inputs_photon_monte_carlo(m, n):
    # m H photons from Alice, n V photons from Bob, each lost or routed to c/d at random
    ch = ChannelParams(pd=0.02, distance_km=10)
    eta = ch.arm_transmittance
    rng = np.random.default_rng(100 * m + n)
    trials = 1_000_000

    def arm(k):
        arrive = rng.random((trials, k)) < eta
        to_c = rng.random((trials, k)) < 0.5
        c = (arrive & to_c).any(axis=1) | (rng.random(trials) < ch.pd)
        d = (arrive & ~to_c).any(axis=1) | (rng.random(trials) < ch.pd)
        return c, d

    cH, dH = arm(m)
    cV, dV = arm(n)
    psi_minus = (cH & dV & ~dH & ~cV) | (cV & dH & ~cH & ~dV)
    p = float(psi_minus.mean())
    sigma = math.sqrt(p * (1 - p) / trials)
    assert abs(z_orthogonal_yields(ch, 4)[m, n] - p) < 5 * sigma


def test_noiseless_z_basis_has_no_errors():
    t = fock_yields(ChannelParams(pd=0.0, ed=0.0, distance_km=30), "Z")
    assert np.all(t.e[1:, 1:] == 0)


@pytest.mark.parametrize("d", [0.0, 50.0, 150.0])
def test_yield_table_physical(d):
    ch = ChannelParams(distance_km=d)
    for b in ("X", "Z"):
        t = fock_yields(ch, b)
        assert np.all((t.s >= 0) & (t.s <= 1))
        assert np.all((t.e >= 0) & (t.e <= 1))
        assert t.e[0, 0] == ch.e0
        assert t.s[1, 1] > 0


@pytest.mark.parametrize("d", [50.0, 100.0])
def test_yields_nondecreasing_in_photon_numbers(d):
    for b in ("X", "Z"):
        s = fock_yields(ChannelParams(distance_km=d), b).s
        assert np.all(np.diff(s, axis=0) >= -1e-15)
        assert np.all(np.diff(s, axis=1) >= -1e-15)


def test_multi_photon_saturation_at_zero_distance():
    # with little loss and an empty opposite arm, many photons make both H detectors
    # click, which the success rule rejects; the Z-basis yield then falls with m
    s = fock_yields(ChannelParams(distance_km=0.0), "Z").s
    assert s[15, 0] < s[9, 0]
    assert np.all(np.diff(s[:9, :9], axis=0) >= 0)


def test_constant_yield_statistics(proto50):
    src = coherent_triple(proto50.mu_x, proto50.mu_y)
    tensor = two_pulse_coefficients(src, src)
    sig, err = 0.3, 0.1
    table = FockYieldTable("Z", np.full((16, 16), sig), np.full((16, 16), err))
    stats = observe_statistics(tensor, {"Z": table, "X": FockYieldTable("X", table.s, table.e)}, proto50)
    for lr in PAIRS:
        total = tensor[lr].sum()
        assert stats.Z.S[lr] == pytest.approx(sig * total, rel=1e-14)
        assert stats.Z.T[lr] == pytest.approx(sig * err * total, rel=1e-14)


def test_degenerate_probabilities_zero_counts():
    proto = ProtocolParams(mu_x=0.1, mu_y=0.4, p_x=1.0, p_y=0.0, pX_given_x=1.0, shared_vacuum=False)
    NX, NZ = proto.pair_counts("X"), proto.pair_counts("Z")
    assert NX[1, 1] == proto.N_t
    assert np.count_nonzero(NX) == 1
    assert not NZ.any()


@given(st.floats(0.0, 0.5), st.floats(0.0, 0.5), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_counts_partition_total(px, py, qo, qx, qy):
    proto = ProtocolParams(mu_x=0.1, mu_y=0.4, p_x=px, p_y=py, pX_given_o=qo, pX_given_x=qx,
                           pX_given_y=qy, shared_vacuum=False)
    counted = proto.pair_counts("X").sum() + proto.pair_counts("Z").sum()
    p = np.array([proto.source_prob(s) for s in SOURCES])
    q = np.array([qo, qx, qy])
    mismatched = proto.N_t * (np.outer(p * q, p * (1 - q)).sum() + np.outer(p * (1 - q), p * q).sum())
    assert counted + mismatched == pytest.approx(proto.N_t, rel=1e-12)


def test_shared_vacuum_counts(proto50):
    NX, NZ = proto50.pair_counts("X"), proto50.pair_counts("Z")
    p_o = proto50.p_o
    assert NX[0, 0] == NZ[0, 0] == pytest.approx(proto50.N_t * p_o**2)
    assert NZ[0, 2] == pytest.approx(proto50.N_t * p_o * proto50.p_y * (1 - proto50.pX_given_y))


@pytest.mark.parametrize("b", ["X", "Z"])
def test_gain_increases_with_detector_efficiency(b, proto50):
    effs = [0.05, 0.1, 0.145, 0.3, 0.6]
    S = [simulate(ChannelParams(eta_d=e, distance_km=50), proto50)[b].S for e in effs]
    for lr in PAIRS:
        if lr == "oo":
            continue
        assert all(S[i + 1][lr] > S[i][lr] for i in range(len(effs) - 1)), lr


@given(st.floats(1e-3, 0.3), st.floats(0.01, 0.6), st.floats(0.05, 0.5), st.floats(0.05, 0.45))
def test_party_swap_symmetry(mu_x, gap, px, py):
    stats = simulate(ChannelParams(distance_km=50), ProtocolParams(mu_x=mu_x, mu_y=mu_x + gap, p_x=px, p_y=py))
    for b in ("X", "Z"):
        for lr in PAIRS:
            assert stats[b].S[lr] == pytest.approx(stats[b].S[lr[::-1]], rel=1e-12)
            assert stats[b].T[lr] == pytest.approx(stats[b].T[lr[::-1]], rel=1e-12)
            assert 0 <= stats[b].T[lr] <= stats[b].S[lr] <= 1


def test_low_count_flagging(ch50, proto50):
    stats = simulate(ch50, proto50)
    assert "Z:oo" in stats.low_count
    assert stats.S_yy_Z == stats.Z.S["yy"]
    assert stats.E_yy_Z == pytest.approx(stats.Z.T["yy"] / stats.Z.S["yy"])
