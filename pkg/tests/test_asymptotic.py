import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdiqkd.asymptotic import (
    e11_upper_asymptotic, error_form, g_coefficients, s11_lower_v1, s11_lower_v2, v1_form,
)
from mdiqkd.channel import (
    BasisStatistics, ChannelParams, FockYieldTable, ProtocolParams, fock_yields, observe_statistics, simulate,
)
from mdiqkd.sources import PAIRS, coherent_triple, two_pulse_coefficients

intensities = st.tuples(st.floats(1e-3, 0.4), st.floats(0.02, 0.6))


def triple(t):
    return coherent_triple(t[0], t[0] + t[1])


def test_g_nonnegative_table_point():
    src = coherent_triple(0.068, 0.275)
    c = g_coefficients(src, src)
    assert all(v >= 0 for v in c.g.values())
    assert c.g["xy"] == c.g["yx"]
    assert c.a_tilde_12 > 0 and c.b_tilde_12 > 0


@given(intensities, intensities)
def test_g_identities(ta, tb):
    alice, bob = triple(ta), triple(tb)
    c = g_coefficients(alice, bob)
    a0, A0 = alice.decoy.coeffs[0], alice.signal.coeffs[0]
    b0, B0 = bob.decoy.coeffs[0], bob.signal.coeffs[0]
    g = c.g
    assert g["oo"] == pytest.approx(a0 * b0 * g["xx"] - a0 * B0 * g["xy"] - A0 * b0 * g["yx"], rel=1e-10)
    assert g["ox"] == pytest.approx(a0 * g["xx"] - A0 * g["yx"], rel=1e-10)
    assert g["xo"] == pytest.approx(b0 * g["xx"] - B0 * g["xy"], rel=1e-10)
    assert g["oy"] == pytest.approx(a0 * g["xy"], rel=1e-14)
    assert g["yo"] == pytest.approx(b0 * g["yx"], rel=1e-14)
    assert all(v >= 0 for v in g.values())


def _stats_from(s, e, proto, basis="Z"):
    src = coherent_triple(proto.mu_x, proto.mu_y)
    tensor = two_pulse_coefficients(src, src)
    t = FockYieldTable(basis, s, e)
    return observe_statistics(tensor, {"Z": t, "X": FockYieldTable("X", s, e)}, proto)[basis], src


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(1e-3, 1),
       st.floats(1e-3, 0.3), st.floats(0.05, 0.5))
def test_bounds_exact_without_multiphoton(s00, s01, s10, s11, mu_x, gap):
    # with only vacuum/single-photon yields, both decoy formulas recover s11 exactly
    s = np.zeros((16, 16))
    s[0, 0], s[0, 1], s[1, 0], s[1, 1] = s00, s01, s10, s11
    proto = ProtocolParams(mu_x=mu_x, mu_y=mu_x + gap, p_x=0.3, p_y=0.4)
    stats, src = _stats_from(s, np.full((16, 16), 0.2), proto)
    c = g_coefficients(src, src)
    tol = 1e-7 * max(s00, s01, s10, s11) / s11
    assert s11_lower_v1(stats.S, c) == pytest.approx(s11, rel=tol)
    assert s11_lower_v2(stats.S, c) == pytest.approx(s11, rel=tol)


@given(st.floats(0.5, 1), st.floats(1e-3, 0.3), st.floats(0.05, 0.5))
def test_error_bound_exact_without_multiphoton(e11, mu_x, gap):
    s = np.zeros((16, 16))
    s[0, 0], s[0, 1], s[1, 0], s[1, 1] = 0.01, 0.02, 0.03, 0.4
    e = np.full((16, 16), 0.5)
    e[1, 1] = e11 / 4
    proto = ProtocolParams(mu_x=mu_x, mu_y=mu_x + gap, p_x=0.3, p_y=0.4)
    stats, src = _stats_from(s, e, proto)
    c = g_coefficients(src, src)
    assert e11_upper_asymptotic(stats.T, 0.4, c) == pytest.approx(e11 / 4, rel=1e-7)


@pytest.mark.parametrize("d", [0.0, 25.0, 50.0, 100.0, 150.0])
def test_validity_on_generated_statistics(d):
    ch = ChannelParams(distance_km=d)
    rng = np.random.default_rng(int(d))
    for _ in range(20):
        mu_y = rng.uniform(0.1, 0.8)
        proto = ProtocolParams(mu_x=mu_y * rng.uniform(0.05, 0.6), mu_y=mu_y, p_x=0.3, p_y=0.4)
        stats = simulate(ch, proto)
        src = coherent_triple(proto.mu_x, proto.mu_y)
        c = g_coefficients(src, src)
        for b in ("X", "Z"):
            true = fock_yields(ch, b)
            v1 = s11_lower_v1(stats[b].S, c)
            v2 = s11_lower_v2(stats[b].S, c)
            assert v1 <= v2 * (1 + 1e-12)
            assert v2 <= true.s[1, 1] * (1 + 1e-12)
            if v2 > 0:
                assert e11_upper_asymptotic(stats[b].T, v2, c) >= true.e[1, 1] * (1 - 1e-12)


def test_dead_channel_bounds_are_zero():
    src = coherent_triple(0.1, 0.4)
    c = g_coefficients(src, src)
    zero = {lr: 0.0 for lr in PAIRS}
    assert s11_lower_v1(zero, c) == 0.0
    assert s11_lower_v2(zero, c) == 0.0
    assert e11_upper_asymptotic(zero, 0.3, c) == 0.0
    with pytest.raises(ZeroDivisionError):
        error_form(c, 0.0)


def test_noiseless_z_basis_error_bound_vanishes(proto50):
    stats = simulate(ChannelParams(pd=0.0, ed=0.0, distance_km=40), proto50)
    src = coherent_triple(proto50.mu_x, proto50.mu_y)
    c = g_coefficients(src, src)
    assert e11_upper_asymptotic(stats.Z.T, s11_lower_v2(stats.Z.S, c), c) == 0.0


@given(intensities, intensities, st.floats(1e-3, 1e3))
def test_party_exchange_rule(ta, tb, lam):
    alice, bob = triple(ta), triple(tb)
    c = g_coefficients(alice, bob)
    rng = np.random.default_rng(0)
    S = {lr: float(v) for lr, v in zip(PAIRS, rng.uniform(0, 1e-3, 9))}
    St = {lr: S[lr[::-1]] for lr in PAIRS}
    # exchanging the parties (coefficients and labels together) leaves the v1 value unchanged
    assert v1_form(c).evaluate(S) == pytest.approx(v1_form(c.swapped()).evaluate(St), rel=1e-9, abs=1e-18)
    # scale covariance
    Ss = {lr: lam * v for lr, v in S.items()}
    assert v1_form(c).evaluate(Ss) == pytest.approx(lam * v1_form(c).evaluate(S), rel=1e-9, abs=1e-18)


def test_swap_branch_used_when_ka_exceeds_kb():
    # K_a / K_b is the ratio of Bob's to Alice's signal/decoy intensity ratios
    alice, bob = coherent_triple(0.2, 0.3), coherent_triple(0.05, 0.6)
    c = g_coefficients(alice, bob)
    assert c.K_a > c.K_b
    f = v1_form(c)
    # the exchanged form drops the pairs that involve Bob's signal against vacuum on the other side
    assert set(f.plus) | set(f.minus) == {"xx", "oy", "yo", "oo", "yy", "ox", "xo"}
    assert v1_form(c).denom == pytest.approx(bob.decoy.coeffs[1] * bob.signal.coeffs[1] * c.a_tilde_12)


@given(intensities, st.floats(1e-3, 1e3))
def test_scale_covariance_of_all_bounds(t, lam):
    src = triple(t)
    c = g_coefficients(src, src)
    stats = simulate(ChannelParams(distance_km=60), ProtocolParams(mu_x=t[0], mu_y=t[0] + t[1], p_x=0.3, p_y=0.4)).Z
    S2 = {lr: lam * v for lr, v in stats.S.items()}
    T2 = {lr: lam * v for lr, v in stats.T.items()}
    for f in (s11_lower_v1, s11_lower_v2):
        assert f(S2, c) == pytest.approx(lam * f(stats.S, c), rel=1e-9)
    e = error_form(c, 1.0)
    assert e.evaluate(T2) == pytest.approx(lam * e.evaluate(stats.T), rel=1e-9, abs=1e-20)


def test_basis_statistics_transpose_roundtrip(ch50, proto50):
    st_ = simulate(ch50, proto50).X
    assert isinstance(st_, BasisStatistics)
    assert st_.transposed().transposed() == st_
