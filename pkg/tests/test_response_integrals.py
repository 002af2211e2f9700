import math
import warnings

import numpy as np
import pytest
from mpmath import mp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from oracles import brute_force_transform
from quditunruh import (
    IEpsilon,
    IntegralParams,
    NascentDelta,
    RegimeWarning,
    RegulatorScaleError,
    TanhHeaviside,
    UnsupportedRegulatorError,
    WorldlineParams,
    accel_wightman,
    build_hw_model,
    build_su2_model,
    build_table,
    full_plane_transform,
    half_plane_transform,
    integral_I,
    integral_L,
    integral_Lq,
    integral_Q,
    integral_R,
    integral_Rq,
    integral_U,
    integral_V,
    regular_part,
)
from quditunruh.response_integrals import (
    canonical_frequencies,
    full_plane_vacuum,
    half_line_transform,
    half_plane_vacuum,
    line_transform,
)


def params(a=1.0, T=8.0, reg=None, eps=None):
    return IntegralParams(WorldlineParams(a, T, eps), reg)


def test_default_regulator_and_validation():
    p = params(T=10.0)
    assert p.regulator == TanhHeaviside(10.0 / 200)
    with pytest.raises(RegulatorScaleError):
        params(T=1.0, reg=TanhHeaviside(1.0))
    with pytest.warns(RegimeWarning):
        params(T=1.0, reg=NascentDelta(0.1))
    with pytest.raises(ValueError):
        params(reg=TanhHeaviside(-1.0))


def test_I_matches_vacuum_plus_regular_integral():
    # vacuum closed form plus an independent quadrature of the regular part in u
    a, T, W = 1.0, 8.0, 0.4
    p = params(a, T)
    reg, _ = integrate.quad(lambda u: math.exp(-u * u / (2 * T * T)) * regular_part(u, a),
                            0, 12 * T, epsabs=1e-15, epsrel=1e-13, limit=500)
    env = math.sqrt(math.pi / 2) * T * math.exp(-T * T * W * W / 2)
    expected = math.exp(-T * T * W * W / 2) / (4 * math.pi) + env * 2 * reg
    assert integral_I(p, W) == pytest.approx(expected, rel=1e-10)


def test_I_sign_symmetry():
    p = params()
    for W in [0.3, 1.0]:
        assert full_plane_transform(W, W, p) == full_plane_transform(-W, -W, p)


def test_L_closed_form_and_zero_gap():
    for W in [0.5, 1.0, 2.0]:
        for T in [4.0, 16.0]:
            x = W * T
            for s, sign in [(1, "+"), (-1, "-")]:
                # evaluated in high precision: the minus branch cancels in float64
                with mp.workdps(40):
                    X = mp.mpf(x)
                    ref = float((mp.exp(-X * X / 2) + s * mp.sqrt(mp.pi / 2) * X
                                 * mp.erfc(-s * X / mp.sqrt(2))) / (4 * mp.pi))
                assert full_plane_vacuum(s * W, -s * W, T) == pytest.approx(ref, rel=1e-12)
    assert full_plane_vacuum(0.0, 0.0, 5.0) == pytest.approx(1 / (4 * math.pi), rel=1e-15)


def test_long_time_decay_of_I_and_Q():
    W, T = 1.0, 10.0
    p = params(1.0, T, TanhHeaviside(T / 1000))
    assert abs(integral_I(p, W)) <= 1e-8
    assert abs(integral_Q(p, W)) <= 1e-8


def test_Q_vacuum_methods():
    T, W = 8.0, 0.3
    g = math.exp(-T * T * W * W / 2)
    for a0 in [T / 100, T / 500]:
        m1 = half_plane_vacuum(W, W, "+", T, NascentDelta(a0))
        ref1 = complex(g / (8 * math.pi), -T**3 * g / (8 * math.pi * a0 * (a0**2 + T**2)))
        assert abs(m1 - ref1) <= 1e-12 * abs(ref1)
        m2 = half_plane_vacuum(W, W, "+", T, TanhHeaviside(a0))
        ref2 = complex(g / (8 * math.pi), -T * g / (8 * math.sqrt(2 * math.pi) * a0))
        assert abs(m2 - ref2) <= 1e-12 * abs(ref2)


def test_Q_regular_part_is_half_of_I():
    p = params(1.0, 8.0, TanhHeaviside(0.04))
    W = 0.5
    I_reg = integral_I(p, W) - full_plane_vacuum(W, W, 8.0)
    Q_reg = integral_Q(p, W) - half_plane_vacuum(W, W, "+", 8.0, p.regulator)
    assert Q_reg == pytest.approx(I_reg / 2, rel=1e-12)


def test_nascent_delta_rejects_difference_frequency():
    p = params(reg=NascentDelta(0.04))
    integral_Q(p, 1.0)
    with pytest.raises(UnsupportedRegulatorError):
        integral_R(p, "+", 1.0)


@pytest.mark.parametrize("scheme", [NascentDelta, TanhHeaviside])
def test_regulator_power_law(scheme):
    T = 10.0
    a0s = np.geomspace(T / 1000, T / 50, 8)
    ims = []
    for a0 in a0s:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            p = params(1.0, T, scheme(a0))
        ims.append(-integral_Q(p, 0.05).imag)
    slope = np.polyfit(np.log(a0s), np.log(ims), 1)[0]
    assert abs(slope + 1) <= 0.05


def test_gaussian_suppression():
    T = 8.0
    p = params(1.0, T)
    xs = np.array([4.0, 6.0, 8.0])
    I = [abs(integral_I(p, x / T)) for x in xs]
    Q = [abs(integral_Q(p, x / T).real) for x in xs]
    for vals in (I, Q):
        slope = np.polyfit(xs**2, np.log(vals), 1)[0]
        assert slope == pytest.approx(-0.5, rel=0.02)


@pytest.mark.parametrize("sign", ["+", "-"])
def test_secular_growth(sign):
    a, T, W = 1.0, 50.0, 0.5
    L1 = integral_L(params(a, T), sign, W)
    L2 = integral_L(params(a, 2 * T), sign, W)
    assert 1.9 <= (L2 / L1).real <= 2.1


def test_detailed_balance_limit():
    for aT in (50, 100):
        for r in (0.25, 0.5, 1.0):
            p = params(1.0, aT)
            ratio = (integral_L(p, "-", r) / integral_L(p, "+", r)).real
            assert ratio == pytest.approx(math.exp(-2 * math.pi * r), rel=1e-2)


def test_hw_variants():
    p = params(1.0, 30.0)
    q = 1.5
    ratio = (integral_Lq(p, -q) / integral_Lq(p, q)).real
    assert ratio == pytest.approx(math.exp(-2 * math.pi * q), rel=0.05)
    U0 = integral_U(p, 0.0)
    assert U0.imag == 0 and U0.real > 0
    for qq in (q, -q, 0.7):
        total = integral_V(p, qq, "+") + integral_V(p, qq, "-")
        assert abs(total - integral_U(p, qq)) <= 1e-12 * abs(integral_U(p, qq)) + 1e-300
    assert integral_Rq(p, q) == integral_R(p, "+", q)


def test_U0_positive_against_brute_force():
    a, T, eps = 1.0, 4.0, 1e-3
    p = params(a, T, IEpsilon(), eps)
    ref = brute_force_transform(0.0, 0.0, a, T, eps)
    val = integral_U(p, 0.0)
    assert val.real > 0
    assert abs(val - ref) <= 1e-6 * abs(ref)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("w", [-1.0, 0.0, 0.7, 2.0])
def test_line_transform_against_direct_quadrature(w):
    a, T, eps = 1.0, 8.0, 1e-3
    wl = WorldlineParams(a, T, eps)
    F, _ = line_transform(w, a, T, eps)

    def f(u):
        return complex(math.exp(-u * u / (2 * T * T)) * accel_wightman(u, wl) * np.exp(1j * w * u))

    direct = 0j
    for lo, hi, pts in [(-80, -0.1, None), (-0.1, 0.1, [-10 * eps, -eps, 0, eps, 10 * eps]),
                        (0.1, 80, None)]:
        direct += integrate.quad(f, lo, hi, complex_func=True, limit=5000, points=pts,
                                 epsabs=1e-14)[0]
    assert abs(F - direct) <= 1e-9 * abs(F)


@pytest.mark.parametrize("reg", [TanhHeaviside(0.04), IEpsilon()])
@pytest.mark.parametrize("w", [-1.3, -0.2, 0.0, 0.5, 2.0])
def test_half_lines_complete_full_line(reg, w):
    p = params(1.0, 8.0, reg, 1e-3)
    Hp, ep = half_line_transform(w, "+", p)
    Hm, em = half_line_transform(w, "-", p)
    F, ef = line_transform(w, 1.0, 8.0, p.kernel_epsilon)
    assert abs(Hp + Hm - F) <= max(ep + em + ef, 1e-14 * abs(Hp))


def test_regulators_agree_on_real_part():
    # the real part of the half-line transform does not depend on the UV regulator
    tanh = params(1.0, 8.0, TanhHeaviside(0.04))
    ieps = params(1.0, 8.0, IEpsilon(), 1e-6)
    for w in [-1.0, 0.0, 0.7]:
        a = half_line_transform(w, "+", tanh)[0].real
        b = half_line_transform(w, "+", ieps)[0].real
        assert a == pytest.approx(b, rel=1e-5)


def test_table_keys_and_symmetry():
    p = params()
    t1 = build_table(build_su2_model(1, 1.0), p)
    assert len(t1) == 12
    assert t1.bohr == (-1.0, 1.0)
    t3 = build_table(build_hw_model(3, 1.0), p)
    assert (0.0, 0.0, "none") in t3.values and len(t3) == 27
    flip = {"none": "none", "+": "-", "-": "+"}
    for (w1, w2, hl), v in t3.values.items():
        partner = t3.value(-w2, -w1, flip[hl])
        assert abs(v - np.conj(partner)) <= 1e-12 * abs(v) + t3.error(w1, w2, hl)
    assert t3.worst_error < 1e-9


def test_table_is_deterministic():
    p = params(0.7, 12.0)
    m = build_hw_model(3, 0.9)
    a, b = build_table(m, p), build_table(m, p)
    assert a.values == b.values and a.errors == b.errors


def test_canonical_frequencies_merges_rounding():
    reps, snap = canonical_frequencies([1.5, -1.5000000000000002, 0.0, 1e-17])
    assert reps == [1.5]
    assert snap(-1.5000000000000002) == -1.5
    assert snap(1e-17) == 0.0
    with pytest.raises(KeyError):
        snap(0.75)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_hermitian_kernel_symmetry(w1, w2):
    p = params(1.0, 6.0)
    g = full_plane_transform(w1, w2, p)
    assert abs(g - np.conj(full_plane_transform(-w2, -w1, p))) <= 1e-14 * abs(g) + 1e-300
    h = half_plane_transform(w1, w2, "+", p)
    assert abs(h - np.conj(half_plane_transform(-w2, -w1, "-", p))) <= 1e-14 * abs(h) + 1e-300


@pytest.mark.slow
def test_factorized_matches_brute_force_spot():
    a, T, W, eps = 1.0, 8.0, 0.75, 1e-3
    p = params(a, T, IEpsilon(), eps)
    ref = brute_force_transform(W, W, a, T, eps, width=1.0)
    assert abs(full_plane_transform(W, W, p) - ref) <= 1e-6 * abs(ref)
