import math

import numpy as np
import pytest

from quditunruh import (
    INDETERMINATE,
    DensityMatrix,
    IntegralParams,
    RegimeWarning,
    WorldlineParams,
    build_hw_model,
    build_su2_model,
    build_table,
    coherence_norm,
    edr,
    gibbs_distance,
    gibbs_state,
    second_order_correction,
    secular_fit,
    trace_distance,
    transition_probability,
)


def make(a, T):
    return IntegralParams(WorldlineParams(a, T))


def test_edr_thermal_at_long_times():
    model = build_su2_model(1, 0.5)
    v = edr(model, 2, 1, make(1.0, 50.0), 0.1)
    assert not v.indeterminate
    assert v.target == pytest.approx(math.exp(-2 * math.pi * 0.5))
    assert v.residual <= 1e-2
    assert v.ratio == pytest.approx(v.forward / v.backward)


def test_edr_hw_degenerate_is_exactly_one():
    model = build_hw_model(3, 1.0)
    v = edr(model, 1, 2, make(1.0, 20.0), 0.1)
    assert v.ratio == 1.0
    assert v.target == 1.0


def test_edr_forbidden_channel_is_indeterminate():
    model = build_su2_model(1, 1.0)
    v = edr(model, 2, 0, make(1.0, 20.0), 0.1)
    assert v.ratio == INDETERMINATE and v.indeterminate
    assert math.isnan(v.residual)


def test_edr_residual_shrinks_with_time():
    model = build_su2_model(1, 1.0)
    res = [edr(model, 2, 1, make(1.0, T), 1.0).residual for T in (20.0, 50.0, 100.0)]
    assert res[0] > res[1] > res[2]


def test_transition_probability_accounts_for_population_loss():
    model = build_su2_model(1, 1.0)
    p = make(1.0, 10.0)
    t = build_table(model, p)
    corr = second_order_correction(model, model.basis_projector(1), p, 0.2, t).correction
    out = sum(transition_probability(model, 1, j, p, 0.2, t) for j in (0, 2))
    assert out == pytest.approx(-corr[1, 1].real, rel=1e-13)
    with pytest.raises(ValueError):
        transition_probability(model, 1, 1, p, 0.2, t)


def test_trace_distance_properties():
    rng = np.random.default_rng(5)
    states = []
    for _ in range(3):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        r = g @ g.conj().T
        states.append(DensityMatrix(r / np.trace(r).real))
    a, b, c = states
    assert trace_distance(a, a) == pytest.approx(0, abs=1e-15)
    assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), rel=1e-14)
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-15
    e0, e1 = np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0])
    assert trace_distance(e0, e1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_gibbs_distance_and_coherence():
    model = build_su2_model(1, 1.0)
    g = gibbs_state(model, 2.0)
    assert gibbs_distance(g, model, 2.0) == pytest.approx(0, abs=1e-15)
    assert gibbs_distance(g, model, 1.0) > 0
    with pytest.raises(ValueError):
        gibbs_distance(np.eye(2) / 2, model, 1.0)
    assert coherence_norm(g) == 0
    psi = np.array([1, 1j, 0]) / math.sqrt(2)
    assert coherence_norm(np.outer(psi, psi.conj())) == pytest.approx(1.0)


def test_secular_fit_linear_at_long_times():
    model = build_su2_model(1, 1.0)
    slope, r2 = secular_fit(model, make(1.0, 50.0), 1.0, np.linspace(50, 100, 6))
    assert slope > 0
    assert r2 >= 0.999


def test_secular_fit_warns_out_of_regime():
    model = build_su2_model(1, 1.0)
    with pytest.warns(RegimeWarning):
        secular_fit(model, make(1.0, 2.0), 1.0, [2.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        secular_fit(model, make(1.0, 50.0), 1.0, [60.0, 50.0])
