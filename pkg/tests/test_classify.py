import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relaxwave import classify
from relaxwave.classify import CUSP, HUMP, LOOP, NO_PATTERN
from relaxwave.errors import ValidationError
from relaxwave.soliton import SolitonReal

ZETA = 13 / 3


def test_critical_alpha_examples():
    assert classify.critical_alpha_static(-0.24) == 1.4433756729740644
    assert classify.critical_alpha_static(-0.5) == 1.0
    assert classify.critical_alpha_static(-2.0) == 0.5
    with pytest.raises(ValidationError):
        classify.critical_alpha_static(0.0)


def test_reference_decimals_to_one_ulp():
    # reference decimals with a comma as decimal mark, 31 digits
    for text, value in [("1,4433756729740644112728719512549", classify.critical_alpha_static(-0.24)),
                           ("0,057735026918962576450914878050196", classify.rotating_thresholds(ZETA, -0.24).alpha_c_rot)]:
        ref = float(text.replace(",", "."))
        assert abs(value - ref) <= math.ulp(ref)


@pytest.mark.parametrize("alpha,kind", [(1.0, LOOP), (1.4433756729740644, CUSP), (2.0, HUMP), (0.0, LOOP)])
def test_classify_static_examples(alpha, kind):
    assert classify.classify_static(alpha, -0.24).kind == kind


def test_rotating_thresholds_examples():
    th = classify.rotating_thresholds(ZETA, -0.24)
    assert th.alpha_c_rot == pytest.approx(0.057735026918962576, rel=1e-15)
    assert th.alpha_s == pytest.approx(0.08006407690254357, rel=1e-15)
    with pytest.raises(ValidationError):
        classify.rotating_thresholds(2 / 0.24, -0.24)


@pytest.mark.parametrize("alpha,kind", [(0.09, NO_PATTERN), (0.06, LOOP), (0.03, HUMP),
                                        (0.057735026918962576, CUSP), (0.2, NO_PATTERN)])
def test_classify_rotating_examples(alpha, kind):
    pc = classify.classify_rotating(alpha, ZETA, -0.24)
    assert pc.kind == kind and pc.rotating
    if kind == NO_PATTERN:
        assert pc.Omega is None
    else:
        assert pc.Omega > 0


def test_rotating_loop_omega():
    pc = classify.classify_rotating(0.06, ZETA, -0.24)
    assert pc.Omega == pytest.approx(0.3180711096110912, rel=1e-12)


def test_omega_vanishes_approaching_alpha_s():
    th = classify.rotating_thresholds(ZETA, -0.24)
    from relaxwave.soliton import rotating_parameters
    assert rotating_parameters(th.alpha_s, ZETA, -0.24).Omega == 0.0
    prev = None
    for eps in (1e-2, 1e-4, 1e-6, 1e-8):
        om = rotating_parameters(th.alpha_s * (1 - eps), ZETA, -0.24).Omega
        assert prev is None or om < prev
        prev = om
    assert prev < 1e-3
    assert classify.classify_rotating(th.alpha_s, ZETA, -0.24).kind == NO_PATTERN


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, -0.05))
def test_threshold_is_cusp(v):
    assert classify.classify_static(classify.critical_alpha_static(v), v).kind == CUSP


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, -0.05), st.lists(st.floats(0, 3), min_size=2, max_size=8))
def test_monotone_in_alpha(v, alphas):
    order = {LOOP: 0, CUSP: 1, HUMP: 2}
    kinds = [order[classify.classify_static(a, v).kind] for a in sorted(alphas)]
    assert kinds == sorted(kinds)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, -0.05), st.floats(0.001, 0.999), st.floats(0, 1))
def test_rotating_ordering(v, frac, afrac):
    zeta = (1 + frac) / abs(v)
    th = classify.rotating_thresholds(zeta, v)
    assert 0 < th.alpha_c_rot < th.alpha_s
    a = afrac * 1.5 * th.alpha_s
    pc = classify.classify_rotating(a, zeta, v)
    if a >= th.alpha_s:
        assert pc.kind == NO_PATTERN


def test_slope_oracle_examples():
    s = SolitonReal.from_velocities(0.0, -0.12, -0.12)
    assert classify.classify_by_slope_oracle(s).kind == LOOP
    assert 1 + 2 * s.K**2 * s.v == pytest.approx(-1.0, rel=1e-14)
    s = SolitonReal.from_velocities(1.4433756729740644, -0.12, -0.12)
    assert classify.classify_by_slope_oracle(s).kind == CUSP


def test_oracle_equivalence_sweep():
    rng = np.random.default_rng(2024)
    agree = checked = 0
    while checked < 1000:
        a, v = rng.uniform(0, 3), rng.uniform(-5, -0.05)
        pc = classify.classify_static(a, v)
        if pc.margin <= 1e-6:
            continue
        s = SolitonReal.from_velocities(a, 0.5 * v, 0.5 * v)
        agree += classify.classify_by_slope_oracle(s).kind == pc.kind
        checked += 1
    assert agree == checked


def test_invalid_inputs_and_report():
    with pytest.raises(ValidationError):
        classify.classify_static(-0.1, -0.24)
    with pytest.raises(ValidationError):
        classify.classification_report(0.1, -0.24, rotating=True)
    rep = classify.classification_report(0.06, -0.24, zeta=ZETA, rotating=True)
    assert set(rep) == {"kind", "rotating", "Omega", "margin", "thresholds"}
    assert set(rep["thresholds"]) == {"alpha_c_static", "alpha_c_rot", "alpha_s"}
