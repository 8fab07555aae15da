import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from racketchaos.errors import HypothesisViolated
from racketchaos.racket import (
    ForcingSpec,
    check_hypothesis,
    eval_with_derivatives,
    normalize,
    polish_anchor_mp,
    shifted,
)

from conftest import T_SHARP, T_STAR


def test_gravity_must_be_positive():
    with pytest.raises(ValueError):
        ForcingSpec(0.0, (0.2,))


def test_bounds_single_harmonic():
    s = ForcingSpec(1.0, (0.2,))
    assert s.max_abs_f == pytest.approx(0.2)
    assert s.max_abs_fdot == pytest.approx(0.4 * math.pi)
    assert s.max_abs_fddot == pytest.approx(0.8 * math.pi ** 2)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50))
def test_scalar_array_and_mp_agree(t):
    s = ForcingSpec(1.0, (0.2, 0.03), (0.05,))
    a = eval_with_derivatives(s, t)
    b = [x[0] for x in eval_with_derivatives(s, np.array([t]))]
    c = [float(x) for x in eval_with_derivatives(s, mpmath.mpf(t))]
    for x, y, z in zip(a, b, c):
        assert x == pytest.approx(y, abs=1e-12)
        assert x == pytest.approx(z, abs=1e-11)


def test_derivatives_match_finite_differences():
    s = ForcingSpec(1.0, (0.2,), (0.1, 0.02))
    h = 1e-6
    for t in np.linspace(-2, 2, 17):
        f0, fd, fdd = eval_with_derivatives(s, float(t))
        fp, fdp, _ = eval_with_derivatives(s, float(t) + h)
        fm, fdm, _ = eval_with_derivatives(s, float(t) - h)
        assert (fp - fm) / (2 * h) == pytest.approx(fd, abs=1e-7)
        assert (fdp - fdm) / (2 * h) == pytest.approx(fdd, abs=1e-6)


def test_hypothesis_violation_reports_values():
    with pytest.raises(HypothesisViolated) as info:
        check_hypothesis(ForcingSpec(1.0, (0.01,)))
    d = info.value.to_dict()
    assert d["kind"] == "HypothesisViolated"
    assert d["max_2fdot"] < 1.0


def test_desk_anchors(desk):
    spec, anchors = desk
    assert anchors.t_star == pytest.approx(T_STAR, abs=1e-12)
    assert anchors.t_sharp == pytest.approx(T_SHARP, abs=1e-12)
    assert 2 * eval_with_derivatives(spec, anchors.t_star)[1] == pytest.approx(1.0, abs=1e-12)
    assert 2 * eval_with_derivatives(spec, anchors.t_sharp)[1] == pytest.approx(-1.0, abs=1e-12)


def test_normalize_translates_phase():
    spec, anchors = normalize(ForcingSpec(1.0, (), (0.2,)))
    assert abs(eval_with_derivatives(spec, 0.0)[1]) < 1e-12
    assert -1 <= anchors.t_sharp < 0 < anchors.t_star <= 1
    assert 2 * eval_with_derivatives(spec, anchors.t_star)[1] == pytest.approx(1.0, abs=1e-10)


def test_shift_is_translation():
    s = ForcingSpec(1.0, (0.2, 0.05), (0.1,))
    sh = shifted(s, 0.3)
    for t in (0.0, 0.17, 0.9):
        assert eval_with_derivatives(sh, t)[0] == pytest.approx(eval_with_derivatives(s, t + 0.3)[0])


def test_mp_polish(desk):
    spec, anchors = desk
    x = polish_anchor_mp(spec, anchors.t_star, spec.g, dps=40)
    # the coefficient is the double nearest 0.2
    with mpmath.workdps(40):
        exact = mpmath.mpf(1) / 2 + mpmath.asin(1 / (4 * mpmath.mpf(0.2) * mpmath.pi)) / (2 * mpmath.pi)
        assert abs(x - exact) < mpmath.mpf(10) ** -35
