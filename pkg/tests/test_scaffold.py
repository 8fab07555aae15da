import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from racketchaos.errors import GlueOrderViolated, ParamTooSmall
from racketchaos.scaffold import (
    ScaffoldSeq,
    SymbolSequence,
    Z_fn,
    glue,
    inequality_margins,
    m_analytic,
    solve_constants,
    special_orbit_times,
    translated,
    z_fn,
    zeta,
)

from conftest import T_SHARP, T_STAR

words = st.lists(st.integers(0, 1), min_size=1, max_size=6).map(tuple)


def test_symbol_sequence_parse_and_shift():
    s = SymbolSequence.parse("0110")
    assert str(s) == "0110" and s.period == 4
    assert str(s.shifted(1)) == "1100"
    assert list(s.symbol([-1, 4, 5])) == [0, 0, 1]
    with pytest.raises(ValueError):
        SymbolSequence.parse("012")


def test_non_periodic_padding():
    s = SymbolSequence((1, 1), periodic=False)
    assert list(s.symbol([-1, 0, 1, 2])) == [0, 1, 1, 0]


@settings(max_examples=80, deadline=None)
@given(words, st.integers(-200, 200), st.integers(20, 300), st.integers(2, 20))
def test_zeta_increments(word, n, m, Q):
    code = SymbolSequence(word)
    step = zeta(code, n + 1, m, Q) - zeta(code, n, m, Q)
    assert step == m + 1 + code.symbol(n // Q)
    assert zeta(code, 0, m, Q) == 0


@settings(max_examples=40, deadline=None)
@given(words, st.integers(-10, 10), st.integers(20, 300), st.integers(2, 20))
def test_zeta_period_shift(word, k, m, Q):
    code = SymbolSequence(word)
    p = code.period
    span = zeta(code, p * Q, m, Q)
    assert zeta(code, k + p * Q, m, Q) - zeta(code, k, m, Q) == span


def test_growth_profiles():
    assert list(z_fn([-2, 0, 3], 10)) == [-24, 0, 33]
    assert list(Z_fn([-2, 0, 3], 10)) == [-22, 0, 36]


def test_param_too_small(world):
    with pytest.raises(ParamTooSmall):
        special_orbit_times("periodic", 5, world.anchors, world.consts)


def test_special_orbit_anchors(world):
    per = special_orbit_times("periodic", world.consts.m, world.anchors, world.consts)
    assert np.all(per.offset == 0.0)
    acc = special_orbit_times("accelerating", world.consts.m, world.anchors, world.consts)
    assert acc.offset[0] == pytest.approx(T_STAR)
    dec = special_orbit_times("decelerating", world.consts.m + 3, world.anchors, world.consts)
    assert dec.offset[0] == pytest.approx(T_SHARP)


def test_translate_and_glue_order():
    a = ScaffoldSeq("orbit", 0, np.arange(0, 50, 10), np.zeros(5))
    b = translated(a, 3)
    assert np.all(b.base == a.base + 3)
    with pytest.raises(GlueOrderViolated) as info:
        glue(b, a, 2, kind="super")
    assert "n_tilde" in info.value.to_dict() or info.value.details


def test_scaffold_windows(world):
    Q = world.consts.Q
    assert world.sup.n_lo <= -8 * Q and world.sub.n_lo <= -8 * Q
    assert len(world.sup.glue_indices) >= 1 and len(world.sub.glue_indices) >= 1
    assert "n_tilde" in world.sup.info and "translate" in world.sub.info


def test_glue_points_ordered(world):
    for n in world.sup.glue_indices:
        assert world.sup.kind == "super" and world.sup.n_lo < n < world.sup.n_hi


def test_envelopes_bracket(world):
    lo, up = world.w_lower, world.w_upper
    # Z - z = |n|, so the envelopes separate once |n| exceeds 2 M_eff
    far = np.abs(lo.indices) > 2 * world.M_eff
    assert np.all(lo.values[far] < up.values[far])
    assert world.M_eff >= m_analytic(world.anchors) - 1e-12


def test_margins_and_solver():
    m, Q = solve_constants(3.0, 6.0, 1.69)
    margins = inequality_margins(m, Q, 3.0, 6.0, 1.69)
    assert set(margins) == {"Q_gt_8M", "block_rho0", "block_rho1", "rhs_positive", "m_lower_bound"}
    assert min(margins.values()) > 0
    m2, Q2 = solve_constants(7.3, 28.5, 1.69)
    assert min(inequality_margins(m2, Q2, 7.3, 28.5, 1.69).values()) > 0
    assert Q2 >= Q
