import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from racketchaos.errors import DomainError
from racketchaos.generating import (
    ConstantsBundle,
    boundary_data,
    delta_rec,
    fd_twist,
    recurrence_partials,
    twist,
    validate_twist,
)
from racketchaos.impact_map import ImpactState, step
from racketchaos.racket import eval_with_derivatives


def test_boundary_data_reproduces_step(desk, domain):
    spec, _ = desk
    s = ImpactState(0.35, 11.0)
    nxt = step(s, spec, domain)
    v0, v1, E0, E1 = boundary_data(s.t, nxt.t, spec, domain)
    assert v0 == pytest.approx(s.v, abs=1e-10)
    assert v1 == pytest.approx(nxt.v, abs=1e-10)
    assert E1 == pytest.approx(nxt.v ** 2 / 2, abs=1e-8)


def test_domain_checks(desk, domain):
    spec, _ = desk
    with pytest.raises(DomainError):
        boundary_data(0.0, domain.K1 / 2, spec, domain)
    with pytest.raises(DomainError):
        delta_rec(0.0, 20.0, 20.0 + domain.K1 / 2, spec, domain)


def test_orbit_zeroes_recurrence(desk, domain):
    spec, _ = desk
    s0 = ImpactState(0.1, 9.0)
    s1 = step(s0, spec, domain)
    s2 = step(s1, spec, domain)
    assert abs(delta_rec(s0.t, s1.t, s2.t, spec, domain)) < 1e-9


def test_closed_form_twist_matches_fd(desk):
    spec, _ = desk
    t0 = np.linspace(0, 1, 50)
    t1 = t0 + np.linspace(6, 60, 50)
    assert np.max(np.abs(twist(t0, t1, spec) - fd_twist(t0, t1, spec))) < 1e-5


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(8, 40), st.floats(8, 40))
def test_recurrence_partials_match_fd(desk, a, L1, L2):
    spec, _ = desk
    b, c = a + L1, a + L1 + L2
    fa, fda, _ = eval_with_derivatives(spec, a)
    fb, fdb, fddb = eval_with_derivatives(spec, b)
    fc, fdc, _ = eval_with_derivatives(spec, c)
    da, db, dc = recurrence_partials(spec.g, L1, L2, fa, fb, fc, fda, fdb, fdc, fddb)
    bundle = ConstantsBundle(g=1.0, v_bar=1.0, K1=1.0)
    h = 1e-6
    D = lambda x, y, z: delta_rec(x, y, z, spec, bundle)
    assert da == pytest.approx((D(a + h, b, c) - D(a - h, b, c)) / (2 * h), abs=1e-5)
    assert db == pytest.approx((D(a, b + h, c) - D(a, b - h, c)) / (2 * h), abs=1e-5)
    assert dc == pytest.approx((D(a, b, c + h) - D(a, b, c - h)) / (2 * h), abs=1e-5)


def test_twist_constants(twist_consts, desk):
    spec, _ = desk
    c = twist_consts
    assert c.K >= c.K1 + 2 * c.eps - 1e-12
    assert c.delta > 0
    assert validate_twist(spec, c.K, c.delta, n=2000) > 2 * c.delta


def test_validate_lists_problems():
    c = ConstantsBundle(g=1.0, v_bar=1.0, K1=3.0, K=3.5, delta=-1.0, C=1.0, M=1.0, m=5, Q=2)
    problems = c.validate()
    assert any("K1 + 2 eps" in p for p in problems)
    assert any("delta" in p for p in problems)
    assert any("Q_gt_8M" in p for p in problems)
    assert c.rho0 == 6 and c.rho1 == 7


def test_estimated_C_dominates_terms(base):
    terms = base.provenance["C_terms"]
    C = base.consts.C
    assert C >= terms["C_drift_bound"] and C >= terms["C_strip_max"] and C >= terms["C_flat_drift"]
