import numpy as np
import pytest

from racketchaos.generating import ConstantsBundle
from racketchaos.impact_map import (
    ImpactState,
    estimate_domain,
    free_flight_oracle,
    iterate,
    orbit_rows,
    residual,
    step,
    step_te,
)
from racketchaos.racket import ForcingSpec, eval_with_derivatives


def test_domain_constants(domain):
    assert domain.K1 > 0 and domain.v_bar > 0
    assert domain.v_bar >= domain.g * domain.K1 / 2 - 1.0


def test_step_satisfies_impact_equations(desk, domain):
    spec, _ = desk
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = ImpactState(rng.uniform(0, 1), rng.uniform(domain.v_bar + 0.1, domain.v_bar + 40))
        nxt = step(s, spec, domain)
        assert residual(s, nxt, spec) < 1e-9
        assert nxt.t - s.t > domain.K1


def test_ball_stays_above_racket(desk, domain):
    spec, _ = desk
    s = ImpactState(0.3, domain.v_bar + 5)
    nxt = step(s, spec, domain)
    f0 = eval_with_derivatives(spec, s.t)[0]
    u = s.v + eval_with_derivatives(spec, s.t)[1]
    ts = np.linspace(s.t, nxt.t, 2001)[1:-1]
    height = f0 + u * (ts - s.t) - spec.g * (ts - s.t) ** 2 / 2
    assert np.all(height >= eval_with_derivatives(spec, ts)[0] - 1e-12)


def test_oracle_is_independent(desk, domain):
    spec, _ = desk
    s = ImpactState(0.71, domain.v_bar + 12.3)
    a, b = step(s, spec, domain), free_flight_oracle(s, spec)
    assert a.t == pytest.approx(b.t, abs=1e-9)
    assert a.v == pytest.approx(b.v, abs=1e-9)


def test_periodicity(desk, domain):
    spec, _ = desk
    a = step(ImpactState(0.2, 9.0), spec, domain)
    b = step(ImpactState(3.2, 9.0), spec, domain)
    assert b.t - a.t == pytest.approx(3.0, abs=1e-10)
    assert b.v == pytest.approx(a.v, abs=1e-10)


def test_iterate_and_rows(desk, domain):
    spec, _ = desk
    states = iterate(ImpactState(0.1, 7.0), 5, spec, domain)
    assert len(states) == 6
    rows = orbit_rows(states)
    assert [r[0] for r in rows] == list(range(6))


def test_iterate_multiprecision(desk, domain):
    spec, _ = desk
    lo = iterate(ImpactState(0.1, 7.0), 3, spec, domain)
    hi = iterate(ImpactState(0.1, 7.0), 3, spec, domain, dps=40)
    assert float(hi[-1].t) == pytest.approx(lo[-1].t, abs=1e-8)


def test_energy_form_matches_velocity_form(desk, domain):
    spec, _ = desk
    t1, E1 = step_te(0.4, 50.0, spec, domain)
    nxt = step(ImpactState(0.4, 10.0), spec, domain)
    assert t1 == pytest.approx(nxt.t) and E1 == pytest.approx(nxt.v ** 2 / 2)


def test_flat_racket_domain():
    spec = ForcingSpec(2.0)
    c = ConstantsBundle(g=2.0, v_bar=0.1, K1=0.05)
    nxt = step(ImpactState(1.0, 3.0), spec, c)
    assert nxt.t == pytest.approx(4.0) and nxt.v == 3.0
    K1, v_bar = estimate_domain(ForcingSpec(1.0, (0.2,)))
    assert K1 > 0
