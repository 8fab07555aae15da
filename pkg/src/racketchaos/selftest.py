"""Quick property checks run by ``racketchaos selftest``."""

from __future__ import annotations

import numpy as np

from .generating import ConstantsBundle, delta_rec, energies
from .impact_map import ImpactState, free_flight_oracle, jacobian_te, step
from .racket import ForcingSpec
from .scaffold import sign_condition_holds, solve_constants, special_orbit_times
from .stationary import flow_step, stable_eta


def _check(name, ok, **detail):
    return {"check": name, "pass": bool(ok), **detail}


def map_vs_oracle(world, rng, n=200):
    c, spec = world.consts, world.spec
    worst = 0.0
    for _ in range(n):
        s = ImpactState(rng.uniform(0, 1), rng.uniform(c.v_bar + 0.1, c.v_bar + 60))
        a, b = step(s, spec, c), free_flight_oracle(s, spec)
        worst = max(worst, abs(a.t - b.t), abs(a.v - b.v))
    return _check("map_vs_oracle", worst < 1e-9, worst=worst, samples=n)


def integrable_case(rng, n=200):
    spec = ForcingSpec(1.0)
    c = ConstantsBundle(g=1.0, v_bar=0.01, K1=0.02)
    worst = 0.0
    for _ in range(n):
        a = rng.uniform(-5, 5)
        b = a + rng.uniform(0.5, 30)
        cc = b + rng.uniform(0.5, 30)
        exact = ((cc - b) ** 2 - (b - a) ** 2) / 8
        worst = max(worst, abs(delta_rec(a, b, cc, spec, c) - exact))
    return _check("integrable_recurrence", worst < 1e-12, worst=worst, samples=n)


def symplectic(world, rng, n=100):
    c, spec = world.consts, world.spec
    worst_det = worst_cross = 0.0
    h = 1e-5
    for _ in range(n):
        t0 = rng.uniform(0, 1)
        E = rng.uniform(c.v_bar + 0.1, c.v_bar + 60) ** 2 / 2
        worst_det = max(worst_det, abs(np.linalg.det(jacobian_te(t0, E, spec, c)) - 1))
        t1 = t0 + rng.uniform(c.K1 + 0.5, c.K1 + 60)
        dE0 = (energies(t0, t1 + h, spec)[0] - energies(t0, t1 - h, spec)[0]) / (2 * h)
        dE1 = (energies(t0 + h, t1, spec)[1] - energies(t0 - h, t1, spec)[1]) / (2 * h)
        worst_cross = max(worst_cross, abs(dE0 + dE1))
    ok = worst_det < 1e-5 and worst_cross < 1e-5
    return _check("symplectic", ok, worst_det=worst_det, worst_cross=worst_cross, samples=n)


def special_orbits(world):
    c, a, spec = world.consts, world.anchors, world.spec
    worst = 0.0
    for kind, p in (("periodic", c.m + 1), ("accelerating", c.m), ("decelerating", c.m + 3)):
        seq = special_orbit_times(kind, p, a, c, spec)
        worst = max(worst, seq.info["max_residual"])
    return _check("special_orbits", worst < 1e-9, worst=worst)


def constants_example():
    got = solve_constants(3.0, 6.0, 1.69)
    return _check("solve_constants_example", got == (196, 14), got=list(got))


def scaffolds(world):
    ok = sign_condition_holds(world.sup, world.field) and sign_condition_holds(world.sub, world.field)
    M = world.M_eff
    env_ok = bool(np.all(np.abs(world.w_lower.offset) <= M) and np.all(np.abs(world.w_upper.offset) <= M))
    return _check("scaffold_signs_and_envelopes", ok and env_ok, M_eff=M)


def flow_order(world, rng, n=20, length=30):
    c, field = world.consts, world.field
    violations = 0
    for _ in range(n):
        base = (c.m + 1) * np.arange(length, dtype=np.int64)
        lo = rng.uniform(-1.5, 1.5, length)
        hi = lo + rng.uniform(0.0, 0.5, length)
        eta = min(stable_eta(base, lo, field), stable_eta(base, hi, field))
        if np.any(flow_step(base, lo, field, eta) > flow_step(base, hi, field, eta)):
            violations += 1
    return _check("flow_order_preserving", violations == 0, violations=violations, pairs=n)


def run_all(world, seed=0):
    rng = np.random.default_rng(seed)
    return [
        map_vs_oracle(world, rng),
        integrable_case(rng),
        symplectic(world, rng),
        special_orbits(world),
        constants_example(),
        scaffolds(world),
        flow_order(world, rng),
    ]

