import dataclasses

import numpy as np
import pytest

from racketchaos.errors import NoConvergence, OrbitMismatch
from racketchaos.extension import delta_tilde_lattice
from racketchaos.scaffold import SymbolSequence, symbolic_envelopes, zeta
from racketchaos.stationary import (
    Configuration,
    _solve_cyclic_tridiagonal,
    certify,
    find_between,
    flow_step,
    lift_to_orbit,
    refine_mp,
    stable_eta,
)


@pytest.fixture(scope="module")
def solved(world):
    code = SymbolSequence.parse("01")
    xl, xu = symbolic_envelopes(code, world.w_lower, world.w_upper, world.consts)
    cfg = find_between(xl, xu, code, world.consts, world.field)
    return code, xl, xu, cfg


def test_flow_converges_inside_band(solved, world):
    code, _, _, cfg = solved
    Q, m = world.consts.Q, world.consts.m
    assert cfg.residual < 1e-8
    assert cfg.closure == (2 * Q, int(zeta(code, 2 * Q, m, Q)))
    assert np.all(cfg.offset >= cfg.lower) and np.all(cfg.offset <= cfg.upper)
    assert cfg.info["projected_steps"] == 0
    assert np.max(np.abs(cfg.residuals(world.field))) < 1e-8


def test_certificate(solved, world):
    cert = certify(solved[3], world.consts, world.field)
    assert cert["all_pass"]
    assert cert["gaps_above_K"]["min_gap"] > world.consts.K


def test_lift_and_mismatch(solved, world):
    cfg = solved[3]
    states = lift_to_orbit(cfg, world.spec, world.consts)
    assert len(states) == len(cfg)
    bad = dataclasses.replace(cfg, offset=cfg.offset + np.where(np.arange(len(cfg)) == 3, 1e-4, 0))
    with pytest.raises(OrbitMismatch):
        lift_to_orbit(bad, world.spec, world.consts)


def test_budget_exhaustion(solved, world):
    code, xl, xu, _ = solved
    with pytest.raises(NoConvergence) as info:
        find_between(xl, xu, code, world.consts, world.field, max_steps=3)
    assert info.value.to_dict()["steps"] == 3


def test_refine_mp_shrinks_residual(solved, world):
    cfg = solved[3]
    d = refine_mp(cfg, world.spec, dps=40)
    assert max(abs(float(x) - y) for x, y in zip(d, cfg.offset)) < 1e-7


def test_cyclic_solver_matches_dense():
    rng = np.random.default_rng(4)
    n = 7
    a, c = rng.uniform(1, 2, n), rng.uniform(1, 2, n)
    b = -(a + c) - rng.uniform(0.5, 1, n)
    r = rng.normal(size=n)
    A = np.diag(b)
    for i in range(n):
        A[i, (i - 1) % n] += a[i]
        A[i, (i + 1) % n] += c[i]
    x = _solve_cyclic_tridiagonal(list(a), list(b), list(c), list(r))
    assert np.allclose(A @ np.array(x), r)


def test_flow_step_keeps_ends_and_clips(world):
    base = (world.consts.m + 1) * np.arange(8, dtype=np.int64)
    off = np.linspace(-0.5, 0.5, 8)
    eta = stable_eta(base, off, world.field)
    new = flow_step(base, off, world.field, eta)
    assert new[0] == off[0] and new[-1] == off[-1]
    r = delta_tilde_lattice(base, off, world.field)
    assert np.allclose(new[1:-1], off[1:-1] + eta * r)
    clipped = flow_step(base, off, world.field, 10.0, lower=-0.1, upper=0.1)
    assert np.all(np.abs(clipped[1:-1]) <= 0.1)


def test_configuration_extension():
    cfg = Configuration(0, [0, 10, 20], [0.1, 0.2, 0.3], closure=(3, 30))
    ns, b, o = cfg.extended(1, 2)
    assert list(ns) == [-1, 0, 1, 2, 3, 4]
    assert list(b) == [-10, 0, 10, 20, 30, 40]
    assert list(o) == [0.3, 0.1, 0.2, 0.3, 0.1, 0.2]
    assert cfg.gaps() == pytest.approx([10.1, 10.1, 9.8])
