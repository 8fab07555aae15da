import numpy as np
import pytest

from racketchaos.coding import (
    block_displacements,
    check_disjoint_bands,
    classify,
    encode,
    kset_rows,
    separation,
    verify_shift,
)
from racketchaos.errors import Unclassifiable
from racketchaos.pipeline import run_code


@pytest.fixture(scope="module")
def runs(world, experiment):
    return {w: run_code(world, w, experiment) for w in ("0", "00", "01", "10", "0110")}


def test_classify_bands(world):
    c, M = world.consts, world.M_eff
    m, Q = c.m, c.Q
    assert classify([(m + 1) * Q + 1.0, (m + 2) * Q - 2.0], c, M) == [0, 1]
    with pytest.raises(Unclassifiable) as info:
        classify([(m + 1.5) * Q], c, M)
    assert info.value.to_dict()["block"] == 0


def test_round_trip(runs, world):
    for w, r in runs.items():
        assert str(encode(r.config, world.consts)) == w


def test_block_displacements_periodic(runs, world):
    cfg = runs["01"].config
    Q, m = world.consts.Q, world.consts.m
    d = block_displacements(cfg, Q, count=4)
    assert len(d) == 4
    assert d[0] == pytest.approx(d[2]) and d[1] == pytest.approx(d[3])
    assert abs(d[0] - (m + 1) * Q) < 4 * world.M_eff


def test_shift_report(runs, world):
    rep = runs["0110"].report
    assert rep.shift_verified
    assert str(rep.code_out) == "1100"
    assert rep.details["methods_agree"]
    out = rep.to_dict()
    assert out["code_in"] == "0110" and out["mp_digits"] == 60


def test_verify_shift_direct(runs, world):
    rep = verify_shift(runs["10"].config, world.consts, world.spec, dps=50)
    assert rep.shift_verified and str(rep.code_out) == "01"


def test_separation(runs, world):
    floor = world.consts.Q - 8 * world.M_eff
    assert separation(runs["0"].config, runs["00"].config, world.consts) == float("inf")
    assert separation(runs["01"].config, runs["10"].config, world.consts) > floor
    assert separation(runs["0"].config, runs["0110"].config, world.consts) > floor


def test_kset_rows(runs, world):
    rows = kset_rows([runs["01"].config], world.spec, world.consts, ["01"])
    assert len(rows) == 2 * world.consts.Q
    t, E, cid, blk = rows[-1]
    assert 0 <= t < 1 and E > 0 and cid == "01" and blk == 1
    assert np.all(np.array([r[1] for r in rows]) > 1000)


def test_disjoint_bands():
    assert check_disjoint_bands([(3, 4), (0, 1)])
    assert not check_disjoint_bands([(0, 2), (1, 3)])
