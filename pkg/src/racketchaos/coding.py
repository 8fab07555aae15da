"""Symbolic dynamics of the constructed configurations.

A block of ``Q`` consecutive impacts advances time by about ``(m + 1) Q`` or
``(m + 2) Q``; reading which one, block by block, gives the binary code.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import mpmath
import numpy as np

from .errors import Unclassifiable
from .generating import arc_velocities
from .impact_map import ImpactState, iterate
from .racket import eval_with_derivatives
from .scaffold import SymbolSequence
from .stationary import Configuration, refine_mp

SHIFT_TOL = 1e-6


@dataclass
class ChaosReport:
    code_in: SymbolSequence
    code_out: SymbolSequence
    residual: float
    separation_margin: float
    shift_verified: bool
    K_points: list
    details: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "code_in": str(self.code_in),
            "code_out": str(self.code_out),
            "residual": self.residual,
            "separation_margin": self.separation_margin,
            "shift_verified": self.shift_verified,
            "K_points": [list(p) for p in self.K_points],
            **self.details,
        }


def block_displacements(config: Configuration, Q: int, start: int = 0, count=None):
    """``t_{(b+1)Q} - t_{bQ}`` for blocks ``b = start ..`` (lattice arithmetic)."""
    if count is None:
        count = len(config) // Q
    last = (start + count) * Q
    after = max(last - len(config) + 1, 1)
    if config.closure is None and after > 1:
        raise ValueError("window does not cover the requested blocks")
    _, b, o = config.extended(0, after)
    idx = np.arange(start, start + count + 1) * Q
    return np.diff(b[idx]).astype(float) + np.diff(o[idx])


def classify(disp, consts, M_eff):
    """Symbol for each displacement; the two bands are ``4 M_eff`` around
    ``(m + 1) Q`` and ``(m + 2) Q``."""
    m, Q = int(consts.m), int(consts.Q)
    out = []
    for b, x in enumerate(np.atleast_1d(disp)):
        if abs(x - (m + 1) * Q) <= 4 * M_eff:
            out.append(0)
        elif abs(x - (m + 2) * Q) <= 4 * M_eff:
            out.append(1)
        else:
            raise Unclassifiable(f"block {b} displacement {x:.6f} in neither band",
                                 block=b, displacement=float(x))
    return out


def encode(config: Configuration, consts, M_eff=None) -> SymbolSequence:
    M = float(M_eff if M_eff is not None else consts.M)
    word = classify(block_displacements(config, int(consts.Q)), consts, M)
    return SymbolSequence(tuple(word), config.closure is not None)


def separation(config_a: Configuration, config_b: Configuration, consts, M_eff=None) -> float:
    """Smallest displacement gap over blocks whose symbols differ (``inf`` if none)."""
    Q = int(consts.Q)
    n = min(len(config_a), len(config_b)) // Q
    if config_a.closure is not None and config_b.closure is not None:
        pa, pb = len(config_a) // Q, len(config_b) // Q
        n = int(np.lcm(pa, pb))
    da = block_displacements(config_a, Q, count=n)
    db = block_displacements(config_b, Q, count=n)
    ea = classify(da, consts, M_eff if M_eff is not None else consts.M)
    eb = classify(db, consts, M_eff if M_eff is not None else consts.M)
    diffs = [abs(x - y) for x, y, s, t in zip(da, db, ea, eb) if s != t]
    return float(min(diffs)) if diffs else float("inf")


def _states_mp(config, spec, d_mp, dps):
    """High-precision impact states at every index of one closed period."""
    period, shift = config.closure
    _, b, _ = config.extended(0, 1)
    with mpmath.workdps(dps):
        g = mpmath.mpf(spec.g)
        ts = [int(b[i]) + d_mp[i % period] for i in range(period + 1)]
        ts[period] = int(b[period]) + d_mp[0]
        ev = [eval_with_derivatives(spec, d_mp[i % period]) for i in range(period + 1)]
        out = []
        for i in range(period):
            L = ts[i + 1] - ts[i]
            v0, _ = arc_velocities(g, L, ev[i][0], ev[i + 1][0], ev[i][1], ev[i + 1][1])
            out.append(ImpactState(ts[i], v0))
        return out


def literal_block_images(config: Configuration, spec, consts, dps: int = 60):
    """Apply ``Q`` literal map steps to the state at the start of every block.

    The configuration is first Newton-polished in ``dps`` digits; the map
    amplifies errors by roughly the hyperbolic multiplier per step, so a
    double-precision start would not survive ``Q`` steps.
    """
    Q = int(consts.Q)
    period, shift = config.closure
    d_mp = refine_mp(config, spec, dps=dps)
    states = _states_mp(config, spec, d_mp, dps)
    images = []
    with mpmath.workdps(dps):
        for b in range(period // Q):
            orbit = iterate(states[b * Q], Q, spec, consts, dps=dps)
            images.append(orbit[-1])
    return images, states


def verify_shift(config: Configuration, consts, spec, M_eff=None, dps: int = 60) -> ChaosReport:
    """Check that ``P^Q`` acts on the code as the left shift, two ways.

    Index shift: read the code from the window moved forward by ``Q``.
    Literal: map each block-start state ``Q`` times with the exact impact map,
    compare with the configuration to ``1e-6`` and re-read the code.
    """
    M = float(M_eff if M_eff is not None else consts.M)
    Q = int(consts.Q)
    code = encode(config, consts, M)
    p = code.period
    expected = code.shifted(1)

    by_index = SymbolSequence(tuple(classify(block_displacements(config, Q, start=1, count=p),
                                             consts, M)))

    images, states = literal_block_images(config, spec, consts, dps=dps)
    _, b, o = config.extended(0, Q + 1)
    worst_t = worst_v = 0.0
    lit_disp = []
    for blk, img in enumerate(images):
        n_next = (blk + 1) * Q
        t_cfg = int(b[n_next]) + mpmath.mpf(float(o[n_next]))
        worst_t = max(worst_t, float(abs(img.t - t_cfg)))
        nxt = states[n_next % len(states)]
        worst_v = max(worst_v, float(abs(img.v - nxt.v)))
        lit_disp.append(float(img.t - states[blk * Q].t))
    # the image point starts at block 1, so its code is the list rotated once
    lit_codes = classify(lit_disp, consts, M)
    by_literal = SymbolSequence(tuple(lit_codes[1:] + lit_codes[:1]))
    agree = worst_t < SHIFT_TOL and worst_v < SHIFT_TOL
    verified = by_index == expected and by_literal == expected and agree
    details = {
        "code_by_index_shift": str(by_index),
        "code_by_literal_map": str(by_literal),
        "literal_max_time_error": worst_t,
        "literal_max_velocity_error": worst_v,
        "methods_agree": agree,
        "mp_digits": dps,
    }
    return ChaosReport(code, by_index if verified else by_literal, config.residual,
                       float("inf"), verified, sample_K_set([config], spec, consts), details)


def sample_K_set(configs, spec, consts):
    """``(t_n mod 1, E_n)`` for every index of every configuration, with
    ``E_n`` the launch energy of arc ``n``."""
    pts = []
    for cfg in configs:
        _, b, o = cfg.extended(0, 1)
        gaps = np.diff(b).astype(float) + np.diff(o)
        f, fd, _ = eval_with_derivatives(spec, o)
        v0, _ = arc_velocities(spec.g, gaps, f[:-1], f[1:], fd[:-1], fd[1:])
        for i in range(len(gaps)):
            pts.append((float(o[i] % 1.0), float(v0[i] ** 2 / 2)))
    return pts


def kset_rows(configs, spec, consts, code_ids=None):
    """Rows ``(t_mod_1, E, code_id, block_index)``."""
    Q = int(consts.Q)
    rows = []
    for k, cfg in enumerate(configs):
        cid = code_ids[k] if code_ids else str(cfg.code)
        for i, (t, E) in enumerate(sample_K_set([cfg], spec, consts)):
            rows.append((t, E, cid, i // Q))
    return rows


def energy_floor(spec, consts) -> float:
    """Coarse lower bound on launch energy for gaps above ``K``."""
    v = spec.g * consts.K / 2
    return v * v / 2 - spec.max_abs_fdot * v


def check_disjoint_bands(bands) -> bool:
    """``bands``: list of ``(lo, hi)``; true when no two intervals overlap."""
    s = sorted(bands)
    return all(s[i][1] < s[i + 1][0] for i in range(len(s) - 1))

