"""Exact bouncing-ball impact map in (time, relative velocity) coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError, GrazingImpact, NoImpact
from .racket import ForcingSpec, eval_with_derivatives, f_value, height

MAX_ITER = 200
ORACLE_STEP = 1e-3
ORACLE_TOL = 1e-12
GRAZING_TOL = 1e-6


@dataclass(frozen=True)
class ImpactState:
    t: float
    v: float

    @property
    def E(self):
        return self.v * self.v / 2


def _is_mp(x):
    return isinstance(x, mpmath.mpf)


def _dd(spec, t0, f0, t1):
    L = t1 - t0
    if abs(L) < 1e-8:
        return eval_with_derivatives(spec, (t0 + t1) / 2)[1]
    return (f_value(spec, t1) - f0) / L


def _solve_t1(t0, v0, spec, K1):
    """Root of ``R(t1) = t1 - t0 - 2(v0 + f'(t0))/g + (2/g) f[t1, t0]``.

    Newton from the explicit guess, safeguarded by bisection on a bracket
    whose half-width bounds the divided-difference correction.
    """
    mp = _is_mp(t0)
    g = mpmath.mpf(spec.g) if mp else spec.g
    f0, fd0, _ = eval_with_derivatives(spec, t0)
    guess = t0 + 2 * (v0 + fd0) / g
    width = 4 * spec.max_abs_f * (2 / spec.g) / max(K1, 1e-3) + 1e-9
    lo = max(guess - width, t0 + K1)
    hi = guess + width
    if mp:
        lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
        tol = mpmath.mpf(2) ** (-mpmath.mp.prec + 4) * max(1, abs(guess))
    else:
        tol = 4 * np.spacing(max(1.0, abs(guess)))

    def resid(t1):
        F = _dd(spec, t0, f0, t1)
        fd1 = eval_with_derivatives(spec, t1)[1]
        r = t1 - guess + 2 * F / g
        L = t1 - t0
        dr = 1 + 2 * (fd1 - F) / (g * L)
        return r, dr

    r_lo, _ = resid(lo)
    r_hi, _ = resid(hi)
    if r_lo > 0 or r_hi < 0:
        raise ConvergenceError(
            "no sign change of the impact-time residual on the bracket; "
            "K1 / v_bar are too small for this state",
            t0=t0, v0=v0, lo=lo, hi=hi,
        )
    x = min(max(guess, lo), hi)
    for _ in range(MAX_ITER):
        r, dr = resid(x)
        if r == 0:
            return x
        if r > 0:
            hi = x
        else:
            lo = x
        step = r / dr if dr > 0 else None
        nx = x - step if step is not None else None
        if nx is None or not (lo < nx < hi):
            nx = (lo + hi) / 2
            step = x - nx
        x = nx
        if abs(step) <= tol or hi - lo <= tol:
            return x
    raise ConvergenceError("impact-time solve did not converge", t0=t0, v0=v0)


def step(state: ImpactState, spec: ForcingSpec, consts) -> ImpactState:
    """Advance one impact.

    ``consts`` needs ``v_bar`` and ``K1``.  States given as mpmath numbers are
    advanced in the current mpmath working precision.
    """
    t0, v0 = state.t, state.v
    if not v0 > consts.v_bar:
        raise DomainError(f"v0 = {v0} not above v_bar = {consts.v_bar}", v0=v0, v_bar=consts.v_bar)
    t1 = _solve_t1(t0, v0, spec, consts.K1)
    f0, fd0, _ = eval_with_derivatives(spec, t0)
    fd1 = eval_with_derivatives(spec, t1)[1]
    F = _dd(spec, t0, f0, t1)
    v1 = v0 + fd1 - 2 * F + fd0
    return ImpactState(t1, v1)


def residual(state: ImpactState, nxt: ImpactState, spec: ForcingSpec) -> float:
    """Absolute residual of the implicit time equation for a computed step."""
    f0, fd0, _ = eval_with_derivatives(spec, state.t)
    F = _dd(spec, state.t, f0, nxt.t)
    g = spec.g
    return abs(nxt.t - state.t - 2 * (state.v + fd0) / g + 2 * F / g)


def iterate(state: ImpactState, n: int, spec: ForcingSpec, consts, dps: int | None = None):
    """Orbit of ``n`` steps (``n + 1`` states).

    With ``dps`` set the orbit is computed in mpmath at that many digits; the
    initial state should then already carry that precision.
    """
    if dps is not None:
        with mpmath.workdps(dps):
            cur = ImpactState(mpmath.mpf(state.t), mpmath.mpf(state.v))
            out = [cur]
            for i in range(n):
                cur = _indexed_step(cur, spec, consts, i)
                out.append(cur)
            return out
    out = [state]
    cur = state
    for i in range(n):
        cur = _indexed_step(cur, spec, consts, i)
        out.append(cur)
    return out


def _indexed_step(cur, spec, consts, i):
    try:
        return step(cur, spec, consts)
    except (DomainError, ConvergenceError) as exc:
        exc.details["index"] = i
        raise


def free_flight_oracle(state: ImpactState, spec: ForcingSpec) -> ImpactState:
    """Next impact found by simulating the parabola against the racket graph.

    Independent of :func:`step`: it brackets the first crossing of the ball
    height ``x(t)`` with ``f(t)`` on a grid of step 1e-3 and bisects.
    """
    t0, v0 = float(state.t), float(state.v)
    if not v0 > 0:
        raise DomainError("free flight needs a positive relative velocity", v0=v0)
    g = spec.g
    f0, fd0, _ = eval_with_derivatives(spec, t0)
    u0 = v0 + fd0

    def gap(t):
        tau = t - t0
        return f0 + u0 * tau - 0.5 * g * tau * tau - f_value(spec, t)

    def gap_grid(ts):
        tau = ts - t0
        return f0 + tau * (u0 - 0.5 * g * tau) - height(spec, ts)

    horizon = t0 + 10.0 * (2.0 * v0 / g)
    found = None
    for a, b in _scan_windows(t0, f0, u0, g, spec.max_abs_f, horizon):
        while a < b and found is None:
            stop = min(a + 2.0, b)
            n = max(int(math.ceil((stop - a) / ORACLE_STEP)), 1)
            ts = a + ORACLE_STEP * np.arange(1, n + 1)
            ys = gap_grid(ts)
            neg = np.nonzero(ys <= 0.0)[0]
            if neg.size:
                i = int(neg[0])
                lo = ts[i - 1] if i > 0 else a
                found = (float(lo), float(ts[i]))
            a = float(ts[-1])
        if found is not None:
            break
    if found is None:
        raise NoImpact(f"no crossing before t = {horizon}", t0=t0, v0=v0)
    lo, hi = found
    if lo == t0:
        lo = t0 + ORACLE_STEP * 1e-6
        if gap(lo) <= 0:
            raise GrazingImpact("ball and racket do not separate", t0=t0, v0=v0)
    while hi - lo > ORACLE_TOL:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
        if mid == lo == hi:
            break
    t1 = 0.5 * (lo + hi)
    xdot = u0 - g * (t1 - t0)
    fd1 = eval_with_derivatives(spec, t1)[1]
    rel = fd1 - xdot
    if abs(rel) < GRAZING_TOL:
        raise GrazingImpact("tangential impact", t1=t1, rel=rel)
    return ImpactState(t1, rel)


def _scan_windows(t0, f0, u0, g, fmax, horizon):
    """Time windows that may contain a crossing.

    While the parabola is above ``max |f|`` no impact is possible, so that
    stretch is skipped; everything else is scanned on the dense grid.
    """
    disc = u0 * u0 + 2.0 * g * (f0 - fmax)
    if disc <= 0.0:
        return [(t0, horizon)]
    r = math.sqrt(disc)
    lo, hi = (u0 - r) / g, (u0 + r) / g
    if hi <= 0.0:
        return [(t0, horizon)]
    lo = max(lo, 0.0)
    first = (t0, min(t0 + lo + ORACLE_STEP, horizon))
    return [first, (max(t0 + hi - ORACLE_STEP, first[1]), horizon)]


def estimate_domain(spec: ForcingSpec, t_step: float = 1e-2, l_step: float = 1e-2):
    """Estimate ``(K1, v_bar)``.

    ``K1`` is twice the smallest gap beyond which the impact-time residual is
    increasing in ``t1`` for every sampled ``t0`` (so the root is unique);
    ``v_bar = g K1 / 2 + 2 max|f'| + 2 max|f| (2 / K1)``.
    """
    g = spec.g
    l_max = 4.0 * spec.max_abs_fdot / g + 1.0
    t0 = np.arange(0.0, 1.0, t_step)[:, None]
    L = np.arange(l_step, l_max + l_step, l_step)[None, :]
    t1 = t0 + L
    f0, _, _ = eval_with_derivatives(spec, t0)
    f1, fd1, _ = eval_with_derivatives(spec, t1)
    F = (f1 - f0) / L
    slope = 1.0 + 2.0 * (fd1 - F) / (g * L)
    bad = np.nonzero(slope.min(axis=0) <= 0.0)[0]
    k1_raw = float(L[0, bad.max() + 1]) if bad.size else float(L[0, 0])
    K1 = 2.0 * k1_raw
    v_bar = g * K1 / 2.0 + 2.0 * spec.max_abs_fdot + 2.0 * spec.max_abs_f * (2.0 / K1)
    return K1, v_bar


def orbit_rows(states):
    """Rows ``(n, t, v, E, gap)`` for the orbit CSV; gap is ``None`` on the last row."""
    rows = []
    for i, s in enumerate(states):
        gap = float(states[i + 1].t - s.t) if i + 1 < len(states) else None
        rows.append((i, float(s.t), float(s.v), float(s.E), gap))
    return rows


def step_te(t: float, E: float, spec: ForcingSpec, consts):
    """The map in (time, energy) coordinates."""
    nxt = step(ImpactState(t, math.sqrt(2.0 * E)), spec, consts)
    return nxt.t, nxt.E


def jacobian_te(t: float, E: float, spec: ForcingSpec, consts, h: float = 3e-5):
    """Fourth-order central-difference Jacobian of :func:`step_te`.

    The energy step is ``h * sqrt(E)``, matching the time step in velocity.
    """
    hE = h * max(1.0, math.sqrt(abs(E)))
    cols = []
    for dt, dE, w in ((h, 0.0, h), (0.0, hE, hE)):
        f = lambda k: np.array(step_te(t + k * dt, E + k * dE, spec, consts))
        cols.append((8 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12 * w))
    return np.column_stack(cols)
