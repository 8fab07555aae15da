"""Stationary configurations of the modified recurrence between symbolic envelopes.

Unknowns are offsets ``d_n = t_n - zeta_e(n)`` over one code period
``0 <= n < pQ``; the closure ``t_{n+pQ} = t_n + zeta_e(pQ)`` makes them
periodic.  The solver is the projected comparison flow

    d <- clip(d + eta * Delta~(t), lower, upper)

which is order preserving whenever ``eta * |dDelta~/db| <= 1``, since
``Delta~`` increases in its outer arguments.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field

import mpmath
import numpy as np

from .errors import NoConvergence, OrbitMismatch, SandwichBreach
from .extension import ExtensionField, delta_tilde_lattice, partials_lattice
from .generating import arc_velocities, recurrence_kernel, recurrence_partials
from .impact_map import ImpactState, step
from .racket import eval_with_derivatives
from .scaffold import ScaffoldSeq, SymbolSequence, zeta

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
MAX_STEPS = 1_000_000
ETA_SAFETY = 0.4
ETA_REFRESH = 1000
PROJECTION_LIMIT = 0.10


@dataclass
class Configuration:
    """Times ``t_n = base_n + offset_n`` for ``n = n0 .. n0 + len - 1``.

    With ``closure = (period, shift)`` the values extend to all ``n`` by
    ``t_{n+period} = t_n + shift``.
    """

    n0: int
    base: np.ndarray
    offset: np.ndarray
    closure: tuple | None = None
    residual: float = float("nan")
    code: SymbolSequence | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    info: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=np.int64)
        self.offset = np.asarray(self.offset, dtype=float)

    def __len__(self):
        return len(self.base)

    @property
    def values(self):
        return self.base + self.offset

    @classmethod
    def from_scaffold(cls, seq: ScaffoldSeq, field: ExtensionField | None = None):
        cfg = cls(seq.n_lo, seq.base.copy(), seq.offset.copy(), code=seq.code)
        if field is not None:
            cfg.residual = float(np.max(np.abs(seq.residuals(field)), initial=0.0))
        return cfg

    def extended(self, before: int = 1, after: int = 1):
        """``(indices, base, offset)`` padded through the closure."""
        if self.closure is None:
            return np.arange(self.n0, self.n0 + len(self)), self.base, self.offset
        period, shift = self.closure
        ns = np.arange(self.n0 - before, self.n0 + len(self) + after)
        k = np.floor_divide(ns - self.n0, period)
        i = ns - self.n0 - k * period
        return ns, self.base[i] + k * shift, self.offset[i]

    def gaps(self):
        _, b, o = self.extended(0, 1)
        return np.diff(b).astype(float) + np.diff(o)

    def residuals(self, field: ExtensionField):
        _, b, o = self.extended(1, 1)
        return delta_tilde_lattice(b, o, field)

    def rows(self, field: ExtensionField | None = None):
        """``(n, t, gap, residual_n, lower, upper)`` per index."""
        gaps = self.gaps()
        res = self.residuals(field) if field is not None else np.full(len(self), np.nan)
        if self.closure is None:
            gaps = np.append(gaps, np.nan)
            res = np.concatenate([[np.nan], res, [np.nan]]) if field is not None else res
        out = []
        for i in range(len(self)):
            b = int(self.base[i])
            lo = b + float(self.lower[i]) if self.lower is not None else None
            up = b + float(self.upper[i]) if self.upper is not None else None
            out.append((self.n0 + i, b + float(self.offset[i]), float(gaps[i]),
                        float(res[i]), lo, up))
        return out


# -- the comparison flow -------------------------------------------------------

def _pad(d, periodic, left=None, right=None):
    if periodic:
        return np.concatenate([[d[-1]], d, [d[0]]])
    return np.concatenate([[left], d, [right]])


def flow_step(base, offset, field: ExtensionField, eta: float, lower=None, upper=None):
    """One explicit Euler step on the interior entries of ``base + offset``.

    End entries are held fixed; ``lower`` / ``upper`` (offsets of the interior
    entries) clip the result.  Returns the new full offset array.
    """
    r = delta_tilde_lattice(base, offset, field)
    new = np.array(offset, dtype=float)
    inner = new[1:-1] + eta * r
    if lower is not None or upper is not None:
        inner = np.clip(inner, lower, upper)
    new[1:-1] = inner
    return new


def stable_eta(base, offset, field: ExtensionField, safety: float = ETA_SAFETY):
    _, db, _ = partials_lattice(base, offset, field)
    return safety / float(np.max(np.abs(db)))


def find_between(x_lower: ScaffoldSeq, x_upper: ScaffoldSeq, code: SymbolSequence,
                 consts, field: ExtensionField, tol: float = RESIDUAL_TOL,
                 max_steps: int = MAX_STEPS, M_eff: float | None = None) -> Configuration:
    """Stationary configuration inside the band ``[x_lower - M, x_upper + M]``.

    The flow starts on the lower edge of the band.  For periodic codes the
    unknowns cover one period with the integral closure shift; for finite
    non-periodic words the end values of the envelope window are frozen on
    the lower edge, which only approximates a bi-infinite solution.
    """
    m, Q = int(consts.m), int(consts.Q)
    M = float(M_eff if M_eff is not None else consts.M)
    periodic = code.periodic
    if periodic:
        N = code.period * Q
        ns = np.arange(0, N)
    else:
        ns = np.arange(x_lower.n_lo + 1, x_lower.n_hi)
    _, lo_off = x_lower.at(ns)
    _, up_off = x_upper.at(ns)
    lower = lo_off - M
    upper = up_off + M
    if periodic:
        base = zeta(code, np.arange(-1, N + 1), m, Q)
    else:
        base = zeta(code, np.arange(ns[0] - 1, ns[-1] + 2), m, Q)
        end_lo = float(x_lower.at(ns[0] - 1)[1] - M)
        end_hi = float(x_lower.at(ns[-1] + 1)[1] - M)

    d = lower.copy()
    pad = (lambda v: _pad(v, True)) if periodic else (lambda v: _pad(v, False, end_lo, end_hi))
    eta = stable_eta(base, pad(d), field)
    first_res = None
    projected = 0
    res = np.inf
    steps = 0
    for steps in range(max_steps + 1):
        full = pad(d)
        r = delta_tilde_lattice(base, full, field)
        res = float(np.max(np.abs(r)))
        if first_res is None:
            first_res = res
        if res < tol:
            break
        if steps == max_steps:
            raise NoConvergence(f"flow residual {res:.3g} after {max_steps} steps",
                                residual=res, steps=steps)
        if steps and steps % ETA_REFRESH == 0:
            eta = stable_eta(base, full, field)
        trial = d + eta * r
        d = np.clip(trial, lower, upper)
        if np.any(d != trial):
            projected += 1
    if steps and projected > PROJECTION_LIMIT * steps:
        raise SandwichBreach(f"projection active in {projected} of {steps} steps",
                             projected=projected, steps=steps)
    log.debug("flow %s: %d steps, residual %.3g -> %.3g", code, steps, first_res, res)
    cfg = Configuration(
        int(ns[0]), base[1:-1], d,
        closure=(N, int(zeta(code, N, m, Q))) if periodic else None,
        residual=res, code=code, lower=lower, upper=upper,
        info={"flow_steps": steps, "initial_residual": first_res, "projected_steps": projected,
              "eta": eta, "M_eff": M},
    )
    return cfg


# -- certification -----------------------------------------------------------

def certify(config: Configuration, consts, field: ExtensionField) -> dict:
    """Three diagnostic checks: every gap above ``K``; the sandwich bounds; and
    the block bound ``|t_{s+Q} - t_s| <= Q |t_{s+j+1} - t_{s+j}| + Q(Q-1)C/2``."""
    K, Q, C = consts.K, int(consts.Q), consts.C
    gaps = config.gaps()
    i_min = int(np.argmin(gaps))
    gap_ok = bool(gaps[i_min] > K)
    report = {
        "gaps_above_K": {"pass": gap_ok, "min_gap": float(gaps[i_min]),
                         "index": config.n0 + i_min, "K": K},
    }
    if config.lower is not None and config.upper is not None:
        below = config.lower - config.offset
        above = config.offset - config.upper
        worst = float(max(below.max(), above.max()))
        report["sandwich"] = {"pass": bool(worst <= 1e-12), "worst_violation": worst}
    else:
        report["sandwich"] = {"pass": None, "note": "no envelopes attached"}
    _, b, o = config.extended(0, Q)
    ext_gaps = np.diff(b).astype(float) + np.diff(o)
    slack = np.inf
    for s in range(0, len(config), Q):
        if s + Q >= len(b):
            break
        disp = float(b[s + Q] - b[s]) + float(o[s + Q] - o[s])
        bound = Q * np.abs(ext_gaps[s:s + Q]) + Q * (Q - 1) * C / 2
        slack = min(slack, float(np.min(bound - abs(disp))))
    report["block_bound"] = {"pass": bool(slack >= 0), "min_slack": slack}
    report["all_pass"] = all(v["pass"] in (True, None) for v in report.values())
    return report


def lift_to_orbit(config: Configuration, spec, consts, tol: float = 1e-8):
    """Impact states ``(t_n, v_n)`` with ``v_n`` the launch speed of arc n, checked
    against one step of the exact map at every index."""
    ns, b, o = config.extended(0, 2)
    gaps = np.diff(b).astype(float) + np.diff(o)
    f, fd, _ = eval_with_derivatives(spec, o)
    v0, _ = arc_velocities(spec.g, gaps, f[:-1], f[1:], fd[:-1], fd[1:])
    n_states = len(config) if config.closure is not None else len(config) - 1
    states = [ImpactState(float(b[i] + o[i]), float(v0[i])) for i in range(n_states)]
    worst, where = 0.0, None
    for i in range(min(n_states, len(v0) - 1)):
        nxt = step(ImpactState(float(o[i]), float(v0[i])), spec, consts)
        dt = abs((nxt.t - o[i]) - gaps[i])
        dv = abs(nxt.v - v0[i + 1])
        if max(dt, dv) > worst:
            worst, where = max(dt, dv), int(ns[i])
    if worst > tol:
        raise OrbitMismatch(f"lifted state {where} misses the next one by {worst:.3g}",
                            index=where, deviation=worst)
    return states


# -- multiple-precision refinement ------------------------------------------------

def _solve_cyclic_tridiagonal(a, b, c, r):
    """Solve ``a_i x_{i-1} + b_i x_i + c_i x_{i+1} = r_i`` with cyclic indices."""
    n = len(b)
    gamma = -b[0]
    bb = list(b)
    bb[0] = b[0] - gamma
    bb[-1] = b[-1] - c[-1] * a[0] / gamma

    def thomas(rhs):
        cp = [0] * n
        dp = [0] * n
        cp[0] = c[0] / bb[0]
        dp[0] = rhs[0] / bb[0]
        for i in range(1, n):
            den = bb[i] - a[i] * cp[i - 1]
            cp[i] = c[i] / den if i < n - 1 else 0
            dp[i] = (rhs[i] - a[i] * dp[i - 1]) / den
        x = [0] * n
        x[-1] = dp[-1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
        return x

    x = thomas(r)
    u = [0] * n
    u[0], u[-1] = gamma, c[-1]
    zv = thomas(u)
    fac = (x[0] + a[0] * x[-1] / gamma) / (1 + zv[0] + a[0] * zv[-1] / gamma)
    return [x[i] - fac * zv[i] for i in range(n)]


def refine_mp(config: Configuration, spec, dps: int = 60, max_iter: int = 30):
    """Newton-polish a closed configuration in multiple precision.

    Returns the list of offsets as ``mpf`` with residual below ``10**(-dps+10)``.
    """
    if config.closure is None:
        raise ValueError("multiple-precision refinement needs a closed configuration")
    period, _ = config.closure
    _, b, _ = config.extended(1, 1)
    with mpmath.workdps(dps):
        g = mpmath.mpf(spec.g)
        d = [mpmath.mpf(float(x)) for x in config.offset]
        chi = [int(b[i + 1] - b[i]) for i in range(len(b) - 1)]   # slopes over n-1..n
        target = mpmath.mpf(10) ** (-(dps - 10))
        for _ in range(max_iter):
            ev = [eval_with_derivatives(spec, x) for x in d]
            res, A, B, Cc = [], [], [], []
            for i in range(period):
                im, ip = (i - 1) % period, (i + 1) % period
                L1 = chi[i] + d[i] - d[im]
                L2 = chi[i + 1] + d[ip] - d[i]
                fa, fda, _ = ev[im]
                fb, fdb, fddb = ev[i]
                fc, fdc, _ = ev[ip]
                res.append(recurrence_kernel(g, L1, L2, fa, fb, fc, fdb))
                da, db, dc = recurrence_partials(g, L1, L2, fa, fb, fc, fda, fdb, fdc, fddb)
                A.append(da)
                B.append(db)
                Cc.append(dc)
            worst = max(abs(x) for x in res)
            if worst < target:
                return d
            delta = _solve_cyclic_tridiagonal(A, B, Cc, [-x for x in res])
            d = [d[i] + delta[i] for i in range(period)]
        raise NoConvergence("multiple-precision Newton did not converge",
                            residual=float(worst))
