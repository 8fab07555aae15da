"""Generating-function quantities of the unmodified impact map.

The generating function ``h(t0, t1)`` itself is never formed.  Everything
downstream only needs its first partials, which are the boundary energies of
the free-flight arc from impact ``t0`` to impact ``t1``::

    d1 h(t0, t1) =  E0 = v0**2 / 2
    d2 h(t0, t1) = -E1 = -v1**2 / 2

with ``v0 = g L / 2 + f[t1, t0] - f'(t0)``, ``v1 = g L / 2 - f[t1, t0] + f'(t1)``
and ``L = t1 - t0``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, TwistFailure
from .racket import ForcingSpec, eval_with_derivatives


@dataclass(frozen=True)
class ConstantsBundle:
    """All constants of the construction.

    ``rho0 = m + 1`` and ``rho1 = m + 2`` are derived on demand.
    """

    g: float
    v_bar: float
    K1: float
    K: float | None = None
    delta: float | None = None
    eps: float = 1.0
    C: float | None = None
    M: float | None = None
    m: int | None = None
    Q: int | None = None

    @property
    def rho0(self):
        return self.m + 1

    @property
    def rho1(self):
        return self.m + 2

    def inequality_margins(self) -> dict:
        """Slack of each inequality the integers (m, Q) must satisfy; all > 0 when valid."""
        m, Q, K, C, M = self.m, self.Q, self.K, self.C, self.M
        rhs = Q * K + Q * (Q - 1) * C / 2
        return {
            "Q_gt_8M": Q - 8 * M,
            "block_rho0": Q * (m + 1) - 4 * M - rhs,
            "block_rho1": Q * (m + 2) - 4 * M - rhs,
            "rhs_positive": rhs,
            "m_lower_bound": m - max(2 * self.v_bar / self.g, 2 * K + 9),
        }

    def validate(self):
        problems = []
        if self.K is not None and self.K < self.K1 + 2 * self.eps - 1e-12:
            problems.append(f"K = {self.K} < K1 + 2 eps = {self.K1 + 2 * self.eps}")
        for name in ("delta", "eps", "C", "M"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                problems.append(f"{name} must be positive, got {val}")
        if None not in (self.m, self.Q, self.K, self.C, self.M):
            for name, slack in self.inequality_margins().items():
                if not slack > 0:
                    problems.append(f"inequality {name} fails (slack {slack:.6g})")
        return problems

    def to_dict(self) -> dict:
        return asdict(self)


# -- arc kernels -------------------------------------------------------------
# These take f and f' values plus an accurately computed gap, so callers that
# track times as (integer, offset) pairs keep full precision.  They work on
# floats, numpy arrays and mpmath numbers alike.

def arc_velocities(g, L, fa, fb, fda, fdb):
    """Launch speed at the first impact and arrival speed at the second."""
    F = (fb - fa) / L
    v0 = g * L / 2 + F - fda
    v1 = g * L / 2 - F + fdb
    return v0, v1


def recurrence_kernel(g, L1, L2, fa, fb, fc, fdb):
    """``d2 h(a, b) + d1 h(b, c)`` from values at the three impacts."""
    F1 = (fb - fa) / L1
    F2 = (fc - fb) / L2
    v_in = g * L1 / 2 - F1 + fdb
    v_out = g * L2 / 2 + F2 - fdb
    return (v_out - v_in) * (v_out + v_in) / 2


def twist_kernel(g, L, fa, fb, fda, fdb):
    """Closed-form mixed partial ``d12 h = v0 * (g/2 + (f'(t1) - f[t1,t0]) / L)``."""
    F = (fb - fa) / L
    v0 = g * L / 2 + F - fda
    return v0 * (g / 2 + (fdb - F) / L)


def recurrence_partials(g, L1, L2, fa, fb, fc, fda, fdb, fdc, fddb):
    """Derivatives of the recurrence in its three arguments (a, b, c)."""
    F1 = (fb - fa) / L1
    F2 = (fc - fb) / L2
    v_in = g * L1 / 2 - F1 + fdb
    v_out = g * L2 / 2 + F2 - fdb
    da = (g * L1 / 2 + F1 - fda) * (g / 2 + (fdb - F1) / L1)
    dc = v_out * (g / 2 + (fdc - F2) / L2)
    dv_in = g / 2 - (fdb - F1) / L1 + fddb
    dv_out = -g / 2 + (F2 - fdb) / L2 - fddb
    db = -v_in * dv_in + v_out * dv_out
    return da, db, dc


def _vals(spec, t):
    f, fd, _ = eval_with_derivatives(spec, t)
    return f, fd


# -- public operations -------------------------------------------------------

def boundary_data(t0, t1, spec: ForcingSpec, consts):
    """``(v0, v1, E0, E1)`` of the arc from ``t0`` to ``t1``."""
    if not t1 - t0 > consts.K1:
        raise DomainError(f"gap {t1 - t0} not above K1 = {consts.K1}", t0=t0, t1=t1)
    f0, fd0 = _vals(spec, t0)
    f1, fd1 = _vals(spec, t1)
    v0, v1 = arc_velocities(spec.g, t1 - t0, f0, f1, fd0, fd1)
    return v0, v1, v0 * v0 / 2, v1 * v1 / 2


def energies(t0, t1, spec: ForcingSpec):
    """Unchecked, vectorized ``(E0, E1)``."""
    f0, fd0 = _vals(spec, t0)
    f1, fd1 = _vals(spec, t1)
    v0, v1 = arc_velocities(spec.g, t1 - t0, f0, f1, fd0, fd1)
    return v0 * v0 / 2, v1 * v1 / 2


def twist(t0, t1, spec: ForcingSpec):
    """Closed-form ``d12 h(t0, t1)`` (vectorized, no domain check)."""
    f0, fd0 = _vals(spec, t0)
    f1, fd1 = _vals(spec, t1)
    return twist_kernel(spec.g, t1 - t0, f0, f1, fd0, fd1)


def delta_rec(a, b, c, spec: ForcingSpec, consts):
    """``Delta(a, b, c) = d2 h(a, b) + d1 h(b, c)``; zero iff the arcs join into an orbit."""
    if not (b - a > consts.K1 and c - b > consts.K1):
        raise DomainError(
            f"gaps {b - a}, {c - b} must exceed K1 = {consts.K1}", a=a, b=b, c=c
        )
    fa, _ = _vals(spec, a)
    fb, fdb = _vals(spec, b)
    fc, _ = _vals(spec, c)
    return recurrence_kernel(spec.g, b - a, c - b, fa, fb, fc, fdb)


def fd_twist(t0, t1, spec: ForcingSpec, h: float = 1e-5):
    """Central finite difference of ``E0`` in ``t1``."""
    ep, _ = energies(t0, t1 + h, spec)
    em, _ = energies(t0, t1 - h, spec)
    return (ep - em) / (2 * h)


def estimate_twist(spec: ForcingSpec, K1: float, eps: float = 1.0, max_tries: int = 10):
    """Return ``(K, delta, info)`` with ``K >= K1 + 2 eps`` and ``d12 h > 2 delta``
    on the sampled window ``gap in [K - eps, K + 50]``.

    ``delta`` is half the sampled minimum; ``K`` doubles on failure.
    """
    K = K1 + 2 * eps
    t0 = np.arange(0.0, 1.0, 1e-2)[:, None]
    for attempt in range(max_tries):
        gaps = np.arange(K - eps, K + 50.0 + 1e-9, 0.1)[None, :]
        vals = fd_twist(t0, t0 + gaps, spec)
        idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
        low = float(vals[idx])
        if low > 0:
            info = {
                "twist_min": low,
                "twist_argmin_t0": float(t0[idx[0], 0]),
                "twist_argmin_gap": float(gaps[0, idx[1]]),
                "twist_grid": "t0 in [0,1) step 0.01; gap in [K-eps, K+50] step 0.1; FD step 1e-5",
                "twist_attempts": attempt + 1,
            }
            return K, low / 2, info
        K *= 2
    raise TwistFailure("mixed partial not bounded below on any tried window", K=K)


def validate_twist(spec: ForcingSpec, K: float, delta: float, n: int = 10_000, seed: int = 0,
                   span: float = 200.0):
    """Minimum of ``d12 h`` over ``n`` fresh random points with ``K < gap < K + span``."""
    rng = np.random.default_rng(seed)
    t0 = rng.uniform(0.0, 1.0, n)
    gap = K + rng.uniform(0.0, span, n)
    vals = fd_twist(t0, t0 + gap, spec)
    return float(vals.min())


def gap_drift_bound(spec: ForcingSpec, K: float) -> float:
    """Analytic bound on ``|F|`` in ``t2 - t1 = t1 - t0 + F`` for gaps above ``K``."""
    return 4.0 / spec.g * spec.max_abs_fdot + 8.0 / spec.g * spec.max_abs_f / K


def estimate_C(spec: ForcingSpec, consts, field=None, t_step: float = 0.05,
               gap_step: float = 0.1):
    """Conservative gap-growth constant ``C`` and provenance.

    Maximum of: the analytic drift bound above ``K``; the sampled jump
    ``| |t2 - t1| - |t1 - t0| |`` of the extended map on the strip
    ``K - 2 eps <= t1 - t0 <= K + eps`` (``t0`` over one period); and the
    flat-region drift ``|Delta~(t1 - L, t1, t1 + L)| / delta`` for a gap ``L``
    below ``K - eps``.  Floored at 0.1.
    """
    from .extension import ExtensionField, flat_drift, next_time

    if field is None:
        field = ExtensionField(spec, consts)
    term1 = gap_drift_bound(spec, consts.K)
    if spec.max_abs_f == 0.0:
        term1 = 0.0
    K, eps = consts.K, consts.eps
    term2 = 0.0
    arg2 = None
    for t0 in np.arange(0.0, 1.0, t_step):
        for gap in np.arange(K - 2 * eps, K + eps + 1e-9, gap_step):
            t0f, t1 = float(t0), float(t0 + gap)
            t2 = next_time(t0f, t1, field)
            s = abs(abs(t2 - t1) - abs(t1 - t0f))
            if s > term2:
                term2, arg2 = s, (t0f, float(gap))
    term3 = 0.0
    for t1 in np.arange(0.0, 1.0, t_step):
        term3 = max(term3, abs(flat_drift(float(t1), field)))
    C = max(term1, term2, term3, 0.1)
    info = {
        "C_drift_bound": term1,
        "C_strip_max": term2,
        "C_strip_argmax": arg2,
        "C_flat_drift": term3,
    }
    return C, info
