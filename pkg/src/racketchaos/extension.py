"""Globally defined modification of the generating function.

The mixed partial is blended into the constant ``delta`` below the gap ``K``:

    D(t0, t1) = psi(t1 - t0) * d12 h(t0, t1) + (1 - psi(t1 - t0)) * delta

and the partials of the modified function follow by integrating ``D`` along
characteristics from the line ``t1 = t0 + K``, where they match ``h``:

    d1 h~(t0, t1) = d1 h(t0, t0 + K) + int_{t0+K}^{t1} D(t0, tau) dtau
    d2 h~(t0, t1) = d2 h(t1 - K, t1) + int_{t1-K}^{t0} D(s, t1) ds

Where ``psi = 1`` the integrand is the exact derivative of a boundary energy,
so only the ramp of ``psi`` (width ``eps / 2``) is integrated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .generating import (
    ConstantsBundle,
    energies,
    recurrence_kernel,
    recurrence_partials,
    twist,
)
from .quadrature import adaptive_simpson
from .racket import ForcingSpec, eval_with_derivatives

SIGMA_PLUS = "Sigma+"
SIGMA_ZERO = "Sigma0"
SIGMA_MINUS = "Sigma-"


def smoothstep(s):
    """C-infinity ramp: 0 for ``s <= 0``, 1 for ``s >= 1``."""
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    a = math.exp(-1.0 / s)
    b = math.exp(-1.0 / (1.0 - s))
    return a / (a + b)


@dataclass(frozen=True)
class ExtensionField:
    spec: ForcingSpec
    consts: ConstantsBundle
    quad_tol: float = 1e-10

    @property
    def K(self):
        return self.consts.K

    @property
    def eps(self):
        return self.consts.eps

    @property
    def delta(self):
        return self.consts.delta

    @property
    def ramp_lo(self):
        return self.K - 0.75 * self.eps

    @property
    def ramp_hi(self):
        return self.K - 0.25 * self.eps

    def psi(self, gap):
        return smoothstep((gap - self.ramp_lo) / (0.5 * self.eps))

    def D(self, t0, t1):
        w = self.psi(t1 - t0)
        if w == 0.0:
            return self.delta
        return w * float(twist(t0, t1, self.spec)) + (1.0 - w) * self.delta

    # -- integrals of D over gap intervals, along either characteristic ----

    def _ramp_forward(self, t0, lo):
        """``int_{lo}^{ramp_hi} D(t0, t0 + u) du`` for ``lo`` in the ramp."""
        return adaptive_simpson(lambda u: self.D(t0, t0 + u), lo, self.ramp_hi, self.quad_tol)

    def _ramp_backward(self, t1, lo):
        """``int_{lo}^{ramp_hi} D(t1 - u, t1) du`` for ``lo`` in the ramp."""
        return adaptive_simpson(lambda u: self.D(t1 - u, t1), lo, self.ramp_hi, self.quad_tol)

    def d1(self, t0, t1):
        L = t1 - t0
        a = self.ramp_hi
        if L >= a:
            return float(energies(t0, t1, self.spec)[0])
        val = float(energies(t0, t0 + a, self.spec)[0])
        lo = max(L, self.ramp_lo)
        val -= self._ramp_forward(t0, lo)
        val -= self.delta * max(self.ramp_lo - L, 0.0)
        return val

    def d2(self, t0, t1):
        L = t1 - t0
        a = self.ramp_hi
        if L >= a:
            return -float(energies(t0, t1, self.spec)[1])
        val = -float(energies(t1 - a, t1, self.spec)[1])
        lo = max(L, self.ramp_lo)
        val += self._ramp_backward(t1, lo)
        val += self.delta * max(self.ramp_lo - L, 0.0)
        return val


def h_tilde_partials(t0: float, t1: float, field: ExtensionField):
    """``(d1 h~, d2 h~)`` at any pair of times."""
    return field.d1(t0, t1), field.d2(t0, t1)


def h_tilde_partials_quadrature(t0: float, t1: float, field: ExtensionField):
    """Same partials by direct quadrature of ``D`` from the anchor line.

    Slower, and kept as an independent path: nothing is taken from the closed
    form of the boundary energies except the anchor values on ``t1 = t0 + K``.
    """
    K = field.K
    e0_line, _ = energies(t0, t0 + K, field.spec)
    _, e1_line = energies(t1 - K, t1, field.spec)
    d1 = float(e0_line) - _piecewise_integral(lambda tau: field.D(t0, tau), t1, t0 + K, field)
    d2 = -float(e1_line) + _piecewise_integral(lambda s: field.D(s, t1), t1 - K, t0, field)
    return d1, d2


def _piecewise_integral(fun, a, b, field, piece=1.0):
    """Adaptive Simpson over unit-length pieces (the integrand oscillates with period 1)."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    n = max(int(math.ceil((b - a) / piece)), 1)
    edges = np.linspace(a, b, n + 1)
    tol = field.quad_tol / n
    total = sum(adaptive_simpson(fun, float(edges[i]), float(edges[i + 1]), tol) for i in range(n))
    return sign * total


def delta_tilde(a: float, b: float, c: float, field: ExtensionField) -> float:
    """``Delta~(a, b, c) = d2 h~(a, b) + d1 h~(b, c)``, defined for every triple."""
    if b - a > field.K and c - b > field.K:
        spec = field.spec
        fa, _, _ = eval_with_derivatives(spec, a)
        fb, fdb, _ = eval_with_derivatives(spec, b)
        fc, _, _ = eval_with_derivatives(spec, c)
        return recurrence_kernel(spec.g, b - a, c - b, fa, fb, fc, fdb)
    return field.d2(a, b) + field.d1(b, c)


def alpha(t0: float, field: ExtensionField) -> float:
    return field.d1(t0, t0 + field.K - field.eps)


def beta(t0: float, field: ExtensionField) -> float:
    return field.d1(t0, t0 + field.K)


def region(t0: float, E0: float, field: ExtensionField) -> str:
    if E0 > beta(t0, field):
        return SIGMA_PLUS
    if E0 < alpha(t0, field):
        return SIGMA_MINUS
    return SIGMA_ZERO


def _monotone_root(fun, dfun, lo, hi, target, tol=1e-11, max_iter=200):
    """Solve ``fun(x) = target`` for increasing ``fun`` on ``[lo, hi]``."""
    flo = fun(lo) - target
    fhi = fun(hi) - target
    if flo > 0 or fhi < 0:
        raise ConvergenceError("target not bracketed", lo=lo, hi=hi, target=target)
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        r = fun(x) - target
        if r == 0:
            return x
        if r > 0:
            hi = x
        else:
            lo = x
        d = dfun(x)
        nx = x - r / d if d > 0 else None
        if nx is None or not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= tol or hi - lo <= tol:
            return nx
        x = nx
    raise ConvergenceError("monotone root solve exhausted its budget", target=target)


def step_extended(t0: float, E0: float, field: ExtensionField):
    """Extended map in (time, energy): returns ``(t1, E1, region_label)``.

    Solves ``E0 = d1 h~(t0, t1)`` for ``t1`` (increasing in ``t1`` with slope
    ``D >= delta``) and sets ``E1 = -d2 h~(t0, t1)``.
    """
    spec, K, eps, delta = field.spec, field.K, field.eps, field.delta
    b_val = beta(t0, field)
    if E0 > b_val:
        label = SIGMA_PLUS
        v0 = math.sqrt(2.0 * E0)
        hi = t0 + 2.0 * (v0 + 2.0 * spec.max_abs_f / K + spec.max_abs_fdot) / spec.g + 1.0
        t1 = _monotone_root(
            lambda t: float(energies(t0, t, spec)[0]),
            lambda t: float(twist(t0, t, spec)),
            t0 + K, max(hi, t0 + K + 1.0), E0,
        )
    else:
        a_val = alpha(t0, field)
        if E0 < a_val:
            label = SIGMA_MINUS
            # d1 h~ is affine with slope delta below K - eps
            t1 = t0 + (K - eps) - (a_val - E0) / delta
        else:
            label = SIGMA_ZERO
            t1 = _monotone_root(
                lambda t: field.d1(t0, t),
                lambda t: field.D(t0, t),
                t0 + K - eps, t0 + K, E0,
            )
    E1 = -field.d2(t0, t1)
    return t1, E1, label


def next_time(t0: float, t1: float, field: ExtensionField) -> float:
    """The ``t2`` with ``Delta~(t0, t1, t2) = 0``."""
    E1 = -field.d2(t0, t1)
    t2, _, _ = step_extended(t1, E1, field)
    return t2


def flat_drift(t1: float, field: ExtensionField) -> float:
    """Gap change per step in the flat region: ``Delta~(t1 - L, t1, t1 + L) / delta``
    for any ``L < K - eps`` (the value does not depend on ``L`` there)."""
    L = field.K - 2.0 * field.eps
    return delta_tilde(t1 - L, t1, t1 + L, field) / field.delta


def alpha_beta_rows(field: ExtensionField, n: int = 101):
    rows = []
    for t0 in np.linspace(0.0, 1.0, n):
        rows.append((float(t0), alpha(float(t0), field), beta(float(t0), field)))
    return rows


# -- sequences stored as integer lattice part plus small offset -------------

def delta_tilde_lattice(base, offset, field: ExtensionField):
    """``Delta~`` at the interior indices of ``t = base + offset``.

    ``base`` is an integer array and ``offset`` a float array of the same
    length.  Since ``f`` is 1-periodic only offsets enter ``f``, and gaps are
    formed as integer difference plus offset difference, so no precision is
    lost on long sequences.
    """
    base = np.asarray(base, dtype=np.int64)
    off = np.asarray(offset, dtype=float)
    gaps = np.diff(base).astype(float) + np.diff(off)
    L1, L2 = gaps[:-1], gaps[1:]
    spec = field.spec
    f, fd, _ = eval_with_derivatives(spec, off)
    f = np.atleast_1d(f)
    fd = np.atleast_1d(fd)
    out = recurrence_kernel(spec.g, L1, L2, f[:-2], f[1:-1], f[2:], fd[1:-1])
    out = np.array(out, dtype=float)
    for i in np.nonzero((L1 <= field.K) | (L2 <= field.K))[0]:
        b = float(off[i + 1])
        out[i] = delta_tilde(b - L1[i], b, b + L2[i], field)
    return out


def partials_lattice(base, offset, field: ExtensionField, h: float = 1e-6):
    """``(dDelta~/da, dDelta~/db, dDelta~/dc)`` at interior indices.

    Closed form where both gaps exceed ``K``; central differences elsewhere.
    """
    base = np.asarray(base, dtype=np.int64)
    off = np.asarray(offset, dtype=float)
    gaps = np.diff(base).astype(float) + np.diff(off)
    L1, L2 = gaps[:-1], gaps[1:]
    spec = field.spec
    f, fd, fdd = (np.atleast_1d(x) for x in eval_with_derivatives(spec, off))
    da, db, dc = recurrence_partials(
        spec.g, L1, L2, f[:-2], f[1:-1], f[2:], fd[:-2], fd[1:-1], fd[2:], fdd[1:-1]
    )
    da, db, dc = (np.array(x, dtype=float) for x in (da, db, dc))
    for i in np.nonzero((L1 <= field.K) | (L2 <= field.K))[0]:
        b = float(off[i + 1])
        a, c = b - L1[i], b + L2[i]
        dt = lambda *p: delta_tilde(*p, field)
        da[i] = (dt(a + h, b, c) - dt(a - h, b, c)) / (2 * h)
        db[i] = (dt(a, b + h, c) - dt(a, b - h, c)) / (2 * h)
        dc[i] = (dt(a, b, c + h) - dt(a, b, c - h)) / (2 * h)
    return da, db, dc
