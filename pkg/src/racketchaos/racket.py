"""Periodic racket motion as a finite trigonometric series.

The racket height is

    f(t) = sum_k  a_k cos(2 pi k t) + b_k sin(2 pi k t),   k = 1, 2, ...

with ``cos_coeffs[k-1] = a_k`` and ``sin_coeffs[k-1] = b_k``.  A constant
term is omitted on purpose: the impact map only sees differences and
derivatives of ``f``.

Scalars of type :class:`mpmath.mpf` are evaluated in multiple precision so the
same spec can drive high-precision orbit iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath
import numpy as np

from .errors import HypothesisViolated

TWO_PI = 2.0 * math.pi

# grid used to bracket sign changes over one period
GRID_POINTS = 10_000
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class ForcingSpec:
    g: float
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    phase_shift: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"gravity must be positive, got {self.g}")
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))

    @property
    def n_harmonics(self) -> int:
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def _ab(self):
        n = self.n_harmonics
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(self.cos_coeffs)] = self.cos_coeffs
        b[: len(self.sin_coeffs)] = self.sin_coeffs
        return a, b

    @property
    def max_abs_f(self) -> float:
        """Upper bound sum |a_k| + |b_k| (exact for a single harmonic)."""
        a, b = self._ab()
        return float(np.sum(np.hypot(a, b)))

    @property
    def max_abs_fdot(self) -> float:
        a, b = self._ab()
        k = np.arange(1, self.n_harmonics + 1)
        return float(np.sum(TWO_PI * k * np.hypot(a, b)))

    @property
    def max_abs_fddot(self) -> float:
        a, b = self._ab()
        k = np.arange(1, self.n_harmonics + 1)
        return float(np.sum((TWO_PI * k) ** 2 * np.hypot(a, b)))

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "cos_coeffs": list(self.cos_coeffs),
            "sin_coeffs": list(self.sin_coeffs),
            "phase_shift": self.phase_shift,
        }


@dataclass(frozen=True)
class Anchors:
    t_bar0: float
    t_star: float
    t_sharp: float

    def to_dict(self) -> dict:
        return {"t_bar0": self.t_bar0, "t_star": self.t_star, "t_sharp": self.t_sharp}


def eval_with_derivatives(spec: ForcingSpec, t):
    """Return ``(f, fdot, fddot)`` at ``t`` (float, array or mpf)."""
    if isinstance(t, mpmath.mpf):
        return _eval_mp(spec, t)
    if isinstance(t, (float, int)):
        return _eval_scalar(spec, float(t))
    t = np.asarray(t, dtype=float)
    # reduce to [0, 1) first so the phase 2 pi k t keeps full precision
    frac = t - np.floor(t)
    f = np.zeros_like(frac)
    fd = np.zeros_like(frac)
    fdd = np.zeros_like(frac)
    a, b = spec._ab()
    for k in range(1, spec.n_harmonics + 1):
        w = TWO_PI * k
        c = np.cos(w * frac)
        s = np.sin(w * frac)
        ak, bk = a[k - 1], b[k - 1]
        f += ak * c + bk * s
        fd += w * (bk * c - ak * s)
        fdd -= w * w * (ak * c + bk * s)
    if f.ndim == 0:
        return float(f), float(fd), float(fdd)
    return f, fd, fdd


def _eval_scalar(spec, t):
    frac = t - math.floor(t)
    f = fd = fdd = 0.0
    for k in range(1, spec.n_harmonics + 1):
        ak = spec.cos_coeffs[k - 1] if k <= len(spec.cos_coeffs) else 0.0
        bk = spec.sin_coeffs[k - 1] if k <= len(spec.sin_coeffs) else 0.0
        w = TWO_PI * k
        c = math.cos(w * frac)
        s = math.sin(w * frac)
        f += ak * c + bk * s
        fd += w * (bk * c - ak * s)
        fdd -= w * w * (ak * c + bk * s)
    return f, fd, fdd


def _eval_mp(spec, t):
    frac = t - mpmath.floor(t)
    f = fd = fdd = mpmath.mpf(0)
    a, b = spec._ab()
    for k in range(1, spec.n_harmonics + 1):
        w = 2 * mpmath.pi * k
        c = mpmath.cos(w * frac)
        s = mpmath.sin(w * frac)
        ak, bk = mpmath.mpf(float(a[k - 1])), mpmath.mpf(float(b[k - 1]))
        f += ak * c + bk * s
        fd += w * (bk * c - ak * s)
        fdd -= w * w * (ak * c + bk * s)
    return f, fd, fdd


def f_value(spec, t):
    return eval_with_derivatives(spec, t)[0]


def height(spec: ForcingSpec, t: np.ndarray) -> np.ndarray:
    """Vectorized ``f`` alone (no derivatives)."""
    frac = t - np.floor(t)
    out = np.zeros_like(frac)
    for k, ak in enumerate(spec.cos_coeffs, start=1):
        if ak:
            out += ak * np.cos(TWO_PI * k * frac)
    for k, bk in enumerate(spec.sin_coeffs, start=1):
        if bk:
            out += bk * np.sin(TWO_PI * k * frac)
    return out


def fdot(spec, t):
    return eval_with_derivatives(spec, t)[1]


def divided_difference(spec: ForcingSpec, t0, t1):
    """Slope ``(f(t1) - f(t0)) / (t1 - t0)``; symmetric in its arguments.

    Pairs closer than 1e-8 fall back to the derivative at the midpoint.
    """
    if abs(t1 - t0) < 1e-8:
        return fdot(spec, (t0 + t1) / 2)
    return (f_value(spec, t1) - f_value(spec, t0)) / (t1 - t0)


def shifted(spec: ForcingSpec, s: float) -> ForcingSpec:
    """The spec of ``t -> f(t + s)``."""
    a, b = spec._ab()
    k = np.arange(1, spec.n_harmonics + 1)
    c = np.cos(TWO_PI * k * s)
    sn = np.sin(TWO_PI * k * s)
    new_a = a * c + b * sn
    new_b = b * c - a * sn
    return replace(
        spec,
        cos_coeffs=tuple(new_a),
        sin_coeffs=tuple(new_b),
        phase_shift=spec.phase_shift + s,
    )


def _bisect(fun, lo, hi, tol=ROOT_TOL):
    flo = fun(lo)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _polish(fun, dfun, x, lo, hi):
    """A few Newton steps kept inside ``[lo, hi]``; pushes a bisected root to
    machine precision."""
    for _ in range(4):
        d = dfun(x)
        if d == 0.0:
            break
        nx = x - fun(x) / d
        if not lo <= nx <= hi:
            break
        if nx == x:
            break
        x = nx
    return x


def _roots_on(fun, dfun, lo, hi, n=GRID_POINTS):
    """All sign changes of ``fun`` on a uniform grid of ``[lo, hi]``, refined."""
    ts = np.linspace(lo, hi, n + 1)
    vals = fun(ts)
    roots = []
    for i in range(n):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(float(ts[i]))
        elif v0 * v1 < 0:
            a, b = float(ts[i]), float(ts[i + 1])
            r = _bisect(fun, a, b)
            roots.append(_polish(fun, dfun, r, a, b))
    if vals[-1] == 0.0:
        roots.append(float(ts[-1]))
    return sorted(set(roots))


def _extreme_fdot(spec, sign):
    """Refined ``max`` (sign=+1) or ``min`` (sign=-1) of fdot over a period."""
    ts = np.linspace(0.0, 1.0, GRID_POINTS + 1)
    vals = sign * fdot(spec, ts)
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, GRID_POINTS)]
    fdd = lambda t: sign * eval_with_derivatives(spec, t)[2]
    if fdd(lo) > 0 > fdd(hi):
        t = _bisect(fdd, lo, hi)
        return float(fdot(spec, t)), t
    return float(sign * vals[i]), float(ts[i])


def check_hypothesis(spec: ForcingSpec):
    """Raise unless ``max 2 fdot >= g`` and ``min 2 fdot <= -g``."""
    fmax, _ = _extreme_fdot(spec, +1)
    fmin, _ = _extreme_fdot(spec, -1)
    if 2 * fmax < spec.g or 2 * fmin > -spec.g:
        raise HypothesisViolated(
            f"need max 2f' >= g and min 2f' <= -g; got max 2f' = {2 * fmax:.6g}, "
            f"min 2f' = {2 * fmin:.6g}, g = {spec.g}",
            max_2fdot=2 * fmax,
            min_2fdot=2 * fmin,
            g=spec.g,
        )
    return fmax, fmin


def normalize(spec: ForcingSpec):
    """Translate time so that ``fdot(0) = 0`` and locate the two anchors.

    Returns the shifted spec and :class:`Anchors` with
    ``-1 <= t_sharp < 0 < t_star <= 1``, where ``2 fdot(t_star) = g`` and
    ``2 fdot(t_sharp) = -g``.  Among several candidates the first root after
    0 is taken for ``t_star`` and the first root after -1 for ``t_sharp``.
    """
    check_hypothesis(spec)
    fd = lambda t: fdot(spec, t)
    fdd = lambda t: eval_with_derivatives(spec, t)[2]
    if abs(fd(0.0)) <= 1e-12:
        s = 0.0
    else:
        zeros = [r for r in _roots_on(fd, fdd, 0.0, 1.0) if 0.0 < r < 1.0]
        s = zeros[0]
    out = shifted(spec, s) if s != 0.0 else spec

    g = out.g
    up = lambda t: 2 * fdot(out, t) - g
    down = lambda t: 2 * fdot(out, t) + g
    dd = lambda t: 2 * eval_with_derivatives(out, t)[2]
    stars = [r for r in _roots_on(up, dd, 0.0, 1.0) if 0.0 < r <= 1.0]
    sharps = [r for r in _roots_on(down, dd, -1.0, 0.0) if -1.0 <= r < 0.0]
    if not stars:
        stars = [_extreme_fdot(out, +1)[1] or 1.0]
    if not sharps:
        t = _extreme_fdot(out, -1)[1]
        sharps = [t - 1.0 if t > 0 else -1.0]
    return out, Anchors(t_bar0=0.0, t_star=stars[0], t_sharp=sharps[0])


def polish_anchor_mp(spec: ForcingSpec, t, target, dps=50):
    """Newton-refine a root of ``2 fdot - target`` in multiple precision."""
    with mpmath.workdps(dps + 10):
        x = mpmath.mpf(t)
        tgt = mpmath.mpf(target)
        for _ in range(200):
            _, fd, fdd = _eval_mp(spec, x)
            step = (2 * fd - tgt) / (2 * fdd)
            x -= step
            if abs(step) < mpmath.mpf(10) ** (-(dps + 5)):
                break
        return +x


def sample_period(spec: ForcingSpec, n: int = 1001):
    """Evenly spaced samples of ``f`` and ``fdot`` over one period."""
    ts = np.linspace(0.0, 1.0, n)
    f, fd, _ = eval_with_derivatives(spec, ts)
    return ts, f, fd
