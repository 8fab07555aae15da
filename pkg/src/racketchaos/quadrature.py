"""Adaptive Simpson quadrature."""

from __future__ import annotations

from .errors import ConvergenceError


def adaptive_simpson(fun, a: float, b: float, tol: float = 1e-10, max_depth: int = 40) -> float:
    """Integral of ``fun`` over ``[a, b]`` (``b < a`` gives the negated integral).

    Classic recursive bisection with the Richardson correction ``(S2 - S1) / 15``;
    the absolute tolerance is split evenly between the two halves.
    """
    if a == b:
        return 0.0
    fa, fb = fun(a), fun(b)
    m = 0.5 * (a + b)
    fm = fun(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(fun, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(fun, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = fun(lm), fun(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    diff = left + right - whole
    if abs(diff) <= 15.0 * tol:
        return left + right + diff / 15.0
    if depth <= 0:
        raise ConvergenceError("adaptive Simpson exceeded its depth budget", a=a, b=b)
    return (_recurse(fun, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _recurse(fun, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))
