"""Explicit comparison sequences: special orbits, glued sub/super-solutions,
translate envelopes and their symbolic versions, plus the (m, Q) solver.

Every sequence is stored as ``base + offset`` with an integer ``base`` and a
small float ``offset``.  The special orbits are integer translates of three
anchor times, so this keeps their residuals at rounding level even when the
times themselves are in the tens of thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    DomainError,
    GlueOrderViolated,
    NoGlueIndex,
    ParamTooSmall,
    TruncationUnsafe,
)
from .extension import ExtensionField, delta_tilde_lattice
from .generating import ConstantsBundle

SIGN_TOL = 1e-8
ORBIT_TOL = 1e-9
KINDS = (
    "orbit",
    "sub",
    "super",
    "envelope_lower",
    "envelope_upper",
    "symbolic_lower",
    "symbolic_upper",
)


@dataclass(frozen=True)
class SymbolSequence:
    """Binary word; ``periodic`` words repeat with period ``len(word)``.

    A non-periodic word is padded with zeros outside ``0 <= n < len(word)``.
    """

    word: tuple
    periodic: bool = True

    def __post_init__(self):
        w = tuple(int(x) for x in self.word)
        if not w:
            raise ValueError("symbol word must be nonempty")
        if any(x not in (0, 1) for x in w):
            raise ValueError(f"symbols must be 0 or 1, got {w}")
        object.__setattr__(self, "word", w)

    @classmethod
    def parse(cls, text: str, periodic: bool = True):
        return cls(tuple(int(c) for c in text.strip()), periodic)

    @property
    def period(self) -> int:
        return len(self.word)

    def __str__(self):
        return "".join(str(x) for x in self.word)

    def symbol(self, n):
        n = np.asarray(n, dtype=np.int64)
        w = np.asarray(self.word, dtype=np.int64)
        if self.periodic:
            return w[np.mod(n, self.period)]
        inside = (n >= 0) & (n < self.period)
        return np.where(inside, w[np.clip(n, 0, self.period - 1)], 0)

    def shifted(self, k: int = 1) -> "SymbolSequence":
        """Left shift ``sigma^k`` (periodic words only)."""
        k %= self.period
        return SymbolSequence(self.word[k:] + self.word[:k], self.periodic)


@dataclass
class ScaffoldSeq:
    kind: str
    n_lo: int
    base: np.ndarray
    offset: np.ndarray
    glue_indices: tuple = ()
    code: SymbolSequence | None = None
    info: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scaffold kind {self.kind!r}")
        self.base = np.asarray(self.base, dtype=np.int64)
        self.offset = np.asarray(self.offset, dtype=float)

    @property
    def n_hi(self) -> int:
        return self.n_lo + len(self.base) - 1

    @property
    def window(self):
        return self.n_lo, self.n_hi

    @property
    def indices(self):
        return np.arange(self.n_lo, self.n_hi + 1)

    @property
    def values(self):
        return self.base + self.offset

    def at(self, n):
        i = np.asarray(n) - self.n_lo
        if np.any(i < 0) or np.any(i >= len(self.base)):
            raise IndexError(f"index outside window {self.window}")
        return self.base[i], self.offset[i]

    def slice(self, lo, hi):
        i0, i1 = lo - self.n_lo, hi - self.n_lo + 1
        return ScaffoldSeq(self.kind, lo, self.base[i0:i1], self.offset[i0:i1],
                           self.glue_indices, self.code, dict(self.info))

    def residuals(self, field: ExtensionField):
        """``Delta~`` at interior window indices ``n_lo+1 .. n_hi-1``."""
        return delta_tilde_lattice(self.base, self.offset, field)

    def rows(self):
        glue = set(self.glue_indices)
        return [
            (int(n), float(b + o), self.kind, int(n in glue))
            for n, b, o in zip(self.indices, self.base, self.offset)
        ]


# -- growth profiles -------------------------------------------------------------

def z_fn(x, m):
    """Slope ``m+1`` for positive arguments and ``m+2`` for negative ones."""
    x = np.asarray(x, dtype=np.int64)
    return np.where(x >= 0, (m + 1) * x, (m + 2) * x)


def Z_fn(x, m):
    x = np.asarray(x, dtype=np.int64)
    return np.where(x >= 0, (m + 2) * x, (m + 1) * x)


def zeta(code: SymbolSequence, n, m: int, Q: int):
    """``zeta_e(n)``: integral of the block slope ``m + 1 + e_b`` from 0 to ``n``.

    Exact integers for every integer ``n`` (negative ones included).
    """
    n = np.asarray(n, dtype=np.int64)
    b = np.floor_divide(n, Q)
    r = n - b * Q
    if code.periodic:
        w = np.asarray(code.word, dtype=np.int64)
        prefix = np.concatenate([[0], np.cumsum(w)])
        ones = np.floor_divide(b, code.period) * int(w.sum()) + prefix[np.mod(b, code.period)]
    else:
        w = np.asarray(code.word, dtype=np.int64)
        prefix = np.concatenate([[0], np.cumsum(w)])
        ones = prefix[np.clip(b, 0, code.period)]
    block_start = Q * (b * (m + 1) + ones)
    return block_start + (m + 1 + code.symbol(b)) * r


def m_lower_bound(consts: ConstantsBundle) -> float:
    """Right-hand side of the lower bound on ``m``."""
    return max(2.0 * consts.v_bar / consts.g, 2.0 * consts.K + 9.0)


# -- special orbits ------------------------------------------------------------

def special_orbit_times(kind, param, anchors, consts, spec=None, n_range=None):
    """Closed-form special orbit of the (modified) map.

    ``periodic``: ``t_n = param * n``; ``accelerating``:
    ``t_star + n^2 + (param - 1) n``; ``decelerating``:
    ``t_sharp - n^2 + (param + 1) n`` for ``0 <= n < N = floor((param - K) / 2)``.
    With ``spec`` given, the interior residuals are checked against 1e-9.
    """
    p = int(param)
    if not p > m_lower_bound(consts):
        raise ParamTooSmall(
            f"parameter {p} must exceed {m_lower_bound(consts):.6g}", param=p,
            bound=m_lower_bound(consts),
        )
    if kind == "periodic":
        lo, hi = n_range or (0, 10)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        base, off = p * n, np.zeros(len(n))
    elif kind == "accelerating":
        lo, hi = n_range or (0, 30)
        if lo < 0:
            raise DomainError("accelerating orbit is defined for n >= 0", n_lo=lo)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        base, off = n * n + (p - 1) * n, np.full(len(n), anchors.t_star)
    elif kind == "decelerating":
        N = int(math.floor((p - consts.K) / 2))
        lo, hi = n_range or (0, N - 1)
        if lo < 0 or hi >= N:
            raise DomainError(f"decelerating orbit is defined for 0 <= n < {N}", N=N)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        base, off = -n * n + (p + 1) * n, np.full(len(n), anchors.t_sharp)
    else:
        raise ValueError(f"unknown special orbit {kind!r}")
    seq = ScaffoldSeq("orbit", int(lo), base, off, info={"orbit": kind, "param": p})
    if spec is not None and len(n) >= 3:
        res = seq.residuals(ExtensionField(spec, consts))
        worst = float(np.max(np.abs(res)))
        seq.info["max_residual"] = worst
        if worst > ORBIT_TOL:
            raise DomainError(f"special orbit residual {worst:.3g} above {ORBIT_TOL}",
                              orbit=kind, residual=worst)
    return seq


def translated(seq: ScaffoldSeq, shift: int) -> ScaffoldSeq:
    """Integer translate ``t_n + shift``; still an orbit because f is 1-periodic."""
    out = ScaffoldSeq(seq.kind, seq.n_lo, seq.base + int(shift), seq.offset.copy(),
                      seq.glue_indices, seq.code, dict(seq.info))
    out.info["translate"] = int(shift)
    return out


# -- gluing ----------------------------------------------------------------------

def _diff(seq_a, seq_b, n):
    """``b_n - a_n`` computed in lattice form."""
    ba, oa = seq_a.at(n)
    bb, ob = seq_b.at(n)
    return float(bb - ba) + float(ob - oa)


def _glue_order_ok(first, second, nt, kind):
    """Ordering that makes a splice at ``nt`` inherit the sign condition."""
    d0 = _diff(first, second, nt)          # t_n - s_n
    d1 = _diff(first, second, nt + 1)      # t_{n+1} - s_{n+1}
    if kind == "super":
        return d0 >= 0.0 and d1 <= 0.0
    return d0 <= 0.0 and d1 >= 0.0


def glue(first: ScaffoldSeq, second: ScaffoldSeq, n_tilde: int, kind=None,
         field: ExtensionField | None = None) -> ScaffoldSeq:
    """``first`` up to ``n_tilde`` and ``second`` after it.

    For super-solutions the splice needs ``s_n <= t_n <= t_{n+1} <= s_{n+1}``
    at ``n = n_tilde`` (``s = first``, ``t = second``); sub-solutions need the
    reverse.  Pure orbits count as either kind, so ``kind`` must then be given.
    """
    kinds = {first.kind, second.kind} - {"orbit"}
    if kind is None:
        if len(kinds) != 1:
            raise ValueError("cannot infer the kind of the glued sequence")
        kind = kinds.pop()
    elif kinds and kinds != {kind}:
        raise ValueError(f"cannot glue {first.kind} and {second.kind} as {kind}")
    nt = int(n_tilde)
    if not (first.n_lo <= nt and first.n_hi >= nt + 1 and second.n_lo <= nt
            and second.n_hi >= nt + 1):
        raise DomainError("both windows must contain n_tilde and n_tilde + 1", n_tilde=nt)
    if not _glue_order_ok(first, second, nt, kind):
        s0, s1 = (float(sum(first.at(k))) for k in (nt, nt + 1))
        t0, t1 = (float(sum(second.at(k))) for k in (nt, nt + 1))
        raise GlueOrderViolated(
            f"{kind} splice ordering fails at n = {nt}",
            n_tilde=nt, s_n=s0, t_n=t0, t_next=t1, s_next=s1,
        )
    lo = first.n_lo
    hi = second.n_hi
    n_first = nt - lo + 1
    base = np.concatenate([first.base[:n_first], second.base[nt + 1 - second.n_lo:]])
    off = np.concatenate([first.offset[:n_first], second.offset[nt + 1 - second.n_lo:]])
    glue_idx = tuple(sorted(set(first.glue_indices) | set(second.glue_indices) | {nt}))
    out = ScaffoldSeq(kind, lo, base, off, glue_idx)
    if field is not None:
        for k in (nt, nt + 1):
            if out.n_lo < k < out.n_hi:
                i = k - out.n_lo
                r = float(delta_tilde_lattice(out.base[i - 1:i + 2], out.offset[i - 1:i + 2],
                                              field)[0])
                bad = r > SIGN_TOL if kind == "super" else r < -SIGN_TOL
                if bad:
                    raise GlueOrderViolated(f"sign condition fails after splice at n = {k}",
                                            n=k, residual=r)
    return out


# -- super- and sub-solutions ---------------------------------------------------

def _first_index(pred, start=0, limit=10**7):
    n = start
    while not pred(n):
        n += 1
        if n > limit:
            raise NoGlueIndex("threshold index search exhausted")
    return n


def build_scaffold(kind, consts: ConstantsBundle, anchors, spec, margin=None):
    """Glued super-solution (``kind='super'``) or sub-solution (``'sub'``).

    super: gaps ``m+1`` for ``n <= 0``, the accelerating orbit up to ``n_+``,
    then an integer translate of the gap-``(m+2)`` orbit.
    sub: gaps ``m+2`` for ``n <= 0``, the decelerating orbit with ``r = m+3``
    up to ``n_-``, then an integer translate of the gap-``(m+1)`` orbit.

    The translates make the splice orderings hold; the spliced pieces are
    orbits, so the result carries the same sign condition either way.
    """
    m = int(consts.m)
    margin = int(margin if margin is not None else 8 * (consts.Q or 14))
    field = ExtensionField(spec, consts)
    t_star, t_sharp = anchors.t_star, anchors.t_sharp

    if kind == "super":
        n_t = _first_index(lambda n: m + 2 * n > 2 * (m + 2))
        n_g = None
        for c in (n_t, n_t + 1):
            lo_p = t_star + c * c - 3 * c                     # t*_c - (m+2)c
            hi_p = t_star + (c + 1) ** 2 - 3 * (c + 1)       # t*_{c+1} - (m+2)(c+1)
            P = math.ceil(lo_p)
            if P <= hi_p:
                n_g, shift = c, P
                break
        if n_g is None:
            raise NoGlueIndex("no splice index for the accelerating piece", n_tilde=n_t)
        lo, hi = -margin, n_g + margin
        left = special_orbit_times("periodic", m + 1, anchors, consts, n_range=(lo, 1))
        mid = special_orbit_times("accelerating", m, anchors, consts, n_range=(0, n_g + 1))
        right = translated(
            special_orbit_times("periodic", m + 2, anchors, consts, n_range=(n_g, hi)), shift)
        seq = glue(glue(left, mid, 0, "super", field), right, n_g, "super", field)
        info = {"n_tilde": n_t, "n_plus": n_g, "translate": shift}
    elif kind == "sub":
        r = m + 3
        N = int(math.floor((r - consts.K) / 2))
        n_t = _first_index(lambda n: m + 3 - 2 * n < (m + 1) / 2)
        n_g = None
        for c in (n_t, n_t + 1):
            if not (c < (m + 1 - consts.K) / 2 and c + 1 < N):
                continue
            hi_p = t_sharp - c * c + 3 * c                          # t#_c - (m+1)c
            lo_p = t_sharp - (c + 1) ** 2 + 3 * (c + 1)            # t#_{c+1} - (m+1)(c+1)
            P = math.floor(hi_p)
            if P >= lo_p:
                n_g, shift = c, P
                break
        if n_g is None:
            raise NoGlueIndex("no splice index for the decelerating piece", n_tilde=n_t, N=N)
        lo, hi = -margin, n_g + margin
        left = special_orbit_times("periodic", m + 2, anchors, consts, n_range=(lo, 1))
        mid = special_orbit_times("decelerating", r, anchors, consts, n_range=(0, n_g + 1))
        right = translated(
            special_orbit_times("periodic", m + 1, anchors, consts, n_range=(n_g, hi)), shift)
        seq = glue(glue(left, mid, 0, "sub", field), right, n_g, "sub", field)
        info = {"n_tilde": n_t, "n_minus": n_g, "translate": shift, "r": r, "N": N}
    else:
        raise ValueError(f"kind must be 'sub' or 'super', got {kind!r}")
    res = seq.residuals(field)
    info["sign_extreme"] = float(res.max() if kind == "super" else res.min())
    seq.info.update(info)
    return seq


def sign_condition_holds(seq: ScaffoldSeq, field: ExtensionField, tol=SIGN_TOL) -> bool:
    res = seq.residuals(field)
    if seq.kind in ("super", "envelope_upper", "symbolic_upper"):
        return bool(np.all(res <= tol))
    return bool(np.all(res >= -tol))


# -- translate envelopes -------------------------------------------------------

def _check_interior(vals, arg, n_cand, label):
    """Raise unless each extremum is also attained off the search boundary."""
    first, last = 0, vals.shape[1] - 1
    for row, (j, n) in enumerate(zip(arg, n_cand)):
        if j in (first, last):
            inner = vals[row, first + 1:last]
            if inner.size == 0 or not np.isclose(inner.max(), vals[row, j], rtol=0, atol=1e-12):
                raise TruncationUnsafe(f"{label} extremum on the search boundary at n = {n}",
                                       n=int(n))


def _translate_offsets(seq: ScaffoldSeq, ns, m, upper: bool):
    """Offsets of ``sup_q t_{n-q} + z(q)`` from ``z(n)`` (or the inf version
    with ``Z``), searched over every ``n - q`` in the window of ``seq``."""
    ks = seq.indices[None, :]
    ns = np.asarray(ns, dtype=np.int64)[:, None]
    prof = Z_fn if upper else z_fn
    ints = seq.base[None, :] + prof(ns - ks, m) - prof(ns, m)
    vals = ints + seq.offset[None, :]
    if upper:
        arg = np.argmin(vals, axis=1)
        _check_interior(-vals, arg, ns[:, 0], "upper envelope")
    else:
        arg = np.argmax(vals, axis=1)
        _check_interior(vals, arg, ns[:, 0], "lower envelope")
    return vals[np.arange(len(arg)), arg]


def m_analytic(anchors) -> float:
    return max(2.25 - anchors.t_star, 2.25 + anchors.t_sharp)


def envelopes(scaffolds, consts: ConstantsBundle, anchors, half_width=None):
    """Translate envelopes ``w_lower`` (of the sub) and ``w_upper`` (of the super).

    Returns ``(w_lower, w_upper, M_eff)`` on ``[-half_width, half_width]``
    (default ``8 Q``).  ``scaffolds`` is ``(sub, super)``.
    """
    sub, sup = scaffolds
    m = int(consts.m)
    W = int(half_width if half_width is not None else 8 * consts.Q)
    for s in (sub, sup):
        if s.n_lo > -W or s.n_hi < W:
            raise DomainError("scaffold window narrower than the envelope window",
                              window=str(s.window), half_width=W)
    ns = np.arange(-W, W + 1, dtype=np.int64)
    lo_off = _translate_offsets(sub, ns, m, upper=False)
    up_off = _translate_offsets(sup, ns, m, upper=True)
    observed = max(float(np.max(np.abs(lo_off))), float(np.max(np.abs(up_off))))
    M_an = m_analytic(anchors)
    M_eff = max(M_an, observed)
    info = {"M_analytic": M_an, "M_observed": observed, "M_eff": M_eff}
    w_lo = ScaffoldSeq("envelope_lower", -W, z_fn(ns, m), lo_off, info=dict(info))
    w_up = ScaffoldSeq("envelope_upper", -W, Z_fn(ns, m), up_off, info=dict(info))
    return w_lo, w_up, M_eff


def symbolic_envelopes(code: SymbolSequence, w_lower: ScaffoldSeq, w_upper: ScaffoldSeq,
                       consts: ConstantsBundle, n_range=None):
    """``x_lower = sup_j w_lower(. - jQ) + zeta_e(jQ)`` and the matching inf for
    ``x_upper``, with offsets measured from ``zeta_e(n)``.

    Default window is one code period ``0 <= n < pQ`` plus one index on each
    side.
    """
    m, Q = int(consts.m), int(consts.Q)
    p = code.period
    for w in (w_lower, w_upper):
        if w.n_hi - w.n_lo + 1 < (p + 2) * Q:
            raise DomainError("envelope window shorter than (p + 2) Q",
                              window=str(w.window), needed=(p + 2) * Q)
    lo, hi = n_range or (-1, p * Q)
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    zn = zeta(code, ns, m, Q)
    out = []
    for w, upper in ((w_lower, False), (w_upper, True)):
        # every j with n - jQ inside the envelope window
        j_lo = int(math.ceil((hi - w.n_hi) / Q))
        j_hi = int(math.floor((lo - w.n_lo) / Q))
        if j_hi - j_lo < 2:
            raise DomainError("envelope window too short for the symbolic search")
        js = np.arange(j_lo, j_hi + 1, dtype=np.int64)
        idx = ns[:, None] - js[None, :] * Q
        wb, wo = w.at(idx)
        ints = wb + zeta(code, js * Q, m, Q)[None, :] - zn[:, None]
        vals = ints + wo
        if upper:
            arg = np.argmin(vals, axis=1)
            _check_interior(-vals, arg, ns, "symbolic upper envelope")
        else:
            arg = np.argmax(vals, axis=1)
            _check_interior(vals, arg, ns, "symbolic lower envelope")
        off = vals[np.arange(len(ns)), arg]
        kind = "symbolic_upper" if upper else "symbolic_lower"
        out.append(ScaffoldSeq(kind, int(lo), zn, off, code=code))
    return out[0], out[1]


# -- integer constants ---------------------------------------------------------

def inequality_margins(m, Q, K, C, M, v_bar=None, g=1.0):
    """Slack of each inequality on ``(m, Q)``; all positive when admissible."""
    rhs = Q * K + Q * (Q - 1) * C / 2
    return {
        "Q_gt_8M": Q - 8 * M,
        "block_rho0": Q * (m + 1) - 4 * M - rhs,
        "block_rho1": Q * (m + 2) - 4 * M - rhs,
        "rhs_positive": rhs,
        "m_lower_bound": m - max(2 * K + 9, 2 * v_bar / g if v_bar is not None else 0.0),
    }


def solve_constants(K: float, C: float, M: float, v_bar=None, g: float = 1.0,
                    Q_max: int = 100_000):
    """Smallest ``Q >= 2`` with ``m = Q^2`` meeting every inequality strictly."""
    if not (K > 0 and C > 0 and M > 0):
        raise ValueError("K, C and M must be positive")
    for Q in range(2, Q_max + 1):
        m = Q * Q
        if all(v > 0 for v in inequality_margins(m, Q, K, C, M, v_bar, g).values()):
            return m, Q
    raise ValueError(f"no admissible Q below {Q_max}")
