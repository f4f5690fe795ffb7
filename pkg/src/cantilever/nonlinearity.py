"""Piecewise nonlinearities f(t, u), their antiderivatives and envelopes.

A nonlinearity is written in a small text language (see :mod:`cantilever.dsl`)
as a list of u-ranges, each with its own expression, e.g.::

    "[0,0.03): 4600*u ; [0.03,inf): 138"

Parsing validates the pieces: they must tile [0, inf), join continuously
and stay nonnegative on a sampled lattice. Below ``u = 0`` the function is
continued by the constant ``f(t, 0)``.

The antiderivative ``F(t, u) = int_0^u f(t, s) ds`` and the partial derivative
``df/du`` are obtained symbolically with sympy, piece by piece; pieces that
sympy cannot integrate fall back to Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np
import sympy as sp

from . import dsl
from .kernel import gauss_legendre, minorant

__all__ = [
    "NonlinearityError",
    "RangeError",
    "DiscontinuityError",
    "NegativityError",
    "EmptyIntervalError",
    "Piece",
    "NonlinearitySpec",
    "MonotoneCheck",
    "Envelope",
    "parse_spec",
    "eval_f",
    "eval_F",
    "eval_dfdu",
    "check_monotone",
    "envelope",
    "minorant_crossings",
    "saturated_linear",
    "power_quadratic",
]

CONTINUITY_TOL = 1e-9
T_PROBES = (0.0, 0.5, 1.0)


class NonlinearityError(ValueError):
    pass


class RangeError(NonlinearityError):
    """The u-ranges leave a gap, overlap, or do not cover [0, inf)."""


class DiscontinuityError(NonlinearityError):
    def __init__(self, breakpoint, t, jump):
        self.breakpoint, self.t, self.jump = breakpoint, t, jump
        super().__init__(f"f jumps by {jump:.3e} at u = {breakpoint!r} (t = {t})")


class NegativityError(NonlinearityError):
    def __init__(self, t, u, value):
        self.t, self.u, self.value = t, u, value
        super().__init__(f"f({t!r}, {u!r}) = {value!r} < 0")


class EmptyIntervalError(NonlinearityError):
    pass


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    expr: dsl.Expr

    def text(self) -> str:
        hi = "inf" if math.isinf(self.hi) else dsl._num(self.hi)
        return f"[{dsl._num(self.lo)},{hi}): {dsl.to_text(self.expr)}"


@dataclass(frozen=True)
class NonlinearitySpec:
    pieces: Tuple[Piece, ...]
    autonomous: bool
    u_probe_max: float = field(default=10.0, compare=False)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(p.lo for p in self.pieces[1:])

    def text(self) -> str:
        return " ; ".join(p.text() for p in self.pieces)

    __str__ = text

    def __call__(self, t, u):
        return eval_f(self, t, u)

    @cached_property
    def _symbolic(self):
        return [_SymbolicPiece(p) for p in self.pieces]

    @property
    def is_zero(self) -> bool:
        t = np.linspace(0.0, 1.0, 9)[:, None]
        u = np.linspace(0.0, self.u_probe_max, 65)[None, :]
        return bool(np.all(eval_f(self, t, u) == 0.0))


# -- parsing and validation ---------------------------------------------------


def parse_spec(text: str, u_probe_max: Optional[float] = None) -> NonlinearitySpec:
    """Parse and validate a piecewise nonlinearity.

    ``u_probe_max`` bounds the lattice used for the positivity check; by
    default it is ten times the largest finite breakpoint (at least 10).

    Raises
    ------
    dsl.DSLSyntaxError, RangeError, DiscontinuityError, NegativityError
    """
    raw = dsl.parse_pieces(text)
    pieces = tuple(Piece(float(lo), float(hi), e) for lo, hi, e in raw)
    _check_ranges(pieces)
    if u_probe_max is None:
        finite = [p.lo for p in pieces[1:]] + [p.hi for p in pieces if math.isfinite(p.hi)]
        u_probe_max = max([10.0] + [10.0 * b for b in finite])
    autonomous = not any("t" in dsl.variables(p.expr) for p in pieces)
    spec = NonlinearitySpec(pieces, autonomous, float(u_probe_max))
    _check_continuity(spec)
    _check_positivity(spec)
    return spec


def _check_ranges(pieces):
    if pieces[0].lo != 0.0:
        raise RangeError(f"first range must start at 0, starts at {pieces[0].lo!r}")
    for a, b in zip(pieces, pieces[1:]):
        if a.hi < b.lo:
            raise RangeError(f"gap between {a.hi!r} and {b.lo!r}")
        if a.hi > b.lo:
            raise RangeError(f"ranges overlap on [{b.lo!r}, {a.hi!r})")
    for p in pieces:
        if not p.lo < p.hi:
            raise RangeError(f"empty range [{p.lo!r}, {p.hi!r})")
    if not math.isinf(pieces[-1].hi):
        raise RangeError(f"last range must extend to inf, ends at {pieces[-1].hi!r}")


def _check_continuity(spec):
    for left, right in zip(spec.pieces, spec.pieces[1:]):
        b = right.lo
        for t in T_PROBES:
            a = float(dsl.evaluate(left.expr, t, b))
            c = float(dsl.evaluate(right.expr, t, b))
            jump = abs(a - c)
            if not jump <= CONTINUITY_TOL * max(1.0, abs(a), abs(c)):
                raise DiscontinuityError(b, t, jump)


def _check_positivity(spec, t_samples=17, u_samples=257):
    t = np.linspace(0.0, 1.0, t_samples)
    u = np.union1d(np.linspace(0.0, spec.u_probe_max, u_samples), spec.breakpoints)
    vals = eval_f(spec, t[:, None], u[None, :])
    bad = ~(vals >= -1e-12)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise NegativityError(float(t[i]), float(u[j]), float(vals[i, j]))


# -- evaluation -----------------------------------------------------------------


def _piecewise(spec, t, u, per_piece):
    t, u = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
    uc = np.maximum(u, 0.0)
    out = np.zeros(u.shape)
    for k, p in enumerate(spec.pieces):
        m = (uc >= p.lo) & (uc < p.hi)
        if np.any(m):
            out[m] = per_piece(k, p, t[m], uc[m])
    return out


def eval_f(spec: NonlinearitySpec, t, u):
    """f(t, u), with f(t, u) = f(t, 0) for u < 0."""
    out = _piecewise(spec, t, u, lambda k, p, tt, uu: dsl.evaluate(p.expr, tt, uu))
    return float(out) if out.ndim == 0 else out


def eval_dfdu(spec: NonlinearitySpec, t, u):
    """df/du from the piece containing u (the right-hand derivative at breakpoints).

    Zero for u < 0; non-finite values (e.g. u^p at 0 with p < 1) are returned as is.
    """
    out = _piecewise(spec, t, u, lambda k, p, tt, uu: spec._symbolic[k].dfdu(tt, uu))
    out = np.where(np.asarray(u) < 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def eval_F(spec: NonlinearitySpec, t, u):
    """F(t, u) = int_0^u f(t, s) ds, exact on power-type pieces.

    For u < 0 the constant continuation gives F(t, u) = f(t, 0) u.
    """
    t, u = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
    uc = np.maximum(u, 0.0)
    total = np.zeros(u.shape)
    for k, p in enumerate(spec.pieces):
        if not np.any(uc > p.lo):
            break
        m = uc > p.lo
        top = np.minimum(uc[m], p.hi)
        total[m] += spec._symbolic[k].integral(t[m], p.lo, top)
    neg = u < 0.0
    if np.any(neg):
        total[neg] = eval_f(spec, t[neg], 0.0 * u[neg]) * u[neg]
    return float(total) if total.ndim == 0 else total


_T, _U = sp.symbols("t u", real=True)


def _to_sympy(node):
    if isinstance(node, dsl.Num):
        return sp.Rational(repr(node.value)) if math.isfinite(node.value) else sp.oo
    if isinstance(node, dsl.Var):
        return _T if node.name == "t" else _U
    if isinstance(node, dsl.Neg):
        return -_to_sympy(node.operand)
    if isinstance(node, dsl.Pow):
        return sp.Pow(_to_sympy(node.base), sp.Rational(repr(node.exponent)))
    a, b = _to_sympy(node.left), _to_sympy(node.right)
    return {"+": a + b, "-": a - b, "*": a * b}[node.op]


class _SymbolicPiece:
    """Antiderivative and u-derivative of one piece, compiled to numpy."""

    def __init__(self, piece: Piece):
        self.piece = piece
        expr = _to_sympy(piece.expr)
        self._df = sp.lambdify((_T, _U), sp.diff(expr, _U), "numpy")
        self._F = None
        try:
            anti = sp.integrate(expr, _U)
            if not anti.has(sp.Integral) and not anti.has(sp.Piecewise):
                self._F = sp.lambdify((_T, _U), anti, "numpy")
        except Exception:  # sympy raises a zoo of exception types here
            self._F = None

    def dfdu(self, t, u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.broadcast_to(np.asarray(self._df(t, u), dtype=float), np.shape(u)).copy()

    def integral(self, t, lo, top):
        """int_lo^top f(t, s) ds, elementwise."""
        lo_arr = np.full(np.shape(top), lo)
        if self._F is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                val = self._F(t, top) - self._F(t, lo_arr)
            val = np.broadcast_to(np.asarray(val, dtype=float), np.shape(top))
            if np.all(np.isfinite(val)):
                return val
        return self._quadrature(t, lo_arr, top)

    def _quadrature(self, t, lo, top, order=16, panels=8):
        xi, wi = gauss_legendre(order)
        edges = np.linspace(0.0, 1.0, panels + 1)
        frac = (edges[:-1, None] + np.diff(edges)[:, None] * xi[None, :]).ravel()
        wf = (np.diff(edges)[:, None] * wi[None, :]).ravel()
        span = top - lo
        s = lo[..., None] + span[..., None] * frac
        vals = dsl.evaluate(self.piece.expr, np.asarray(t)[..., None] + 0.0 * s, s)
        return span * np.sum(wf * vals, axis=-1)


# -- monotonicity -----------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneCheck:
    """Sampled verdict on whether f is nondecreasing in t and in u.

    ``witness`` holds the first violating pair as ``((t1, u1), (t2, u2))``.
    A pass only covers the sampled lattice.
    """

    passed: bool
    witness: Optional[tuple]
    samples: int
    u_probe_max: float
    heuristic: bool = True
    worst_step: float = 0.0
    tolerance: float = 0.0

    def __bool__(self):
        return self.passed


def check_monotone(
    spec: NonlinearitySpec, samples: int = 129, u_probe_max: Optional[float] = None
) -> MonotoneCheck:
    """Check f(t_i, u_j) is nondecreasing along both axes of a lattice on
    [0, 1] x [0, u_probe_max]. Breakpoints inside the range are added to the
    u-axis."""
    if samples < 2:
        raise ValueError("need at least 2 samples per axis")
    umax = spec.u_probe_max if u_probe_max is None else float(u_probe_max)
    t = np.linspace(0.0, 1.0, samples)
    u = np.linspace(0.0, umax, samples)
    u = np.union1d(u, [b for b in spec.breakpoints if b < umax])
    vals = eval_f(spec, t[:, None], u[None, :])
    tol = 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    du = np.diff(vals, axis=1)
    dt = np.diff(vals, axis=0)
    worst = float(min(du.min(), dt.min()))
    extra = dict(worst_step=worst, tolerance=tol)
    if np.any(du < -tol):
        i, j = np.argwhere(du < -tol)[0]
        witness = ((float(t[i]), float(u[j])), (float(t[i]), float(u[j + 1])))
        return MonotoneCheck(False, witness, samples, umax, **extra)
    if np.any(dt < -tol):
        i, j = np.argwhere(dt < -tol)[0]
        witness = ((float(t[i]), float(u[j])), (float(t[i + 1]), float(u[j])))
        return MonotoneCheck(False, witness, samples, umax, **extra)
    return MonotoneCheck(True, None, samples, umax, **extra)


# -- envelopes ----------------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Lower/upper envelopes of f(t, .) over ``[minorant(t) * radius, upper_u]``.

    ``kinks`` are t-locations where the envelopes may fail to be smooth
    (lower end of the interval crossing a breakpoint of f); quadrature
    routines split there.
    """

    lower: Callable
    upper: Callable
    kinks: Tuple[float, ...]
    exact: bool


def minorant_crossings(kind, radius, level, n=2049):
    """t in (0, 1) where minorant(kind, t) * radius == level."""
    from scipy.optimize import brentq

    t = np.linspace(0.0, 1.0, n)
    g = minorant(kind, t) * radius - level
    out = []
    for k in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        out.append(brentq(lambda s: minorant(kind, s) * radius - level, t[k], t[k + 1], xtol=1e-15))
    out.extend(float(t[k]) for k in np.nonzero(g == 0.0)[0] if 0.0 < t[k] < 1.0)
    return tuple(sorted(out))


def envelope(
    spec: NonlinearitySpec,
    radius: float,
    minorant_kind: str,
    upper_u: float,
    monotone: Optional[bool] = None,
) -> Envelope:
    """Envelopes of f over the t-dependent interval ``[m(t) radius, upper_u]``.

    With f nondecreasing in u (``monotone``, checked on a lattice when not
    given) the extremes sit at the interval ends. Otherwise each t is handled
    by enumerating endpoints and breakpoints, sampling, and polishing the best
    sample with a golden-section search.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    top_minorant = {"M": 2.0 / 3.0, "M0": float(minorant("M0", 0.75)), "M1": 2.0 / 3.0}[minorant_kind]
    if upper_u < top_minorant * radius:
        raise EmptyIntervalError(
            f"upper_u = {upper_u!r} is below the interval's lower end {top_minorant * radius!r}"
        )
    if monotone is None:
        monotone = check_monotone(spec, samples=65, u_probe_max=max(upper_u, spec.u_probe_max)).passed
    kinks = tuple(sorted({c for b in spec.breakpoints for c in minorant_crossings(minorant_kind, radius, b)}))

    if monotone:

        def lower(t):
            return eval_f(spec, t, minorant(minorant_kind, t) * radius)

        def upper(t):
            return eval_f(spec, t, upper_u + 0.0 * np.asarray(t, dtype=float))

        return Envelope(lower, upper, kinks, True)

    def extreme(t, sign):
        t_arr = np.asarray(t, dtype=float)
        lo = minorant(minorant_kind, t_arr) * radius
        out = np.empty(t_arr.shape)
        for idx in np.ndindex(t_arr.shape):
            out[idx] = sign * _scalar_min(
                lambda u, tt=float(t_arr[idx]): sign * eval_f(spec, tt, u),
                float(lo[idx]) if np.ndim(lo) else float(lo),
                upper_u,
                spec.breakpoints,
            )
        return float(out) if out.ndim == 0 else out

    return Envelope(lambda t: extreme(t, 1.0), lambda t: extreme(t, -1.0), kinks, False)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(g, a, b, tol=1e-12, maxit=200):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(maxit):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    x = c if gc <= gd else d
    return x, min(gc, gd)


def _scalar_min(g, a, b, breakpoints, samples=33):
    knots = np.unique(np.concatenate([[a, b], [p for p in breakpoints if a < p < b]]))
    best = min(g(a), g(b))
    for lo, hi in zip(knots[:-1], knots[1:]):
        xs = np.linspace(lo, hi, samples)
        vals = np.array([g(x) for x in xs])
        k = int(np.argmin(vals))
        best = min(best, float(vals[k]), g(hi * (1 - 1e-15)))
        _, v = _golden(g, xs[max(k - 1, 0)], xs[min(k + 1, samples - 1)])
        best = min(best, v)
    return best


# -- the two worked nonlinearities --------------------------------------------------


def saturated_linear(slope: float = 4600.0, knee: float = 0.03) -> NonlinearitySpec:
    """``slope * u`` up to ``u = knee``, constant afterwards."""
    return parse_spec(f"[0,{dsl._num(knee)}): {dsl._num(slope)}*u ; [{dsl._num(knee)},inf): {dsl._num(slope * knee)}")


def power_quadratic(p: float = 0.5, b: float = 5.0) -> NonlinearitySpec:
    """``p u^p`` on [0, 1), ``p u^2`` on [1, b), ``p ((u - b)^p + b^2)`` beyond."""
    if not 0.0 <= p <= 0.5:
        warnings.warn("the construction is intended for 0 <= p <= 1/2", stacklevel=2)
    if not b > 1.0:
        raise ValueError("b must exceed 1")
    P, B = dsl._num(p), dsl._num(b)
    return parse_spec(f"[0,1): {P}*u^{P} ; [1,{B}): {P}*u^2 ; [{B},inf): {P}*((u-{B})^{P} + {B}^2)")
