"""Green's function of the clamped-free beam operator and quadrature on [0, 1].

The boundary value problem ``u'''' = v`` with ``u(0) = u'(0) = u''(1) =
u'''(1) = 0`` is inverted by the integral operator

    (J v)(t) = int_0^1 G(t, s) v(s) ds,

    G(t, s) = s^2 (3t - s) / 6   for s <= t,
              t^2 (3s - t) / 6   for t <  s.

Everything here is vectorised over numpy arrays. Integrals are computed with
composite Gauss-Legendre rules whose panel edges always include the kink
abscissae of the integrand (the diagonal ``s = t`` for the kernel, plus any
breakpoints supplied by the caller), so the rules keep their full order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Union

import numpy as np

__all__ = [
    "DomainError",
    "ToleranceNotMet",
    "Grid",
    "GridFunction",
    "QuadratureConfig",
    "green",
    "green_tt",
    "minorant",
    "integrate",
    "apply_J",
    "J_values",
    "curvature_from_rhs",
    "curvature_values",
    "energetic_norm_of_J",
    "l2_norm_of_J",
    "j_matrix",
    "gauss_legendre",
]

SQRT2 = np.sqrt(2.0)


class DomainError(ValueError):
    """An argument lies outside the unit interval."""


class ToleranceNotMet(RuntimeError):
    """Panel doubling hit its cap before two estimates agreed."""

    def __init__(self, estimate, gap, tolerance):
        self.estimate = estimate
        self.gap = gap
        self.tolerance = tolerance
        super().__init__(
            f"quadrature did not converge: last estimate {estimate!r}, "
            f"gap {gap:.3e} > tolerance {tolerance:.3e}"
        )


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [0, 1] into ``panels`` equal subintervals."""

    panels: int

    def __post_init__(self):
        if int(self.panels) != self.panels or self.panels < 1:
            raise ValueError(f"panels must be a positive integer, got {self.panels!r}")

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.panels + 1)
        x.flags.writeable = False
        return x

    @property
    def size(self) -> int:
        return self.panels + 1

    @property
    def h(self) -> float:
        return 1.0 / self.panels


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function at the nodes of a :class:`Grid`.

    Between nodes the function is understood as its piecewise-linear
    interpolant; calling the object evaluates that interpolant.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} samples for {self.grid.panels} panels, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, t):
        return np.interp(t, self.grid.nodes, self.values)

    def __len__(self):
        return self.values.size

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _values(other))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _values(other))

    def __mul__(self, a):
        return GridFunction(self.grid, self.values * a)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


def _values(x):
    return x.values if isinstance(x, GridFunction) else x


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre settings.

    ``panels`` is the starting number of equal panels on the integration
    interval; each refinement doubles it, at most ``max_doublings`` times.
    """

    panels: int = 256
    points_per_panel: int = 8
    refinement_tolerance: float = 1e-10
    max_doublings: int = 6

    def __post_init__(self):
        if self.points_per_panel < 2:
            raise ValueError("points_per_panel must be at least 2")
        if not self.refinement_tolerance > 0:
            raise ValueError("refinement_tolerance must be positive")
        if self.panels < 1:
            raise ValueError("panels must be positive")

    def doubled(self, times: int = 1) -> "QuadratureConfig":
        return QuadratureConfig(
            self.panels * 2**times,
            self.points_per_panel,
            self.refinement_tolerance,
            self.max_doublings,
        )


DEFAULT_QUADRATURE = QuadratureConfig()


def _unit(name, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(np.isnan(x)):
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def green(t, s):
    """Green's function G(t, s) of the clamped-free beam problem."""
    t = _unit("t", t)
    s = _unit("s", s)
    g = np.where(s <= t, s * s * (3.0 * t - s), t * t * (3.0 * s - t)) / 6.0
    return _out(g)


def green_tt(t, s):
    """Second t-derivative of G: ``s - t`` above the diagonal, 0 on and below it."""
    t = _unit("t", t)
    s = _unit("s", s)
    return _out(np.where(s > t, s - t, 0.0))


def minorant(kind: str, t):
    """Pointwise weights used by the Harnack-type bounds.

    ``"M0"``: sqrt(2) (1 - t) t^3 / 6, lower bound against the energetic norm
    for solutions with nondecreasing right-hand side.
    ``"M1"``: (2/3) t^(3/2), upper bound against the energetic norm.
    ``"M"``: (3 - t) t^2 / 3, lower bound against the sup norm.
    """
    t = _unit("t", t)
    if kind == "M0":
        m = SQRT2 * (1.0 - t) * t**3 / 6.0
    elif kind == "M1":
        m = 2.0 / 3.0 * t**1.5
    elif kind == "M":
        m = (3.0 - t) * t * t / 3.0
    else:
        raise ValueError(f"unknown minorant {kind!r}; expected 'M0', 'M1' or 'M'")
    return _out(m)


# -- quadrature ---------------------------------------------------------------


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _call(g, x):
    """Evaluate ``g`` on an array, tolerating scalar-only or constant callables."""
    try:
        y = np.asarray(g(x), dtype=float)
    except (TypeError, ValueError):
        y = np.vectorize(lambda z: float(g(z)), otypes=[float])(x)
    if y.shape != np.shape(x):
        y = np.broadcast_to(y, np.shape(x)).astype(float)
    return y


def _edges(a, b, panels, breakpoints=()):
    e = np.linspace(a, b, panels + 1)
    if breakpoints is not None and len(breakpoints):
        bp = np.asarray([p for p in breakpoints if a < p < b], dtype=float)
        if bp.size:
            e = np.union1d(e, bp)
    return e


def _rule(edges, order):
    xi, wi = gauss_legendre(order)
    h = np.diff(edges)
    x = edges[:-1, None] + h[:, None] * xi[None, :]
    w = h[:, None] * wi[None, :]
    return x, w


def _fixed(g, a, b, panels, order, breakpoints=()):
    x, w = _rule(_edges(a, b, panels, breakpoints), order)
    return float(np.sum(w * _call(g, x)))


def _converged(old, new, tol):
    gap = float(np.max(np.abs(np.asarray(new) - np.asarray(old))))
    scale = max(1.0, float(np.max(np.abs(new))))
    return gap <= tol * scale, gap


def integrate(
    g: Callable,
    a: float = 0.0,
    b: float = 1.0,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    breakpoints: Iterable[float] = (),
) -> float:
    """Composite Gauss-Legendre integral of ``g`` over [a, b].

    The panel count starts at ``cfg.panels`` and doubles until two successive
    estimates differ by at most ``cfg.refinement_tolerance`` (relative to
    ``max(1, |estimate|)``). Points in ``breakpoints`` become panel edges.

    Raises
    ------
    ToleranceNotMet
        If the estimates still disagree after ``cfg.max_doublings`` doublings.
    """
    if b < a:
        raise ValueError("integration requires a <= b")
    if a == b:
        return 0.0
    bp = tuple(breakpoints)
    panels = cfg.panels
    prev = _fixed(g, a, b, panels, cfg.points_per_panel, bp)
    gap = np.inf
    for _ in range(cfg.max_doublings):
        panels *= 2
        cur = _fixed(g, a, b, panels, cfg.points_per_panel, bp)
        ok, gap = _converged(prev, cur, cfg.refinement_tolerance)
        prev = cur
        if ok:
            return cur
    raise ToleranceNotMet(prev, gap, cfg.refinement_tolerance)


# -- the integral operator J ----------------------------------------------------


def _as_callable(v):
    if isinstance(v, GridFunction):
        return v, tuple(v.grid.nodes[1:-1])
    if callable(v):
        return v, ()
    raise TypeError("v must be a GridFunction or a callable")


class _Moments:
    """Running moments A_k(x) = int_0^x s^k v(s) ds, k = 0..3, at arbitrary x."""

    def __init__(self, v, panels, order, breakpoints):
        self.v = v
        self.order = order
        self.edges = _edges(0.0, 1.0, panels, breakpoints)
        x, w = _rule(self.edges, order)
        vx = _call(v, x)
        per_panel = np.stack([np.sum(w * vx * x**k, axis=1) for k in range(4)])
        self.cumulative = np.concatenate([np.zeros((4, 1)), np.cumsum(per_panel, axis=1)], axis=1)
        self.total = self.cumulative[:, -1]

    def at(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        k = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, self.edges.size - 2)
        left = self.edges[k]
        xi, wi = gauss_legendre(self.order)
        span = flat - left
        s = left[:, None] + span[:, None] * xi[None, :]
        ws = span[:, None] * wi[None, :]
        vs = _call(self.v, s)
        A = np.stack([self.cumulative[j, k] + np.sum(ws * vs * s**j, axis=1) for j in range(4)])
        return A.reshape((4,) + x.shape)


def _J_from_moments(mom, x):
    A = mom.at(x)
    B = mom.total.reshape((4,) + (1,) * np.ndim(x)) - A
    return 0.5 * x * A[2] - A[3] / 6.0 + 0.5 * x * x * B[1] - x**3 * B[0] / 6.0


def _curv_from_moments(mom, x):
    A = mom.at(x)
    B = mom.total.reshape((4,) + (1,) * np.ndim(x)) - A
    return B[1] - x * B[0]


def _refined(evaluate, v, cfg, breakpoints):
    """Run ``evaluate(moments)`` with panel doubling until values settle."""
    f, own_bp = _as_callable(v)
    bp = tuple(own_bp) + tuple(breakpoints)
    panels = cfg.panels
    prev = evaluate(_Moments(f, panels, cfg.points_per_panel, bp))
    gap = np.inf
    for _ in range(cfg.max_doublings):
        panels *= 2
        cur = evaluate(_Moments(f, panels, cfg.points_per_panel, bp))
        ok, gap = _converged(prev, cur, cfg.refinement_tolerance)
        prev = cur
        if ok:
            return cur
    raise ToleranceNotMet(prev, gap, cfg.refinement_tolerance)


def J_values(v, x, cfg: QuadratureConfig = DEFAULT_QUADRATURE, breakpoints=()):
    """(J v)(x) at arbitrary points ``x`` in [0, 1].

    ``v`` is a callable or a :class:`GridFunction` (piecewise-linear, with its
    nodes treated as kinks). ``breakpoints`` lists further kinks of ``v``.
    """
    x = _unit("x", x)
    return _refined(lambda m: _J_from_moments(m, x), v, cfg, breakpoints)


def apply_J(
    v: Union[GridFunction, Callable],
    grid: Grid,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    breakpoints=(),
) -> GridFunction:
    """Sample ``u = J v`` at the nodes of ``grid``."""
    u = J_values(v, grid.nodes, cfg, breakpoints)
    u[0] = 0.0
    return GridFunction(grid, u)


def curvature_from_rhs(v, t, cfg: QuadratureConfig = DEFAULT_QUADRATURE, breakpoints=()):
    """``u''(t) = int_t^1 (s - t) v(s) ds`` for ``u = J v``."""
    t_arr = _unit("t", t)
    f, _ = _as_callable(v)
    if np.ndim(t_arr) == 0:
        t0 = float(t_arr)
        if t0 == 1.0:
            return 0.0
        bp = tuple(_as_callable(v)[1]) + tuple(breakpoints)
        return integrate(lambda s: (s - t0) * _call(f, s), t0, 1.0, cfg, bp)
    return curvature_values(v, t_arr, cfg, breakpoints)


def curvature_values(v, x, cfg: QuadratureConfig = DEFAULT_QUADRATURE, breakpoints=()):
    """Vectorised ``(J v)''`` at the points ``x``."""
    x = _unit("x", x)
    return _refined(lambda m: _curv_from_moments(m, x), v, cfg, breakpoints)


def _node_rule(cfg, breakpoints):
    return _rule(_edges(0.0, 1.0, cfg.panels, breakpoints), cfg.points_per_panel)


def energetic_norm_of_J(v, cfg: QuadratureConfig = DEFAULT_QUADRATURE, breakpoints=()) -> float:
    """``|J v| = ||(J v)''||_{L^2}``, computed from the exact curvature formula."""
    _, own = _as_callable(v)
    bp = tuple(own) + tuple(breakpoints)
    x, w = _node_rule(cfg, bp)
    w2 = curvature_values(v, x, cfg, breakpoints)
    return float(np.sqrt(np.sum(w * w2 * w2)))


def l2_norm_of_J(v, cfg: QuadratureConfig = DEFAULT_QUADRATURE, breakpoints=()) -> float:
    """``||J v||_{L^2(0,1)}``."""
    _, own = _as_callable(v)
    bp = tuple(own) + tuple(breakpoints)
    x, w = _node_rule(cfg, bp)
    u = J_values(v, x, cfg, breakpoints)
    return float(np.sqrt(np.sum(w * u * u)))


@lru_cache(maxsize=16)
def j_matrix(panels: int) -> np.ndarray:
    """Matrix W with ``(J v)(t_i) = sum_j W[i, j] v_j`` for piecewise-linear v.

    The entries ``W[i, j] = int G(t_i, s) hat_j(s) ds`` are exact: on every
    panel the integrand is a polynomial of degree 4, and the kernel kink sits
    on a node.
    """
    grid = Grid(panels)
    t = grid.nodes
    h = grid.h
    xi, wi = gauss_legendre(3)
    s = (t[:-1, None] + h * xi[None, :]).ravel()
    ws = np.tile(h * wi, panels)
    left = np.repeat(np.arange(panels), xi.size)
    frac = (s - t[left]) / h
    hats = np.zeros((s.size, grid.size))
    hats[np.arange(s.size), left] = 1.0 - frac
    hats[np.arange(s.size), left + 1] = frac
    G = green(t[:, None], s[None, :])
    W = (G * ws[None, :]) @ hats
    W[0, :] = 0.0
    W.flags.writeable = False
    return W
