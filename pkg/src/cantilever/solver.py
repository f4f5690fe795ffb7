"""Solvers for the integral equation u = J f(., u).

The equation is collocated at the grid nodes, with ``f(t, u(t))`` replaced
by its piecewise-linear interpolant between nodes.  The resulting discrete
operator ``N(u) = W f(t, u)`` uses the exact matrix ``W`` from
:func:`cantilever.kernel.j_matrix`; its entries are nonnegative, so ``N``
keeps the ordering that monotone iteration relies on.  Picard, monotone and
Newton iterations all solve this same discrete system and therefore agree
to their tolerances.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .kernel import (
    DEFAULT_QUADRATURE,
    Grid,
    GridFunction,
    QuadratureConfig,
    curvature_values,
    energetic_norm_of_J,
    j_matrix,
    l2_norm_of_J,
    minorant,
)
from .nonlinearity import NonlinearitySpec, check_monotone, eval_dfdu, eval_f

__all__ = [
    "SolverError",
    "DivergenceError",
    "OrderingError",
    "PreconditionError",
    "SingularJacobianError",
    "LineSearchError",
    "SolveReport",
    "residual",
    "picard",
    "monotone_iterate",
    "newton_solve",
    "default_supersolution",
    "constant_solution",
]

log = logging.getLogger(__name__)

ZERO_SUP = 1e-14
CONE_SLACK = 1e-9


class SolverError(RuntimeError):
    def __init__(self, message, trace=None, last=None):
        super().__init__(message)
        self.trace = list(trace or [])
        self.last = last


class DivergenceError(SolverError):
    pass


class OrderingError(SolverError):
    pass


class PreconditionError(SolverError):
    pass


class SingularJacobianError(SolverError):
    def __init__(self, message, condition, trace=None, last=None):
        super().__init__(message, trace, last)
        self.condition = condition


class LineSearchError(SolverError):
    pass


@dataclass(eq=False)
class SolveReport:
    solution: GridFunction
    iterations: int
    residual_sup: float
    residual_L2: float
    norm_energetic: float
    norm_L2: float
    norm_sup: float
    cone_M0_ok: bool
    cone_M_ok: bool
    convex_ok: bool
    trace: List[float]
    method: str
    status: str
    curvature: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self):
        return {
            "method": self.method,
            "status": self.status,
            "iterations": self.iterations,
            "residual_sup": self.residual_sup,
            "residual_L2": self.residual_L2,
            "norm_energetic": self.norm_energetic,
            "norm_L2": self.norm_L2,
            "norm_sup": self.norm_sup,
            "cone_M0_ok": self.cone_M0_ok,
            "cone_M_ok": self.cone_M_ok,
            "convex_ok": self.convex_ok,
            "panels": self.solution.grid.panels,
            "trace": list(self.trace),
        }

    def rows(self):
        """(t, u, u'', f(t, u)) per node."""
        return np.column_stack([self.solution.nodes, self.solution.values, self.curvature, self.rhs])


def _grid_of(u):
    return u.grid


def _N(spec, u: np.ndarray, grid: Grid) -> np.ndarray:
    out = j_matrix(grid.panels) @ eval_f(spec, grid.nodes, u)
    out[0] = 0.0
    return out


def _trapezoid_l2(r, h):
    w = np.full(r.size, h)
    w[0] = w[-1] = h / 2
    return float(np.sqrt(np.sum(w * r * r)))


def residual(spec: NonlinearitySpec, u: GridFunction):
    """(sup, L2) norms of ``u - J f(., u)`` at the nodes."""
    r = u.values - _N(spec, u.values, u.grid)
    return float(np.max(np.abs(r))), _trapezoid_l2(r, u.grid.h)


def _report(spec, u, grid, iterations, trace, method, status, cfg):
    gf = GridFunction(grid, u)
    rsup, rl2 = residual(spec, gf)
    v = GridFunction(grid, eval_f(spec, grid.nodes, u))
    curv = curvature_values(v, grid.nodes, cfg)
    en = energetic_norm_of_J(v, cfg)
    l2 = l2_norm_of_J(v, cfg)
    sup = float(np.max(np.abs(u)))
    t = grid.nodes
    scale = CONE_SLACK * max(1.0, sup)
    return SolveReport(
        solution=gf,
        iterations=iterations,
        residual_sup=rsup,
        residual_L2=rl2,
        norm_energetic=en,
        norm_L2=l2,
        norm_sup=sup,
        cone_M0_ok=bool(np.all(u >= minorant("M0", t) * en - scale)),
        cone_M_ok=bool(np.all(u >= minorant("M", t) * sup - scale)),
        convex_ok=bool(np.all(curv >= -scale)),
        trace=[float(x) for x in trace],
        method=method,
        status=status,
        curvature=curv,
        rhs=v.values.copy(),
    )


def _lipschitz(spec, u, grid):
    d = np.abs(eval_dfdu(spec, grid.nodes, u))
    d = d[np.isfinite(d)]
    return float(np.max(d)) if d.size else float("inf")


def _start(u0, grid):
    if isinstance(u0, GridFunction):
        return u0.grid, np.array(u0.values, dtype=float)
    if grid is None:
        raise ValueError("pass a GridFunction start or a grid")
    return grid, np.array(u0, dtype=float) * np.ones(grid.size)


def picard(
    spec: NonlinearitySpec,
    u0: GridFunction,
    tol: float = 1e-10,
    maxit: int = 1000,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> SolveReport:
    """Fixed-point iteration ``u <- J f(., u)``.

    Warns (RuntimeWarning) when ``L / 8`` exceeds 1, where ``L`` is the
    largest |df/du| along the start; 1/8 is the norm of J on bounded
    functions, so the map need not contract. Divergence (residual growing
    by more than 2x three times in a row) raises :class:`DivergenceError`.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid, u = _start(u0, None)
    L = _lipschitz(spec, u, grid)
    if L / 8.0 > 1.0:
        warnings.warn(
            f"local Lipschitz bound {L:.3g} of f gives {L / 8:.3g} > 1: no contraction guarantee",
            RuntimeWarning,
            stacklevel=2,
        )
    trace = []
    growth = 0
    nu = _N(spec, u, grid)
    for k in range(1, maxit + 1):
        u = nu
        nu = _N(spec, u, grid)
        r = float(np.max(np.abs(nu - u)))
        trace.append(r)
        if len(trace) > 1 and trace[-1] > 2.0 * trace[-2]:
            growth += 1
            if growth >= 3:
                raise DivergenceError("Picard iteration diverges", trace, GridFunction(grid, u))
        else:
            growth = 0
        if r < tol:
            status = "stalled_at_zero" if np.max(np.abs(u)) < ZERO_SUP and not spec.is_zero else "converged"
            return _report(spec, u, grid, k, trace, "picard", status, cfg)
    return _report(spec, u, grid, maxit, trace, "picard", "max_iterations", cfg)


def monotone_iterate(
    spec: NonlinearitySpec,
    start: GridFunction,
    direction: str = "down",
    tol: float = 1e-10,
    maxit: int = 1000,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    monotone_checked: Optional[bool] = None,
) -> SolveReport:
    """Monotone iteration from a supersolution (``"down"``) or subsolution (``"up"``).

    Requires f nondecreasing in u (lattice check) and a start with
    ``N(start) <= start`` (down) or ``N(start) >= start`` (up), to 1e-12.
    A sequence that stays at the zero function for three steps is reported
    with status ``"stalled_at_zero"``.
    """
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    sign = -1.0 if direction == "down" else 1.0
    if monotone_checked is None:
        umax = max(spec.u_probe_max, 10.0 * float(np.max(np.abs(start.values))))
        monotone_checked = check_monotone(spec, u_probe_max=umax).passed
    if not monotone_checked:
        raise PreconditionError("monotone iteration needs f nondecreasing in u")
    grid, u = _start(start, None)
    nu = _N(spec, u, grid)
    if np.any(sign * (nu - u) < -1e-12):
        kind = "supersolution" if direction == "down" else "subsolution"
        raise PreconditionError(f"start is not a {kind}: max violation {np.max(sign * (u - nu)):.3e}")
    trace = []
    zero_run = 1 if np.max(np.abs(u)) < ZERO_SUP else 0
    method = f"monotone_{direction}"
    scale = 1e-10 * max(1.0, float(np.max(np.abs(u))))
    for k in range(1, maxit + 1):
        u = nu
        nu = _N(spec, u, grid)
        step = nu - u
        if np.any(sign * step < -scale):
            raise OrderingError(
                f"iterate {k} breaks the {direction}ward ordering by {np.max(-sign * step):.3e}",
                trace,
                GridFunction(grid, u),
            )
        r = float(np.max(np.abs(step)))
        trace.append(r)
        zero_run = zero_run + 1 if np.max(np.abs(u)) < ZERO_SUP else 0
        if zero_run >= 3 and not spec.is_zero:
            return _report(spec, u, grid, k, trace, method, "stalled_at_zero", cfg)
        if r < tol:
            status = "converged"
            if np.max(np.abs(u)) < ZERO_SUP and not spec.is_zero:
                status = "stalled_at_zero"
            return _report(spec, u, grid, k, trace, method, status, cfg)
    return _report(spec, u, grid, maxit, trace, method, "max_iterations", cfg)


def newton_solve(
    spec: NonlinearitySpec,
    u0: GridFunction,
    tol: float = 1e-11,
    maxit: int = 100,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    max_condition: float = 1e13,
) -> SolveReport:
    """Damped Newton on ``u - W f(t, u) = 0`` at the nodes.

    The node at t = 0 is pinned to 0 (the first row of W vanishes). The
    Jacobian uses the right-hand derivative of f at breakpoints; infinite
    slopes (u^p at 0) are replaced by the largest finite slope on the grid.
    Steps are halved until the sup-norm residual drops by the Armijo factor.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid, u = _start(u0, None)
    u[0] = 0.0
    W = j_matrix(grid.panels)
    inner = slice(1, None)
    I = np.eye(grid.size - 1)
    t = grid.nodes

    def F(x):
        r = x - _N(spec, x, grid)
        return r

    r = F(u)
    rn = float(np.max(np.abs(r)))
    trace = [rn]
    for k in range(1, maxit + 1):
        if rn < tol:
            return _report(spec, u, grid, k - 1, trace, "newton", _newton_status(spec, u), cfg)
        d = eval_dfdu(spec, t, u)
        finite = np.isfinite(d)
        if not np.all(finite):
            d = np.where(finite, d, np.max(np.abs(d[finite])) if np.any(finite) else 0.0)
        Jm = I - W[inner, inner] * d[inner][None, :]
        cond = float(np.linalg.cond(Jm))
        if not cond < max_condition:
            raise SingularJacobianError(
                f"Jacobian condition number {cond:.3e}", cond, trace, GridFunction(grid, u)
            )
        delta = np.zeros_like(u)
        delta[inner] = np.linalg.solve(Jm, -r[inner])
        lam = 1.0
        while True:
            trial = u + lam * delta
            rt = F(trial)
            rtn = float(np.max(np.abs(rt)))
            if rtn <= (1.0 - 1e-4 * lam) * rn or rtn < tol:
                break
            lam *= 0.5
            if lam < 2.0**-30:
                raise LineSearchError("line search failed", trace, GridFunction(grid, u))
        u, r, rn = trial, rt, rtn
        trace.append(rn)
    if rn < tol:
        return _report(spec, u, grid, maxit, trace, "newton", _newton_status(spec, u), cfg)
    return _report(spec, u, grid, maxit, trace, "newton", "max_iterations", cfg)


def _newton_status(spec, u):
    if np.max(np.abs(u)) < ZERO_SUP and not spec.is_zero:
        return "stalled_at_zero"
    return "converged"


def constant_solution(grid: Grid, c: float = 1.0, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> GridFunction:
    """``c J 1`` sampled on ``grid``: the solution for f identically c."""
    return GridFunction(grid, c * j_matrix(grid.panels) @ np.ones(grid.size))


def default_supersolution(spec: NonlinearitySpec, grid: Grid) -> GridFunction:
    """``(sup f) J 1`` for a bounded f whose last piece does not depend on u.

    Since ``N(v) <= J(sup f) = v`` for every v, this is a supersolution.
    """
    from . import dsl

    last = spec.pieces[-1]
    if "u" in dsl.variables(last.expr):
        raise PreconditionError("cannot bound f: its last piece depends on u")
    t = np.linspace(0.0, 1.0, 257)
    u = np.union1d(np.linspace(0.0, max(spec.u_probe_max, 2 * last.lo), 1025), spec.breakpoints)
    bound = float(np.max(eval_f(spec, t[:, None], u[None, :])))
    return constant_solution(grid, bound)
