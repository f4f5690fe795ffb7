"""Energy functional and critical-point searches in the curvature variable.

A candidate ``u`` is stored through ``w = u''`` sampled at the grid nodes and
read as the piecewise-linear interpolant of those samples.  Then

* ``u(t) = int_0^t (t - s) w(s) ds`` automatically has ``u(0) = u'(0) = 0``;
* convexity of ``u`` is the box constraint ``w >= 0``;
* the energetic norm ``|u|`` is the plain L2 norm of ``w``;
* scaling ``w`` by ``c > 0`` scales every norm of ``u`` by ``c``.

The energy is ``E(u) = |u|^2 / 2 - int_0^1 F(t, u(t)) dt``.  Its gradient
is returned as the L2 Riesz representative inside the piecewise-linear space,
so ``<grad E(w), dw>_{L2}`` is exactly the directional derivative of the
discrete energy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .kernel import DEFAULT_QUADRATURE, Grid, GridFunction, QuadratureConfig, gauss_legendre, minorant
from .nonlinearity import NonlinearitySpec, eval_dfdu, eval_f, eval_F

__all__ = [
    "InfeasibleShellError",
    "CurvatureRepr",
    "ShellSpec",
    "Norms",
    "ConeReport",
    "CriticalPointReport",
    "curvature_space",
    "u_from_curvature",
    "energy",
    "energy_gradient",
    "inner",
    "norms",
    "cone_membership",
    "minimize_in_shell",
    "mountain_pass",
    "sphere_inf",
    "from_function",
]

log = logging.getLogger(__name__)

ACTIVE_RTOL = 1e-9


class InfeasibleShellError(ValueError):
    pass


# -- discretisation -------------------------------------------------------------


class CurvatureSpace:
    """Matrices for piecewise-linear curvatures on a uniform grid.

    ``mass``      exact L2 Gram matrix of the hat functions;
    ``R_nodes``   maps nodal w to u at the nodes;
    ``R_quad``    maps nodal w to u at the Gauss points ``xq`` (weights ``wq``).
    All reconstructions are exact for piecewise-linear w.
    """

    def __init__(self, panels: int, order: int):
        self.grid = Grid(panels)
        n = self.grid.size
        h = self.grid.h
        e = self.grid.nodes
        self.n, self.h = n, h

        M = np.zeros((n, n))
        i = np.arange(panels)
        M[i, i] += h / 3
        M[i + 1, i + 1] += h / 3
        M[i, i + 1] += h / 6
        M[i + 1, i] += h / 6
        self.mass = M
        self._chol = cho_factor(M)
        self.mass_inv = cho_solve(self._chol, np.eye(n))

        # running integrals of hat_m and s*hat_m up to each node
        P0 = np.zeros((panels, n))
        P1 = np.zeros((panels, n))
        P0[i, i] = P0[i, i + 1] = h / 2
        P1[i, i] = e[:-1] * h / 2 + h * h / 6
        P1[i, i + 1] = e[:-1] * h / 2 + h * h / 3
        C0 = np.vstack([np.zeros(n), np.cumsum(P0, axis=0)])
        C1 = np.vstack([np.zeros(n), np.cumsum(P1, axis=0)])
        self.R_nodes = e[:, None] * C0 - C1

        xi, wi = gauss_legendre(order)
        xq = (e[:-1, None] + h * xi[None, :]).ravel()
        self.xq = xq
        self.wq = np.tile(h * wi, panels)
        k = np.repeat(i, order)
        sig = xq - e[k]
        R = xq[:, None] * C0[k] - C1[k]
        rows = np.arange(xq.size)
        R[rows, k] += sig**2 / 2 - sig**3 / (6 * h)
        R[rows, k + 1] += sig**3 / (6 * h)
        self.R_quad = R
        interp = np.zeros((xq.size, n))
        interp[rows, k] = 1 - sig / h
        interp[rows, k + 1] = sig / h
        self.interp_quad = interp

    def solve_mass(self, b):
        return cho_solve(self._chol, b)

    def inner(self, a, b) -> float:
        return float(a @ self.mass @ b)

    def mnorm(self, a) -> float:
        return float(np.sqrt(max(a @ self.mass @ a, 0.0)))


@lru_cache(maxsize=8)
def curvature_space(panels: int = 256, order: int = 8) -> CurvatureSpace:
    return CurvatureSpace(panels, order)


@dataclass(frozen=True, eq=False)
class CurvatureRepr:
    """A candidate ``u`` given by nodal samples of ``w = u''``."""

    grid: Grid
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} curvature samples, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("curvature samples must be finite")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    def __mul__(self, c):
        return CurvatureRepr(self.grid, self.w * c)

    __rmul__ = __mul__

    def __add__(self, other):
        return CurvatureRepr(self.grid, self.w + other.w)

    def __sub__(self, other):
        return CurvatureRepr(self.grid, self.w - other.w)

    def space(self, order: int = DEFAULT_QUADRATURE.points_per_panel) -> CurvatureSpace:
        return curvature_space(self.grid.panels, order)


def from_function(grid: Grid, w) -> CurvatureRepr:
    """Sample a callable curvature at the nodes."""
    return CurvatureRepr(grid, np.asarray(w(grid.nodes), dtype=float) * np.ones(grid.size))


@dataclass(frozen=True)
class ShellSpec:
    """Conical shell in which critical points are sought.

    ``"energetic"``: R0 <= |u| <= R1.
    ``"two_norm"``: ||u||_{L2} >= R0 and |u| <= R1.
    """

    variant: str
    R0: float
    R1: float

    def __post_init__(self):
        if self.variant not in ("energetic", "two_norm"):
            raise ValueError("variant must be 'energetic' or 'two_norm'")
        if not self.R0 > 0:
            raise ValueError("R0 must be positive")
        if self.variant == "energetic" and not self.R0 < self.R1:
            raise ValueError("energetic shell needs R0 < R1")
        if self.variant == "two_norm":
            from .eigen import eigen_report

            ratio = eigen_report(Grid(64)).l2_norm_normalized
            if not self.R0 < ratio * self.R1:
                raise ValueError(
                    f"two_norm shell needs R0 < ||phi|| R1 = {ratio * self.R1!r} (||phi|| = {ratio:.6f})"
                )

    def to_dict(self):
        return {"variant": self.variant, "R0": self.R0, "R1": self.R1}


# -- functionals ------------------------------------------------------------------


def _space(w, cfg):
    return curvature_space(w.grid.panels, cfg.points_per_panel)


def u_from_curvature(w: CurvatureRepr, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> GridFunction:
    """``u(t_i) = int_0^{t_i} (t_i - s) w(s) ds`` for the interpolant of w."""
    return GridFunction(w.grid, _space(w, cfg).R_nodes @ w.w)


def _energy(spec, S, wv):
    u = S.R_quad @ wv
    return 0.5 * float(wv @ S.mass @ wv) - float(np.sum(S.wq * eval_F(spec, S.xq, u)))


def _load(spec, S, wv):
    """Vector b with b_j = int f(t, u(t)) (d u / d w_j)(t) dt."""
    u = S.R_quad @ wv
    return S.R_quad.T @ (S.wq * eval_f(spec, S.xq, u))


def _grad(spec, S, wv):
    return wv - S.solve_mass(_load(spec, S, wv))


def energy(spec: NonlinearitySpec, w: CurvatureRepr, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``|u|^2 / 2 - int_0^1 F(t, u(t)) dt``."""
    return _energy(spec, _space(w, cfg), w.w)


def energy_gradient(
    spec: NonlinearitySpec, w: CurvatureRepr, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> CurvatureRepr:
    """L2 gradient of the energy with respect to the curvature.

    In the continuum this is ``w(s) - int_s^1 (t - s) f(t, u(t)) dt``; here
    the second term is replaced by its L2 projection onto the
    piecewise-linear space.
    """
    return CurvatureRepr(w.grid, _grad(spec, _space(w, cfg), w.w))


def inner(a: CurvatureRepr, b: CurvatureRepr, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Exact L2 inner product of two piecewise-linear curvatures."""
    return _space(a, cfg).inner(a.w, b.w)


@dataclass(frozen=True)
class Norms:
    energetic: float
    L2_of_u: float
    sup_of_u: float

    def __iter__(self):
        return iter((self.energetic, self.L2_of_u, self.sup_of_u))


def _norms(S, wv):
    uq = S.R_quad @ wv
    un = S.R_nodes @ wv
    return Norms(
        S.mnorm(wv),
        float(np.sqrt(np.sum(S.wq * uq * uq))),
        float(max(np.max(np.abs(un)), np.max(np.abs(uq)))),
    )


def norms(w: CurvatureRepr, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Norms:
    """(energetic norm, L2 norm of u, sup norm of u)."""
    return _norms(_space(w, cfg), w.w)


@dataclass(frozen=True, eq=False)
class ConeReport:
    variant: str
    convex: bool
    harnack: bool
    worst_node: int
    worst_slack: float
    slack: np.ndarray = field(repr=False)
    negative_curvature_node: Optional[int] = None

    @property
    def member(self) -> bool:
        return self.convex and self.harnack

    def to_dict(self):
        return {
            "variant": self.variant,
            "convex": self.convex,
            "harnack": self.harnack,
            "worst_node": self.worst_node,
            "worst_slack": self.worst_slack,
            "negative_curvature_node": self.negative_curvature_node,
        }


def cone_membership(
    w: CurvatureRepr, variant: str = "M0_energetic", cfg: QuadratureConfig = DEFAULT_QUADRATURE, tol: float = 1e-9
) -> ConeReport:
    """Convexity and Harnack-bound check, node by node.

    ``"M0_energetic"``: u >= M0(t) |u|;  ``"M_sup"``: u >= M(t) ||u||_inf;
    ``"M_L2"``: u >= M(t) ||u||_{L2}.
    """
    S = _space(w, cfg)
    u = S.R_nodes @ w.w
    nrm = _norms(S, w.w)
    t = w.grid.nodes
    if variant == "M0_energetic":
        bound = minorant("M0", t) * nrm.energetic
    elif variant == "M_sup":
        bound = minorant("M", t) * nrm.sup_of_u
    elif variant == "M_L2":
        bound = minorant("M", t) * nrm.L2_of_u
    else:
        raise ValueError(f"unknown cone variant {variant!r}")
    slack = u - bound
    worst = int(np.argmin(slack))
    neg = np.nonzero(w.w < -tol)[0]
    return ConeReport(
        variant=variant,
        convex=neg.size == 0,
        harnack=bool(slack[worst] >= -tol),
        worst_node=worst,
        worst_slack=float(slack[worst]),
        slack=slack,
        negative_curvature_node=int(neg[0]) if neg.size else None,
    )


# -- constrained descent ------------------------------------------------------------


@dataclass(eq=False)
class CriticalPointReport:
    point: CurvatureRepr
    energy: float
    projected_gradient_norm: float
    kind: str
    estimate_m_or_c: float
    boundary_active: dict
    converged: bool
    iterations: int
    norms: Norms
    path: Optional[List[CurvatureRepr]] = None
    path_energies: Optional[List[float]] = None
    polished: bool = False
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        d = {
            "kind": self.kind,
            "energy": self.energy,
            "estimate": self.estimate_m_or_c,
            "projected_gradient_norm": self.projected_gradient_norm,
            "boundary_active": dict(self.boundary_active),
            "converged": self.converged,
            "iterations": self.iterations,
            "polished": self.polished,
            "norm_energetic": self.norms.energetic,
            "norm_L2": self.norms.L2_of_u,
            "norm_sup": self.norms.sup_of_u,
            "notes": list(self.notes),
        }
        if self.path_energies is not None:
            d["path_energies"] = list(self.path_energies)
        return d


class _Constraint:
    """Feasible set: w >= 0 plus radial norm bounds (a shell or a sphere)."""

    def __init__(self, S, shell: Optional[ShellSpec] = None, sphere: Optional[float] = None):
        self.S = S
        self.shell = shell
        self.sphere = sphere

    def l2u(self, wv):
        uq = self.S.R_quad @ wv
        return float(np.sqrt(np.sum(self.S.wq * uq * uq)))

    def retract(self, wv):
        """Clip to w >= 0, then rescale into the norm bounds; None if w clips to 0."""
        w = np.maximum(wv, 0.0)
        en = self.S.mnorm(w)
        if not en > 0:
            return None
        if self.sphere is not None:
            return w * (self.sphere / en)
        sh = self.shell
        if sh.variant == "energetic":
            return w * (min(max(en, sh.R0), sh.R1) / en)
        gamma = 1.0
        l2 = self.l2u(w)
        if l2 < sh.R0:
            gamma = sh.R0 / l2
        if en * gamma > sh.R1:
            gamma = sh.R1 / en
        return w * gamma

    def feasible(self, wv) -> bool:
        if np.any(wv < -1e-12):
            return False
        en = self.S.mnorm(wv)
        if self.sphere is not None:
            return abs(en - self.sphere) <= ACTIVE_RTOL * self.sphere
        sh = self.shell
        inner_ok = (en if sh.variant == "energetic" else self.l2u(wv)) >= sh.R0 * (1 - ACTIVE_RTOL)
        return inner_ok and en <= sh.R1 * (1 + ACTIVE_RTOL)

    def flags(self, wv) -> dict:
        en = self.S.mnorm(wv)
        if self.sphere is not None:
            return {"sphere": True}
        sh = self.shell
        inner_val = en if sh.variant == "energetic" else self.l2u(wv)
        return {
            "inner": bool(abs(inner_val - sh.R0) <= ACTIVE_RTOL * sh.R0),
            "outer": bool(abs(en - sh.R1) <= ACTIVE_RTOL * sh.R1),
            "infeasible": bool(inner_val < sh.R0 * (1 - 1e-6)),
        }

    def _normals(self, wv, g):
        """Riesz representatives of the shell constraints that block descent along -g."""
        S = self.S
        en = S.mnorm(wv)
        out = []
        if self.sphere is not None:
            return [wv]
        sh = self.shell
        gw = S.inner(g, wv)
        if en >= sh.R1 * (1 - ACTIVE_RTOL) and gw < 0:
            out.append(wv)
        if sh.variant == "energetic":
            if en <= sh.R0 * (1 + ACTIVE_RTOL) and gw > 0:
                out.append(wv)
        else:
            if self.l2u(wv) <= sh.R0 * (1 + ACTIVE_RTOL):
                uq = S.R_quad @ wv
                n = S.solve_mass(S.R_quad.T @ (S.wq * uq))
                if S.inner(g, n) > 0:
                    out.append(n)
        return out

    def project(self, wv, g):
        """Projection of g, in the L2 metric, onto the directions that keep
        active bounds (w_i = 0) and active norm constraints first-order fixed.
        Zero exactly at KKT points of the discrete problem."""
        S = self.S
        candidates = np.nonzero((wv <= 0.0) & (g > 0.0))[0]
        normals = self._normals(wv, g)
        for _ in range(4):
            basis = [S.mass_inv[:, i] for i in candidates] + normals
            if not basis:
                return g.copy()
            A = np.column_stack(basis)
            gram = A.T @ S.mass @ A
            rhs = A.T @ S.mass @ g
            c = np.linalg.lstsq(gram, rhs, rcond=None)[0]
            nb = candidates.size
            wrong = c[:nb] < 0
            if not np.any(wrong):
                return g - A @ c
            candidates = candidates[~wrong]
        return g - A @ c


def _descend(spec, S, con, w, tol, maxit, armijo=1e-4):
    """Projected-gradient descent with backtracking from step 1.

    Returns (w, energy, projected gradient norm, iterations, converged).
    """
    E = _energy(spec, S, w)
    pgn = np.inf
    for it in range(maxit):
        g = _grad(spec, S, w)
        d = con.project(w, g)
        pgn = S.mnorm(d)
        if pgn < tol:
            return w, E, pgn, it, True
        eta = 1.0
        accepted = False
        while eta > 1e-14:
            trial = con.retract(w - eta * d)
            if trial is not None:
                Et = _energy(spec, S, trial)
                if Et <= E - armijo * S.inner(g, w - trial):
                    accepted = True
                    break
            eta *= 0.5
        if not accepted or np.array_equal(trial, w):
            return w, E, pgn, it, False
        w, E = trial, Et
    g = _grad(spec, S, w)
    pgn = S.mnorm(con.project(w, g))
    return w, E, pgn, maxit, pgn < tol


def _newton_polish(spec, S, con, w, tol=1e-12, maxit=50):
    """Active-set Newton on the critical-point equations.

    Solves (M w - b(w))_free = 0 with w fixed at 0 on the active bound set.
    Returns the polished point, or None when the iteration fails or leaves
    the feasible set.
    """
    M = S.mass
    w = np.maximum(w, 0.0)
    deriv = M @ w - _load(spec, S, w)
    bound = (w <= 0.0) & (deriv > 0.0)
    for _ in range(4):
        free = ~bound
        x = w.copy()
        x[bound] = 0.0
        ok = False
        for _ in range(maxit):
            r = (M @ x - _load(spec, S, x))[free]
            rn = float(np.max(np.abs(r)))
            if rn < tol:
                ok = True
                break
            uq = S.R_quad @ x
            fu = eval_dfdu(spec, S.xq, uq)
            fu = np.where(np.isfinite(fu), fu, 0.0)
            H = S.R_quad.T @ ((S.wq * fu)[:, None] * S.R_quad)
            Jm = (M - H)[np.ix_(free, free)]
            try:
                step = np.linalg.solve(Jm, -r)
            except np.linalg.LinAlgError:
                return None
            lam = 1.0
            while lam > 1e-10:
                trial = x.copy()
                trial[free] += lam * step
                rt = float(np.max(np.abs((M @ trial - _load(spec, S, trial))[free])))
                if rt < (1 - 1e-4 * lam) * rn or rt < tol:
                    break
                lam *= 0.5
            else:
                return None
            x = trial
        if not ok:
            return None
        neg = free & (x < 0.0)
        grad_b = (M @ x - _load(spec, S, x))
        release = bound & (grad_b < 0.0)
        if not np.any(neg) and not np.any(release):
            return x if con.feasible(x) else None
        bound = (bound | neg) & ~release
        w = np.maximum(x, 0.0)
    return None


def _as_arrays(starts):
    return [np.array(s.w, dtype=float) for s in starts]


def minimize_in_shell(
    spec: NonlinearitySpec,
    shell: ShellSpec,
    starts: Sequence[CurvatureRepr],
    tol: float = 1e-6,
    maxit: int = 10_000,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    polish: bool = True,
) -> CriticalPointReport:
    """Lowest-energy critical point found from several starts in the shell.

    Each start is retracted into the shell (clip w >= 0, rescale), then
    projected-gradient descent runs to ``tol``. A final active-set Newton
    step sharpens converged points that sit off the shell boundary.
    """
    if not starts:
        raise ValueError("need at least one start")
    S = _space(starts[0], cfg)
    con = _Constraint(S, shell=shell)
    grid = starts[0].grid
    best = None
    for w0 in _as_arrays(starts):
        w = con.retract(w0)
        if w is None:
            continue
        w, E, pgn, its, conv = _descend(spec, S, con, w, tol, maxit)
        flags = con.flags(w)
        polished = False
        if polish and not flags["inner"] and not flags["outer"]:
            x = _newton_polish(spec, S, con, w)
            if x is not None:
                Ex = _energy(spec, S, x)
                if Ex <= E + 1e-9 * max(1.0, abs(E)):
                    w, E, polished = x, Ex, True
                    pgn = S.mnorm(con.project(w, _grad(spec, S, w)))
                    conv = pgn < tol
        cand = (E, w, pgn, its, conv, polished)
        if best is None or E < best[0]:
            best = cand
    if best is None:
        raise InfeasibleShellError("no start could be retracted into the shell")
    E, w, pgn, its, conv, polished = best
    flags = con.flags(w)
    notes = [] if conv else ["descent stalled above tolerance"]
    if flags.get("infeasible"):
        notes.append("two-norm shell constraints could not both be met")
    return CriticalPointReport(
        point=CurvatureRepr(grid, w),
        energy=E,
        projected_gradient_norm=pgn,
        kind="minimizer",
        estimate_m_or_c=E,
        boundary_active=flags,
        converged=conv,
        iterations=its,
        norms=_norms(S, w),
        polished=polished,
        notes=notes,
    )


def sphere_inf(
    spec: NonlinearitySpec,
    r: float,
    starts: int = 8,
    tol: float = 1e-7,
    grid: Grid = Grid(256),
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    seed: int = 0,
    maxit: int = 10_000,
) -> float:
    """Lowest energy found on ``{w >= 0, |u| = r}`` by multi-start descent.

    Heuristic: this is the smallest local minimum reached, which bounds the
    true infimum over the sphere from above but does not certify it.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    S = curvature_space(grid.panels, cfg.points_per_panel)
    con = _Constraint(S, sphere=r)
    t = grid.nodes
    from .eigen import phi1, solve_beta

    beta = solve_beta()
    seeds = [phi1(beta, t, 2), np.ones_like(t), 1.0 - t, (1.0 - t) ** 2, t]
    rng = np.random.default_rng(seed)
    while len(seeds) < starts:
        k = rng.integers(2, 9)
        knots = np.linspace(0.0, 1.0, k)
        seeds.append(np.interp(t, knots, rng.random(k)) + 1e-3)
    best = np.inf
    for w0 in seeds[: max(starts, 1)]:
        w = con.retract(np.asarray(w0, dtype=float))
        if w is None:
            continue
        w, E, *_ = _descend(spec, S, con, w, tol, maxit)
        best = min(best, E)
    return float(best)


def _arclength_resample(S, images):
    d = [S.mnorm(b - a) for a, b in zip(images, images[1:])]
    s = np.concatenate([[0.0], np.cumsum(d)])
    if s[-1] == 0.0:
        return images
    target = np.linspace(0.0, s[-1], len(images))
    arr = np.array(images)
    out = [images[0]]
    for x in target[1:-1]:
        k = min(np.searchsorted(s, x, side="right") - 1, len(images) - 2)
        span = s[k + 1] - s[k]
        lam = 0.0 if span == 0 else (x - s[k]) / span
        out.append((1 - lam) * arr[k] + lam * arr[k + 1])
    out.append(images[-1])
    return out


def mountain_pass(
    spec: NonlinearitySpec,
    shell: ShellSpec,
    w0: CurvatureRepr,
    w1: CurvatureRepr,
    path_points: int = 24,
    tol: float = 1e-6,
    max_sweeps: int = 2000,
    patience: int = 50,
    step: float = 0.2,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    polish: bool = True,
    progress_rtol: float = 1e-6,
) -> CriticalPointReport:
    """Discrete mountain-pass search between two points of the shell.

    A polyline of ``path_points`` states joins w0 to w1. Each sweep moves the
    interior states, highest energy first, by a backtracking descent step,
    retracts them into the shell, and redistributes them at equal L2 spacing.
    A sweep counts as progress when the path maximum drops by more than
    ``progress_rtol`` relative; after ``patience`` sweeps without progress
    the top state is refined by active-set Newton, which converges to the
    nearby critical point whatever its Morse index. Whether w0 and w1
    lie in one connected component of the shell is not tested.
    """
    if path_points < 8:
        raise ValueError("path_points must be at least 8")
    S = _space(w0, cfg)
    con = _Constraint(S, shell=shell)
    grid = w0.grid
    a = con.retract(np.array(w0.w, dtype=float))
    b = con.retract(np.array(w1.w, dtype=float))
    if a is None or b is None:
        raise InfeasibleShellError("path endpoints cannot be retracted into the shell")
    notes = ["connectedness of the endpoints within the shell is not checked"]
    E = lambda x: _energy(spec, S, x)

    def finish(w, Ew, path, energies, kind_note, conv, its, polished=False):
        pgn = S.mnorm(con.project(w, _grad(spec, S, w)))
        return CriticalPointReport(
            point=CurvatureRepr(grid, w),
            energy=Ew,
            projected_gradient_norm=pgn,
            kind="mountain_pass",
            estimate_m_or_c=Ew,
            boundary_active=con.flags(w),
            converged=conv and pgn < tol,
            iterations=its,
            norms=_norms(S, w),
            path=[CurvatureRepr(grid, p) for p in path],
            path_energies=[float(e) for e in energies],
            polished=polished,
            notes=notes + ([kind_note] if kind_note else []),
        )

    if np.array_equal(a, b):
        Ea = E(a)
        return finish(a, Ea, [a], [Ea], "endpoints coincide; zero-length path", True, 0)

    path = [a] + [con.retract((1 - s) * a + s * b) for s in np.linspace(0, 1, path_points)[1:-1]] + [b]
    path = [p if p is not None else a for p in path]
    energies = np.array([E(p) for p in path])
    best_max = energies.max()
    stale = 0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        order = 1 + np.argsort(-energies[1:-1], kind="stable")
        for i in order:
            w = path[i]
            g = _grad(spec, S, w)
            d = con.project(w, g)
            eta = step
            while eta > 1e-12:
                trial = con.retract(w - eta * d)
                if trial is not None:
                    Et = E(trial)
                    if Et <= energies[i] - 1e-4 * S.inner(g, w - trial):
                        path[i], energies[i] = trial, Et
                        break
                eta *= 0.5
        path = _arclength_resample(S, path)
        path = [path[0]] + [con.retract(p) if con.retract(p) is not None else p for p in path[1:-1]] + [path[-1]]
        energies = np.array([E(p) for p in path])
        top = energies.max()
        if top < best_max - progress_rtol * max(1.0, abs(best_max)):
            best_max, stale = top, 0
        else:
            stale += 1
        if stale >= patience:
            break

    k = int(np.argmax(energies))
    if k in (0, len(path) - 1):
        return finish(
            path[k], energies[k], path, energies, "path maximum sits at an endpoint; no interior pass point",
            True, sweeps,
        )
    w = path[k]
    conv = stale >= patience
    if polish:
        x = _newton_polish(spec, S, con, w)
        if x is not None:
            Ex = E(x)
            gap = abs(Ex - energies[k])
            if gap <= 0.05 * max(1.0, abs(energies[k])):
                return finish(x, Ex, path, energies, None, True, sweeps, polished=True)
            notes.append(f"Newton refinement moved the energy by {gap:.3g}; kept the path maximum")
        else:
            notes.append("Newton refinement of the path maximum failed")
    return finish(w, energies[k], path, energies, None, conv, sweeps)
