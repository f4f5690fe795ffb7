"""Numerical certificates for the existence and multiplicity hypotheses.

Every check returns :class:`Certificate` objects.  A certificate passes only
when its signed margin strictly exceeds the estimated quadrature error, so
boundary cases and noise-level agreements fail.  The error estimate is twice
the change of the left-hand side when the quadrature is refined once more.

The monotonicity hypothesis is checked on a finite lattice only; theorem
summaries built on top of it say so.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .eigen import eigen_report
from .kernel import (
    DEFAULT_QUADRATURE,
    Grid,
    QuadratureConfig,
    ToleranceNotMet,
    J_values,
    integrate,
    l2_norm_of_J,
    minorant,
)
from .nonlinearity import (
    MonotoneCheck,
    NonlinearitySpec,
    check_monotone,
    envelope,
    eval_f,
    minorant_crossings,
)
from . import variational as var

__all__ = [
    "CertificationError",
    "Certificate",
    "AsymptoticScan",
    "MultiplicityScan",
    "TheoremSummary",
    "C_INF",
    "check_h1",
    "check_h2",
    "check_f2",
    "check_r0",
    "check_H1",
    "check_H1_indicator",
    "check_h3",
    "asymptotic_scan",
    "multiplicity_scan",
    "gap_report",
    "theorem_summaries",
    "f2_lower_threshold",
]

C_INF = 2.0 / 3.0
F2_UPPER = 15.0 / 4.0
ASYMPTOTIC_UPPER = 45.0 / 8.0
HEURISTIC = frozenset({"h1", "h3_geometry", "asymptotic"})
_EPS = np.finfo(float).eps


class CertificationError(ValueError):
    """A certificate was requested with inadmissible inputs."""


@dataclass(frozen=True)
class Certificate:
    hypothesis: str
    lhs: float
    rhs: float
    margin: float
    verdict: str
    heuristic: bool
    quadrature_error_estimate: float
    inputs_echo: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def to_dict(self) -> dict:
        return asdict(self)


def _make(hypothesis, lhs, rhs, sense, estimate, inputs) -> Certificate:
    """``sense`` is the inequality the hypothesis asks for: lhs ``>=`` rhs or lhs ``<=`` rhs."""
    lhs, rhs = float(lhs), float(rhs)
    margin = lhs - rhs if sense == ">=" else rhs - lhs
    estimate = float(estimate + 4 * _EPS * max(1.0, abs(lhs), abs(rhs)))
    return Certificate(
        hypothesis=hypothesis,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        verdict="PASS" if margin > estimate else "FAIL",
        heuristic=hypothesis in HEURISTIC,
        quadrature_error_estimate=estimate,
        inputs_echo=dict(inputs, sense=sense),
    )


def _refined_value(compute: Callable[[QuadratureConfig], float], cfg: QuadratureConfig):
    """Value at the doubled resolution and twice its change from ``cfg``."""
    try:
        coarse = compute(cfg)
        fine = compute(cfg.doubled())
    except ToleranceNotMet as exc:
        return float(exc.estimate), 2.0 * float(exc.gap)
    return float(fine), 2.0 * abs(fine - coarse)


def _cfg_echo(cfg):
    return {"panels": cfg.panels, "points_per_panel": cfg.points_per_panel}


# -- monotonicity -----------------------------------------------------------------


def check_h1(spec: NonlinearitySpec, samples: int = 129, u_probe_max: Optional[float] = None) -> Certificate:
    """f nondecreasing in t and in u, sampled on a lattice.

    lhs is the most negative step between neighbouring lattice values and
    rhs is minus the rounding allowance, so a flat f still passes.
    """
    mc: MonotoneCheck = check_monotone(spec, samples=samples, u_probe_max=u_probe_max)
    inputs = {"spec": spec.text(), "samples": samples, "u_probe_max": mc.u_probe_max}
    if mc.witness is not None:
        inputs["witness"] = [list(p) for p in mc.witness]
    return _make("h1", mc.worst_step, -mc.tolerance, ">=", 0.0, inputs)


def _require_h1(spec, h1):
    cert = check_h1(spec) if h1 is None else h1
    if not cert.passed:
        raise CertificationError("f is not nondecreasing on the sampled lattice; the energetic-shell theorems need it")
    return cert


def _kinks(spec, kind, radius):
    return tuple(sorted({c for b in spec.breakpoints for c in minorant_crossings(kind, radius, b)}))


# -- energetic shell --------------------------------------------------------------


def check_h2(
    spec: NonlinearitySpec,
    R0: float,
    R1: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    h1: Optional[Certificate] = None,
):
    """Boundary integrals for the energetic shell ``R0 <= |u| <= R1``.

    h2a: ``int M0 f(t, M0 R0) dt >= R0``;  h2b: ``int M1 f(t, M1 R1) dt <= R1``.
    """
    if not 0 < R0 < R1:
        raise CertificationError(f"need 0 < R0 < R1, got R0={R0!r}, R1={R1!r}")
    _require_h1(spec, h1)
    out = []
    for name, kind, R, sense in (("h2a", "M0", R0, ">="), ("h2b", "M1", R1, "<=")):
        bp = _kinks(spec, kind, R)

        def integrand(t, kind=kind, R=R):
            m = minorant(kind, t)
            return m * eval_f(spec, t, m * R)

        lhs, est = _refined_value(lambda c: integrate(integrand, 0.0, 1.0, c, bp), cfg)
        inputs = {"spec": spec.text(), "R0": R0, "R1": R1, "minorant": kind, "kinks": list(bp), **_cfg_echo(cfg)}
        out.append(_make(name, lhs, R, sense, est, inputs))
    return tuple(out)


def f2_lower_threshold(a: float) -> float:
    """``1 / ((1 - a) M0(a)^2)``."""
    return 1.0 / ((1.0 - a) * minorant("M0", a) ** 2)


def check_f2(spec: NonlinearitySpec, a: float, R0: float, R1: float, h1: Optional[Certificate] = None):
    """Pointwise growth tests for an autonomous f.

    f2_lower: ``f(M0(a) R0) / (M0(a) R0) >= 1 / ((1 - a) M0(a)^2)``;
    f2_upper: ``f(2 R1 / 3) / R1 <= 15/4``.
    """
    if not spec.autonomous:
        raise CertificationError("the pointwise growth tests need f independent of t")
    if not 0 < a < 1:
        raise CertificationError("a must lie in (0, 1)")
    if not 0 < R0 < R1:
        raise CertificationError(f"need 0 < R0 < R1, got R0={R0!r}, R1={R1!r}")
    _require_h1(spec, h1)
    tau = minorant("M0", a) * R0
    lower = float(eval_f(spec, 0.0, tau)) / tau
    upper = float(eval_f(spec, 0.0, C_INF * R1)) / R1
    inputs = {"spec": spec.text(), "a": a, "R0": R0, "R1": R1}
    return (
        _make("f2_lower", lower, f2_lower_threshold(a), ">=", 0.0, dict(inputs, tau=tau)),
        _make("f2_upper", upper, F2_UPPER, "<=", 0.0, dict(inputs, tau=C_INF * R1)),
    )


# -- sup-norm fixed point ----------------------------------------------------------


def check_r0(spec: NonlinearitySpec, alphaK: float, betaK: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Fixed-point conditions in the sup norm.

    r0_alpha: ``alphaK <= (J f_low)(1)`` with f_low the minimum of f over
    ``[M(t) alphaK, alphaK]``; r0_beta: ``betaK >= (J f_high)(1)`` with f_high
    the maximum over ``[M(t) betaK, betaK]``. ``alphaK < betaK`` is the
    compression case, ``alphaK > betaK`` the expansion case.
    """
    if not (alphaK > 0 and betaK > 0):
        raise CertificationError("alphaK and betaK must be positive")
    if alphaK == betaK:
        raise CertificationError("alphaK and betaK must differ")
    label = "compression" if alphaK < betaK else "expansion"
    env_a = envelope(spec, alphaK, "M", alphaK)
    env_b = envelope(spec, betaK, "M", betaK)
    lhs_a, est_a = _refined_value(lambda c: float(J_values(env_a.lower, 1.0, c, env_a.kinks)), cfg)
    lhs_b, est_b = _refined_value(lambda c: float(J_values(env_b.upper, 1.0, c, env_b.kinks)), cfg)
    inputs = {"spec": spec.text(), "alphaK": alphaK, "betaK": betaK, "shell_type": label, **_cfg_echo(cfg)}
    # J(.)(1) is the left side here; the hypothesis reads J(.)(1) >= alphaK and J(.)(1) <= betaK
    return (
        _make("r0_alpha", lhs_a, alphaK, ">=", est_a, dict(inputs, envelope_exact=env_a.exact)),
        _make("r0_beta", lhs_b, betaK, "<=", est_b, dict(inputs, envelope_exact=env_b.exact)),
    )


# -- L2 / energetic shell ----------------------------------------------------------


def _phi_ratio():
    return eigen_report(Grid(256)).l2_norm_normalized


def check_H1(spec: NonlinearitySpec, R0: float, R1: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Shell conditions for ``||u||_{L2} >= R0, |u| <= R1``.

    With g_low, g_high the extremes of f over ``[M(t) R0, (2/3) R1]``:
    H1a: ``||J g_low||_{L2} >= R0``;  H1b: ``(2/3) ||g_high||_{L1} <= R1``.
    """
    ratio = _phi_ratio()
    if not 0 < R0 < ratio * R1:
        raise CertificationError(f"need 0 < R0 < ||phi|| R1 = {ratio * R1!r}")
    if C_INF * R1 < C_INF * R0:
        raise CertificationError("the envelope interval [M(t) R0, (2/3) R1] is empty")
    env = envelope(spec, R0, "M", C_INF * R1)
    lhs_a, est_a = _refined_value(lambda c: l2_norm_of_J(env.lower, c, env.kinks), cfg)
    lhs_b, est_b = _refined_value(lambda c: C_INF * integrate(env.upper, 0.0, 1.0, c, env.kinks), cfg)
    inputs = {"spec": spec.text(), "R0": R0, "R1": R1, "c_inf": C_INF, "phi_ratio": ratio, **_cfg_echo(cfg)}
    return (
        _make("H1a", lhs_a, R0, ">=", est_a, inputs),
        _make("H1b", lhs_b, R1, "<=", est_b, inputs),
    )


def check_H1_indicator(spec: NonlinearitySpec, R0: float, a: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Sufficient autonomous form of H1a: ``f(M(a) R0) ||J chi_[a,1]||_{L2} >= R0``."""
    if not spec.autonomous:
        raise CertificationError("the indicator form needs f independent of t")
    if not 0 < a < 1:
        raise CertificationError("a must lie in (0, 1)")

    def chi(s):
        return np.where(np.asarray(s) >= a, 1.0, 0.0)

    norm, est = _refined_value(lambda c: l2_norm_of_J(chi, c, (a,)), cfg)
    fa = float(eval_f(spec, 0.0, minorant("M", a) * R0))
    inputs = {"spec": spec.text(), "R0": R0, "a": a, "path": "indicator", "J_chi_norm": norm, **_cfg_echo(cfg)}
    return _make("H1a", fa * norm, R0, ">=", fa * est, inputs)


# -- mountain-pass geometry --------------------------------------------------------


def check_h3(
    spec: NonlinearitySpec,
    shell: var.ShellSpec,
    w0: var.CurvatureRepr,
    w1: var.CurvatureRepr,
    r: float,
    starts: int = 8,
    seed: int = 0,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    sphere_value: Optional[float] = None,
) -> Certificate:
    """``max(E(u0), E(u1)) < inf{E(u) : u in K, |u| = r}``.

    The infimum comes from multi-start descent on the sphere, which can only
    overestimate it; a PASS is evidence for the geometry, not a proof.
    ``sphere_value`` reuses an infimum estimate computed earlier.
    """
    n0, n1 = var.norms(w0, cfg).energetic, var.norms(w1, cfg).energetic
    if not n0 < r < n1:
        raise CertificationError(f"need |u0| < r < |u1|, got {n0!r}, {r!r}, {n1!r}")
    S = var.curvature_space(w0.grid.panels, cfg.points_per_panel)
    con = var._Constraint(S, shell=shell)
    for name, w in (("u0", w0), ("u1", w1)):
        if not con.feasible(np.asarray(w.w)):
            raise CertificationError(f"{name} is not in the shell")
    fine = QuadratureConfig(cfg.panels, 2 * cfg.points_per_panel, cfg.refinement_tolerance, cfg.max_doublings)
    lhs = max(var.energy(spec, w0, cfg), var.energy(spec, w1, cfg))
    lhs_fine = max(var.energy(spec, w0, fine), var.energy(spec, w1, fine))
    if sphere_value is None:
        sphere_value = var.sphere_inf(spec, r, starts=starts, grid=w0.grid, cfg=cfg, seed=seed)
    rhs = float(sphere_value)
    inputs = {
        "spec": spec.text(),
        "r": r,
        "shell": shell.to_dict(),
        "norm_u0": n0,
        "norm_u1": n1,
        "starts": starts,
        "seed": seed,
        "note": "sphere infimum is a multi-start upper estimate; PASS is evidence, not proof",
    }
    return _make("h3_geometry", lhs_fine, rhs, "<=", 2 * abs(lhs_fine - lhs), inputs)


# -- scans --------------------------------------------------------------------------


@dataclass
class AsymptoticScan:
    a: float
    lower_threshold: float
    upper_threshold: float
    tau: List[float]
    ratio: List[float]
    above_lower: List[bool]
    below_upper: List[bool]
    candidate_R0: List[float]
    candidate_R1: List[float]
    certificates: List[Certificate]

    def to_dict(self):
        d = asdict(self)
        d["certificates"] = [c.to_dict() for c in self.certificates]
        return d

    def rows(self):
        return list(zip(self.tau, self.ratio, self.above_lower, self.below_upper))


def asymptotic_scan(spec: NonlinearitySpec, a: float, tau_grid: Sequence[float]) -> AsymptoticScan:
    """Tabulate ``f(tau) / tau`` against the two growth thresholds.

    ``tau`` above the lower threshold suggests ``R0 = tau / M0(a)``; ``tau``
    with ratio below 45/8 suggests ``R1 = 3 tau / 2``. Both certificates are
    heuristic since a finite table says nothing about the limits.
    """
    if not spec.autonomous:
        raise CertificationError("the scan needs f independent of t")
    if not 0 < a < 1:
        raise CertificationError("a must lie in (0, 1)")
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size == 0 or np.any(tau <= 0) or np.any(np.diff(tau) <= 0):
        raise CertificationError("tau_grid must be positive and strictly increasing")
    ratio = eval_f(spec, 0.0 * tau, tau) / tau
    lo, up = f2_lower_threshold(a), ASYMPTOTIC_UPPER
    above = ratio >= lo
    below = ratio <= up
    m0 = minorant("M0", a)
    inputs = {"spec": spec.text(), "a": a, "tau_min": float(tau[0]), "tau_max": float(tau[-1]), "points": int(tau.size)}
    certs = [
        _make("asymptotic", float(np.max(ratio)), lo, ">=", 0.0, dict(inputs, test="lower")),
        _make("asymptotic", float(np.min(ratio)), up, "<=", 0.0, dict(inputs, test="upper")),
    ]
    return AsymptoticScan(
        a=a,
        lower_threshold=lo,
        upper_threshold=up,
        tau=tau.tolist(),
        ratio=[float(x) for x in ratio],
        above_lower=[bool(x) for x in above],
        below_upper=[bool(x) for x in below],
        candidate_R0=[float(x / m0) for x in tau[above]],
        candidate_R1=[float(1.5 * x) for x in tau[below]],
        certificates=certs,
    )


@dataclass
class MultiplicityScan:
    pairs: List[tuple]
    passed: List[bool]
    disjoint_next: List[bool]
    chain: List[tuple]
    guaranteed: int
    predicted: int
    certificates: List[List[Certificate]]

    def to_dict(self):
        return {
            "pairs": [list(p) for p in self.pairs],
            "passed": self.passed,
            "disjoint_next": self.disjoint_next,
            "chain": [list(p) for p in self.chain],
            "guaranteed": self.guaranteed,
            "predicted": self.predicted,
            "message": f"{self.predicted} solutions predicted",
            "certificates": [[c.to_dict() for c in cs] for cs in self.certificates],
        }


def multiplicity_scan(
    spec: NonlinearitySpec,
    pairs: Sequence[tuple],
    a: Optional[float] = None,
    h3: Optional[Sequence[bool]] = None,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> MultiplicityScan:
    """Shell conditions on several (R0, R1) pairs and the count they imply.

    Each passing shell carries one solution, two when the mountain-pass
    geometry also holds in it (``h3[i]``). Only pairwise disjoint shells
    (``R1 < next R0``) add up.
    """
    pairs = [tuple(map(float, p)) for p in pairs]
    if any(not 0 < r0 < r1 for r0, r1 in pairs):
        raise CertificationError("each pair needs 0 < R0 < R1")
    if any(p[0] > q[0] for p, q in zip(pairs, pairs[1:])):
        raise CertificationError("pairs must be ordered by R0")
    if h3 is not None and len(h3) != len(pairs):
        raise CertificationError("h3 needs one entry per pair")
    h1 = _require_h1(spec, None)
    certs, passed = [], []
    for r0, r1 in pairs:
        cs = check_f2(spec, a, r0, r1, h1) if a is not None else check_h2(spec, r0, r1, cfg, h1)
        certs.append(list(cs))
        passed.append(all(c.passed for c in cs))
    disjoint = [p[1] < q[0] for p, q in zip(pairs, pairs[1:])]
    chain, counts = [], []
    for i, (p, ok) in enumerate(zip(pairs, passed)):
        if ok and (not chain or chain[-1][1] < p[0]):
            chain.append(p)
            counts.append(2 if h3 is not None and h3[i] else 1)
    return MultiplicityScan(pairs, passed, disjoint, chain, len(chain), sum(counts), certs)


def gap_report(
    spec: NonlinearitySpec,
    shell: var.ShellSpec,
    pass_report: var.CriticalPointReport,
    starts: int = 4,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> dict:
    """Numbers behind the gap condition of the two-norm theorem, for inspection.

    The condition involves a margin above the unknown pass level c, so no
    verdict is given: the c estimate is listed next to the energies at the
    path ends and a heuristic infimum over the outer sphere ``|u| = R1``.
    """
    grid = pass_report.point.grid
    ends = pass_report.path_energies or [pass_report.energy]
    outer = var.sphere_inf(spec, shell.R1, starts=starts, grid=grid, cfg=cfg)
    return {
        "c_estimate": pass_report.energy,
        "path_start_energy": ends[0],
        "path_end_energy": ends[-1],
        "outer_sphere_inf": outer,
        "outer_minus_c": outer - pass_report.energy,
        "verdict": None,
        "note": "the gap parameter is not constructive; inspect these values instead",
    }


# -- theorem summaries --------------------------------------------------------------


@dataclass(frozen=True)
class TheoremSummary:
    theorem: str
    hypotheses: tuple
    verdict: str
    conditional_on_h1: bool
    second_solution: Optional[bool] = None
    note: str = ""

    def to_dict(self):
        d = asdict(self)
        d["hypotheses"] = list(self.hypotheses)
        return d


_THEOREMS = (
    ("energetic_shell", ("h1", "h2a", "h2b"), True),
    ("energetic_shell_autonomous", ("h1", "f2_lower", "f2_upper"), True),
    ("sup_norm_fixed_point", ("r0_alpha", "r0_beta"), False),
    ("two_norm_shell", ("h1", "H1a", "H1b"), True),
)


def theorem_summaries(certs: Sequence[Certificate]) -> List[TheoremSummary]:
    """One verdict per theorem from whatever certificates were produced.

    NOT_CHECKED when a needed hypothesis is missing. The two energetic-shell
    theorems report a second solution when the h3 certificate passed; the
    two-norm theorem's gap condition is never decided here.
    """
    by_name: Dict[str, List[Certificate]] = {}
    for c in certs:
        by_name.setdefault(c.hypothesis, []).append(c)
    h3 = by_name.get("h3_geometry")
    out = []
    for name, hyps, uses_h1 in _THEOREMS:
        if any(h not in by_name for h in hyps if h != "h1") or (uses_h1 and "h1" not in by_name):
            out.append(TheoremSummary(name, hyps, "NOT_CHECKED", uses_h1))
            continue
        ok = all(c.passed for h in hyps for c in by_name[h])
        note = "h1 is checked on a sampled lattice only" if uses_h1 else ""
        second = None
        if name.startswith("energetic") and h3 is not None:
            second = bool(ok and all(c.passed for c in h3))
        if name == "two_norm_shell":
            note = (note + "; " if note else "") + "gap condition reported without a verdict"
        out.append(TheoremSummary(name, hyps, "PASS" if ok else "FAIL", uses_h1, second, note))
    return out
