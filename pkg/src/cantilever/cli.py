"""Command-line front end.

Every command reads an optional TOML config (``--config``) layered over an
optional built-in example (``--example``), applies flag overrides, and writes
JSON (and, where it makes sense, CSV) either to stdout or into ``--out``.

Exit codes: 0 success, 1 mathematical failure (a failed certificate, a
solver that did not converge), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import certify as cert
from . import solver as sol
from . import variational as var
from .dsl import DSLSyntaxError
from .eigen import eigen_report
from .kernel import Grid, GridFunction, QuadratureConfig, energetic_norm_of_J
from .nonlinearity import NonlinearityError, parse_spec, power_quadratic, saturated_linear

EXIT_OK, EXIT_MATH, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# -- configuration ---------------------------------------------------------------------

DEFAULTS: Dict[str, Any] = {
    "nonlinearity": None,
    "seed": 0,
    "grid": {"panels": 256},
    "quadrature": {"panels": 256, "points_per_panel": 8, "refinement_tolerance": 1e-10, "max_doublings": 6},
    "shell": {"variant": "energetic", "R0": None, "R1": None},
    "solver": {"method": "monotone-down", "start": "supersolution", "tol": 1e-10, "maxit": 1000},
    "variational": {"tol": 1e-6, "maxit": 10000, "starts": 8, "path_points": 24, "patience": 50},
    "certify": {
        "a": None,
        "alphaK": None,
        "betaK": None,
        "r": None,
        "u1_sup": None,
        "tau_min": 1e-8,
        "tau_max": 1e8,
        "tau_points": 33,
        "pairs": None,
    },
    "eigen": {"digits": 17},
    "example": {"p": 0.5, "b_min": 3.0, "b_max": 200.0, "b_step": 1.0, "r": 2.0},
    "output": {"dir": None, "json": True, "csv": False},
}

SATURATED_LINEAR = {
    "nonlinearity": saturated_linear().text(),
    "shell": {"variant": "energetic", "R0": 1.0, "R1": 37.0},
    "solver": {"method": "monotone-down", "start": "supersolution"},
}

POWER_QUADRATIC = {
    "nonlinearity": power_quadratic(0.5, 52.0).text(),
    "example": {"p": 0.5},
    "certify": {"a": 0.75, "tau_min": 1e-12, "tau_max": 1e6},
}

EXAMPLES = {
    "saturated-linear": SATURATED_LINEAR,
    "power-quadratic": POWER_QUADRATIC,
}
ALIASES = {
    "paper-3-3": "saturated-linear",
    "example-3-3": "saturated-linear",
    "example-3-9": "power-quadratic",
}


def _merge(base: dict, extra: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        key = f"{where}{k}"
        if k not in out:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(out[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"config key {key!r} must be a table")
            out[k] = _merge(out[k], v, key + ".")
        else:
            out[k] = v
    return out


def example_config(name: str) -> dict:
    key = ALIASES.get(name, name)
    if key not in EXAMPLES:
        known = ", ".join(sorted(set(EXAMPLES) | set(ALIASES)))
        raise ConfigError(f"unknown example {name!r}; known: {known}")
    return EXAMPLES[key]


@dataclass
class RunConfig:
    raw: Dict[str, Any]
    grid: Grid
    quadrature: QuadratureConfig
    out_dir: Optional[Path]
    want_json: bool
    want_csv: bool

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    def spec(self):
        text = self.raw["nonlinearity"]
        if text is None:
            raise ConfigError("no nonlinearity given (config key 'nonlinearity' or --example)")
        return parse_spec(text)

    def shell(self) -> var.ShellSpec:
        s = self.raw["shell"]
        if s["R0"] is None or s["R1"] is None:
            raise ConfigError("shell.R0 and shell.R1 are required for this command")
        try:
            return var.ShellSpec(s["variant"], float(s["R0"]), float(s["R1"]))
        except ValueError as exc:
            raise ConfigError(f"invalid shell: {exc}") from exc


def _power_of_two(n):
    return isinstance(n, int) and 32 <= n <= 4096 and n & (n - 1) == 0


def build_config(args) -> RunConfig:
    raw = copy.deepcopy(DEFAULTS)
    if args.example:
        raw = _merge(raw, example_config(args.example))
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        raw = _merge(raw, data)
    if args.panels is not None:
        raw["grid"]["panels"] = args.panels
        raw["quadrature"]["panels"] = args.panels
    if args.tol is not None:
        raw["solver"]["tol"] = args.tol
        raw["variational"]["tol"] = args.tol
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output"]["dir"] = args.out
    if args.json:
        raw["output"]["json"] = True
    if args.csv:
        raw["output"]["csv"] = True
        raw["output"]["json"] = bool(args.json) or raw["output"]["dir"] is not None

    for key in ("grid", "quadrature"):
        if not _power_of_two(raw[key]["panels"]):
            raise ConfigError(f"{key}.panels must be a power of two between 32 and 4096")
    for key, val in (
        ("solver.tol", raw["solver"]["tol"]),
        ("variational.tol", raw["variational"]["tol"]),
        ("quadrature.refinement_tolerance", raw["quadrature"]["refinement_tolerance"]),
    ):
        if not (isinstance(val, (int, float)) and val > 0):
            raise ConfigError(f"{key} must be positive")
    try:
        q = raw["quadrature"]
        quad = QuadratureConfig(q["panels"], q["points_per_panel"], q["refinement_tolerance"], q["max_doublings"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid quadrature config: {exc}") from exc
    out = raw["output"]["dir"]
    return RunConfig(
        raw=raw,
        grid=Grid(raw["grid"]["panels"]),
        quadrature=quad,
        out_dir=Path(out) if out is not None else None,
        want_json=bool(raw["output"]["json"]),
        want_csv=bool(raw["output"]["csv"]),
    )


# -- output -----------------------------------------------------------------------------


def _clean(x):
    """JSON-safe copy: numpy scalars become Python numbers, non-finite floats strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return x


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dumps_csv(header: List[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["%.17g" % v if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit(cfg: RunConfig, name: str, payload: dict, table: Optional[tuple] = None, stdout=None):
    stdout = stdout or sys.stdout
    text = dumps_json(payload)
    csv_text = dumps_csv(*table) if table is not None else None
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / f"{name}.json").write_text(text)
        if csv_text is not None:
            (cfg.out_dir / f"{name}.csv").write_text(csv_text)
        return
    if cfg.want_json or csv_text is None:
        stdout.write(text)
    if cfg.want_csv and csv_text is not None:
        stdout.write(csv_text)


# -- commands ---------------------------------------------------------------------------


def _normalized_phi_curvature(grid: Grid) -> var.CurvatureRepr:
    ep = eigen_report(grid)
    return var.CurvatureRepr(grid, ep.derivatives[2] / ep.energetic_norm)


def _h1_and_energetic(spec, cfg: RunConfig, certs: list):
    h1 = cert.check_h1(spec)
    certs.append(h1)
    sh = cfg.raw["shell"]
    if sh["variant"] == "energetic" and sh["R0"] is not None and sh["R1"] is not None and h1.passed:
        certs.extend(cert.check_h2(spec, float(sh["R0"]), float(sh["R1"]), cfg.quadrature, h1))
    return h1


def run_certificates(spec, cfg: RunConfig) -> dict:
    certs: list = []
    errors: list = []
    c = cfg.raw["certify"]
    sh = cfg.raw["shell"]
    h1 = _h1_and_energetic(spec, cfg, certs)
    if not h1.passed:
        errors.append("f is not nondecreasing on the sampled lattice; energetic-shell checks skipped")
    have_shell = sh["R0"] is not None and sh["R1"] is not None
    if c["a"] is not None and spec.autonomous and have_shell and h1.passed:
        certs.extend(cert.check_f2(spec, float(c["a"]), float(sh["R0"]), float(sh["R1"]), h1))
    if c["alphaK"] is not None and c["betaK"] is not None:
        certs.extend(cert.check_r0(spec, float(c["alphaK"]), float(c["betaK"]), cfg.quadrature))
    if sh["variant"] == "two_norm" and have_shell:
        certs.extend(cert.check_H1(spec, float(sh["R0"]), float(sh["R1"]), cfg.quadrature))
    if c["r"] is not None and c["u1_sup"] is not None and have_shell:
        w0 = _normalized_phi_curvature(cfg.grid)
        s0 = var.norms(w0).sup_of_u
        w1 = w0 * (float(c["u1_sup"]) / s0)
        certs.append(
            cert.check_h3(spec, cfg.shell(), w0, w1, float(c["r"]), cfg.raw["variational"]["starts"], cfg.seed)
        )
    if c["a"] is not None and spec.autonomous:
        tau = np.logspace(math.log10(c["tau_min"]), math.log10(c["tau_max"]), int(c["tau_points"]))
        certs.extend(cert.asymptotic_scan(spec, float(c["a"]), tau).certificates)
    summaries = cert.theorem_summaries(certs)
    ok = all(x.passed for x in certs if not x.heuristic) and not errors
    return {
        "certificates": [x.to_dict() for x in certs],
        "theorems": [s.to_dict() for s in summaries],
        "errors": errors,
        "all_non_heuristic_pass": ok,
    }


def cmd_certify(cfg: RunConfig) -> int:
    spec = cfg.spec()
    payload = run_certificates(spec, cfg)
    table = (
        ["hypothesis", "lhs", "rhs", "margin", "verdict", "heuristic", "quadrature_error_estimate"],
        [
            (d["hypothesis"], d["lhs"], d["rhs"], d["margin"], d["verdict"], d["heuristic"], d["quadrature_error_estimate"])
            for d in payload["certificates"]
        ],
    )
    emit(cfg, "certify", payload, table)
    return EXIT_OK if payload["all_non_heuristic_pass"] else EXIT_MATH


def _start(spec, cfg: RunConfig):
    kind = cfg.raw["solver"]["start"]
    if kind == "zero":
        return GridFunction(cfg.grid, np.zeros(cfg.grid.size))
    if kind == "constant":
        return sol.constant_solution(cfg.grid, 1.0)
    if kind == "supersolution":
        return sol.default_supersolution(spec, cfg.grid)
    raise ConfigError(f"unknown solver.start {kind!r} (zero, constant, supersolution)")


def run_solve(spec, cfg: RunConfig):
    s = cfg.raw["solver"]
    method = s["method"]
    start = _start(spec, cfg)
    kw = dict(tol=float(s["tol"]), maxit=int(s["maxit"]), cfg=cfg.quadrature)
    if method == "picard":
        return sol.picard(spec, start, **kw)
    if method in ("monotone-down", "monotone-up"):
        return sol.monotone_iterate(spec, start, method.split("-")[1], **kw)
    if method == "newton":
        return sol.newton_solve(spec, start, **kw)
    raise ConfigError(f"unknown solver.method {method!r} (picard, monotone-up, monotone-down, newton)")


def cmd_solve(cfg: RunConfig) -> int:
    spec = cfg.spec()
    try:
        rep = run_solve(spec, cfg)
    except sol.SolverError as exc:
        payload = {"status": "error", "error": type(exc).__name__, "message": str(exc), "trace": list(exc.trace)}
        emit(cfg, "solve", payload)
        return EXIT_MATH
    payload = rep.to_dict()
    emit(cfg, "solve", payload, (["t", "u", "u_tt", "f"], rep.rows()))
    if rep.status == "stalled_at_zero":
        sys.stderr.write("solver stalled at the zero solution; start from a supersolution instead\n")
    return EXIT_OK if rep.converged else EXIT_MATH


def _variational(cfg):
    return cfg.raw["variational"]


def _minimize(spec, cfg: RunConfig, shell: var.ShellSpec, extra_starts=()):
    v = _variational(cfg)
    w0 = _normalized_phi_curvature(cfg.grid)
    t = cfg.grid.nodes
    mid = 0.5 * (shell.R0 + shell.R1)
    starts = list(extra_starts) + [
        w0 * shell.R0,
        w0 * mid,
        var.CurvatureRepr(cfg.grid, np.ones_like(t)),
        var.CurvatureRepr(cfg.grid, 1.0 - t),
    ]
    rng = np.random.default_rng(cfg.seed)
    while len(starts) < int(v["starts"]):
        starts.append(var.CurvatureRepr(cfg.grid, rng.random(t.size) * mid))
    return var.minimize_in_shell(
        spec, shell, starts, tol=float(v["tol"]), maxit=int(v["maxit"]), cfg=cfg.quadrature
    )


def _point_table(cfg, w: var.CurvatureRepr):
    u = var.u_from_curvature(w, cfg.quadrature).values
    return ["t", "u", "u_tt"], list(zip(cfg.grid.nodes, u, w.w))


def cmd_minimize(cfg: RunConfig) -> int:
    spec = cfg.spec()
    shell = cfg.shell()
    rep = _minimize(spec, cfg, shell)
    payload = {"shell": shell.to_dict(), "report": rep.to_dict()}
    emit(cfg, "minimize", payload, _point_table(cfg, rep.point))
    return EXIT_OK if rep.converged else EXIT_MATH


def cmd_mountain_pass(cfg: RunConfig) -> int:
    spec = cfg.spec()
    shell = cfg.shell()
    v = _variational(cfg)
    w0 = _normalized_phi_curvature(cfg.grid) * max(shell.R0, min(1.0, shell.R1))
    low = _minimize(spec, cfg, shell)
    rep = var.mountain_pass(
        spec,
        shell,
        w0,
        low.point,
        path_points=int(v["path_points"]),
        tol=float(v["tol"]),
        patience=int(v["patience"]),
        cfg=cfg.quadrature,
    )
    payload = {"shell": shell.to_dict(), "report": rep.to_dict(), "endpoint_minimizer": low.to_dict()}
    table = (["index", "energy"], list(enumerate(rep.path_energies or [])))
    emit(cfg, "mountain-pass", payload, table)
    return EXIT_OK if rep.converged else EXIT_MATH


def cmd_eigen(cfg: RunConfig) -> int:
    ep = eigen_report(cfg.grid, cfg.quadrature)
    digits = int(cfg.raw["eigen"]["digits"])
    payload = ep.to_dict()
    payload["beta_text"] = f"{ep.beta:.{digits}g}"
    d = ep.derivatives
    table = (["t", "phi", "phi_t", "phi_tt"], list(zip(cfg.grid.nodes, d[0], d[1], d[2])))
    emit(cfg, "eigen", payload, table)
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    spec = cfg.spec()
    c = cfg.raw["certify"]
    if c["a"] is None:
        raise ConfigError("certify.a is required for the scan")
    tau = np.logspace(math.log10(c["tau_min"]), math.log10(c["tau_max"]), int(c["tau_points"]))
    try:
        scan = cert.asymptotic_scan(spec, float(c["a"]), tau)
    except cert.CertificationError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {"asymptotic": scan.to_dict()}
    if c["pairs"]:
        payload["multiplicity"] = cert.multiplicity_scan(spec, [tuple(p) for p in c["pairs"]], cfg=cfg.quadrature).to_dict()
    table = (["tau", "ratio", "above_lower", "below_upper"], scan.rows())
    emit(cfg, "scan", payload, table)
    return EXIT_OK


# -- reproductions ----------------------------------------------------------------------


def reproduce_saturated_linear(cfg: RunConfig) -> dict:
    spec = cfg.spec()
    certs = run_certificates(spec, cfg)
    rep = run_solve(spec, cfg)
    return {"example": "saturated-linear", "certify": certs, "solve": rep.to_dict(), "ok": certs["all_non_heuristic_pass"] and rep.converged}


def scan_b(p: float, grid: Grid, b_values, quad: QuadratureConfig):
    """Energies of ``u1 = b u0 / ||u0||_inf`` along ``b_values``; stops at the first below 1/2."""
    w0 = _normalized_phi_curvature(grid)
    s0 = var.norms(w0, quad).sup_of_u
    rows, found = [], None
    for b in b_values:
        b = float(b)
        if not (b > 2.0 and b > 2.0 * s0):
            continue
        e1 = var.energy(power_quadratic(p, b), w0 * (b / s0), quad)
        rows.append((b, e1))
        if e1 < 0.5:
            found = b
            break
    return w0, s0, rows, found


def reproduce_power_quadratic(cfg: RunConfig) -> dict:
    ex = cfg.raw["example"]
    v = _variational(cfg)
    p = float(ex["p"])
    if p == 0.0:
        return {
            "example": "power-quadratic",
            "ok": False,
            "diagnostic": "p = 0 makes f identically zero, so E(u) = |u|^2/2 and there is no mountain-pass geometry",
        }
    b_values = np.arange(float(ex["b_min"]), float(ex["b_max"]) + 0.5 * float(ex["b_step"]), float(ex["b_step"]))
    w0, s0, rows, b = scan_b(p, cfg.grid, b_values, cfg.quadrature)
    base = {"example": "power-quadratic", "p": p, "u0_sup": s0, "scan": [{"b": x, "E_u1": e} for x, e in rows]}
    if b is None:
        return dict(base, ok=False, diagnostic="no b in the scan gives E(u1) < 1/2")
    spec = power_quadratic(p, b)
    w1 = w0 * (b / s0)
    r = float(ex["r"])
    n1 = var.norms(w1, cfg.quadrature).energetic
    big = p * b * b * energetic_norm_of_J(lambda t: np.ones_like(t))
    shell = var.ShellSpec("energetic", 0.5, 4.0 * max(n1, big))
    e0, e1 = var.energy(spec, w0, cfg.quadrature), var.energy(spec, w1, cfg.quadrature)
    sphere = var.sphere_inf(spec, r, starts=int(v["starts"]), grid=cfg.grid, cfg=cfg.quadrature, seed=cfg.seed)
    h3 = cert.check_h3(spec, shell, w0, w1, r, int(v["starts"]), cfg.seed, cfg.quadrature, sphere_value=sphere)
    low = var.minimize_in_shell(spec, shell, [w1, w0], tol=float(v["tol"]), maxit=int(v["maxit"]), cfg=cfg.quadrature)
    mp = var.mountain_pass(
        spec, shell, w0, low.point, path_points=int(v["path_points"]), tol=float(v["tol"]),
        patience=int(v["patience"]), cfg=cfg.quadrature,
    )
    tol = float(v["tol"])
    distinct = low.energy < mp.energy
    ok = (
        low.projected_gradient_norm < tol
        and mp.projected_gradient_norm < tol
        and distinct
        and e0 < 0.5
        and sphere >= 0.5 - 1e-3
    )
    return dict(
        base,
        b=b,
        nonlinearity=spec.text(),
        E_u0=e0,
        E_u1=e1,
        sphere_r=r,
        sphere_inf=sphere,
        shell=shell.to_dict(),
        h3=h3.to_dict(),
        minimizer=low.to_dict(),
        mountain_pass=mp.to_dict(),
        distinct=distinct,
        ok=ok,
    )


REPRODUCTIONS = {"saturated-linear": reproduce_saturated_linear, "power-quadratic": reproduce_power_quadratic}


def cmd_reproduce(cfg: RunConfig, which: str) -> int:
    key = ALIASES.get(which, which)
    if key not in REPRODUCTIONS:
        raise ConfigError(f"unknown reproduction {which!r}")
    payload = REPRODUCTIONS[key](cfg)
    table = None
    if key == "power-quadratic":
        table = (["b", "E_u1"], [(r["b"], r["E_u1"]) for r in payload.get("scan", [])])
    emit(cfg, f"reproduce-{key}", payload, table)
    if "diagnostic" in payload:
        sys.stderr.write(payload["diagnostic"] + "\n")
    return EXIT_OK if payload["ok"] else EXIT_MATH


# -- entry point ------------------------------------------------------------------------


COMMANDS = ("certify", "solve", "minimize", "mountain-pass", "eigen", "scan", "reproduce")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--example", metavar="NAME", help="built-in configuration to start from")
    common.add_argument("--out", metavar="DIR", help="write <command>.json/.csv here instead of stdout")
    common.add_argument("--panels", type=int, metavar="N", help="grid and quadrature panels (power of two)")
    common.add_argument("--tol", type=float, metavar="X", help="solver and descent tolerance")
    common.add_argument("--seed", type=int, metavar="N", help="seed for multi-start")
    common.add_argument("--json", action="store_true", help="emit JSON (default)")
    common.add_argument("--csv", action="store_true", help="emit CSV")

    parser = argparse.ArgumentParser(prog="cantilever", description="Cantilever beam BVP solver and certifier.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "reproduce":
            p.add_argument("which", help="example-3-3 / saturated-linear or example-3-9 / power-quadratic")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        if args.command == "reproduce" and not args.example:
            cfg = build_config(argparse.Namespace(**dict(vars(args), example=args.which)))
        handler = {
            "certify": cmd_certify,
            "solve": cmd_solve,
            "minimize": cmd_minimize,
            "mountain-pass": cmd_mountain_pass,
            "eigen": cmd_eigen,
            "scan": cmd_scan,
        }.get(args.command)
        if handler is None:
            return cmd_reproduce(cfg, args.which)
        return handler(cfg)
    except (ConfigError, DSLSyntaxError, NonlinearityError, var.InfeasibleShellError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except cert.CertificationError as exc:
        sys.stderr.write(f"certificate rejected: {exc}\n")
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
