import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantilever.kernel import Grid, GridFunction
from cantilever.nonlinearity import parse_spec, power_quadratic
from cantilever.solver import (
    DivergenceError,
    PreconditionError,
    SingularJacobianError,
    constant_solution,
    default_supersolution,
    monotone_iterate,
    newton_solve,
    picard,
    residual,
)

from conftest import quartic


def test_constant_solution_is_scaled_quartic(grid):
    u = constant_solution(grid, 2.0)
    assert np.max(np.abs(u.values - 2 * quartic(grid.nodes))) < 1e-14


def test_picard_constant_rhs(grid, one):
    rep = picard(one, GridFunction(grid, np.zeros(grid.size)))
    assert rep.converged
    assert rep.iterations <= 2
    assert rep.solution.values[-1] == pytest.approx(1 / 8, abs=1e-14)
    assert rep.norm_energetic == pytest.approx(np.sqrt(1 / 20), abs=1e-12)
    assert rep.convex_ok and rep.cone_M_ok and rep.cone_M0_ok
    assert rep.residual_sup < 1e-14


def test_picard_warns_and_diverges_for_steep_linear(grid):
    spec = parse_spec("[0,inf): 100*u")
    start = constant_solution(grid, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(RuntimeWarning):
            picard(spec, start)
    with pytest.warns(RuntimeWarning), pytest.raises(DivergenceError) as err:
        picard(spec, start, maxit=200)
    assert len(err.value.trace) >= 3
    assert err.value.last is not None


def test_monotone_down_and_newton_agree(grid, sat):
    start = default_supersolution(sat, grid)
    down = monotone_iterate(sat, start, "down")
    assert down.converged
    assert down.residual_sup < 1e-8
    assert down.cone_M0_ok and down.cone_M_ok and down.convex_ok
    newt = newton_solve(sat, start)
    assert newt.converged
    assert np.max(np.abs(down.solution.values - newt.solution.values)) < 1e-7
    # the kink of f at u = 0.03 limits nodal interpolation to about 5e-6 here
    assert down.norm_sup == pytest.approx(17.24975959, abs=2e-5)
    assert down.norm_energetic == pytest.approx(30.8572039, abs=2e-5)
    assert down.norm_L2 == pytest.approx(8.7412082, abs=2e-5)
    assert np.all(down.solution.values <= start.values + 1e-12)


def test_saturated_solution_refines_towards_limit(sat):
    errs = []
    for n in (128, 512, 2048):
        g = Grid(n)
        rep = newton_solve(sat, default_supersolution(sat, g))
        errs.append(abs(rep.norm_sup - 17.24975959))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6


def test_monotone_up_from_zero_stalls(grid, sat):
    rep = monotone_iterate(sat, GridFunction(grid, np.zeros(grid.size)), "up")
    assert rep.status == "stalled_at_zero"
    assert not rep.converged


def test_monotone_preconditions(grid, one):
    bad = parse_spec("[0,1): 1-0.5*u ; [1,inf): 0.5")
    with pytest.raises(PreconditionError):
        monotone_iterate(bad, constant_solution(grid, 1.0), "down")
    with pytest.raises(PreconditionError):
        monotone_iterate(one, GridFunction(grid, np.zeros(grid.size)), "down")
    with pytest.raises(ValueError):
        monotone_iterate(one, constant_solution(grid, 1.0), "sideways")


def test_supersolution_needs_bounded_tail(grid, pq5):
    with pytest.raises(PreconditionError):
        default_supersolution(pq5, grid)


def test_newton_condition_guard(grid, sat):
    with pytest.raises(SingularJacobianError) as err:
        newton_solve(sat, default_supersolution(sat, grid), max_condition=1.0)
    assert err.value.condition >= 1.0


def test_newton_handles_infinite_slope():
    g = Grid(128)
    spec = power_quadratic(0.5, 5.0)
    rep = newton_solve(spec, constant_solution(g, 0.5))
    assert rep.residual_sup < 1e-10
    assert rep.converged


def test_residual_of_exact_solution(grid, one):
    rs, rl2 = residual(one, constant_solution(grid, 1.0))
    assert rs < 1e-15 and rl2 < 1e-15


def test_report_serialises(grid, one):
    rep = picard(one, constant_solution(grid, 1.0))
    d = rep.to_dict()
    assert d["status"] == "converged"
    assert d["panels"] == 256
    assert rep.rows().shape == (grid.size, 4)


@given(st.floats(0.01, 100.0))
def test_picard_constant_property(c):
    g = Grid(64)
    spec = parse_spec(f"[0,inf): {c!r}")
    rep = picard(spec, GridFunction(g, np.zeros(g.size)))
    assert rep.converged
    assert np.max(np.abs(rep.solution.values - c * quartic(g.nodes))) <= 1e-13 * max(1.0, c)


@given(st.floats(0.5, 10.0))
def test_monotone_down_stays_below_start(scale):
    g = Grid(64)
    spec = parse_spec("[0,1): 8*u ; [1,inf): 8")
    start = default_supersolution(spec, g)
    start = GridFunction(g, start.values * scale) if scale >= 1 else start
    rep = monotone_iterate(spec, start, "down")
    assert rep.converged
    assert np.all(rep.solution.values <= start.values + 1e-12)
    assert np.all(rep.solution.values >= -1e-15)
