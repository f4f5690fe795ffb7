import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cantilever.eigen import phi1, solve_beta
from cantilever.kernel import Grid
from cantilever.nonlinearity import parse_spec
from cantilever.variational import (
    CurvatureRepr,
    InfeasibleShellError,
    ShellSpec,
    cone_membership,
    curvature_space,
    energy,
    energy_gradient,
    from_function,
    inner,
    minimize_in_shell,
    mountain_pass,
    norms,
    sphere_inf,
    u_from_curvature,
)

G64 = Grid(64)


def test_linear_curvature_is_reconstructed_exactly(grid):
    # w = 1 - t lies in the piecewise-linear space: u = t^2/2 - t^3/6
    w = from_function(grid, lambda t: 1 - t)
    u = u_from_curvature(w)
    t = grid.nodes
    assert np.max(np.abs(u.values - (t**2 / 2 - t**3 / 6))) < 1e-15
    n = norms(w)
    assert n.energetic == pytest.approx(math.sqrt(1 / 3), abs=1e-15)
    # int (t^2/2 - t^3/6)^2 = 1/20 - 1/36 + 1/252
    assert n.L2_of_u == pytest.approx(math.sqrt(1 / 20 - 1 / 36 + 1 / 252), abs=1e-15)
    assert n.sup_of_u == pytest.approx(1 / 3, abs=1e-15)


def test_quartic_curvature_second_order(grid):
    # (1-t)^2/2 is not piecewise linear; interpolation costs O(h^2)
    w = from_function(grid, lambda t: (1 - t) ** 2 / 2)
    u = u_from_curvature(w)
    assert abs(u.values[-1] - 1 / 8) < 2e-6
    assert abs(norms(w).energetic - math.sqrt(1 / 20)) < 2e-6


def test_mass_matrix_is_exact_gram():
    S = curvature_space(16, 8)
    assert S.mass.sum() == pytest.approx(1.0, abs=1e-15)
    ones = np.ones(S.n)
    assert S.mnorm(ones) == pytest.approx(1.0, abs=1e-15)
    x = S.grid.nodes
    assert S.inner(x, x) == pytest.approx(1 / 3, abs=1e-15)


def test_energy_of_zero_nonlinearity(zero, grid):
    w = from_function(grid, lambda t: 1 - t)
    assert energy(zero, w) == pytest.approx(1 / 6, abs=1e-15)
    g = energy_gradient(zero, w)
    assert np.max(np.abs(g.w - w.w)) < 1e-13


def test_energy_constant_rhs(one, grid):
    w = from_function(grid, lambda t: 1 - t)
    # E = 1/6 - int u = 1/6 - (1/6 - 1/24)
    assert energy(one, w) == pytest.approx(1 / 6 - 1 / 8, abs=1e-14)


def test_gradient_directional_derivative(sat):
    rng = np.random.default_rng(0)
    w = CurvatureRepr(G64, rng.random(G64.size))
    d = CurvatureRepr(G64, rng.standard_normal(G64.size))
    h = 1e-6
    fd = (energy(sat, w + d * h) - energy(sat, w - d * h)) / (2 * h)
    an = inner(energy_gradient(sat, w), d)
    assert fd == pytest.approx(an, rel=1e-6)


def test_curvature_repr_validation():
    with pytest.raises(ValueError):
        CurvatureRepr(G64, np.zeros(3))
    w = from_function(G64, lambda t: t)
    assert np.allclose((w * 2 - w).w, w.w)


def test_cone_membership():
    beta = solve_beta()
    w = from_function(Grid(256), lambda t: phi1(beta, t, 2))
    for variant in ("M0_energetic", "M_sup", "M_L2"):
        rep = cone_membership(w, variant)
        assert rep.member, variant
    bad = CurvatureRepr(G64, np.where(G64.nodes < 0.5, 1.0, -0.2))
    rep = cone_membership(bad, "M_sup")
    assert not rep.convex
    assert rep.negative_curvature_node == 32
    with pytest.raises(ValueError):
        cone_membership(bad, "M9")


def test_shell_validation():
    with pytest.raises(ValueError):
        ShellSpec("energetic", 2.0, 1.0)
    with pytest.raises(ValueError):
        ShellSpec("energetic", 0.0, 1.0)
    with pytest.raises(ValueError):
        ShellSpec("two_norm", 1.0, 2.0)
    with pytest.raises(ValueError):
        ShellSpec("cube", 1.0, 2.0)
    assert ShellSpec("two_norm", 0.1, 1.0).to_dict()["variant"] == "two_norm"


def test_zero_nonlinearity_minimum_on_inner_sphere(zero):
    shell = ShellSpec("energetic", 1.0, 2.0)
    rep = minimize_in_shell(zero, shell, [from_function(G64, lambda t: 1 + t)])
    assert rep.energy == pytest.approx(0.5, abs=1e-8)
    assert rep.boundary_active["inner"]
    assert rep.converged


def test_saturated_minimizer(sat, grid):
    shell = ShellSpec("energetic", 1.0, 37.0)
    rep = minimize_in_shell(sat, shell, [from_function(grid, lambda t: (1 - t) ** 2)])
    assert rep.converged
    assert rep.energy == pytest.approx(-474.0627597, abs=1e-4)
    assert rep.projected_gradient_norm < 1e-8
    assert not rep.boundary_active["inner"] and not rep.boundary_active["outer"]
    assert cone_membership(rep.point, "M0_energetic").member


def test_infeasible_starts(zero):
    shell = ShellSpec("energetic", 1.0, 2.0)
    with pytest.raises(InfeasibleShellError):
        minimize_in_shell(zero, shell, [CurvatureRepr(G64, -np.ones(G64.size))])
    with pytest.raises(ValueError):
        minimize_in_shell(zero, shell, [])


def test_sphere_inf_zero(zero):
    for r in (0.5, 2.0):
        assert sphere_inf(zero, r, starts=3, grid=G64) == pytest.approx(0.5 * r * r, abs=1e-8)
    with pytest.raises(ValueError):
        sphere_inf(zero, 0.0)


def test_mountain_pass_degenerate_paths(sat):
    shell = ShellSpec("energetic", 1.0, 37.0)
    w = from_function(G64, lambda t: 1 - t)
    rep = mountain_pass(sat, shell, w, w)
    assert "endpoints coincide; zero-length path" in rep.notes
    assert "connectedness of the endpoints within the shell is not checked" in rep.notes
    with pytest.raises(ValueError):
        mountain_pass(sat, shell, w, w * 2, path_points=4)


def test_mountain_pass_between_two_minima_of_a_double_well():
    # F has wells at |u| small and large; along the ray E(c w) has an interior max
    spec = parse_spec("[0,1): 0.5*u^0.5 ; [1,5): 0.5*u^2 ; [5,inf): 0.5*((u-5)^0.5 + 5^2)")
    shell = ShellSpec("energetic", 0.5, 200.0)
    base = from_function(G64, lambda t: (1 - t) ** 2)
    low = minimize_in_shell(spec, ShellSpec("energetic", 0.5, 3.0), [base])
    high = minimize_in_shell(spec, ShellSpec("energetic", 10.0, 200.0), [base])
    rep = mountain_pass(spec, shell, low.point, high.point)
    assert rep.energy >= max(low.energy, high.energy)
    assert rep.path_energies[0] == pytest.approx(energy(spec, low.point), abs=1e-6)
    assert len(rep.path) == 24


@given(arrays(np.float64, 65, elements=st.floats(0, 10, allow_nan=False)), st.floats(0.01, 100))
def test_norms_are_positively_homogeneous(w, c):
    a = CurvatureRepr(G64, w)
    n1 = np.array(list(norms(a)))
    n2 = np.array(list(norms(a * c)))
    assert np.allclose(n2, c * n1, rtol=1e-12, atol=1e-300)


@given(arrays(np.float64, 65, elements=st.floats(0, 10, allow_nan=False)))
def test_nonnegative_curvature_gives_increasing_nonnegative_u(w):
    u = u_from_curvature(CurvatureRepr(G64, w)).values
    assert u[0] == 0.0
    assert np.all(np.diff(u) >= -1e-15)
    assert cone_membership(CurvatureRepr(G64, w), "M_sup").convex


@given(arrays(np.float64, 9, elements=st.floats(0, 10, allow_nan=False)))
def test_nonnegative_load_lands_in_cones(c):
    # convexity alone does not give the Harnack bound; u = J v with v >= 0 does
    from cantilever.kernel import GridFunction, curvature_from_rhs

    g = Grid(256)
    v = GridFunction(g, np.interp(g.nodes, np.linspace(0, 1, 9), c) + 1e-3)
    w = CurvatureRepr(g, curvature_from_rhs(v, g.nodes))
    for variant in ("M_sup", "M_L2", "M0_energetic"):
        assert cone_membership(w, variant, tol=1e-9 * max(1.0, c.max())).member, variant
