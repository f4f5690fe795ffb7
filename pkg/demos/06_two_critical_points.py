"""A minimizer and a mountain pass for the power-quadratic nonlinearity.

f = p u^p on [0,1), p u^2 on [1,b), p((u-b)^p + b^2) beyond, with p = 1/2.
u0 is the normalised eigenfunction and u1 a large multiple of it. For b
large enough E(u1) < 1/2 while E stays above 1/2 on the sphere |u| = 2, so
the shell holds a low-energy minimizer and a mountain-pass point above it.
The curvature w = u'' is the unknown; descent keeps w >= 0.
"""

import numpy as np

from cantilever.certify import check_h3
from cantilever.eigen import eigen_report
from cantilever.kernel import Grid, energetic_norm_of_J
from cantilever.nonlinearity import power_quadratic
from cantilever.variational import (
    CurvatureRepr,
    ShellSpec,
    energy,
    minimize_in_shell,
    mountain_pass,
    norms,
    sphere_inf,
)

p, grid = 0.5, Grid(256)
ep = eigen_report(grid)
w0 = CurvatureRepr(grid, ep.derivatives[2] / ep.energetic_norm)
s0 = norms(w0).sup_of_u

b = next(b for b in range(3, 201) if energy(power_quadratic(p, b), w0 * (b / s0)) < 0.5)
spec = power_quadratic(p, b)
w1 = w0 * (b / s0)
print("least integer b        :", b)
print("E(u0), E(u1)           :", energy(spec, w0), energy(spec, w1))

R1 = 4 * max(norms(w1).energetic, p * b * b * energetic_norm_of_J(lambda t: np.ones_like(t)))
shell = ShellSpec("energetic", 0.5, R1)
sphere = sphere_inf(spec, 2.0, grid=grid)
print("inf E on |u| = 2       :", sphere, "(multi-start estimate)")
print("h3 geometry            :", check_h3(spec, shell, w0, w1, 2.0, sphere_value=sphere).verdict)

low = minimize_in_shell(spec, shell, [w1, w0])
print("minimizer              : E =", low.energy, " projected gradient", low.projected_gradient_norm)
mp = mountain_pass(spec, shell, w0, low.point)
print("mountain pass          : E =", mp.energy, " projected gradient", mp.projected_gradient_norm)
print("path energies (ends)   :", mp.path_energies[0], "...", max(mp.path_energies), "...", mp.path_energies[-1])
for note in mp.notes:
    print("note                   :", note)
