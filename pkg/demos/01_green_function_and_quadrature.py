"""The Green's function of the cantilever and the operator J.

Solving u'''' = v with u(0) = u'(0) = u''(1) = u'''(1) = 0 amounts to
integrating v against G(t, s). This script evaluates G, checks its two-sided
bounds, and applies J to a constant load, whose exact response is the
quartic (t^4 - 4t^3 + 6t^2) / 24.
"""

import numpy as np

from cantilever.kernel import (
    Grid,
    apply_J,
    curvature_from_rhs,
    energetic_norm_of_J,
    green,
    integrate,
    minorant,
)

x = np.linspace(0.0, 1.0, 101)
T, S = np.meshgrid(x, x, indexing="ij")
G = green(T, S)
print("G(1, 1/2)              =", green(1.0, 0.5))
print("symmetry error         =", np.max(np.abs(G - G.T)))
print("lower-bound slack      =", np.min(G - (3 - T) * T**2 * S**2 / 6))
print("upper-bound slack      =", np.min(S**2 / 2 - G))

# composite Gauss-Legendre with panel doubling until two passes agree
print("int M0^2               =", integrate(lambda t: minorant("M0", t) ** 2), " (1/4536 =", 1 / 4536, ")")

grid = Grid(256)
one = lambda t: np.ones_like(t)
u = apply_J(one, grid)
exact = (grid.nodes**4 - 4 * grid.nodes**3 + 6 * grid.nodes**2) / 24
print("(J1)(1)                =", u.values[-1], " (1/8)")
print("max |J1 - quartic|     =", np.max(np.abs(u.values - exact)))
print("(J1)''(0)              =", curvature_from_rhs(one, 0.0), " (1/2)")
print("energetic norm of J1   =", energetic_norm_of_J(one), " (sqrt(1/20) =", np.sqrt(1 / 20), ")")
