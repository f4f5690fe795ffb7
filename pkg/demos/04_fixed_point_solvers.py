"""Solving u = J f(., u) for the saturated-linear nonlinearity.

f = 4600 u below u = 0.03 and 138 above. Since f <= 138, the function 138 J1
is a supersolution and monotone iteration from it decreases to a positive
solution. Newton from the same start lands on the same function. Monotone
iteration upwards from zero stays at the trivial solution.
"""

import numpy as np

from cantilever.kernel import Grid, GridFunction
from cantilever.nonlinearity import saturated_linear
from cantilever.solver import constant_solution, monotone_iterate, newton_solve

spec = saturated_linear()
grid = Grid(256)
start = constant_solution(grid, 138.0)

down = monotone_iterate(spec, start, "down")
newt = newton_solve(spec, start)
print("monotone-down          :", down.status, down.iterations, "iterations, residual", down.residual_sup)
print("newton                 :", newt.status, newt.iterations, "iterations, residual", newt.residual_sup)
print("sup |down - newton|    :", np.max(np.abs(down.solution.values - newt.solution.values)))
print("u(1), |u|, ||u||_L2    :", down.norm_sup, down.norm_energetic, down.norm_L2)
print("convex / M0 / M cones  :", down.convex_ok, down.cone_M0_ok, down.cone_M_ok)

for n in (128, 512, 2048):
    g = Grid(n)
    print(f"u(1) on {n:4d} panels   :", newton_solve(spec, constant_solution(g, 138.0)).norm_sup)

up = monotone_iterate(spec, GridFunction(grid, np.zeros(grid.size)), "up")
print("monotone-up from zero  :", up.status)
