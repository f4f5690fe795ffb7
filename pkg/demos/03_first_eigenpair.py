"""First eigenpair of the clamped-free beam.

beta is the smallest positive root of cos x cosh x + 1 = 0 and lambda_1 =
beta^4. The eigenfunction is convex and sits in the cone of functions above
M0(t) times their energetic norm.
"""

import math

from cantilever.eigen import PUBLISHED_BETA, eigen_report
from cantilever.kernel import Grid

ep = eigen_report(Grid(256))
print("beta                   =", ep.beta)
print("pi/2 + 0.3042          =", PUBLISHED_BETA, " difference", ep.beta - PUBLISHED_BETA)
print("lambda_1               =", ep.lambda1)
print("|phi'''' - lambda phi| =", ep.eigen_residual)
print("convex, in M0 cone     =", ep.convex_ok, ep.cone_M0_ok, " worst slack", ep.cone_M0_worst_slack)
print("||phi||_L2 / |phi|     =", ep.l2_norm_normalized)
print("cos b cosh b + 1       =", math.cos(ep.beta) * math.cosh(ep.beta) + 1)
