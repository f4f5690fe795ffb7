"""Certificates for the energetic shell 1 <= |u| <= 37.

Each certificate states a hypothesis as lhs >= rhs or lhs <= rhs, reports the
signed margin, and passes only when the margin beats the quadrature error
estimate. The lower integral stays linear in R0 until M0 R0 reaches the
knee of f, so the inner radius can grow to about 1.25 before h2a fails.
"""

from cantilever.certify import check_f2, check_h1, check_h2, check_r0, theorem_summaries
from cantilever.nonlinearity import parse_spec, saturated_linear

spec = saturated_linear()
h1 = check_h1(spec)
h2a, h2b = check_h2(spec, 1.0, 37.0, h1=h1)
for c in (h1, h2a, h2b):
    print(f"{c.hypothesis:4s} lhs={c.lhs:.12g} rhs={c.rhs:g} margin={c.margin:+.6g} {c.verdict}"
          f" (error estimate {c.quadrature_error_estimate:.1e}, heuristic={c.heuristic})")
for s in theorem_summaries([h1, h2a, h2b]):
    print(f"{s.theorem:28s} {s.verdict}")

for R0 in (1.02, 1.25, 1.3):
    a, _ = check_h2(spec, R0, 37.0, h1=h1)
    print(f"R0 = {R0}: h2a margin {a.margin:+.5f} {a.verdict}")

lo, up = check_f2(spec, 0.75, 1.0, 37.0, h1)
print(f"pointwise tests at a = 3/4: lower {lo.lhs:g} vs {lo.rhs:.6f} {lo.verdict}; upper {up.lhs:.4f} vs {up.rhs} {up.verdict}")

one = parse_spec("[0,inf): 1")
ra, rb = check_r0(one, 0.1, 0.2)
print("constant load, sup-norm shell (0.1, 0.2):", ra.verdict, rb.verdict, ra.inputs_echo["shell_type"])
