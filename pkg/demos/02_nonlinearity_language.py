"""Writing nonlinearities as text.

A nonlinearity is a list of pieces ``[lo,hi): expr`` in u (and optionally t),
covering [0, inf) without gaps. Parsing checks the ranges, continuity at the
breakpoints and nonnegativity; the primitive F is integrated exactly.
"""

from cantilever.dsl import DSLSyntaxError
from cantilever.nonlinearity import (
    NonlinearityError,
    check_monotone,
    envelope,
    eval_F,
    eval_f,
    parse_spec,
    power_quadratic,
    saturated_linear,
)

sat = saturated_linear()
print("saturated linear       :", sat.text())
print("f(0.02), F(0.03)       :", eval_f(sat, 0.0, 0.02), eval_F(sat, 0.0, 0.03))

pq = power_quadratic(0.5, 5.0)
print("power-quadratic        :", pq.text())
print("F(2)                   :", eval_F(pq, 0.0, 2.0), " (p(10 + 7p)/(3(p + 1)) =", 0.5 * 13.5 / 4.5, ")")

bad = parse_spec("[0,1): 1-0.5*u ; [1,inf): 0.5")
mc = check_monotone(bad)
print("monotone?              :", mc.passed, "witness", mc.witness)

# envelopes of f over [M1(t) R, R]: exact at the interval ends for monotone f
env = envelope(sat, 37.0, "M1", 37.0)
print("envelope kinks         :", env.kinks)

for text in ("[0,inf): u * * 2", "[0,1): u ; [1,inf): 2", "[0,inf): u - 1"):
    try:
        parse_spec(text)
    except (DSLSyntaxError, NonlinearityError) as exc:
        print(f"rejected {text!r}:\n  {exc}")
