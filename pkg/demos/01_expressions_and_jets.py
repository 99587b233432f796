"""Closed-form expressions: parsing, evaluation, high-order derivatives,
and sampled linear-independence testing.

Run:  python demos/01_expressions_and_jets.py
"""

import numpy as np

from udlab import (check_linear_independence, eval_jet, evaluate, parse_expr,
                   to_text)

print("Expressions and Taylor jets")
print("=" * 60)

# ---------------------------------------------------------------------------
# Parsing honors the usual precedence: ^ before * and /, which bind
# before + and -; ^ is right-associative.

for text in ["2*x^3", "x^2^3", "-x + (x - 1)/(x + 2)", "sin(x)^2 + cos(x)^2"]:
    tree = parse_expr(text)
    print(f"  {text:<28} -> {to_text(tree)}")

# ---------------------------------------------------------------------------
# Evaluation works on scalars and numpy arrays alike.

f = parse_expr("exp(x)*sin(x) + x^2")
xs = np.linspace(0.0, 2.0, 5)
print("\nf(x) = exp(x)*sin(x) + x^2 on a grid:")
print(" ", np.round(evaluate(f, xs), 4))

# ---------------------------------------------------------------------------
# Taylor-mode jets return raw derivatives f, f', ..., f^(d) at a point,
# with no symbolic expansion. Polynomial jets terminate in exact zeros.

jet = eval_jet(parse_expr("x^2"), 3.0, 3)
print("\njet of x^2 at x=3, order 3:", jet.derivatives, " (note the exact 0)")
jet = eval_jet(f, 0.7, 6)
print("jet of f at x=0.7, order 6:")
print(" ", np.round(jet.derivatives, 5))

# ---------------------------------------------------------------------------
# Linear independence of {1, f_1, ..., f_k} is decided from the smallest
# singular value of a column-normalized Chebyshev sample matrix. For a
# dependent family the null direction gives the coefficients of the
# linear relation on [1, f_1, ..., f_k].

cases = [
    ("x, x^2", [parse_expr("x"), parse_expr("x^2")]),
    ("x, 2x+1", [parse_expr("x"), parse_expr("2*x + 1")]),
    ("sin^2, cos^2", [parse_expr("sin(x)^2"), parse_expr("cos(x)^2")]),
]
print("\nindependence of {1, f_1, f_2} on [0, 1]:")
for name, fs in cases:
    rep = check_linear_independence(fs, (0, 1))
    extra = ""
    if rep.null_direction is not None:
        extra = f"  null direction {np.round(rep.null_direction, 4)}"
    print(f"  {name:<14} {rep.verdict:<12} sigma_min = {rep.sigma_min:.2e}{extra}")

print("\nThe (1, 2, -1)/sqrt(6) direction for (x, 2x+1) encodes the exact")
print("relation 1*1 + 2*x - 1*(2x+1) = 0.")
