"""Oscillatory integrals int_I e(lambda . f): phase-bounded quadrature,
derivative-test upper bounds, and the empirical decay exponent in the
frequency radius.

Run:  python demos/05_oscillatory_decay.py
"""

import math

import numpy as np

from udlab import decay_fit, osc_integral, parse_expr, vdc_bound_first, vdc_bound_high

X, X2, X3 = parse_expr("x"), parse_expr("x^2"), parse_expr("x^3")
RADII = [2.0 ** j + 0.5 for j in range(2, 10)]

print("Oscillatory integral decay")
print("=" * 60)

# ---------------------------------------------------------------------------
# Sanity against closed forms: for a linear phase the integral is exact.

est = osc_integral([X], [0.5], (0, 1))
print(f"\n|int_0^1 e(x/2) dx| = {est.magnitude:.6f}  (closed form 2/pi = {2/math.pi:.6f})")
est = osc_integral([X], [1.0], (0, 1))
print(f"|int_0^1 e(x) dx|   = {est.magnitude:.1e}  (full period cancels)")

# ---------------------------------------------------------------------------
# Derivative-test bounds, phase measured in cycles. First order needs a
# monotone nonvanishing phase derivative; order d >= 2 only needs the
# d-th derivative bounded away from zero.

lam = 64.0
mag = osc_integral([X2], [lam], (1, 2)).magnitude
print(f"\nf = x^2 on [1,2], lambda = {lam:g}:")
print(f"  |integral|           = {mag:.2e}")
print(f"  first-derivative cap = {vdc_bound_first(X2, lam, (1, 2)):.2e}")
print(f"  second-derivative cap= {vdc_bound_high(X2, lam, (1, 2), 2):.2e}")

# ---------------------------------------------------------------------------
# The decay exponent depends on where derivatives vanish. On [0, 1] the
# monomial x^d vanishes to order d at 0 and the fitted slope is -1/d; on
# [1, 2] there is no stationary point and integration by parts forces
# slope -1 regardless of d.

print("\nfitted log-log slopes of |I(R)|:")
print(f"  {'f':<6} {'on [0,1]':>10} {'on [1,2]':>10}")
for d, f in ((1, X), (2, X2), (3, X3)):
    s01 = decay_fit([f], (0, 1), RADII, 1).slopes[0]
    s12 = decay_fit([f], (1, 2), RADII, 1).slopes[0]
    print(f"  x^{d:<4} {s01:>10.3f} {s12:>10.3f}")
print("  ([0,1] shows the d-th derivative-test exponent -1/d; [1,2] the")
print("   boundary-term rate -1)")

# ---------------------------------------------------------------------------
# For a family (x, x^2) on [1, 2] some unit directions put a stationary
# point of the phase inside the interval; the fitted exponent over
# directions is driven by the worst one (about 1/2 here).

fit = decay_fit([X, X2], (1, 2), RADII, 6, seed=1)
print("\nfamily (x, x^2) on [1, 2], 6 directions:")
for omega, slope in zip(fit.directions, fit.slopes):
    print(f"  omega = {np.round(omega, 3)!s:<18} slope = {slope:.3f}")
print(f"  delta_hat (min slope magnitude) = {fit.delta_hat:.3f}")

# ---------------------------------------------------------------------------
# A dependent family has a direction along which the phase is constant:
# no decay at all, flagged separately.

fit = decay_fit([X, parse_expr("2*x + 1")], (0, 1), RADII, 3, seed=1)
print(f"\ndependent family (x, 2x+1): degenerate direction "
      f"{np.round(fit.degenerate_direction, 4)}")
print(f"  |I(R omega)| stays at {fit.degenerate_magnitudes[0]:.9f}"
      " for every radius (the interval length)")
