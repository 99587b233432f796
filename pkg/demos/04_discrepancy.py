"""Star discrepancy D*_N: exact low-dimensional computation, the
certified lattice method, and equidistribution trends.

Run:  python demos/04_discrepancy.py
"""

import math

import numpy as np

from udlab import (PointGenerator, ProductCoord, identity, parse_expr,
                   star_discrepancy_1d, star_discrepancy_kd, ud_trend)

PHI = (1 + math.sqrt(5)) / 2

print("Star discrepancy")
print("=" * 60)

# ---------------------------------------------------------------------------
# One dimension has a closed sorted formula.

print("\n1-d exact values:")
print(f"  single point 0.5          -> {star_discrepancy_1d([0.5])}")
print(f"  midpoints (2i-1)/8, N=4   -> {star_discrepancy_1d([1/8, 3/8, 5/8, 7/8])}")
print(f"  three atoms at 0          -> {star_discrepancy_1d([0.0, 0.0, 0.0])}")

# ---------------------------------------------------------------------------
# In two dimensions the exact value comes from enumerating critical
# anchored boxes with both open and closed counts (atoms matter: a single
# point at the center already costs 0.75).

value, _ = star_discrepancy_kd([[0.5, 0.5]], "exact")
print(f"\n2-d single point (0.5, 0.5): exact D* = {value}")

m = 10
lattice = np.array([[(i + 0.5) / m, (j + 0.5) / m]
                    for i in range(m) for j in range(m)])
exact, _ = star_discrepancy_kd(lattice, "exact")
grid_val, err = star_discrepancy_kd(lattice, "grid", 1000)
print(f"10x10 midpoint lattice: exact {exact:.4f}, lattice method {grid_val:.4f}"
      f" +/- {err:.3f}")
print("  (the lattice value never exceeds the exact one; the additive")
print("   error bound is k/m)")

# ---------------------------------------------------------------------------
# Trends along a generator. The golden-ratio rotation is the classic
# low-discrepancy sequence; the diagonal embedding saturates at 1/4
# because all its mass lives on a measure-zero set.

gen = PointGenerator([ProductCoord(identity(), parse_expr("x"), PHI)])
rep = ud_trend(gen, [10 ** 3, 10 ** 4, 10 ** 5])
print("\n{n phi} trend (exact 1-d):")
for N, d in zip(rep.grid, rep.values):
    print(f"  N = {N:>6}: D* = {d:.2e}   (5 log N / N = {5 * math.log(N) / N:.2e})")
print(f"  log-log slope {rep.trend_slope:.2f}")

diag = PointGenerator([ProductCoord(identity(), parse_expr("x"), PHI),
                       ProductCoord(identity(), parse_expr("x"), PHI)])
rep = ud_trend(diag, [10 ** 3, 10 ** 4], method="grid", m=256)
print(f"\ndiagonal (n phi, n phi): D* = {[round(v, 4) for v in rep.values]}")
print("  saturates near sup |min(a,b) - ab| = 1/4: never equidistributed.")
