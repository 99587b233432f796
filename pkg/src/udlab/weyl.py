"""Multidimensional exponential-sum averages F_N = (1/|S_N|) sum e(v . x_n).

Point coordinates come in three recipes:

  product     a(n) * f(x) at a fixed x; the phase is reduced mod 1 in
              double-double arithmetic, since for large a(n) the fractional
              part lives entirely below the rounding error of a plain
              double product
  power-tower g(x)**b(n) at a fixed x with g(x) > 1; reduced mod 1 in
              arbitrary precision sized to ceil(b * log2 g) plus guard
              bits, because the integer part grows with n and doubles keep
              none of the signal
  raw         caller-supplied vectors

All averages use the fixed-block pairwise reduction from numerics, so
results are bit-identical no matter how many workers split the index
range.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import expr as ex
from . import sequences as sq
from .numerics import (BLOCK, TOWER_GUARD_BITS, e_phase, frac_product,
                       power_tower_frac, tree_sum)


# ---------------------------------------------------------------------------
# Coordinate recipes and point generators


class ProductCoord:
    """Fractional parts of a(n) * f(x) at fixed x."""

    def __init__(self, seq_spec: sq.SequenceSpec, f: ex.Node, x: float):
        self.seq_spec = seq_spec
        self.f = f
        self.x = float(x)
        self._seq = sq.make_sequence(seq_spec)
        self._fx = float(ex.evaluate(f, self.x))
        self.precision_bits = 104  # double-double mantissa

    def fracs(self, indices: np.ndarray) -> np.ndarray:
        a = np.asarray(self._seq(indices), dtype=float)
        return frac_product(a, self._fx)

    def describe(self) -> str:
        return f"prod:{sq.spec_to_text(self.seq_spec)}|{ex.to_text(self.f)}"


class TowerCoord:
    """Fractional parts of g(x)**b(n) at fixed x, g(x) > 1."""

    def __init__(self, g: ex.Node, b_spec: sq.SequenceSpec, x: float,
                 guard_bits: int = TOWER_GUARD_BITS):
        self.g = g
        self.b_spec = b_spec
        self.x = float(x)
        self.guard_bits = guard_bits
        self._b = sq.make_sequence(b_spec)
        self._gx = float(ex.evaluate(g, self.x))
        if not self._gx > 1.0:
            raise ValueError(f"power-tower base g(x) = {self._gx} must exceed 1")
        self.precision_bits = guard_bits  # grows with n; updated as used

    def fracs(self, indices: np.ndarray) -> np.ndarray:
        b = np.asarray(self._b(indices), dtype=float)
        out = np.empty(len(b))
        for i, bn in enumerate(b):
            out[i] = power_tower_frac(self._gx, float(bn), self.guard_bits)
        max_b = float(np.max(b, initial=0.0))
        self.precision_bits = max(
            self.precision_bits,
            int(math.ceil(max(max_b, 0.0) * math.log2(self._gx))) + self.guard_bits)
        return out

    def describe(self) -> str:
        return f"tower:{ex.to_text(self.g)}|{sq.spec_to_text(self.b_spec)}"


class RawCoord:
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], label: str = "raw"):
        self.fn = fn
        self.label = label
        self.precision_bits = 53

    def fracs(self, indices: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.fn(indices), dtype=float)
        return vals - np.floor(vals)

    def describe(self) -> str:
        return f"raw:{self.label}"


class PointGenerator:
    """A point sequence n -> ([0,1))^k built from per-coordinate recipes
    sharing the same index n."""

    def __init__(self, coords: Sequence):
        if not coords:
            raise ValueError("need at least one coordinate")
        self.coords = list(coords)
        self.dim = len(self.coords)

    def fracs(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        return np.column_stack([c.fracs(indices) for c in self.coords])

    @property
    def precision_bits(self) -> int:
        return max(c.precision_bits for c in self.coords)

    def describe(self) -> str:
        return "; ".join(c.describe() for c in self.coords)


def product_generator(pairs: Sequence[Tuple[sq.SequenceSpec, ex.Node]], x: float) -> PointGenerator:
    return PointGenerator([ProductCoord(s, f, x) for s, f in pairs])


# ---------------------------------------------------------------------------
# Weyl sums


def _check_frequency(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64).reshape(-1)
    if len(v) != dim:
        raise ValueError(f"frequency vector has length {len(v)}, points have dimension {dim}")
    if not np.any(v):
        raise ValueError("frequency vector must be nonzero")
    return v


def _phase_values(points: np.ndarray, v: np.ndarray) -> np.ndarray:
    phase = points @ v.astype(float)
    return phase - np.floor(phase)


def _mean_e(points: np.ndarray, v: np.ndarray, workers: int = 1) -> complex:
    n = len(points)
    blocks = range(0, n, BLOCK)

    def partial(lo: int) -> complex:
        z = e_phase(_phase_values(points[lo:lo + BLOCK], v))
        return tree_sum(z)

    if workers > 1 and n > BLOCK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(partial, blocks))
    else:
        partials = [partial(lo) for lo in blocks]
    return complex(tree_sum(np.asarray(partials, dtype=complex)) / n)


def weyl_sum(gen: PointGenerator, v, N: int, workers: int = 1) -> complex:
    """(1/N) sum_{n<=N} e(v . x_n) with v a nonzero integer vector."""
    if N < 1:
        raise ValueError("need N >= 1")
    v = _check_frequency(v, gen.dim)
    points = gen.fracs(np.arange(1, N + 1))
    return _mean_e(points, v, workers)


@dataclass
class WeylSumSeries:
    v: np.ndarray
    grid: List[int]
    averages: List[complex]
    magnitudes: List[float]
    set_sizes: List[int]
    inverse_size_partial_sums: List[float]
    precision_bits: int
    family: Optional[sq.IndexSetFamily] = None


def weyl_sum_over_sets(gen: PointGenerator, v, family: sq.IndexSetFamily,
                       grid: Sequence[int], workers: int = 1) -> WeylSumSeries:
    """F_N over the index sets S_N of the family, for each N in the grid,
    with the divergence diagnostic sum of 1/|S_M|."""
    v = _check_frequency(v, gen.dim)
    averages, mags, sizes, partials = [], [], [], []
    for N in grid:
        view = sq.index_sets(family, int(N))
        points = gen.fracs(view.members())
        f = _mean_e(points, v, workers)
        averages.append(f)
        mags.append(abs(f))
        sizes.append(view.size)
        partials.append(view.partial_inverse_sum)
    return WeylSumSeries(v, [int(N) for N in grid], averages, mags, sizes,
                         partials, gen.precision_bits, family)


def prefix_weyl_series(points: np.ndarray, v, grid: Sequence[int]) -> List[complex]:
    """F_N along prefixes {1..N} for each N in the grid, reusing one point
    array. Reduction shape per N matches weyl_sum exactly."""
    v = _check_frequency(v, points.shape[1])
    z = e_phase(_phase_values(points, v))
    out = []
    for N in grid:
        zn = z[:int(N)]
        partials = [tree_sum(zn[lo:lo + BLOCK]) for lo in range(0, len(zn), BLOCK)]
        out.append(complex(tree_sum(np.asarray(partials, dtype=complex)) / int(N)))
    return out


def frequency_box(dim: int, V: int):
    """Nonzero integer vectors with sup-norm <= V, in lexicographic order."""
    for v in itertools.product(range(-V, V + 1), repeat=dim):
        if any(v):
            yield np.asarray(v, dtype=np.int64)


def max_weyl_sum(gen: PointGenerator, V: int, N: int,
                 points: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """Maximum of |F_N| over the frequency box ||v||_inf <= V, v != 0.

    Ties keep the lexicographically first maximizer (strict improvement
    comparison over the lexicographic enumeration).
    """
    if V < 1:
        raise ValueError("need V >= 1")
    if points is None:
        points = gen.fracs(np.arange(1, N + 1))
    else:
        points = points[:N]
    best_mag, best_v = -1.0, None
    for v in frequency_box(gen.dim, V):
        mag = abs(_mean_e(points, v))
        if mag > best_mag:
            best_mag, best_v = mag, v
    return best_mag, best_v


# ---------------------------------------------------------------------------
# Sublacunary N grids and the averaging gap bound


def sublacunary_grid(eps_prime: float, r_max: int) -> List[int]:
    """N_r = ceil(exp(r**(1 - eps_prime))), deduplicated and increasing.
    Consecutive ratios tend to 1, which is what lets subsequence limits
    carry over to the full sequence."""
    if not (0.0 < eps_prime < 1.0):
        raise ValueError("eps_prime must lie in (0, 1)")
    if r_max < 2:
        raise ValueError("need r_max >= 2")
    out = []
    for r in range(1, r_max + 1):
        n = math.ceil(math.exp(r ** (1.0 - eps_prime)))
        if not out or n > out[-1]:
            out.append(n)
    return out


def cesaro_gap(zs: Sequence[complex], N: int, M: int) -> Tuple[float, float]:
    """|A_N - A_M| for prefix averages of a unit-bounded complex sequence,
    together with the bound 2*(1 - N/M). The caller asserts lhs <= bound."""
    zs = np.asarray(zs, dtype=complex)
    if not (1 <= N < M <= len(zs)):
        raise ValueError("need 1 <= N < M <= len(zs)")
    if np.any(np.abs(zs[:M]) > 1.0 + 1e-12):
        raise ValueError("sequence values must have modulus at most 1")
    prefix = np.cumsum(zs[:M])
    lhs = abs(prefix[N - 1] / N - prefix[M - 1] / M)
    bound = 2.0 * (1.0 - N / M)
    return float(lhs), float(bound)
