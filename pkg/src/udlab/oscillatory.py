"""Oscillatory integrals int_I e(lambda . f(x)) dx, derivative-test upper
bounds, and the empirical decay-exponent fit.

Phase convention: e(t) = exp(2*pi*i*t), so phases are measured in cycles
and the derivative-test bounds consume phi = lambda . f directly, with no
2*pi factors. The quadrature bisects panels until the estimated phase
variation per panel is at most a quarter cycle, then applies a 15-point
Kronrod rule with its embedded 7-point Gauss rule as error estimate, and
keeps refining the worst panels until the error estimate meets the
tolerance or the panel cap is hit (in which case the estimate is flagged
unreliable). Error estimates are numerical diagnostics, not rigorous
enclosures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import expr as ex
from .numerics import derive_seed, e_phase, tree_sum

PANEL_CAP = 1 << 20
R_MAX = 1 << 16
PHASE_VARIATION_PER_PANEL = 0.25  # cycles
TOL_MIN, TOL_MAX = 1e-12, 1e-4

# Kronrod-15 abscissae and weights with the embedded Gauss-7 weights
# (QUADPACK dqk15 constants).
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469])

_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])        # 15 ascending
_WEIGHTS_K = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_WEIGHTS_G = np.zeros(15)
_WEIGHTS_G[1:14:2] = np.concatenate([_WG[:3], [_WG[3]], _WG[2::-1]])


def vdc_constant(d: int) -> float:
    """Working constant for the d-th derivative test. Not claimed sharp;
    verified empirically against quadrature on every test case."""
    return 2.0 ** d


@dataclass
class OscillatoryEstimate:
    lam: np.ndarray
    interval: Tuple[float, float]
    value: complex
    error: float
    panels: int
    reliable: bool

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def _as_lambda(lam, k: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if len(arr) != k:
        raise ValueError(f"lambda has length {len(arr)}, expected {k}")
    return arr


def _phase(fs: Sequence[ex.Node], lam: np.ndarray, xs: np.ndarray) -> np.ndarray:
    total = np.zeros_like(xs)
    for coef, f in zip(lam, fs):
        if coef != 0.0:
            total = total + coef * np.asarray(ex.evaluate(f, xs), dtype=float)
    return total


def _phase_jet(fs: Sequence[ex.Node], lam: np.ndarray, xs: np.ndarray,
               order: int) -> np.ndarray:
    total = np.zeros((order + 1, len(xs)))
    for coef, f in zip(lam, fs):
        if coef != 0.0:
            total += coef * ex.eval_jet_many(f, xs, order)
    return total


def osc_integral(fs: Sequence[ex.Node], lam, interval, tol: float = 1e-9,
                 panel_cap: int = PANEL_CAP) -> OscillatoryEstimate:
    """Adaptive phase-bounded quadrature for int_I e(lambda . f) dx."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("need lo < hi")
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ValueError(f"tol must lie in [{TOL_MIN}, {TOL_MAX}]")
    lam = _as_lambda(lam, len(fs))
    width_floor = (hi - lo) * 1e-14
    reliable = True

    # phase-bounded bisection
    a = np.array([lo])
    b = np.array([hi])
    done_a, done_b = [], []
    while len(a):
        mid = 0.5 * (a + b)
        pts = np.concatenate([a, mid, b])
        jet = _phase_jet(fs, lam, pts, 1)
        p = len(a)
        pa, pm, pb = jet[0, :p], jet[0, p:2 * p], jet[0, 2 * p:]
        da, dm, db = np.abs(jet[1, :p]), np.abs(jet[1, p:2 * p]), np.abs(jet[1, 2 * p:])
        var_vals = np.abs(pm - pa) + np.abs(pb - pm)
        var_simpson = (b - a) / 6.0 * (da + 4.0 * dm + db)
        var = np.maximum(var_vals, var_simpson)
        ok = (var <= PHASE_VARIATION_PER_PANEL) | (b - a <= width_floor)
        total = len(done_a) + np.count_nonzero(ok) + 2 * np.count_nonzero(~ok)
        if total > panel_cap:
            reliable = False
            ok[:] = True
        done_a.append(a[ok])
        done_b.append(b[ok])
        split_a, split_b, split_m = a[~ok], b[~ok], mid[~ok]
        a = np.empty(2 * len(split_a))
        b = np.empty(2 * len(split_a))
        a[0::2], a[1::2] = split_a, split_m
        b[0::2], b[1::2] = split_m, split_b
    pa = np.concatenate(done_a)
    pb = np.concatenate(done_b)
    order = np.argsort(pa, kind="stable")
    pa, pb = pa[order], pb[order]

    def rule(a_arr: np.ndarray, b_arr: np.ndarray):
        half = 0.5 * (b_arr - a_arr)
        mid = 0.5 * (a_arr + b_arr)
        xs = mid[:, None] + half[:, None] * _NODES[None, :]
        z = e_phase(_phase(fs, lam, xs.ravel()).reshape(xs.shape))
        k15 = half * (z @ _WEIGHTS_K)
        g7 = half * (z @ _WEIGHTS_G)
        return k15, np.abs(k15 - g7)

    values, errors = rule(pa, pb)
    while float(np.sum(errors)) > tol and len(pa) < panel_cap:
        cut = max(float(np.max(errors)) * 0.5, tol / (2.0 * len(pa)))
        split = errors >= cut
        if not np.any(split):
            break
        keep = ~split
        sa, sb = pa[split], pb[split]
        sm = 0.5 * (sa + sb)
        na = np.empty(2 * len(sa))
        nb = np.empty(2 * len(sa))
        na[0::2], na[1::2] = sa, sm
        nb[0::2], nb[1::2] = sm, sb
        nv, ne = rule(na, nb)
        pa = np.concatenate([pa[keep], na])
        pb = np.concatenate([pb[keep], nb])
        values = np.concatenate([values[keep], nv])
        errors = np.concatenate([errors[keep], ne])
        order = np.argsort(pa, kind="stable")
        pa, pb, values, errors = pa[order], pb[order], values[order], errors[order]
    err_total = float(np.sum(errors))
    if err_total > tol:
        reliable = False
    return OscillatoryEstimate(lam, (lo, hi), complex(tree_sum(values)),
                               err_total, len(pa), reliable)


# ---------------------------------------------------------------------------
# Derivative-test bounds (phase in cycles)

_FIRST_ORDER_SAMPLES = 128
_HIGH_ORDER_SAMPLES = 1024
_DERIV_FLOOR = 1e-300


def vdc_bound_first(f: ex.Node, lam: float, interval) -> float:
    """First-derivative bound max(1/|phi'(a)|, 1/|phi'(b)|) per piece with
    monotone phi', summed over pieces.

    Monotonicity of phi' is established by sampling the sign of phi'' at
    128 points and splitting at detected sign changes. Returns inf when
    phi' vanishes at a checked endpoint or changes sign inside a piece
    (the bound is vacuous there).
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("need lo < hi")
    xs = np.linspace(lo, hi, _FIRST_ORDER_SAMPLES + 1)
    jet = float(lam) * ex.eval_jet_many(f, xs, 2)[1:]
    dphi, ddphi = jet[0], jet[1]
    cuts = [lo]
    sgn = np.sign(ddphi)
    nonzero = np.nonzero(sgn)[0]
    for t in range(len(nonzero) - 1):
        i, j = nonzero[t], nonzero[t + 1]
        if sgn[i] != sgn[j]:  # phi'' changes sign: phi' monotone piece ends
            cuts.append(0.5 * (xs[i] + xs[j]))
    cuts.append(hi)
    total = 0.0
    for left, right in zip(cuts, cuts[1:]):
        inside = xs[(xs >= left) & (xs <= right)]
        d_inside = dphi[(xs >= left) & (xs <= right)]
        if len(d_inside) >= 2 and (np.min(np.sign(d_inside)) < 0 < np.max(np.sign(d_inside))):
            return math.inf  # phi' crosses zero: minimum modulus is 0
        dl = abs(float(lam) * ex.eval_jet_many(f, np.array([left]), 1)[1, 0])
        dr = abs(float(lam) * ex.eval_jet_many(f, np.array([right]), 1)[1, 0])
        if dl < _DERIV_FLOOR or dr < _DERIV_FLOOR:
            return math.inf
        total += max(1.0 / dl, 1.0 / dr)
    return total


def vdc_bound_high(f: ex.Node, lam: float, interval, d: int) -> float:
    """d-th derivative bound C_d * (inf |phi^(d)|)^(-1/d), d >= 2.

    The infimum over the interval is approximated by 1024 samples plus
    local refinement around the three smallest; the sampling resolution is
    part of the contract, exactness is not claimed.
    """
    if not (2 <= d <= 8):
        raise ValueError("need 2 <= d <= 8")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("need lo < hi")
    xs = np.linspace(lo, hi, _HIGH_ORDER_SAMPLES)
    mags = np.abs(float(lam) * ex.eval_jet_many(f, xs, d)[d])
    spacing = (hi - lo) / (_HIGH_ORDER_SAMPLES - 1)
    smallest = np.argsort(mags, kind="stable")[:3]
    for idx in smallest:
        left = max(lo, xs[idx] - spacing)
        right = min(hi, xs[idx] + spacing)
        fine = np.linspace(left, right, 64)
        mags = np.append(mags, np.abs(float(lam) * ex.eval_jet_many(f, fine, d)[d]))
    inf_mag = float(np.min(mags))
    if inf_mag < _DERIV_FLOOR:
        return math.inf
    return vdc_constant(d) * inf_mag ** (-1.0 / d)


# ---------------------------------------------------------------------------
# Decay-exponent fit


@dataclass
class OscillatoryDecayFit:
    """|int_I e(R * omega . f)| over directions and radii with per-direction
    and pooled log-log fits.

    delta_hat is the minimum per-direction slope magnitude over the
    sampled directions: a sampled lower-confidence estimate of the true
    exponent, which depends on vanishing orders a finite sample can miss.
    Only the fitted intercept is reported for the constant."""

    directions: List[np.ndarray]
    radii: np.ndarray
    magnitudes: np.ndarray        # (directions, radii)
    slopes: np.ndarray
    intercepts: np.ndarray
    r_squared: np.ndarray
    pooled_slope: float
    pooled_intercept: float
    pooled_r_squared: float
    delta_hat: float
    unreliable: np.ndarray        # bool (directions, radii)
    errors: Optional[np.ndarray] = None   # quadrature error estimates
    degenerate_direction: Optional[np.ndarray] = None
    degenerate_magnitudes: Optional[np.ndarray] = None


def _fit_line(logr: np.ndarray, logm: np.ndarray) -> Tuple[float, float, float]:
    slope, intercept = np.polyfit(logr, logm, 1)
    fitted = slope * logr + intercept
    ss_res = float(np.sum((logm - fitted) ** 2))
    ss_tot = float(np.sum((logm - np.mean(logm)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return float(slope), float(intercept), r2


def decay_fit(fs: Sequence[ex.Node], interval, radii: Sequence[float],
              n_directions: int, seed: int = 0, tol: float = 1e-9) -> OscillatoryDecayFit:
    """Fit |int e(R * omega . f)| ~ C * R^(-delta) over sampled directions.

    Axis directions come first, then seeded uniform sphere samples. If the
    function family is linearly dependent, the null direction (restricted
    to the lambda components and normalized) is evaluated separately and
    flagged; along it the phase is constant so the magnitude pins at |I|.
    """
    k = len(fs)
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 6:
        raise ValueError("need at least 6 radii")
    if radii[-1] > R_MAX:
        raise ValueError(f"max radius capped at {R_MAX}")
    if n_directions < k:
        raise ValueError("need at least k directions")
    directions: List[np.ndarray] = [np.eye(k)[i] for i in range(k)]
    rng = np.random.default_rng(derive_seed(seed, k, n_directions))
    while len(directions) < n_directions:
        v = rng.standard_normal(k)
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            directions.append(v / norm)

    mags = np.zeros((len(directions), len(radii)))
    errors = np.zeros_like(mags)
    unreliable = np.zeros_like(mags, dtype=bool)
    for i, omega in enumerate(directions):
        for j, r in enumerate(radii):
            est = osc_integral(fs, r * omega, interval, tol=tol)
            mags[i, j] = est.magnitude
            errors[i, j] = est.error
            unreliable[i, j] = not est.reliable

    logr = np.log(radii)
    slopes = np.zeros(len(directions))
    intercepts = np.zeros(len(directions))
    r2s = np.zeros(len(directions))
    for i in range(len(directions)):
        slopes[i], intercepts[i], r2s[i] = _fit_line(
            logr, np.log(np.maximum(mags[i], 1e-300)))
    pooled = _fit_line(np.tile(logr, len(directions)),
                       np.log(np.maximum(mags, 1e-300)).ravel())
    delta_hat = float(np.min(np.abs(slopes)))

    degen_dir = None
    degen_mags = None
    report = ex.check_linear_independence(fs, interval)
    if report.verdict == "dependent" and report.null_direction is not None:
        lam_part = report.null_direction[1:]
        norm = np.linalg.norm(lam_part)
        if norm > 1e-12:
            degen_dir = lam_part / norm
            degen_mags = np.array([
                osc_integral(fs, r * degen_dir, interval, tol=tol).magnitude
                for r in radii])
    return OscillatoryDecayFit(directions, radii, mags, slopes, intercepts,
                               r2s, pooled[0], pooled[1], pooled[2], delta_hat,
                               unreliable, errors, degen_dir, degen_mags)
