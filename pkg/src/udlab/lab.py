"""Config-driven experiment harness: Monte Carlo over the curve parameter
x, with discrepancy trends and maximal Weyl sums per sample, quantile
aggregation, threshold verdicts, and deterministic CSV/SVG emission.

Almost-everywhere statements are operationalized as: at least a configured
fraction (default 90%) of seeded uniform x samples must pass the
per-sample threshold, and the report lists the exceptional set. Full
measure admits measure-zero exceptions that finite sampling can
legitimately hit, so a single bad sample is a finding, not a failure.

Per-sample randomness is derived by hashing (master seed, sample index):
dropping one sample never perturbs another sample's stream, and the whole
report is reproducible byte for byte from (config, seed).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import discrepancy as dc
from . import expr as ex
from . import sequences as sq
from . import weyl as wy
from .numerics import TOWER_GUARD_BITS, derive_seed

__version__ = "0.1.0"

EXPERIMENT_KINDS = (
    "curve-product",            # (a_1(n) f_1(x), ..., a_k(n) f_k(x))
    "power-tower-curve",        # (g(x)^b(n), a_1(n) f_1(x), ...)
    "power-tower-pair",         # (g(x)^b_1(n), g(x)^b_2(n)); exploratory
    "diagonal-counterexample",  # (a(n) x, a(n) x): obstructed at v=(1,-1)
    "custom",                   # raw coordinate descriptors
)


# ---------------------------------------------------------------------------
# Grid / generator textual specs (shared by configs and the CLI)


def parse_grid(text: str) -> List[int]:
    """Grid specs: "sublacunary:EPS:NMAX", "pow2:A..B",
    "linear:START:STOP:COUNT", or an explicit comma list."""
    text = text.strip()
    if text.startswith("sublacunary:"):
        _, eps_s, nmax_s = text.split(":")
        eps, nmax = float(eps_s), int(float(nmax_s))
        r = 2
        while math.exp((r + 1) ** (1.0 - eps)) <= nmax:
            r += 1
        grid = [n for n in wy.sublacunary_grid(eps, r) if n <= nmax]
        if grid[-1] != nmax:
            grid.append(nmax)
        return grid
    if text.startswith("pow2:"):
        a, b = text[len("pow2:"):].split("..")
        return [2 ** k for k in range(int(a), int(b) + 1)]
    if text.startswith("linear:"):
        _, start, stop, count = text.split(":")
        vals = np.linspace(float(start), float(stop), int(count))
        out = sorted(set(int(round(v)) for v in vals))
        return out
    return sorted(set(int(v) for v in text.split(",")))


def parse_generator(text: str, default_x: Optional[float] = None) -> wy.PointGenerator:
    """Generator specs: coordinates separated by ';', each
    "prod:SEQSPEC|FEXPR" or "tower:GEXPR|BSEQSPEC", plus one "x=VALUE"
    entry fixing the curve parameter."""
    x = default_x
    entries = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.startswith("x="):
            x = float(chunk[2:])
        else:
            entries.append(chunk)
    if x is None:
        raise ValueError("generator spec needs an x=VALUE entry")
    coords = []
    for entry in entries:
        head, sep, rest = entry.partition(":")
        if not sep:
            raise ValueError(f"bad coordinate '{entry}'")
        left, sep2, right = rest.partition("|")
        if not sep2:
            raise ValueError(f"coordinate '{entry}' needs LEFT|RIGHT")
        if head == "prod":
            coords.append(wy.ProductCoord(sq.parse_sequence_spec(left),
                                          ex.parse_expr(right), x))
        elif head == "tower":
            coords.append(wy.TowerCoord(ex.parse_expr(left),
                                        sq.parse_sequence_spec(right), x))
        else:
            raise ValueError(f"unknown coordinate kind '{head}'")
    return wy.PointGenerator(coords)


def parse_index_family(text: str) -> sq.IndexSetFamily:
    head, _, rest = text.partition(":")
    if head == "prefixes":
        return sq.prefixes()
    params = dict(item.split("=") for item in rest.split(",") if item)
    if head == "geometric":
        return sq.geometric(float(params["rho"]))
    if head == "strided":
        return sq.strided(int(params["c"]))
    raise ValueError(f"unknown index-set family '{head}'")


# ---------------------------------------------------------------------------
# Experiment configuration


@dataclass
class ExperimentConfig:
    kind: str
    functions: List[str] = field(default_factory=list)
    sequences: List[str] = field(default_factory=list)
    tower_base: Optional[str] = None
    tower_sequences: List[str] = field(default_factory=list)
    coordinates: List[str] = field(default_factory=list)
    x_interval: Tuple[float, float] = (0.05, 0.95)
    x_samples: int = 20
    seed: int = 0
    n_grid: str = "sublacunary:0.5:20000"
    frequency_bound: int = 5
    discrepancy_method: str = "auto"
    grid_m: Optional[int] = None
    dstar_final_max: Optional[float] = None
    min_pass_fraction: float = 0.9
    output_dir: Optional[str] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind '{self.kind}'; "
                             f"choose from {EXPERIMENT_KINDS}")
        if self.kind == "curve-product" and len(self.functions) != len(self.sequences):
            raise ValueError("curve-product needs one sequence per function")
        if self.kind == "power-tower-curve":
            if self.tower_base is None or not self.tower_sequences:
                raise ValueError("power-tower-curve needs tower_base and tower_sequences")
            if len(self.functions) != len(self.sequences):
                raise ValueError("power-tower-curve needs one sequence per function")
        if self.kind == "power-tower-pair":
            if self.tower_base is None or len(self.tower_sequences) < 2:
                raise ValueError("power-tower-pair needs tower_base and two tower_sequences")
        if self.kind == "custom" and not self.coordinates:
            raise ValueError("custom kind needs coordinate descriptors")
        lo, hi = self.x_interval
        if not lo < hi:
            raise ValueError("x_interval must be nondegenerate")

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentConfig":
        data = dict(data)
        if "x_interval" in data:
            data["x_interval"] = tuple(data["x_interval"])
        return cls(**data)

    @classmethod
    def from_json_file(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["x_interval"] = list(self.x_interval)
        return d


def sample_x(config: ExperimentConfig, index: int) -> float:
    rng = np.random.default_rng(derive_seed(config.seed, index))
    lo, hi = config.x_interval
    return float(lo + (hi - lo) * rng.random())


def build_generator(config: ExperimentConfig, x: float) -> wy.PointGenerator:
    kind = config.kind
    if kind == "curve-product":
        coords = [wy.ProductCoord(sq.parse_sequence_spec(s), ex.parse_expr(f), x)
                  for s, f in zip(config.sequences, config.functions)]
        return wy.PointGenerator(coords)
    if kind == "diagonal-counterexample":
        fs = config.functions or ["x", "x"]
        ss = config.sequences or ["identity", "identity"]
        coords = [wy.ProductCoord(sq.parse_sequence_spec(s), ex.parse_expr(f), x)
                  for s, f in zip(ss, fs)]
        return wy.PointGenerator(coords)
    if kind == "power-tower-curve":
        g = ex.parse_expr(config.tower_base)
        coords = [wy.TowerCoord(g, sq.parse_sequence_spec(config.tower_sequences[0]), x)]
        coords += [wy.ProductCoord(sq.parse_sequence_spec(s), ex.parse_expr(f), x)
                   for s, f in zip(config.sequences, config.functions)]
        return wy.PointGenerator(coords)
    if kind == "power-tower-pair":
        g = ex.parse_expr(config.tower_base)
        coords = [wy.TowerCoord(g, sq.parse_sequence_spec(b), x)
                  for b in config.tower_sequences[:2]]
        return wy.PointGenerator(coords)
    if kind == "custom":
        return parse_generator("; ".join(config.coordinates), default_x=x)
    raise ValueError(f"unknown experiment kind '{kind}'")


# ---------------------------------------------------------------------------
# Running


@dataclass
class SampleResult:
    index: int
    x: float
    discrepancy: Optional[dc.DiscrepancyReport]
    weyl_max: List[float]            # max |F_N| over the frequency box, per grid N
    weyl_argmax: List[np.ndarray]
    passed: Optional[bool]
    error: Optional[str] = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    grid: List[int]
    samples: List[SampleResult]
    dstar_median: List[float]
    dstar_q10: List[float]
    dstar_q90: List[float]
    pass_fraction: Optional[float]
    verdict: Optional[str]           # "pass" | "fail" | None for exploratory
    exceptional: List[int]
    partial: bool
    provenance: Dict

    def final_median(self) -> float:
        return self.dstar_median[-1]


def _run_sample(config: ExperimentConfig, grid: List[int], index: int) -> SampleResult:
    x = sample_x(config, index)
    try:
        gen = build_generator(config, x)
        method = config.discrepancy_method
        if method == "auto":
            method = "exact" if gen.dim == 1 else "grid"
        rep = dc.ud_trend(gen, grid, method=method, m=config.grid_m)
        points = gen.fracs(np.arange(1, grid[-1] + 1))
        if config.kind == "diagonal-counterexample":
            series = wy.prefix_weyl_series(points, [1, -1], grid)
            mags = [abs(f) for f in series]
            argmax = [np.array([1, -1])] * len(grid)
        else:
            mags, argmax = max_weyl_series(points, config.frequency_bound, grid)
        passed = None
        if config.dstar_final_max is not None:
            passed = rep.final_value() <= config.dstar_final_max
        return SampleResult(index, x, rep, mags, argmax, passed)
    except (ValueError, ex.DomainError) as err:
        return SampleResult(index, x, None, [], [], None, error=str(err))


def max_weyl_series(points: np.ndarray, V: int, grid: Sequence[int]):
    """max |F_N| over the nonzero frequency box, per grid N, with the
    lexicographically first maximizer."""
    grid = [int(N) for N in grid]
    best = np.full(len(grid), -1.0)
    best_v: List[Optional[np.ndarray]] = [None] * len(grid)
    for v in wy.frequency_box(points.shape[1], V):
        series = wy.prefix_weyl_series(points, v, grid)
        for i, f in enumerate(series):
            mag = abs(f)
            if mag > best[i]:
                best[i] = mag
                best_v[i] = v
    return list(best), best_v


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run all x samples, aggregate quantiles, and evaluate thresholds.

    Per-sample errors are recorded on the sample and the run continues
    with partial coverage marked. Threshold evaluation is pure: it can be
    recomputed from the stored report.
    """
    grid = parse_grid(config.n_grid)
    indices = list(range(config.x_samples))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(lambda i: _run_sample(config, grid, i), indices))
    else:
        samples = [_run_sample(config, grid, i) for i in indices]
    good = [s for s in samples if s.error is None]
    partial = len(good) < len(samples)
    if good:
        matrix = np.array([s.discrepancy.values for s in good])
        med = [float(v) for v in np.percentile(matrix, 50, axis=0)]
        q10 = [float(v) for v in np.percentile(matrix, 10, axis=0)]
        q90 = [float(v) for v in np.percentile(matrix, 90, axis=0)]
    else:
        med = q10 = q90 = []
    pass_fraction = None
    verdict = None
    exceptional = [s.index for s in samples if s.passed is False or s.error is not None]
    if config.dstar_final_max is not None and good:
        passed = [s for s in good if s.passed]
        pass_fraction = len(passed) / len(samples)
        ok = (pass_fraction >= config.min_pass_fraction
              and med[-1] <= config.dstar_final_max)
        verdict = "pass" if ok else "fail"
    provenance = {
        "config": config.to_dict(),
        "seed": config.seed,
        "version": __version__,
        "constants": {
            "vdc_constant_base": 2.0,
            "tower_guard_bits": TOWER_GUARD_BITS,
            "independence_threshold": ex.INDEPENDENCE_THRESHOLD,
        },
    }
    return ExperimentReport(config, grid, samples, med, q10, q90,
                            pass_fraction, verdict, exceptional, partial,
                            provenance)


def evaluate_thresholds(report: ExperimentReport) -> Optional[str]:
    """Recompute the verdict from a stored report (pure)."""
    config = report.config
    if config.dstar_final_max is None or not report.dstar_median:
        return None
    good = [s for s in report.samples if s.error is None]
    passed = [s for s in good
              if s.discrepancy.final_value() <= config.dstar_final_max]
    frac = len(passed) / len(report.samples)
    ok = (frac >= config.min_pass_fraction
          and report.dstar_median[-1] <= config.dstar_final_max)
    return "pass" if ok else "fail"


# ---------------------------------------------------------------------------
# CSV / SVG emission (byte-stable for identical reports)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def scatter_csv_rows(report) -> Tuple[List[str], List[List]]:
    header = ["N", "S", "eps_pointwise", "method", "err_bound"]
    rows = [[N, s, e, m, b] for N, s, e, m, b in
            zip(report.grid, report.S, report.eps_pointwise, report.methods,
                report.error_bounds)]
    return header, rows


def weyl_csv_rows(series: wy.WeylSumSeries) -> Tuple[List[str], List[List]]:
    header = ["N", "v", "re_F", "im_F", "abs_F", "precision_bits"]
    vtext = ";".join(str(int(c)) for c in series.v)
    rows = [[N, vtext, f.real, f.imag, m, series.precision_bits]
            for N, f, m in zip(series.grid, series.averages, series.magnitudes)]
    return header, rows


def discrepancy_csv_rows(report: dc.DiscrepancyReport) -> Tuple[List[str], List[List]]:
    header = ["N", "dstar", "err_bound", "method"]
    rows = [[N, v, e, m] for N, v, e, m in
            zip(report.grid, report.values, report.error_bounds, report.methods)]
    return header, rows


def decay_csv_rows(fit) -> Tuple[List[str], List[List]]:
    header = ["direction_index", "omega", "R", "abs_integral", "err_est", "flags"]
    rows = []
    for i, omega in enumerate(fit.directions):
        otext = ";".join(repr(float(c)) for c in omega)
        for j, r in enumerate(fit.radii):
            flag = "unreliable" if fit.unreliable[i, j] else ""
            err = float(fit.errors[i, j]) if fit.errors is not None else 0.0
            rows.append([i, otext, float(r), float(fit.magnitudes[i, j]), err, flag])
    if fit.degenerate_direction is not None:
        otext = ";".join(repr(float(c)) for c in fit.degenerate_direction)
        for j, r in enumerate(fit.radii):
            rows.append([-1, otext, float(r), float(fit.degenerate_magnitudes[j]),
                         0.0, "degenerate"])
    return header, rows


def emit_csv(report: ExperimentReport, path: str) -> None:
    """Long-form discrepancy table: one row per (sample, N)."""
    header = ["sample", "x", "N", "dstar", "err_bound", "method"]
    rows: List[List] = []
    for s in report.samples:
        if s.error is not None:
            continue
        for N, v, e, m in zip(s.discrepancy.grid, s.discrepancy.values,
                              s.discrepancy.error_bounds, s.discrepancy.methods):
            rows.append([s.index, s.x, N, v, e, m])
    try:
        write_csv(path, header, rows)
    except OSError as err:
        raise OSError(f"cannot write CSV to '{path}': {err}") from err


def emit_weyl_csv(report: ExperimentReport, path: str) -> None:
    header = ["sample", "x", "N", "v", "abs_F"]
    rows: List[List] = []
    for s in report.samples:
        if s.error is not None:
            continue
        for N, mag, v in zip(report.grid, s.weyl_max, s.weyl_argmax):
            vtext = ";".join(str(int(c)) for c in v)
            rows.append([s.index, s.x, N, vtext, mag])
    write_csv(path, header, rows)


def emit_quantiles_csv(report: ExperimentReport, path: str) -> None:
    header = ["N", "dstar_median", "dstar_q10", "dstar_q90"]
    rows = [[N, m, a, b] for N, m, a, b in
            zip(report.grid, report.dstar_median, report.dstar_q10,
                report.dstar_q90)]
    write_csv(path, header, rows)


# -- SVG ----------------------------------------------------------------------

_SVG_W, _SVG_H, _SVG_MARGIN = 800, 520, 64


def _svg_polyline(xs: List[float], ys: List[float], style: str) -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return f'  <polyline fill="none" {style} points="{pts}"/>'


def svg_loglog(series: List[Tuple[Sequence[float], Sequence[float], str]],
               x_label: str, y_label: str, path: str) -> None:
    """Minimal deterministic log-log line plot. One polyline per series;
    the style string distinguishes sample curves from the median."""
    finite = [(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), style)
              for xs, ys, style in series]
    all_x = np.concatenate([xs for xs, _, _ in finite])
    all_y = np.concatenate([ys for _, ys, _ in finite])
    all_y = np.maximum(all_y, 1e-300)
    lx0, lx1 = math.log10(all_x.min()), math.log10(all_x.max())
    ly0, ly1 = math.log10(all_y.min()), math.log10(all_y.max())
    if lx1 - lx0 < 1e-9:
        lx1 = lx0 + 1.0
    if ly1 - ly0 < 1e-9:
        ly1 = ly0 + 1.0
    inner_w = _SVG_W - 2 * _SVG_MARGIN
    inner_h = _SVG_H - 2 * _SVG_MARGIN

    def to_px(xs, ys):
        px = _SVG_MARGIN + (np.log10(xs) - lx0) / (lx1 - lx0) * inner_w
        py = _SVG_H - _SVG_MARGIN - (np.log10(np.maximum(ys, 1e-300)) - ly0) / (ly1 - ly0) * inner_h
        return list(px), list(py)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'  <rect x="0" y="0" width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'  <line x1="{_SVG_MARGIN}" y1="{_SVG_H - _SVG_MARGIN}" x2="{_SVG_W - _SVG_MARGIN}" '
        f'y2="{_SVG_H - _SVG_MARGIN}" stroke="black"/>',
        f'  <line x1="{_SVG_MARGIN}" y1="{_SVG_MARGIN}" x2="{_SVG_MARGIN}" '
        f'y2="{_SVG_H - _SVG_MARGIN}" stroke="black"/>',
    ]
    for decade in range(math.floor(lx0), math.floor(lx1) + 1):
        if lx0 <= decade <= lx1:
            px = _SVG_MARGIN + (decade - lx0) / (lx1 - lx0) * inner_w
            lines.append(f'  <line x1="{px:.2f}" y1="{_SVG_H - _SVG_MARGIN}" x2="{px:.2f}" '
                         f'y2="{_SVG_H - _SVG_MARGIN + 6}" stroke="black"/>')
            lines.append(f'  <text x="{px:.2f}" y="{_SVG_H - _SVG_MARGIN + 22}" '
                         f'font-size="12" text-anchor="middle">1e{decade}</text>')
    for decade in range(math.floor(ly0), math.floor(ly1) + 1):
        if ly0 <= decade <= ly1:
            py = _SVG_H - _SVG_MARGIN - (decade - ly0) / (ly1 - ly0) * inner_h
            lines.append(f'  <line x1="{_SVG_MARGIN - 6}" y1="{py:.2f}" x2="{_SVG_MARGIN}" '
                         f'y2="{py:.2f}" stroke="black"/>')
            lines.append(f'  <text x="{_SVG_MARGIN - 10}" y="{py + 4:.2f}" '
                         f'font-size="12" text-anchor="end">1e{decade}</text>')
    lines.append(f'  <text x="{_SVG_W // 2}" y="{_SVG_H - 12}" font-size="14" '
                 f'text-anchor="middle">{x_label}</text>')
    lines.append(f'  <text x="18" y="{_SVG_H // 2}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_SVG_H // 2})">{y_label}</text>')
    for xs, ys, style in finite:
        px, py = to_px(xs, ys)
        lines.append(_svg_polyline(px, py, style))
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_svg(report: ExperimentReport, path: str) -> None:
    """Log-log D* vs N: one polyline per x sample plus the median."""
    series = []
    for s in report.samples:
        if s.error is None:
            series.append((s.discrepancy.grid, s.discrepancy.values,
                           'stroke="#999999" stroke-width="1" class="sample"'))
    if report.dstar_median:
        series.append((report.grid, report.dstar_median,
                       'stroke="#cc2222" stroke-width="2.5" class="median"'))
    try:
        svg_loglog(series, "N", "D*", path)
    except OSError as err:
        raise OSError(f"cannot write SVG to '{path}': {err}") from err
