"""Sequence families a: N -> R and averaging index-set families.

Families cover the standard zoo: identity, affine, fractional powers,
powers of log, n + log n, the square-root residue n - floor(sqrt n)^2,
the block-constant tower exp(exp(floor(log n))), custom closed-form
expressions in n, composition with an outer function, and real linear
combinations.

Everything evaluates elementwise on integer numpy arrays. The tower
family overflows doubles once floor(log n) >= 7, so its evaluator also
exposes exact block indices and (mantissa, base-2 exponent) pairs;
difference-based consumers (the growth checker, the scattered-sum) use
those to keep differences meaningful where values alone saturate to inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from . import expr as ex

# Derivative floor for the composition diagnostic: the outer function's
# derivative is sampled along the inner sequence and must stay above this.
COMPOSE_DERIVATIVE_FLOOR = 1e-3
_COMPOSE_SAMPLES = 64

_MAX_MATERIALIZE = 1 << 26


@dataclass(frozen=True)
class SequenceSpec:
    """A named family plus parameters; immutable and hashable."""

    family: str
    params: tuple = ()
    # set by compose(): whether the outer derivative stayed above the floor
    # at all sampled points (None for non-composed specs)
    derivative_diagnostic: Optional[bool] = None


def identity() -> SequenceSpec:
    return SequenceSpec("identity")


def affine(alpha: float, beta: float = 0.0) -> SequenceSpec:
    if alpha == 0.0 and beta == 0.0:
        raise ValueError("affine sequence must not be identically zero")
    return SequenceSpec("affine", (float(alpha), float(beta)))


def power(eps: float) -> SequenceSpec:
    if not eps > 0:
        raise ValueError("power exponent must be positive")
    return SequenceSpec("power", (float(eps),))


def log_power(p: float) -> SequenceSpec:
    if not p > 0:
        raise ValueError("log-power exponent must be positive")
    return SequenceSpec("logpow", (float(p),))


def n_plus_log() -> SequenceSpec:
    return SequenceSpec("nlog")


def sqrt_residue() -> SequenceSpec:
    return SequenceSpec("sqrtres")


def iterated_exp() -> SequenceSpec:
    return SequenceSpec("iterexp")


def custom(formula: Union[str, ex.Node]) -> SequenceSpec:
    node = ex.parse_expr(formula, var="n") if isinstance(formula, str) else formula
    return SequenceSpec("custom", (node,))


def linear_combination(parts: Sequence[Tuple[float, SequenceSpec]]) -> SequenceSpec:
    """Sum of weight_i * a_i(n). Zero-weight parts are dropped; at least
    one nonzero weight must remain."""
    kept = tuple((float(w), spec) for w, spec in parts if w != 0.0)
    if not kept:
        raise ValueError("linear combination needs at least one nonzero weight")
    return SequenceSpec("combo", kept)


def compose(spec: SequenceSpec, outer: Union[str, ex.Node]) -> SequenceSpec:
    """Composed sequence P(a(n)).

    The derivative condition that makes composition preserve scatteredness
    (|P'| bounded below along the sequence) is sampled at 64 values of the
    inner sequence and recorded as a diagnostic flag, not enforced: the
    condition is sufficient, not necessary. Domain errors of P at a sampled
    value do propagate.
    """
    node = ex.parse_expr(outer) if isinstance(outer, str) else outer
    inner_eval = make_sequence(spec)
    ns = np.unique(np.geomspace(1, 1 << 24, _COMPOSE_SAMPLES).astype(np.int64))
    values = np.asarray(inner_eval(ns), dtype=float)
    finite = values[np.isfinite(values)]
    ok = True
    if len(finite):
        derivs = ex.eval_jet_many(node, finite, 1)[1]
        ok = bool(np.min(np.abs(derivs)) > COMPOSE_DERIVATIVE_FLOOR)
    return SequenceSpec("compose", (spec, node), derivative_diagnostic=ok)


# ---------------------------------------------------------------------------
# Evaluation


def _as_index_array(n):
    arr = np.asarray(n)
    if arr.dtype.kind not in "iu":
        if not np.all(arr == np.floor(arr)):
            raise ValueError("sequence argument must be integral")
        arr = arr.astype(np.int64)
    if np.any(arr < 1):
        raise ValueError("sequence argument must be >= 1")
    return arr.astype(np.int64)


def _isqrt_array(n: np.ndarray) -> np.ndarray:
    s = np.floor(np.sqrt(n.astype(float))).astype(np.int64)
    # float sqrt can be off by one near perfect squares
    s = np.where((s + 1) * (s + 1) <= n, s + 1, s)
    s = np.where(s * s > n, s - 1, s)
    return s


class IteratedExpEvaluator:
    """exp(exp(floor(log n))): block-constant, overflowing doubles from
    block 7 on. Calls return doubles (inf past overflow); mantexp and
    abs_diff work in a (mantissa, base-2 exponent) representation."""

    def __call__(self, n):
        n = _as_index_array(n)
        j = self.block_index(n)
        t = np.exp(j.astype(float)) / math.log(2.0)
        e2 = np.floor(t)
        mant = np.exp2(t - e2)
        with np.errstate(over="ignore"):
            out = np.ldexp(mant, e2.astype(np.int64).clip(max=20000))
        return out if out.ndim else float(out)

    @staticmethod
    def block_index(n) -> np.ndarray:
        n = _as_index_array(n)
        return np.floor(np.log(n.astype(float))).astype(np.int64)

    def mantexp(self, n) -> Tuple[np.ndarray, np.ndarray]:
        j = self.block_index(n)
        t = np.exp(j.astype(float)) / math.log(2.0)
        e2 = np.floor(t).astype(np.int64)
        return np.exp2(t - e2), e2

    def abs_diff(self, n, m):
        """|a(n) - a(m)| as a double; exact 0 inside a block, inf once the
        true difference leaves double range."""
        jn, jm = self.block_index(n), self.block_index(m)
        mn, en = self.mantexp(n)
        mm, em = self.mantexp(m)
        hi_m, hi_e = np.where(en >= em, mn, mm), np.maximum(en, em)
        lo_m, lo_e = np.where(en >= em, mm, mn), np.minimum(en, em)
        scaled = lo_m * np.exp2(np.maximum(lo_e - hi_e, -1100).astype(float))
        with np.errstate(over="ignore"):
            out = np.ldexp(np.abs(hi_m - scaled), hi_e.clip(max=20000))
        out = np.where(jn == jm, 0.0, out)
        return out if out.ndim else float(out)


def make_sequence(spec: SequenceSpec) -> Callable:
    """Evaluator for the family: a total function on integer n >= 1
    accepting scalars or arrays."""
    family, p = spec.family, spec.params

    if family == "identity":
        return lambda n: _as_index_array(n).astype(float)
    if family == "affine":
        alpha, beta = p
        return lambda n: alpha * _as_index_array(n).astype(float) + beta
    if family == "power":
        (eps,) = p
        return lambda n: _as_index_array(n).astype(float) ** eps
    if family == "logpow":
        (pw,) = p
        # log(1) = 0 and 0**pw = 0, so the n=1 convention needs no branch
        return lambda n: np.log(_as_index_array(n).astype(float)) ** pw
    if family == "nlog":
        return lambda n: (lambda a: a + np.log(a))(_as_index_array(n).astype(float))
    if family == "sqrtres":
        def _sqrtres(n):
            arr = _as_index_array(n)
            return (arr - _isqrt_array(arr) ** 2).astype(float)
        return _sqrtres
    if family == "iterexp":
        return IteratedExpEvaluator()
    if family == "custom":
        (node,) = p
        return lambda n: ex.evaluate(node, _as_index_array(n).astype(float))
    if family == "compose":
        inner_spec, node = p
        inner = make_sequence(inner_spec)
        return lambda n: ex.evaluate(node, np.asarray(inner(n), dtype=float))
    if family == "combo":
        evals = [(w, make_sequence(s)) for w, s in p]
        def _combo(n):
            total = None
            for w, f in evals:
                term = w * np.asarray(f(n), dtype=float)
                total = term if total is None else total + term
            return total
        return _combo
    raise ValueError(f"unknown sequence family '{family}'")


def abs_difference(evaluator, ns, ms):
    """Elementwise |a(ns) - a(ms)|, via the evaluator's exact-difference
    hook when it has one (block-constant tower), plain doubles otherwise."""
    if hasattr(evaluator, "abs_diff"):
        return evaluator.abs_diff(ns, ms)
    return np.abs(np.asarray(evaluator(ns), dtype=float)
                  - np.asarray(evaluator(ms), dtype=float))


# ---------------------------------------------------------------------------
# Textual spec syntax (CLI surface)


def parse_sequence_spec(text: str) -> SequenceSpec:
    """Parse the CLI syntax: "identity", "affine:alpha=2,beta=1",
    "power:eps=0.5", "logpow:p=2", "nlog", "sqrtres", "iterexp",
    "custom:n + sin(n)/n", "combo:1*identity,-1*logpow:p=2",
    "compose:x^2@identity". Combos cannot nest."""
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.strip()
    if head == "identity":
        return identity()
    if head == "nlog":
        return n_plus_log()
    if head == "sqrtres":
        return sqrt_residue()
    if head == "iterexp":
        return iterated_exp()
    if head == "custom":
        return custom(rest)
    if head == "compose":
        outer_text, sep, inner_text = rest.partition("@")
        if not sep:
            raise ValueError("compose syntax is compose:OUTER_EXPR@INNER_SPEC")
        return compose(parse_sequence_spec(inner_text), outer_text)
    if head == "combo":
        parts = []
        for chunk in _split_combo(rest):
            w_text, sep, spec_text = chunk.partition("*")
            if not sep:
                raise ValueError(f"combo entry '{chunk}' needs WEIGHT*SPEC")
            parts.append((float(w_text), parse_sequence_spec(spec_text)))
        return linear_combination(parts)
    if head in ("affine", "power", "logpow"):
        kwargs = {}
        for item in rest.split(","):
            if not item.strip():
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"bad parameter '{item}' in '{text}'")
            kwargs[key.strip()] = float(value)
        if head == "affine":
            return affine(kwargs.get("alpha", 1.0), kwargs.get("beta", 0.0))
        if head == "power":
            return power(kwargs["eps"])
        return log_power(kwargs["p"])
    raise ValueError(f"unknown sequence family '{head}'")


def _split_combo(text: str):
    # split on commas that separate WEIGHT*SPEC entries, i.e. commas followed
    # by a (signed) number then '*'; parameter commas stay inside entries
    chunks, depth, start = [], 0, 0
    i = 0
    while i < len(text):
        c = text[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "," and depth == 0:
            tail = text[i + 1:].lstrip()
            head = tail.split("*", 1)[0]
            try:
                float(head)
                chunks.append(text[start:i])
                start = i + 1
            except ValueError:
                pass
        i += 1
    chunks.append(text[start:])
    return [c.strip() for c in chunks if c.strip()]


def spec_to_text(spec: SequenceSpec) -> str:
    family, p = spec.family, spec.params
    if family in ("identity", "nlog", "sqrtres", "iterexp"):
        return family
    if family == "affine":
        return f"affine:alpha={p[0]:g},beta={p[1]:g}"
    if family == "power":
        return f"power:eps={p[0]:g}"
    if family == "logpow":
        return f"logpow:p={p[0]:g}"
    if family == "custom":
        return f"custom:{ex.to_text(p[0], var='n')}"
    if family == "compose":
        return f"compose:{ex.to_text(p[1])}@{spec_to_text(p[0])}"
    if family == "combo":
        return "combo:" + ",".join(f"{w:g}*{spec_to_text(s)}" for w, s in p)
    raise ValueError(f"unknown sequence family '{family}'")


# ---------------------------------------------------------------------------
# Index-set families S_N


@dataclass(frozen=True)
class IndexSetFamily:
    family: str
    params: tuple = ()


def prefixes() -> IndexSetFamily:
    return IndexSetFamily("prefixes")


def geometric(rho: float) -> IndexSetFamily:
    if not rho > 1:
        raise ValueError("geometric ratio must exceed 1")
    return IndexSetFamily("geometric", (float(rho),))


def strided(c: int) -> IndexSetFamily:
    if c < 1:
        raise ValueError("stride must be a positive integer")
    return IndexSetFamily("strided", (int(c),))


def custom_nested(sets: Sequence[Sequence[int]]) -> IndexSetFamily:
    frozen = tuple(tuple(sorted(set(int(v) for v in s))) for s in sets)
    for a, b in zip(frozen, frozen[1:]):
        if not (set(a) < set(b)):
            raise ValueError("custom-nested sets must be strictly nested")
    return IndexSetFamily("custom", (frozen,))


def index_set_size(family: IndexSetFamily, N: int) -> int:
    """|S_N| without materializing the set."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if family.family == "prefixes":
        return N
    if family.family == "geometric":
        return math.ceil(family.params[0] ** N)
    if family.family == "strided":
        return N
    if family.family == "custom":
        sets = family.params[0]
        if N > len(sets):
            raise ValueError(f"custom-nested family has only {len(sets)} sets")
        return len(sets[N - 1])
    raise ValueError(f"unknown index-set family '{family.family}'")


@dataclass(frozen=True)
class IndexSetView:
    """S_N with its size and the running sum of 1/|S_M| for M <= N."""

    N: int
    size: int
    partial_inverse_sum: float
    _family: IndexSetFamily

    def members(self) -> np.ndarray:
        """S_N in increasing order."""
        fam = self._family
        if self.size > _MAX_MATERIALIZE:
            raise ValueError(f"refusing to materialize {self.size} indices")
        if fam.family == "prefixes":
            return np.arange(1, self.N + 1, dtype=np.int64)
        if fam.family == "geometric":
            return np.arange(1, self.size + 1, dtype=np.int64)
        if fam.family == "strided":
            c = fam.params[0]
            return np.arange(c, c * self.N + 1, c, dtype=np.int64)
        if fam.family == "custom":
            return np.asarray(fam.params[0][self.N - 1], dtype=np.int64)
        raise ValueError(f"unknown index-set family '{fam.family}'")

    def __iter__(self):
        return iter(self.members())


def index_sets(family: IndexSetFamily, N: int) -> IndexSetView:
    size = index_set_size(family, N)
    partial = sum(1.0 / index_set_size(family, M) for M in range(1, N + 1))
    return IndexSetView(N, size, partial, family)
