"""Two-sided bounds on the norm of the left convolution operator ``L_f: g -> f*g``.

Lower bounds come from trace moments of ``h = f^* f``: since the canonical
trace is a faithful state, ``trace(h^m) ** (1/(2m))`` never exceeds
``||L_f||`` and increases to it.  Upper bounds come from the Haagerup-type
inequality on products of free groups and from the block estimate for
bilinear sums of shifts.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import (
    AlgebraElement,
    GaussianRational,
    adjoint_elem,
    convolve,
    grades,
    l2_norm,
    to_exact,
    trace_of_product,
)
from .words import WordTuple, gen

__all__ = [
    "NormEstimate",
    "CoefficientMatrix",
    "NotTracelessError",
    "DEFAULT_SCHEDULE",
    "DEFAULT_BUDGET",
    "moment_lower",
    "haagerup_upper",
    "flatten_bilinear",
    "thm2_upper",
    "block_bound",
    "estimate_norm",
    "tree_walk_moments",
]

DEFAULT_SCHEDULE = (1, 2, 4, 8, 16)
# counted as candidate support points, i.e. |supp a| * |supp b| per convolution
DEFAULT_BUDGET = 5_000_000
TRACE_TOL = 1e-12


class NotTracelessError(ValueError):
    pass


@dataclass
class NormEstimate:
    lower: float
    upper: float = math.inf
    moment_schedule: list[tuple[int, float]] = field(default_factory=list)
    method_tags: dict[str, str] = field(default_factory=dict)
    truncated: bool = False
    skipped_powers: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise AssertionError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["upper"] = None if math.isinf(self.upper) else self.upper
        d["moment_schedule"] = [{"power": m, "value": v} for m, v in self.moment_schedule]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _root(tau, m: int) -> float:
    """``tau ** (1/(2m))`` for a nonnegative exact or float moment."""
    if isinstance(tau, GaussianRational):
        tau = tau.re
    if isinstance(tau, complex):
        tau = tau.real
    if tau <= 0:
        return 0.0
    if isinstance(tau, Fraction):
        lg = math.log(tau.numerator) - math.log(tau.denominator)
    else:
        lg = math.log(tau)
    return math.exp(lg / (2 * m))


class _PowerCache:
    """Convolution powers of ``h``.

    ``h^p`` is formed by squaring (``h^(p//2) * h^(p - p//2)``) when that fits
    the budget, otherwise by one more factor of ``h`` on ``h^(p-1)``.
    """

    def __init__(self, h: AlgebraElement, budget: int):
        self.powers = {1: h}
        self.budget = budget
        self.truncated = False
        self._failed: set[int] = set()

    def get(self, p: int) -> AlgebraElement | None:
        if p in self.powers:
            return self.powers[p]
        if p in self._failed:
            return None
        for a in (p // 2, p - 1):
            b = p - a
            x = self.get(a)
            y = self.get(b) if x is not None else None
            if x is not None and y is not None and len(x) * len(y) <= self.budget:
                self.powers[p] = convolve(x, y)
                return self.powers[p]
        self._failed.add(p)
        self.truncated = True
        return None

    def trace_power(self, m: int):
        """``trace(h^m)`` via ``trace(h^a * h^b)`` with the most balanced available split."""
        if m == 1:
            return self.powers[1].terms.get(WordTuple.identity(self.powers[1].arity), 0)
        for b in range(m // 2, 0, -1):
            x = self.get(m - b)
            if x is None:
                continue
            y = self.get(b)
            if y is not None:
                return trace_of_product(x, y)
        return None


def moment_lower(
    f: AlgebraElement,
    schedule=DEFAULT_SCHEDULE,
    exact: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> NormEstimate:
    """Certified lower bound ``max_m trace((f^* f)^m) ** (1/(2m))`` over ``schedule``.

    ``trace(h^m)`` is evaluated as ``trace(h^a * h^b)`` with ``a + b = m``,
    so only powers up to about ``m/2`` are materialized.  If no split of a
    moment fits within ``budget`` candidate support points, that moment is
    skipped and the estimate is flagged ``truncated``; the remaining values
    are still valid bounds.
    """
    schedule = sorted({int(m) for m in schedule})
    if not schedule or schedule[0] < 1:
        raise ValueError(f"schedule must be nonempty with powers >= 1, got {schedule}")
    f = f.to_exact() if exact else f.to_float()
    tag = {"lower": "trace-moment (exact)" if exact else "trace-moment (float)"}
    if not f.terms:
        return NormEstimate(0.0, moment_schedule=[(m, 0.0) for m in schedule], method_tags=tag)
    cache = _PowerCache(convolve(adjoint_elem(f), f), budget)
    values: list[tuple[int, float]] = []
    skipped: list[int] = []
    for m in schedule:
        tau = cache.trace_power(m)
        if tau is None:
            skipped.append(m)
        else:
            values.append((m, _root(tau, m)))
    return NormEstimate(
        lower=max((v for _, v in values), default=0.0),
        moment_schedule=values,
        method_tags=tag,
        truncated=bool(skipped),
        skipped_powers=skipped,
    )


def haagerup_upper(f: AlgebraElement) -> float:
    """Grade-wise bound ``sum_n prod_j (n_j + 1) * ||f restricted to E_n||_2``.

    For ``f`` supported on a single grade this is exactly the product-group
    Haagerup inequality; with several grades it adds the triangle inequality.
    """
    total = 0.0
    for n, part in grades(f).items():
        total += math.prod(nj + 1 for nj in n) * l2_norm(part)
    return total


def haagerup_tag(f: AlgebraElement) -> str:
    return "haagerup-single-grade" if len(grades(f)) <= 1 else "haagerup-gradewise-triangle (derived)"


def multi_indices(N: int, k: int) -> list[tuple[int, ...]]:
    """``{1..N}^k`` in lexicographic order; position ``i`` is row/column ``i``."""
    return list(itertools.product(range(1, N + 1), repeat=k))


@dataclass
class CoefficientMatrix:
    """Coefficients ``a[v, w]`` for ``v, w`` in ``{1..N}^k``, lexicographic indexing."""

    N: int
    k: int
    entries: np.ndarray

    def __post_init__(self):
        d = self.N ** self.k
        self.entries = np.asarray(self.entries)
        if self.entries.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} array for N={self.N}, k={self.k}, got {self.entries.shape}")

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def trace(self):
        return sum(self.entries[i, i] for i in range(self.entries.shape[0]))

    def is_traceless(self, tol: float = TRACE_TOL) -> bool:
        t = self.trace()
        if self.exact:
            return t == 0
        return abs(t) <= tol

    def hs_norm(self) -> float:
        if self.exact:
            return math.sqrt(float(sum(_abs2_exact(c) for c in self.entries.flat)))
        return float(np.linalg.norm(self.entries))


def _abs2_exact(c):
    c = to_exact(c)
    if isinstance(c, GaussianRational):
        return c.re * c.re + c.im * c.im
    return c * c


def flatten_bilinear(a: CoefficientMatrix) -> AlgebraElement:
    """Group-algebra element of ``sum_{v,w} a[v,w] U_v^* U_w``.

    ``U_v^* U_w`` is left translation by ``(g_{v1}^-1 g_{w1}, ..., g_{vk}^-1 g_{wk})``.
    Entries landing on the same tuple are summed.
    """
    idx = multi_indices(a.N, a.k)
    shift = {(i, j): gen(i, -1) * gen(j) for i in range(1, a.N + 1) for j in range(1, a.N + 1)}
    exact = a.exact
    terms: dict[WordTuple, object] = {}
    for p, v in enumerate(idx):
        for q, w in enumerate(idx):
            c = a.entries[p, q]
            if c == 0:
                continue
            c = to_exact(c) if exact else complex(c)
            key = WordTuple._trusted(tuple(shift[vi, wi] for vi, wi in zip(v, w)))
            terms[key] = terms.get(key, 0) + c
    return AlgebraElement(a.k, terms, exact=exact)


def block_bound(N: int, k: int) -> float:
    """``N^(k/2) sqrt((1 + 9/N)^k - 1)``, evaluated as ``sqrt((N+9)^k - N^k)``."""
    return math.sqrt((N + 9) ** k - N ** k)


def thm2_upper(a: CoefficientMatrix) -> float:
    """Upper bound for the operator norm of ``flatten_bilinear(a)``; needs ``trace(a) == 0``."""
    if not a.is_traceless():
        raise NotTracelessError(
            f"block estimate requires a traceless coefficient matrix; trace(a) = {a.trace()}"
        )
    return block_bound(a.N, a.k) * a.hs_norm()


def estimate_norm(f: AlgebraElement, schedule=DEFAULT_SCHEDULE, exact=True, budget=DEFAULT_BUDGET) -> NormEstimate:
    est = moment_lower(f, schedule, exact=exact, budget=budget)
    est.upper = haagerup_upper(f)
    est.method_tags["upper"] = haagerup_tag(f)
    est.__post_init__()
    return est


def estimate_bilinear_norm(a: CoefficientMatrix, schedule=DEFAULT_SCHEDULE, budget=DEFAULT_BUDGET) -> NormEstimate:
    f = flatten_bilinear(a)
    est = moment_lower(f, schedule, exact=True, budget=budget)
    est.upper = thm2_upper(a)
    est.method_tags["upper"] = "block-estimate"
    est.__post_init__()
    return est


def tree_walk_moments(N: int, max_m: int) -> list[int]:
    """``trace(h^m)`` for ``f = sum_{i<=N} delta_{g_i}``, ``m = 0..max_m``.

    Counts closed walks of length ``2m`` from the root of the N-regular tree.
    The reduced form of any product ``g_{i1}^-1 g_{j1} g_{i2}^-1 ...`` alternates
    in sign, so its length alone is a sufficient state.
    """
    out = []
    counts = {0: 1}
    for step in range(2 * max_m + 1):
        if step % 2 == 0:
            out.append(counts.get(0, 0))
        nxt: dict[int, int] = {}
        for L, c in counts.items():
            if L == 0:
                nxt[1] = nxt.get(1, 0) + N * c
            else:
                nxt[L - 1] = nxt.get(L - 1, 0) + c
                nxt[L + 1] = nxt.get(L + 1, 0) + (N - 1) * c
        counts = nxt
    return out
