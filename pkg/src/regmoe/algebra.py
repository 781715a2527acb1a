"""Finitely supported functions on products of free groups.

Elements carry either exact scalars (``int``, ``Fraction`` or
:class:`GaussianRational`) or Python ``complex`` values.  The exact tower is
what the moment method uses: ``tau(h^m) ** (1/m)`` magnifies any rounding in
``h^m``, so powers are formed without floating point.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from .words import Word, WordTuple, parse, format_word

__all__ = [
    "GaussianRational",
    "AlgebraElement",
    "delta",
    "convolve",
    "restrict",
    "l2_norm",
    "trace",
    "adjoint_elem",
    "trace_of_product",
    "FLOAT_PRUNE",
]

FLOAT_PRUNE = 1e-15


class GaussianRational:
    """Exact complex rational ``re + i*im``.

    Arithmetic falls back to a plain ``int``/``Fraction`` whenever the
    imaginary part vanishes, which keeps the common real case fast.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Rational = 0, im: Rational = 0):
        self.re = re
        self.im = im

    @staticmethod
    def make(re, im):
        return re if im == 0 else GaussianRational(re, im)

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational.make(self.re + other.re, self.im + other.im)
        if isinstance(other, Rational):
            return GaussianRational(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            return GaussianRational.make(a * c - b * d, a * d + b * c)
        if isinstance(other, Rational):
            return GaussianRational.make(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            return GaussianRational.make(Fraction(self.re) / other, Fraction(self.im) / other)
        if isinstance(other, GaussianRational):
            d = other.re * other.re + other.im * other.im
            return self * GaussianRational(Fraction(other.re) / d, Fraction(-other.im) / d)
        return NotImplemented

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, Rational):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        return hash(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _abs2(c) -> float | Rational:
    if isinstance(c, complex):
        return c.real * c.real + c.imag * c.imag
    if isinstance(c, GaussianRational):
        return c.re * c.re + c.im * c.im
    return c * c


def to_exact(c):
    """Convert a scalar to the exact tower; floats are taken at their binary value."""
    if isinstance(c, (int, Fraction, GaussianRational)):
        return c
    if isinstance(c, float):
        return Fraction(c)
    if isinstance(c, complex):
        return GaussianRational.make(Fraction(c.real), Fraction(c.imag))
    if isinstance(c, Rational):
        return Fraction(c)
    raise TypeError(f"cannot convert {type(c).__name__} to an exact scalar")


class AlgebraElement:
    """Sparse map ``WordTuple -> scalar`` with a fixed arity.

    Zero coefficients are never stored.  In float mode, coefficients with
    magnitude at most ``FLOAT_PRUNE`` are dropped as well.
    """

    __slots__ = ("arity", "terms", "exact")

    def __init__(self, arity: int, terms: Mapping[WordTuple, object] | None = None, exact: bool = False):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        self.arity = arity
        self.exact = exact
        self.terms: dict[WordTuple, object] = {}
        for key, c in (terms or {}).items():
            if not isinstance(key, WordTuple):
                key = WordTuple(key)
            if key.arity != arity:
                raise ValueError(f"key {key} has arity {key.arity}, expected {arity}")
            c = to_exact(c) if exact else complex(c)
            if not _is_zero(c, exact):
                self.terms[key] = c

    @classmethod
    def _trusted(cls, arity: int, terms: dict, exact: bool) -> "AlgebraElement":
        x = object.__new__(cls)
        x.arity = arity
        x.terms = terms
        x.exact = exact
        return x

    @classmethod
    def zero(cls, arity: int, exact: bool = False) -> "AlgebraElement":
        return cls._trusted(arity, {}, exact)

    def to_exact(self) -> "AlgebraElement":
        if self.exact:
            return self
        return AlgebraElement._trusted(self.arity, {k: to_exact(c) for k, c in self.terms.items()}, True)

    def to_float(self) -> "AlgebraElement":
        if not self.exact:
            return self
        return AlgebraElement(self.arity, {k: complex(c) for k, c in self.terms.items()})

    def support(self) -> list[WordTuple]:
        return list(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, key) -> object:
        if not isinstance(key, WordTuple):
            key = WordTuple(key if isinstance(key, (list, tuple)) else [key])
        return self.terms.get(key, 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_arity(self, other)
        exact = self.exact and other.exact
        a, b = (self, other) if exact else (self.to_float(), other.to_float())
        out = dict(a.terms)
        for k, c in b.terms.items():
            out[k] = out.get(k, 0) + c
        return AlgebraElement._trusted(self.arity, _pruned(out, exact), exact)

    def __neg__(self) -> "AlgebraElement":
        return self.scale(-1)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, c) -> "AlgebraElement":
        c = to_exact(c) if self.exact else complex(c)
        out = {k: c * v for k, v in self.terms.items()}
        return AlgebraElement._trusted(self.arity, _pruned(out, self.exact), self.exact)

    def __rmul__(self, c) -> "AlgebraElement":
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return self.scale(other)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {c}" for k, c in sorted(self.terms.items()))
        return f"AlgebraElement(arity={self.arity}, {{{inner}}})"

    def to_json(self) -> dict:
        rows = []
        for k in sorted(self.terms):
            c = self.terms[k]
            if self.exact:
                re, im = (c.re, c.im) if isinstance(c, GaussianRational) else (c, 0)
                rows.append({"key": k.to_strings(), "re": str(Fraction(re)), "im": str(Fraction(im))})
            else:
                rows.append({"key": k.to_strings(), "re": c.real, "im": c.imag})
        return {"arity": self.arity, "exact": self.exact, "terms": rows}

    @classmethod
    def from_json(cls, data: dict | str) -> "AlgebraElement":
        if isinstance(data, str):
            data = json.loads(data)
        arity = int(data["arity"])
        rows = data["terms"]
        exact = bool(data.get("exact", any(isinstance(r["re"], str) for r in rows)))
        terms = {}
        for r in rows:
            key = WordTuple(parse(s) for s in r["key"])
            if exact:
                c = GaussianRational.make(Fraction(r["re"]), Fraction(r.get("im", 0)))
            else:
                c = complex(float(r["re"]), float(r.get("im", 0.0)))
            terms[key] = terms.get(key, 0) + c
        return cls(arity, terms, exact=exact)


def _is_zero(c, exact: bool) -> bool:
    if exact:
        return c == 0
    return abs(c) <= FLOAT_PRUNE


def _pruned(terms: dict, exact: bool) -> dict:
    if exact:
        return {k: c for k, c in terms.items() if c != 0}
    return {k: c for k, c in terms.items() if abs(c) > FLOAT_PRUNE}


def _check_arity(f: AlgebraElement, g: AlgebraElement) -> None:
    if f.arity != g.arity:
        raise ValueError(f"arity mismatch: {f.arity} vs {g.arity}")


def delta(*components: Word | str, coeff=1, exact: bool = True) -> AlgebraElement:
    """Point mass ``coeff * delta_x`` at the tuple of the given components."""
    key = WordTuple(components)
    return AlgebraElement(key.arity, {key: coeff}, exact=exact)


def from_terms(terms: Iterable[tuple[Iterable[Word | str], object]], exact: bool = True) -> AlgebraElement:
    """Build from ``[(components, coeff), ...]``; repeated keys are summed."""
    acc: dict[WordTuple, object] = {}
    arity = None
    for comps, c in terms:
        key = WordTuple(comps)
        arity = key.arity if arity is None else arity
        c = to_exact(c) if exact else complex(c)
        acc[key] = acc.get(key, 0) + c
    if arity is None:
        raise ValueError("no terms given; use AlgebraElement.zero(arity)")
    return AlgebraElement(arity, acc, exact=exact)


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """``(f*g)(s) = sum_{tu=s} f(t) g(u)``.

    Mixed exact/float inputs produce a float result.
    """
    _check_arity(f, g)
    exact = f.exact and g.exact
    if not exact:
        f, g = f.to_float(), g.to_float()
    if not f.terms or not g.terms:
        return AlgebraElement._trusted(f.arity, {}, exact)
    # Components multiply independently, so products of distinct component
    # words are tabulated once per coordinate and pairs only do lookups.
    r = f.arity
    f_idx, f_tabs = _index_components(f.terms, r)
    g_idx, g_tabs = _index_components(g.terms, r)
    tables = [[[a * b for b in gw] for a in fw] for fw, gw in zip(f_tabs, g_tabs)]
    if r == 1:
        t0 = tables[0]
        rows = [t0[i] for (i,) in f_idx]
        cols = [j for (j,) in g_idx]

        def keys(n):
            row = rows[n]
            return [row[j] for j in cols]
    else:
        def keys(n):
            rs = [tab[i] for tab, i in zip(tables, f_idx[n])]
            return [tuple(row[j] for row, j in zip(rs, gj)) for gj in g_idx]

    fc, gc = list(f.terms.values()), list(g.terms.values())
    if exact:
        acc = _accumulate_exact(fc, gc, keys)
    else:
        acc = _accumulate(fc, gc, keys)
    wrap = (lambda w: WordTuple._trusted((w,))) if r == 1 else WordTuple._trusted
    return AlgebraElement._trusted(r, {wrap(k): c for k, c in _pruned(acc, exact).items()}, exact)


def _accumulate(fc, gc, keys) -> dict:
    out: dict = {}
    get = out.get
    for n, a in enumerate(fc):
        for s, b in zip(keys(n), gc):
            out[s] = get(s, 0) + a * b
    return out


def _accumulate_exact(fc, gc, keys) -> dict:
    # real and imaginary parts are accumulated as separate rationals
    if not any(isinstance(c, GaussianRational) for c in fc + gc):
        return _accumulate(fc, gc, keys)
    split = lambda c: (c.re, c.im) if isinstance(c, GaussianRational) else (c, 0)
    gparts = [split(c) for c in gc]
    re: dict = {}
    im: dict = {}
    rget, iget = re.get, im.get
    for n, a in enumerate(fc):
        ar, ai = split(a)
        for s, (br, bi) in zip(keys(n), gparts):
            re[s] = rget(s, 0) + (ar * br - ai * bi)
            im[s] = iget(s, 0) + (ar * bi + ai * br)
    make = GaussianRational.make
    return {s: make(v, im[s]) for s, v in re.items()}


def _index_components(terms: dict, r: int):
    pos: list[dict[Word, int]] = [{} for _ in range(r)]
    idx = []
    for key in terms:
        idx.append(tuple(p.setdefault(w, len(p)) for p, w in zip(pos, key.components)))
    return idx, [list(p) for p in pos]


def restrict(f: AlgebraElement, m: Iterable[int]) -> AlgebraElement:
    """Pointwise product with the indicator of the tuples of multi-length ``m``."""
    m = tuple(int(x) for x in m)
    if len(m) != f.arity:
        raise ValueError(f"grade {m} has {len(m)} entries, element arity is {f.arity}")
    if any(x < 0 for x in m):
        raise ValueError(f"grade entries must be nonnegative: {m}")
    terms = {k: c for k, c in f.terms.items() if k.multi_length() == m}
    return AlgebraElement._trusted(f.arity, terms, f.exact)


def grades(f: AlgebraElement) -> dict[tuple[int, ...], AlgebraElement]:
    """Split ``f`` by multi-length of its support."""
    parts: dict[tuple[int, ...], dict] = {}
    for k, c in f.terms.items():
        parts.setdefault(k.multi_length(), {})[k] = c
    return {m: AlgebraElement._trusted(f.arity, t, f.exact) for m, t in sorted(parts.items())}


def l2_norm_squared(f: AlgebraElement):
    """Exact in exact mode."""
    return sum((_abs2(c) for c in f.terms.values()), 0)


def l2_norm(f: AlgebraElement) -> float:
    return math.sqrt(float(l2_norm_squared(f)))


def trace(f: AlgebraElement):
    """Canonical trace: the coefficient at the identity tuple."""
    return f.terms.get(WordTuple.identity(f.arity), 0)


def adjoint_elem(f: AlgebraElement) -> AlgebraElement:
    """``f*(x) = conj(f(x^-1))``."""
    terms = {k.inverse(): c.conjugate() for k, c in f.terms.items()}
    return AlgebraElement._trusted(f.arity, terms, f.exact)


def trace_of_product(f: AlgebraElement, g: AlgebraElement):
    """``trace(f*g) = sum_x f(x) g(x^-1)`` without forming the product."""
    _check_arity(f, g)
    exact = f.exact and g.exact
    if not exact:
        f, g = f.to_float(), g.to_float()
    small, big = (f, g) if len(f.terms) <= len(g.terms) else (g, f)
    total = 0
    bt = big.terms
    for k, c in small.terms.items():
        d = bt.get(k.inverse())
        if d is not None:
            total = total + c * d
    return total


def format_key(key: WordTuple) -> str:
    return ", ".join(format_word(w) for w in key)
