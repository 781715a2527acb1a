"""Reduced words in the free group on generators g1, g2, ... and tuples of them.

A word is stored in syllable form: a tuple of ``(generator, exponent)`` pairs
with adjacent generators distinct and no zero exponents.  ``g1*g2^-2`` is
``((1, 1), (2, -2))`` and the identity is the empty tuple.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

__all__ = [
    "Word",
    "WordTuple",
    "WordSyntaxError",
    "IDENTITY",
    "gen",
    "multiply",
    "inverse",
    "length",
    "multi_length",
    "parse",
    "format_word",
    "random_word",
]


class WordSyntaxError(ValueError):
    """Raised by :func:`parse` on malformed input; ``position`` is the offending offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


def _reduce(syllables: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    for g, e in syllables:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            s = out[-1][1] + e
            if s:
                out[-1] = (g, s)
            else:
                out.pop()
        else:
            out.append((g, e))
    return tuple(out)


class Word:
    """Immutable reduced word; hashable so it can key sparse maps."""

    __slots__ = ("syllables", "_hash")

    def __init__(self, syllables: Iterable[tuple[int, int]] = ()):
        sylls = []
        for g, e in syllables:
            g, e = int(g), int(e)
            if g < 1:
                raise ValueError(f"generator index must be positive, got {g}")
            sylls.append((g, e))
        self.syllables = _reduce(sylls)
        self._hash = hash(self.syllables)

    @classmethod
    def _trusted(cls, syllables: tuple[tuple[int, int], ...]) -> "Word":
        # caller guarantees reduced form
        w = object.__new__(cls)
        w.syllables = syllables
        w._hash = hash(syllables)
        return w

    @classmethod
    def from_letters(cls, letters: Iterable[int]) -> "Word":
        """Build from signed letters: ``[1, -2, -2]`` is ``g1*g2^-2``."""
        return cls((abs(a), 1 if a > 0 else -1) for a in letters)

    def letters(self) -> list[int]:
        out = []
        for g, e in self.syllables:
            out.extend([g if e > 0 else -g] * abs(e))
        return out

    def __mul__(self, other: "Word") -> "Word":
        a, b = self.syllables, other.syllables
        i, j = len(a), 0
        while i and j < len(b):
            g, e = a[i - 1]
            h, f = b[j]
            if g != h:
                break
            s = e + f
            if s:
                return Word._trusted(a[: i - 1] + ((g, s),) + b[j + 1 :])
            i -= 1
            j += 1
        return Word._trusted(a[:i] + b[j:])

    def inverse(self) -> "Word":
        return Word._trusted(tuple((g, -e) for g, e in reversed(self.syllables)))

    def __invert__(self) -> "Word":
        return self.inverse()

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def max_generator(self) -> int:
        return max((g for g, _ in self.syllables), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self._hash == other._hash and self.syllables == other.syllables

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Word") -> bool:
        return (len(self), self.syllables) < (len(other), other.syllables)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


IDENTITY = Word()


def gen(i: int, power: int = 1) -> Word:
    """The word ``g_i^power``."""
    return Word(((i, power),))


class WordTuple:
    """Element of the r-fold product of free groups; arity fixed at construction."""

    __slots__ = ("components", "_hash")

    def __init__(self, components: Iterable[Word | str]):
        comps = tuple(parse(c) if isinstance(c, str) else c for c in components)
        if not comps:
            raise ValueError("WordTuple needs arity >= 1")
        self.components = comps
        self._hash = hash(comps)

    @classmethod
    def _trusted(cls, comps: tuple[Word, ...]) -> "WordTuple":
        t = object.__new__(cls)
        t.components = comps
        t._hash = hash(comps)
        return t

    @classmethod
    def identity(cls, arity: int) -> "WordTuple":
        return cls._trusted((IDENTITY,) * arity)

    @property
    def arity(self) -> int:
        return len(self.components)

    def __mul__(self, other: "WordTuple") -> "WordTuple":
        if len(self.components) != len(other.components):
            raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")
        return WordTuple._trusted(tuple(u * v for u, v in zip(self.components, other.components)))

    def inverse(self) -> "WordTuple":
        return WordTuple._trusted(tuple(w.inverse() for w in self.components))

    def __invert__(self) -> "WordTuple":
        return self.inverse()

    def multi_length(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.components)

    def __getitem__(self, j: int) -> Word:
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WordTuple):
            return NotImplemented
        return self._hash == other._hash and self.components == other.components

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "WordTuple") -> bool:
        return self.components < other.components

    def to_strings(self) -> list[str]:
        return [format_word(w) for w in self.components]

    def __str__(self) -> str:
        return "(" + ", ".join(self.to_strings()) + ")"

    def __repr__(self) -> str:
        return f"WordTuple({self.to_strings()!r})"


def multiply(u: Word, v: Word) -> Word:
    return u * v


def inverse(w: Word) -> Word:
    return w.inverse()


def length(w: Word) -> int:
    return len(w)


def multi_length(t: WordTuple) -> tuple[int, ...]:
    return t.multi_length()


_TOKEN = re.compile(r"(?P<e>e)|g(?P<g>\d+)(?:\^(?P<x>-?\d+))?")


def parse(text: str) -> Word:
    """Parse ``e`` or ``g<i>[^<k>]`` terms joined by ``*``; the result is reduced.

    Whitespace is ignored.  Errors report the offset into the original text.

    >>> parse("g1*g2^-2")
    Word('g1*g2^-2')
    >>> parse("g1 * g1^-1")
    Word('e')
    """
    offsets = [i for i, c in enumerate(text) if not c.isspace()]
    s = "".join(text[i] for i in offsets)
    offsets.append(len(text))
    if not s:
        raise WordSyntaxError("empty word", text, 0)
    sylls = []
    pos = 0
    while True:
        m = _TOKEN.match(s, pos)
        if m is None:
            raise WordSyntaxError("expected 'e' or 'g<index>'", text, offsets[pos])
        if m.group("e") is not None:
            if sylls or m.end() != len(s):
                raise WordSyntaxError("'e' must stand alone", text, offsets[m.start()])
            return IDENTITY
        g = int(m.group("g"))
        if g == 0:
            raise WordSyntaxError("generator index 0", text, offsets[m.start("g")])
        x = m.group("x")
        if x is not None and int(x) == 0:
            raise WordSyntaxError("zero exponent", text, offsets[m.start("x")])
        sylls.append((g, int(x) if x is not None else 1))
        pos = m.end()
        if pos == len(s):
            break
        if s[pos] != "*":
            raise WordSyntaxError("expected '*'", text, offsets[pos])
        pos += 1
    return Word(sylls)


def format_word(w: Word) -> str:
    if not w.syllables:
        return "e"
    return "*".join(f"g{g}" if e == 1 else f"g{g}^{e}" for g, e in w.syllables)


def random_word(rng, length: int, n_gens: int) -> Word:
    """Uniform random reduced word of exactly ``length`` letters over g1..g_n_gens."""
    letters: list[int] = []
    while len(letters) < length:
        a = int(rng.integers(1, n_gens + 1)) * (1 if rng.random() < 0.5 else -1)
        if letters and letters[-1] == -a:
            continue
        letters.append(a)
    return Word.from_letters(letters)


def words_of_length(n: int, n_gens: int) -> list[Word]:
    """All reduced words of length exactly ``n`` over g1..g_n_gens."""
    layer: list[list[int]] = [[]]
    for _ in range(n):
        nxt = []
        for w in layer:
            for g in range(1, n_gens + 1):
                for a in (g, -g):
                    if w and w[-1] == -a:
                        continue
                    nxt.append(w + [a])
        layer = nxt
    return [Word.from_letters(w) for w in layer]


def ball(radius: int, n_gens: int) -> list[Word]:
    out = []
    for n in range(radius + 1):
        out.extend(words_of_length(n, n_gens))
    return out


def tuple_keys(components: Sequence[Sequence[Word]]) -> list[WordTuple]:
    from itertools import product

    return [WordTuple._trusted(tuple(c)) for c in product(*components)]
