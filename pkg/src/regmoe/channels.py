"""Random-unitary channels built from left and right free-group shifts.

``U_i`` shifts ``delta_x`` to ``delta_{g_i x}`` and ``V_j`` shifts it to
``delta_{x g_j^-1}``; the two families commute.  With weight ``1/N`` per Kraus
operator these give the channels ``rho -> (1/N) sum_i U_i rho U_i^*`` and its
right-handed twin, and their k-fold tensor powers act componentwise on
``l2(F^k)``.

Direct outputs are finite rank, so everything here reduces to Gram matrices
of finitely many sparse vectors.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .words import Word, WordTuple, gen, random_word

__all__ = [
    "PureState",
    "ChannelSpec",
    "DensityMatrix",
    "GramCapExceeded",
    "NonUnitStateError",
    "apply_unitary",
    "complementary_output",
    "direct_output_spectrum",
    "direct_output_matrix",
    "j_conjugate",
    "nonzero_spectrum",
    "random_state",
    "GRAM_CAP",
    "ZERO_EIG",
]

GRAM_CAP = 4096
ZERO_EIG = 1e-12
NORM_TOL = 1e-12
INPUT_NORM_TOL = 1e-9


class GramCapExceeded(RuntimeError):
    pass


class NonUnitStateError(ValueError):
    pass


class PureState:
    """Finitely supported unit vector in ``l2(F^k)``, keyed by :class:`WordTuple`."""

    __slots__ = ("arity", "coeffs")

    def __init__(self, coeffs: Mapping, normalize: bool = False):
        terms: dict[WordTuple, complex] = {}
        arity = None
        for key, c in coeffs.items():
            if not isinstance(key, WordTuple):
                key = WordTuple(key if isinstance(key, (list, tuple)) else [key])
            if arity is None:
                arity = key.arity
            elif key.arity != arity:
                raise ValueError("all keys must share one arity")
            c = complex(c)
            if c != 0:
                terms[key] = terms.get(key, 0j) + c
        if not terms:
            raise ValueError("a pure state needs nonempty support")
        nrm = math.sqrt(sum(abs(c) ** 2 for c in terms.values()))
        if normalize:
            terms = {k: c / nrm for k, c in terms.items()}
        elif abs(nrm - 1.0) > NORM_TOL:
            raise NonUnitStateError(f"state has norm {nrm!r}; pass normalize=True to rescale")
        self.arity = arity
        self.coeffs = terms

    @classmethod
    def _trusted(cls, arity: int, coeffs: dict) -> "PureState":
        s = object.__new__(cls)
        s.arity = arity
        s.coeffs = coeffs
        return s

    @classmethod
    def basis(cls, *components: Word | str) -> "PureState":
        key = WordTuple(components)
        return cls._trusted(key.arity, {key: 1.0 + 0j})

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def inner(self, other: "PureState") -> complex:
        """``<self, other>``, antilinear in ``self``."""
        a, b = self.coeffs, other.coeffs
        if len(a) <= len(b):
            return sum((c.conjugate() * b[k] for k, c in a.items() if k in b), 0j)
        return sum((a[k].conjugate() * c for k, c in b.items() if k in a), 0j)

    def __len__(self) -> int:
        return len(self.coeffs)

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "terms": [
                {"key": k.to_strings(), "re": c.real, "im": c.imag}
                for k, c in sorted(self.coeffs.items())
            ],
        }

    def describe(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __repr__(self) -> str:
        return f"PureState(arity={self.arity}, support={len(self.coeffs)})"


@dataclass(frozen=True)
class ChannelSpec:
    """``Phi_{N,side}`` tensored ``k`` times; ``side`` is ``"left"`` or ``"right"``."""

    N: int
    side: str = "left"
    k: int = 1

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.k < 1:
            raise ValueError(f"tensor power k must be >= 1, got {self.k}")

    @property
    def n_kraus(self) -> int:
        return self.N ** self.k

    def multi_indices(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(1, self.N + 1), repeat=self.k))


def _shifter(spec: ChannelSpec, m: Sequence[int]):
    if len(m) != spec.k:
        raise ValueError(f"multi-index {tuple(m)} has length {len(m)}, expected k={spec.k}")
    for i in m:
        if not 1 <= i <= spec.N:
            raise ValueError(f"Kraus index {i} out of range 1..{spec.N}")
    if spec.side == "left":
        gs = tuple(gen(i) for i in m)
        return lambda key: WordTuple._trusted(tuple(g * x for g, x in zip(gs, key.components)))
    gs = tuple(gen(i, -1) for i in m)
    return lambda key: WordTuple._trusted(tuple(x * g for g, x in zip(gs, key.components)))


def apply_unitary(spec: ChannelSpec, m: Sequence[int], xi: PureState) -> PureState:
    """``U_m xi`` (left) or ``V_m xi`` (right) for a multi-index ``m`` in ``{1..N}^k``."""
    if xi.arity != spec.k:
        raise ValueError(f"state arity {xi.arity} does not match k={spec.k}")
    shift = _shifter(spec, m)
    return PureState._trusted(xi.arity, {shift(key): c for key, c in xi.coeffs.items()})


def j_conjugate(xi: PureState) -> PureState:
    """``(J xi)(x) = xi(x^-1)`` componentwise."""
    return PureState._trusted(xi.arity, {key.inverse(): c for key, c in xi.coeffs.items()})


class DensityMatrix:
    """Finite Hermitian PSD trace-one matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, check: bool = True):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        self.matrix = m
        if check:
            self.validate()

    def validate(self) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"trace is {tr!r}, expected 1")
        if self.spectrum()[-1] < -1e-10:
            raise ValueError("matrix is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, descending."""
        return _hermitian_eigvals(self.matrix)

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
            "spectrum": self.spectrum().tolist(),
        }


def _hermitian_eigvals(m: np.ndarray) -> np.ndarray:
    h = 0.5 * (m + m.conj().T)
    return np.linalg.eigvalsh(h)[::-1]


def nonzero_spectrum(eigs, tol: float = ZERO_EIG) -> np.ndarray:
    """Drop eigenvalues below ``tol``; result sorted descending."""
    eigs = np.sort(np.asarray(eigs, dtype=float))[::-1]
    return eigs[eigs > tol]


def _check_unit(xi: PureState) -> None:
    nrm = xi.norm()
    if abs(nrm - 1.0) > INPUT_NORM_TOL:
        raise NonUnitStateError(f"input state has norm {nrm!r}")


def _gram(vectors: list[PureState], weight: float) -> np.ndarray:
    d = len(vectors)
    g = np.empty((d, d), dtype=complex)
    for a in range(d):
        for b in range(a, d):
            # entry (a, b) = weight * <v_b, v_a>
            v = weight * vectors[b].inner(vectors[a])
            g[a, b] = v
            g[b, a] = v.conjugate()
    return g


def complementary_output(spec: ChannelSpec, xi: PureState) -> DensityMatrix:
    """Environment output: entry ``(i, i')`` is ``N^-k <U_i' xi, U_i xi>``.

    Rows and columns follow ``spec.multi_indices()``.
    """
    _check_unit(xi)
    if spec.n_kraus > GRAM_CAP:
        raise GramCapExceeded(f"N^k = {spec.n_kraus} exceeds the cap {GRAM_CAP}; use smaller N or k")
    images = [apply_unitary(spec, m, xi) for m in spec.multi_indices()]
    return DensityMatrix(_gram(images, 1.0 / spec.n_kraus), check=False)


def _kraus_images(spec_chain: Sequence[ChannelSpec], xi: PureState) -> tuple[list[PureState], float]:
    if not 1 <= len(spec_chain) <= 2:
        raise ValueError("spec_chain must hold one or two channels")
    ks = {s.k for s in spec_chain}
    if len(ks) != 1:
        raise ValueError("channels in a chain must share the tensor power k")
    dim = math.prod(s.n_kraus for s in spec_chain)
    if dim > GRAM_CAP:
        raise GramCapExceeded(f"Gram dimension {dim} exceeds the cap {GRAM_CAP}; use smaller N or k")
    _check_unit(xi)
    weight = 1.0 / dim
    # leftmost channel is applied last
    images = [xi]
    for spec in reversed(spec_chain):
        images = [apply_unitary(spec, m, v) for v in images for m in spec.multi_indices()]
    return images, weight


def direct_output_spectrum(spec_chain: Sequence[ChannelSpec], xi: PureState) -> np.ndarray:
    """Nonzero spectrum of the direct output on ``|xi><xi|``, descending.

    Computed from the Gram matrix ``c <K_b xi, K_a xi>`` of the Kraus images,
    which shares its nonzero spectrum with ``sum_a c K_a |xi><xi| K_a^*``.
    """
    images, weight = _kraus_images(spec_chain, xi)
    return nonzero_spectrum(_hermitian_eigvals(_gram(images, weight)))


def direct_output_matrix(spec_chain: Sequence[ChannelSpec], xi: PureState) -> tuple[list[WordTuple], np.ndarray]:
    """The direct output restricted to the span of the Kraus images' supports.

    The output operator vanishes off that finite span, so this matrix carries
    its whole spectrum.  Used as an independent route to the Gram spectrum.
    """
    images, weight = _kraus_images(spec_chain, xi)
    basis = sorted({key for v in images for key in v.coeffs})
    pos = {key: n for n, key in enumerate(basis)}
    a = np.zeros((len(basis), len(images)), dtype=complex)
    for col, v in enumerate(images):
        for key, c in v.coeffs.items():
            a[pos[key], col] = c
    return basis, weight * (a @ a.conj().T)


def random_state(rng, k: int, support: int, radius: int, n_gens: int) -> PureState:
    """Random normalized state: ``support`` draws of tuples with component lengths
    uniform in ``0..radius`` over generators g1..g_n_gens, complex Gaussian weights."""
    coeffs: dict[WordTuple, complex] = {}
    for _ in range(support):
        key = WordTuple._trusted(
            tuple(random_word(rng, int(rng.integers(0, radius + 1)), n_gens) for _ in range(k))
        )
        coeffs[key] = coeffs.get(key, 0j) + complex(rng.normal(), rng.normal())
    return PureState(coeffs, normalize=True)
