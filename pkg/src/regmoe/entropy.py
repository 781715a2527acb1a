"""Entropy functionals, closed-form output-entropy bounds and a minimizer.

All logarithms are natural.  Divide by ``log(2)`` for bits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channels import (
    GRAM_CAP,
    ChannelSpec,
    GramCapExceeded,
    PureState,
    complementary_output,
    direct_output_spectrum,
)
from .words import WordTuple, ball, gen, tuple_keys

__all__ = [
    "vn_entropy",
    "renyi_entropy",
    "hs_bound",
    "hs_distance_check",
    "hmin_lower_bound",
    "reg_lower",
    "violation_certificate",
    "ViolationCertificate",
    "BoundReport",
    "EntropyObjective",
    "OptimizerConfig",
    "minimize_entropy",
]

NEG_CLAMP = 1e-10
SUM_TOL = 1e-9


def _clean(spectrum) -> np.ndarray:
    lam = np.asarray(spectrum, dtype=float).ravel()
    if lam.size and lam.min() < -NEG_CLAMP:
        raise ValueError(f"spectrum has a negative entry {lam.min()!r}")
    s = lam.sum()
    if abs(s - 1.0) > SUM_TOL:
        raise ValueError(f"spectrum sums to {s!r}, expected 1")
    return np.clip(lam, 0.0, None)


def vn_entropy(spectrum) -> float:
    """``-sum l log l`` with ``0 log 0 = 0``."""
    lam = _clean(spectrum)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def renyi_entropy(spectrum, p: float) -> float:
    if p <= 1:
        raise ValueError(f"Renyi order must exceed 1, got {p}")
    lam = _clean(spectrum)
    return float(math.log(np.sum(lam ** p)) / (1.0 - p))


def _excess(N: int, k: int) -> float:
    # (1 + 9/N)^k - 1 without cancellation for large N
    return math.expm1(k * math.log1p(9.0 / N))


def hs_bound(N: int, k: int) -> float:
    """Hilbert-Schmidt radius around ``Id/N^k`` containing every complementary output."""
    return math.sqrt(_excess(N, k)) / N ** (k / 2)


class HSCheck(NamedTuple):
    distance: float
    bound: float
    passed: bool


def hs_distance_check(N: int, k: int, xi: PureState) -> HSCheck:
    rho = complementary_output(ChannelSpec(N, "left", k), xi).matrix
    d = N ** k
    dist = float(np.linalg.norm(rho - np.eye(d) / d))
    bound = hs_bound(N, k)
    return HSCheck(dist, bound, dist <= bound + 1e-9)


def hmin_lower_bound(N: int, k: int) -> float:
    """``k log N - 2 log(1 + sqrt((1 + 9/N)^k - 1))``."""
    if N < 2 or k < 1:
        raise ValueError(f"need N >= 2 and k >= 1, got N={N}, k={k}")
    return k * math.log(N) - 2.0 * math.log1p(math.sqrt(_excess(N, k)))


def reg_lower(N: int) -> float:
    """Limit of ``hmin_lower_bound(N, k) / k``: ``log N - log(1 + 9/N)``."""
    if N < 2:
        raise ValueError(f"need N >= 2, got N={N}")
    return math.log(N) - math.log1p(9.0 / N)


@dataclass
class ViolationCertificate:
    N: float
    lhs_upper: float
    rhs_lower: float
    rhs_lower_18: float
    violated: bool
    gap: float
    violated_sharp: bool
    gap_sharp: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def violation_certificate(N) -> ViolationCertificate:
    """Compare the entropy of the composed channel on ``|e><e|`` with twice the
    regularized lower bound.

    ``violated``/``gap`` use the ``log N - 9/N`` form of the per-channel bound,
    whose threshold is ``N > e^18``; ``violated_sharp``/``gap_sharp`` use
    ``log N - log(1 + 9/N)``.  Gaps are evaluated in cancellation-free form.
    """
    if N < 2:
        raise ValueError(f"need N >= 2, got N={N}")
    logn = math.log(N)
    lhs = 2.0 * logn - logn / N
    rhs = 2.0 * reg_lower(N)
    rhs18 = 2.0 * logn - 18.0 / N
    gap = (logn - 18.0) / N
    gap_sharp = logn / N - 2.0 * math.log1p(9.0 / N)
    return ViolationCertificate(
        N=N,
        lhs_upper=lhs,
        rhs_lower=rhs,
        rhs_lower_18=rhs18,
        violated=gap > 0,
        gap=gap,
        violated_sharp=gap_sharp > 0,
        gap_sharp=gap_sharp,
    )


def composed_spectrum_at_identity(N: int) -> np.ndarray:
    """Gram spectrum of the composed left/right channel on ``|e><e|``."""
    chain = [ChannelSpec(N, "left"), ChannelSpec(N, "right")]
    return direct_output_spectrum(chain, PureState.basis("e"))


@dataclass
class BoundReport:
    N: int
    k: int
    seed: int | None = None
    hs_bound: float = 0.0
    hmin_lower: float = 0.0
    reg_lower: float = 0.0
    samples: list[tuple[str, float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.hs_bound = hs_bound(self.N, self.k)
        self.hmin_lower = hmin_lower_bound(self.N, self.k)
        self.reg_lower = reg_lower(self.N)

    def add(self, xi: PureState) -> tuple[float, float]:
        rho = complementary_output(ChannelSpec(self.N, "left", self.k), xi)
        d = rho.dim
        dist = float(np.linalg.norm(rho.matrix - np.eye(d) / d))
        ent = vn_entropy(rho.spectrum())
        self.samples.append((xi.describe(), dist, ent))
        return dist, ent

    @property
    def hs_failures(self) -> list[int]:
        return [n for n, s in enumerate(self.samples) if s[1] > self.hs_bound + 1e-9]

    @property
    def entropy_failures(self) -> list[int]:
        return [n for n, s in enumerate(self.samples) if s[2] < self.hmin_lower - 1e-9]

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "k": self.k,
            "seed": self.seed,
            "sample_count": len(self.samples),
            "hs_bound": self.hs_bound,
            "hmin_lower": self.hmin_lower,
            "reg_lower": self.reg_lower,
            "hs_pass": not self.hs_failures,
            "entropy_pass": not self.entropy_failures,
            "samples": [
                {"state": json.loads(s), "hs_distance": d, "entropy": h} for s, d, h in self.samples
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "k", "seed", "sample", "hs_distance", "hs_bound", "hs_pass",
                    "entropy", "hmin_lower", "entropy_pass", "state"])
        for n, (s, d, h) in enumerate(self.samples):
            w.writerow([self.N, self.k, self.seed, n, repr(d), repr(self.hs_bound),
                        d <= self.hs_bound + 1e-9, repr(h), repr(self.hmin_lower),
                        h >= self.hmin_lower - 1e-9, s])
        return buf.getvalue()


class EntropyObjective:
    """``c -> H(complementary output of sum_b c_b delta_b)`` on a fixed finite basis.

    With ``A[x, i] = c_b`` whenever ``g_i b = x`` the output is
    ``N^-k conj(A)^* conj(A)``, so ``H`` and its gradient come from one
    eigendecomposition.  The gradient is returned as ``dH/dRe c + i dH/dIm c``
    in the ambient space (no normalization of ``c`` is assumed).
    """

    def __init__(self, N: int, k: int, basis: list[WordTuple]):
        if N ** k > GRAM_CAP:
            raise GramCapExceeded(f"N^k = {N ** k} exceeds the Gram cap {GRAM_CAP}; use smaller N or k")
        self.N, self.k = N, k
        self.basis = basis
        self.spec = ChannelSpec(N, "left", k)
        rows: dict[WordTuple, int] = {}
        idx_r, idx_c, idx_b = [], [], []
        for col, m in enumerate(self.spec.multi_indices()):
            gs = [gen(i) for i in m]
            for b, key in enumerate(basis):
                x = WordTuple._trusted(tuple(g * w for g, w in zip(gs, key.components)))
                idx_r.append(rows.setdefault(x, len(rows)))
                idx_c.append(col)
                idx_b.append(b)
        self.n_rows = len(rows)
        self.idx_r = np.array(idx_r)
        self.idx_c = np.array(idx_c)
        self.idx_b = np.array(idx_b)
        self.weight = 1.0 / N ** k

    def _w(self, c: np.ndarray) -> np.ndarray:
        w = np.zeros((self.n_rows, self.N ** self.k), dtype=complex)
        w[self.idx_r, self.idx_c] = np.conj(c[self.idx_b])
        return w

    def output(self, c: np.ndarray) -> np.ndarray:
        w = self._w(np.asarray(c, dtype=complex))
        return self.weight * (w.conj().T @ w)

    def value(self, c: np.ndarray) -> float:
        lam = np.linalg.eigvalsh(self.output(c))
        lam = lam[lam > 0]
        return float(-np.sum(lam * np.log(lam)))

    def value_and_grad(self, c: np.ndarray, floor: float = 1e-14) -> tuple[float, np.ndarray]:
        c = np.asarray(c, dtype=complex)
        w = self._w(c)
        rho = self.weight * (w.conj().T @ w)
        lam, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        pos = lam > 0
        val = float(-np.sum(lam[pos] * np.log(lam[pos])))
        # dH = tr(L drho) with L = -(log rho + 1)
        lvals = -(np.log(np.maximum(lam, floor)) + 1.0)
        L = (vecs * lvals) @ vecs.conj().T
        G = w @ L
        s = np.zeros(len(self.basis), dtype=complex)
        np.add.at(s, self.idx_b, G[self.idx_r, self.idx_c])
        return val, 2.0 * self.weight * np.conj(s)

    def state(self, c: np.ndarray) -> PureState:
        c = np.asarray(c, dtype=complex)
        c = c / np.linalg.norm(c)
        return PureState({k: v for k, v in zip(self.basis, c) if v != 0}, normalize=True)


@dataclass
class OptimizerConfig:
    restarts: int = 8
    iterations: int = 300
    step: float = 0.5
    seed: int = 0
    n_gens: int | None = None
    max_basis: int = 20000


def radius_ball(k: int, radius: int, n_gens: int) -> list[WordTuple]:
    words = ball(radius, n_gens)
    return tuple_keys([words] * k)


def _sphere_descent(obj: EntropyObjective, c: np.ndarray, cfg: OptimizerConfig) -> tuple[float, np.ndarray]:
    c = c / np.linalg.norm(c)
    val, g = obj.value_and_grad(c)
    step = cfg.step
    for _ in range(cfg.iterations):
        # tangent component of the gradient at c
        t = g - np.real(np.vdot(c, g)) * c
        tn = np.linalg.norm(t)
        if tn < 1e-12:
            break
        while step > 1e-12:
            trial = c - step * t
            trial /= np.linalg.norm(trial)
            tv, tg = obj.value_and_grad(trial)
            if tv <= val - 1e-4 * step * tn * tn:
                c, val, g = trial, tv, tg
                step *= 1.5
                break
            step *= 0.5
        else:
            break
    return val, c


def minimize_entropy(N: int, k: int, support_radius: int, config: OptimizerConfig | None = None):
    """Search unit states on the radius-``support_radius`` ball for low output entropy.

    Returns ``(state, entropy)``; the entropy is recomputed from the returned
    state, so it is an honest upper bound on the minimum output entropy.
    The basis state at the identity is always among the candidates.
    """
    cfg = config or OptimizerConfig()
    if support_radius < 0:
        raise ValueError("support_radius must be >= 0")
    n_gens = cfg.n_gens or N
    if N ** k > GRAM_CAP:
        raise GramCapExceeded(f"N^k = {N ** k} exceeds the Gram cap {GRAM_CAP}; use smaller N or k")
    n_words = 1 + (2 * n_gens * ((2 * n_gens - 1) ** support_radius - 1)) // (2 * n_gens - 2) if n_gens > 1 else 2 * support_radius + 1
    if n_words ** k > cfg.max_basis:
        raise GramCapExceeded(f"radius-{support_radius} ball has {n_words ** k} points, above max_basis={cfg.max_basis}")
    basis = radius_ball(k, support_radius, n_gens)
    obj = EntropyObjective(N, k, basis)

    start = np.zeros(len(basis), dtype=complex)
    start[basis.index(WordTuple.identity(k))] = 1.0
    best_val, best_c = obj.value(start), start
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    for child in children:
        rng = np.random.default_rng(child)
        c0 = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        val, c = _sphere_descent(obj, c0, cfg)
        if val < best_val - 1e-15:
            best_val, best_c = val, c
    state = obj.state(best_c)
    ent = vn_entropy(complementary_output(obj.spec, state).spectrum())
    return state, ent
