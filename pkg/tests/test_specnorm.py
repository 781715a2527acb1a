import json
import math
from fractions import Fraction

import numpy as np
import pytest

from regmoe.algebra import AlgebraElement, GaussianRational, delta, from_terms
from regmoe.specnorm import (
    CoefficientMatrix,
    NormEstimate,
    NotTracelessError,
    block_bound,
    estimate_bilinear_norm,
    estimate_norm,
    flatten_bilinear,
    haagerup_upper,
    moment_lower,
    thm2_upper,
    tree_walk_moments,
)
from regmoe.suites import random_graded_element, random_traceless, sample_rng


def brute_walks(N, m):
    """Closed walks of length 2m at the identity, alternating g_i^-1 then g_j steps.

    Enumerates every letter sequence and reduces it; independent of the
    length-state recursion used by ``tree_walk_moments``.
    """
    import itertools

    count = 0
    for seq in itertools.product(range(1, N + 1), repeat=2 * m):
        w = []
        for pos, i in enumerate(seq):
            a = -i if pos % 2 == 0 else i
            if w and w[-1] == -a:
                w.pop()
            else:
                w.append(a)
        count += not w
    return count


def test_tree_walk_moments_match_enumeration():
    for N in (2, 3):
        walks = tree_walk_moments(N, 4)
        assert walks[0] == 1
        for m in range(1, 5):
            assert walks[m] == brute_walks(N, m)
    # frozen: N=2 gives the central binomial coefficients
    assert tree_walk_moments(2, 5) == [1, 2, 6, 20, 70, 252]


def test_moment_lower_unitary():
    est = moment_lower(delta("g1"))
    assert [v for _, v in est.moment_schedule] == [1.0] * 5
    assert est.lower == 1.0 and not est.truncated


def test_moment_lower_generator_pair():
    f = delta("g1") + delta("g2")
    assert moment_lower(f, [1]).lower == pytest.approx(math.sqrt(2), abs=1e-15)
    est = moment_lower(f)
    walks = tree_walk_moments(2, 16)
    vals = [v for _, v in est.moment_schedule]
    assert vals == sorted(vals)
    for m, v in est.moment_schedule:
        assert v == pytest.approx(walks[m] ** (1 / (2 * m)), rel=1e-14)
    # frozen via mpmath: binomial(32, 16) ** (1/32)
    assert est.lower == pytest.approx(1.8807957834953110, rel=1e-14)
    assert est.lower < 2.0 < haagerup_upper(f)


def test_oracle_moments_approach_limit():
    # the closed-walk moments of the N-regular tree tend to 2 sqrt(N - 1)
    for N in (2, 3, 4):
        walks = tree_walk_moments(N, 400)
        val = math.exp(math.log(walks[400]) / 800)
        assert val < 2 * math.sqrt(N - 1) < val * 1.02


def test_haagerup_examples():
    f = from_terms([(["g1", "g2"], Fraction(3, 5)), (["g1^-1", "g3"], Fraction(4, 5))])
    assert haagerup_upper(f) == pytest.approx(4.0)
    assert haagerup_upper(delta("e")) == 1.0
    assert haagerup_upper(delta("g1") + delta("g2")) == pytest.approx(2 * math.sqrt(2))


def test_haagerup_general_support_is_gradewise():
    f = delta("e") + delta("g1*g2", coeff=2)
    assert haagerup_upper(f) == pytest.approx(1 + 3 * 2)
    est = estimate_norm(f)
    assert "grade" in est.method_tags["upper"]


def test_sandwich_random_elements():
    for i in range(60):
        rng = sample_rng(11, i)
        r = int(rng.integers(1, 3))
        grade = tuple(int(x) for x in rng.integers(0, 4, size=r))
        f = random_graded_element(rng, grade, int(rng.integers(1, 13)), 3)
        est = moment_lower(f, budget=20_000)
        vals = [v for _, v in est.moment_schedule]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert est.lower <= haagerup_upper(f) + 1e-9


def test_scaling_homogeneity():
    rng = np.random.default_rng(3)
    f = random_graded_element(rng, (1, 2), 6, 3)
    c = GaussianRational(3, -4)
    g = f.scale(c)
    assert haagerup_upper(g) == pytest.approx(5 * haagerup_upper(f))
    assert moment_lower(g, budget=20_000).lower == pytest.approx(5 * moment_lower(f, budget=20_000).lower, rel=1e-12)
    a = random_traceless(rng, 2, 1)
    b = CoefficientMatrix(2, 1, a.entries * Fraction(-7, 2))
    assert thm2_upper(b) == pytest.approx(3.5 * thm2_upper(a))


def test_truncation_flag():
    rng = np.random.default_rng(5)
    f = random_graded_element(rng, (3,), 12, 3)
    est = moment_lower(f, budget=1000)
    assert est.truncated and est.skipped_powers
    assert est.lower > 0
    full = moment_lower(f, [1, 2], budget=10**7)
    assert est.lower <= haagerup_upper(f) and full.lower <= haagerup_upper(f)


def test_float_mode_agrees_with_exact():
    rng = np.random.default_rng(6)
    f = random_graded_element(rng, (2, 1), 5, 2)
    a = moment_lower(f, [1, 2, 4], exact=True)
    b = moment_lower(f.to_float(), [1, 2, 4], exact=False)
    for (m1, v1), (m2, v2) in zip(a.moment_schedule, b.moment_schedule):
        assert m1 == m2 and v1 == pytest.approx(v2, rel=1e-12)


def test_schedule_validation_and_zero():
    with pytest.raises(ValueError):
        moment_lower(delta("g1"), [])
    with pytest.raises(ValueError):
        moment_lower(delta("g1"), [0, 1])
    assert moment_lower(AlgebraElement.zero(1, exact=True)).lower == 0.0


def test_norm_estimate_invariant_and_json():
    with pytest.raises(AssertionError):
        NormEstimate(lower=2.0, upper=1.0)
    est = estimate_norm(delta("g1") + delta("g2"), schedule=[1, 2])
    data = json.loads(est.dumps())
    assert data["upper"] == pytest.approx(2 * math.sqrt(2))
    assert data["moment_schedule"][0] == {"power": 1, "value": pytest.approx(math.sqrt(2))}
    assert data["truncated"] is False


def _obj(rows):
    return np.array([[Fraction(x) for x in r] for r in rows], dtype=object)


def test_flatten_examples():
    assert flatten_bilinear(CoefficientMatrix(2, 1, _obj([[1, 0], [0, 1]]))) == from_terms([(["e"], 2)])
    assert flatten_bilinear(CoefficientMatrix(2, 1, _obj([[0, 1], [0, 0]]))) == delta("g1^-1*g2")
    a = np.zeros((4, 4), dtype=object)
    a[:] = 0
    a[0, 3] = 1  # (1,1) -> (2,2)
    assert flatten_bilinear(CoefficientMatrix(2, 2, a)) == delta("g1^-1*g2", "g1^-1*g2")


def test_flatten_merges_diagonal_blocks():
    # v = w in a coordinate collapses that coordinate to e
    a = np.zeros((4, 4), dtype=object)
    a[:] = 0
    a[0, 1] = 1  # (1,1) -> (1,2)
    a[2, 3] = 1  # (2,1) -> (2,2)
    assert flatten_bilinear(CoefficientMatrix(2, 2, a)) == from_terms([(["e", "g1^-1*g2"], 2)])


def test_thm2_upper_examples():
    a = CoefficientMatrix(2, 1, np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert thm2_upper(a) == pytest.approx(3.0)
    assert block_bound(9, 2) == pytest.approx(9 * math.sqrt(3))
    b = np.zeros((81, 81))
    b[0, 1] = 1.0
    assert thm2_upper(CoefficientMatrix(9, 2, b)) == pytest.approx(15.588457, abs=1e-6)
    z = CoefficientMatrix(2, 1, np.zeros((2, 2)))
    assert thm2_upper(z) == 0.0
    assert not flatten_bilinear(z).terms


def test_block_bound_matches_formula():
    for N in (2, 3, 7):
        for k in (1, 2, 3):
            assert block_bound(N, k) == pytest.approx(N ** (k / 2) * math.sqrt((1 + 9 / N) ** k - 1), rel=1e-12)


def test_thm2_rejects_trace():
    with pytest.raises(NotTracelessError, match="traceless"):
        thm2_upper(CoefficientMatrix(2, 1, np.eye(2)))
    with pytest.raises(NotTracelessError):
        thm2_upper(CoefficientMatrix(2, 1, _obj([[Fraction(1, 10**20), 0], [0, 0]])))
    # float mode tolerates rounding-level trace
    thm2_upper(CoefficientMatrix(2, 1, np.array([[1e-13, 1.0], [0.0, 0.0]])))
    with pytest.raises(ValueError):
        CoefficientMatrix(2, 2, np.zeros((2, 2)))


def test_bilinear_sandwich():
    for i in range(15):
        rng = sample_rng(21, i)
        N, k = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        a = random_traceless(rng, N, k)
        assert a.is_traceless()
        est = estimate_bilinear_norm(a, budget=200_000)
        assert est.lower <= est.upper + 1e-9
