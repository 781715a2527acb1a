import math

import numpy as np
import pytest

from regmoe.channels import (
    ChannelSpec,
    DensityMatrix,
    GramCapExceeded,
    NonUnitStateError,
    PureState,
    apply_unitary,
    complementary_output,
    direct_output_matrix,
    direct_output_spectrum,
    j_conjugate,
    nonzero_spectrum,
    random_state,
)
from regmoe.suites import sample_rng
from regmoe.words import WordTuple

S = 1 / math.sqrt(2)


def dense_state(xi, basis):
    pos = {k: n for n, k in enumerate(basis)}
    v = np.zeros(len(basis), dtype=complex)
    for k, c in xi.coeffs.items():
        v[pos[k]] = c
    return v


def brute_direct_spectrum(chain, xi):
    """Oracle: embed every Kraus image in one explicit basis, sum the rank-one terms."""
    images = [xi]
    for spec in reversed(chain):
        images = [apply_unitary(spec, m, v) for v in images for m in spec.multi_indices()]
    basis = sorted({k for v in images for k in v.coeffs})
    rho = sum(np.outer(dense_state(v, basis), dense_state(v, basis).conj()) for v in images) / len(images)
    eigs = np.linalg.eigvalsh(rho)
    return np.sort(eigs[eigs > 1e-12])[::-1]


def test_apply_unitary_examples():
    left, right = ChannelSpec(2, "left"), ChannelSpec(2, "right")
    assert apply_unitary(left, (1,), PureState.basis("e")).coeffs == {WordTuple(["g1"]): 1}
    assert apply_unitary(right, (1,), PureState.basis("e")).coeffs == {WordTuple(["g1^-1"]): 1}
    xi = PureState.basis("g2*g1")
    assert list(apply_unitary(right, (1,), xi).coeffs) == [WordTuple(["g2"])]
    assert list(apply_unitary(left, (2,), xi).coeffs) == [WordTuple(["g2^2*g1"])]
    with pytest.raises(ValueError):
        apply_unitary(left, (3,), xi)
    with pytest.raises(ValueError):
        apply_unitary(ChannelSpec(2, "left", 2), (1,), xi)


def test_left_right_commute():
    for i in range(30):
        rng = sample_rng(3, i)
        k = int(rng.integers(1, 3))
        xi = random_state(rng, k, 6, 3, 3)
        L, R = ChannelSpec(3, "left", k), ChannelSpec(3, "right", k)
        for m in L.multi_indices()[:4]:
            for n in R.multi_indices()[:4]:
                a = apply_unitary(L, m, apply_unitary(R, n, xi))
                b = apply_unitary(R, n, apply_unitary(L, m, xi))
                assert a.coeffs == b.coeffs
        assert apply_unitary(L, L.multi_indices()[0], xi).norm() == pytest.approx(1.0)


def test_j_conjugate():
    assert list(j_conjugate(PureState.basis("g1")).coeffs) == [WordTuple(["g1^-1"])]
    rng = np.random.default_rng(0)
    xi = random_state(rng, 2, 8, 3, 3)
    assert j_conjugate(j_conjugate(xi)).coeffs == xi.coeffs
    assert j_conjugate(xi).norm() == pytest.approx(1.0)


def test_pure_state_validation():
    with pytest.raises(NonUnitStateError):
        PureState({WordTuple(["e"]): 2.0})
    xi = PureState({WordTuple(["e"]): 2.0, WordTuple(["g1"]): 2j}, normalize=True)
    assert xi.norm() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PureState({WordTuple(["e"]): 1.0, WordTuple(["e", "e"]): 0.0})
    with pytest.raises(ValueError):
        PureState({})
    assert '"key": ["g1"]' in xi.describe()


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec(1)
    with pytest.raises(ValueError):
        ChannelSpec(2, "up")
    with pytest.raises(ValueError):
        ChannelSpec(2, "left", 0)
    assert ChannelSpec(3, "left", 2).multi_indices()[:2] == [(1, 1), (1, 2)]


def test_complementary_examples():
    rho = complementary_output(ChannelSpec(2), PureState.basis("e")).matrix
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-15)
    xi = PureState({WordTuple(["e"]): S, WordTuple(["g1^-1*g2"]): S})
    rho = complementary_output(ChannelSpec(2), xi)
    # hand oracle: the four inner products of (d_g1 + d_g2)/sqrt2 and (d_g2 + d_{g2 g1^-1 g2})/sqrt2
    assert np.allclose(rho.matrix, [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)
    assert np.allclose(rho.spectrum(), [0.75, 0.25], atol=1e-15)
    rho = complementary_output(ChannelSpec(3), PureState.basis("g1"))
    assert np.allclose(rho.matrix, np.eye(3) / 3, atol=1e-15)


def test_complementary_rejects_nonunit():
    xi = PureState._trusted(1, {WordTuple(["e"]): 1.1 + 0j})
    with pytest.raises(NonUnitStateError):
        complementary_output(ChannelSpec(2), xi)
    with pytest.raises(NonUnitStateError):
        direct_output_spectrum([ChannelSpec(2)], xi)


def test_direct_spectrum_examples():
    e = PureState.basis("e")
    spec = direct_output_spectrum([ChannelSpec(2, "left"), ChannelSpec(2, "right")], e)
    assert np.allclose(spec, [0.5, 0.25, 0.25], atol=1e-12)
    assert np.allclose(direct_output_spectrum([ChannelSpec(2)], e), [0.5, 0.5], atol=1e-12)


def test_direct_spectrum_matches_brute_force():
    for i in range(30):
        rng = sample_rng(8, i)
        N, k = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        xi = random_state(rng, k, int(rng.integers(1, 8)), 2, N)
        chains = [[ChannelSpec(N, "left", k)], [ChannelSpec(N, "right", k)]]
        if N ** (2 * k) <= 81:
            chains.append([ChannelSpec(N, "left", k), ChannelSpec(N, "right", k)])
        for chain in chains:
            got = direct_output_spectrum(chain, xi)
            want = brute_direct_spectrum(chain, xi)
            assert got.shape == want.shape
            assert np.allclose(got, want, atol=1e-10)
            assert got.sum() == pytest.approx(1.0, abs=1e-10)


def test_schmidt_duality_random():
    for i in range(60):
        rng = sample_rng(9, i)
        N, k = int(rng.integers(2, 5)), int(rng.integers(1, 3))
        xi = random_state(rng, k, int(rng.integers(1, 21)), 3, N)
        for side in ("left", "right"):
            spec = ChannelSpec(N, side, k)
            comp = complementary_output(spec, xi)
            assert np.trace(comp.matrix).real == pytest.approx(1.0, abs=1e-12)
            a = nonzero_spectrum(comp.spectrum())
            b = direct_output_spectrum([spec], xi)
            _, rho = direct_output_matrix([spec], xi)
            c = nonzero_spectrum(np.linalg.eigvalsh((rho + rho.conj().T) / 2))
            assert a.shape == b.shape == c.shape
            assert np.max(np.abs(a - b)) <= 1e-9 and np.max(np.abs(a - c)) <= 1e-9


def test_j_equivalence_and_composition_order():
    for i in range(30):
        rng = sample_rng(10, i)
        N, k = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        xi = random_state(rng, k, 8, 3, N)
        r = direct_output_spectrum([ChannelSpec(N, "right", k)], xi)
        l = direct_output_spectrum([ChannelSpec(N, "left", k)], j_conjugate(xi))
        assert np.allclose(r, l, atol=1e-9)
        if N ** (2 * k) <= 81:
            lr = direct_output_spectrum([ChannelSpec(N, "left", k), ChannelSpec(N, "right", k)], xi)
            rl = direct_output_spectrum([ChannelSpec(N, "right", k), ChannelSpec(N, "left", k)], xi)
            assert np.allclose(lr, rl, atol=1e-9)


def test_gram_cap_and_chain_validation():
    e = PureState.basis("e", "e", "e")
    with pytest.raises(GramCapExceeded, match="smaller N or k"):
        direct_output_spectrum([ChannelSpec(5, "left", 3), ChannelSpec(5, "right", 3)], e)
    with pytest.raises(GramCapExceeded):
        complementary_output(ChannelSpec(17, "left", 3), e)
    with pytest.raises(ValueError):
        direct_output_spectrum([ChannelSpec(2, "left", 1), ChannelSpec(2, "right", 2)], PureState.basis("e"))
    with pytest.raises(ValueError):
        direct_output_spectrum([], PureState.basis("e"))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.0, 0.5], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.4]))
    d = DensityMatrix(np.diag([0.25, 0.75]))
    assert d.dim == 2
    assert d.spectrum().tolist() == [0.75, 0.25]
    assert d.to_json()["spectrum"] == [0.75, 0.25]
