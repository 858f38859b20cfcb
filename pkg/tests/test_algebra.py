"""Algebra layer: block arithmetic, norms, matrix functions, polar data.

Expected values come from independent oracles: a triple-loop matrix
product, power iteration for the operator norm, and hand-derived spectral
decompositions for the frozen square-root and modulus cases.
"""

import numpy as np
import pytest

from wignerlab import (
    AlgebraDescriptor,
    AlgebraElement,
    DescriptorMismatch,
    NotNormalError,
    NotPositiveError,
    abs_elem,
    classify,
    distance,
    op_norm,
    polar_normal,
    pos_sqrt,
    random_element,
    random_hermitian,
    random_normal_element,
    random_positive,
    random_unitary,
    spectral_decomp_normal,
)

DESC = AlgebraDescriptor((2, 1))
DESC_MIX = AlgebraDescriptor((3, 2, 1))


def matmul_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j] += a[i, k] * b[k, j]
    return out


def op_norm_oracle(a: AlgebraElement) -> float:
    # power iteration on b* b per block; largest singular value overall
    best = 0.0
    for b in a.blocks:
        g = b.conj().T @ b
        v = np.ones(b.shape[0], dtype=np.complex128)
        lam = 0.0
        for _ in range(500):
            w = g @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                lam = 0.0
                break
            v = w / nw
            lam = float(np.real(np.vdot(v, g @ v)))
        best = max(best, np.sqrt(max(lam, 0.0)))
    return best


def test_matmul_matches_triple_loop():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = random_element(DESC_MIX, rng)
        b = random_element(DESC_MIX, rng)
        prod = a @ b
        for got, pa, pb in zip(prod.blocks, a.blocks, b.blocks):
            np.testing.assert_allclose(got, matmul_oracle(pa, pb),
                                       rtol=0, atol=1e-12)


def test_op_norm_matches_power_iteration():
    rng = np.random.default_rng(11)
    for _ in range(25):
        a = random_element(DESC_MIX, rng)
        assert op_norm(a) == pytest.approx(op_norm_oracle(a), rel=1e-8)


def test_op_norm_scales_and_triangle():
    rng = np.random.default_rng(3)
    a = random_element(DESC, rng)
    b = random_element(DESC, rng)
    assert op_norm(2.5 * a) == pytest.approx(2.5 * op_norm(a), rel=1e-12)
    assert op_norm(a + b) <= op_norm(a) + op_norm(b) + 1e-12
    assert distance(a, a) == 0.0


def test_cstar_identity_sweep():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = random_element(DESC_MIX, rng)
        na = op_norm(a)
        assert op_norm(a.adjoint() @ a) == pytest.approx(na * na, rel=1e-10)


def test_pos_sqrt_frozen_2x2():
    # eigenvalues of [[2,1],[1,2]] are 3 and 1; the root has eigenvalues
    # sqrt(3), 1 in the same basis
    d = AlgebraDescriptor((2,))
    a = AlgebraElement(d, [np.array([[2.0, 1.0], [1.0, 2.0]])])
    expected = np.array([
        [1.3660254037844386, 0.3660254037844386],
        [0.3660254037844386, 1.3660254037844386]])
    root = pos_sqrt(a)
    np.testing.assert_allclose(root.blocks[0], expected, rtol=0, atol=1e-12)


def test_pos_sqrt_roundtrip_sweep():
    rng = np.random.default_rng(13)
    for _ in range(40):
        p = random_positive(DESC_MIX, rng)
        root = pos_sqrt(p)
        assert op_norm(root @ root - p) <= 1e-10 * (1.0 + op_norm(p))
        flags = classify(root)
        assert flags.hermitian and flags.positive


def test_pos_sqrt_clamps_tiny_negative_eigenvalues():
    d = AlgebraDescriptor((1,))
    a = AlgebraElement(d, [np.array([[-1e-12]])])
    root = pos_sqrt(a)
    assert op_norm(root) == 0.0


def test_pos_sqrt_rejects_genuinely_negative():
    d = AlgebraDescriptor((1,))
    a = AlgebraElement(d, [np.array([[-1.0]])])
    with pytest.raises(NotPositiveError):
        pos_sqrt(a)


def test_abs_frozen_diagonal():
    d = AlgebraDescriptor((1, 1, 1))
    a = AlgebraElement(d, [np.array([[2.0j]]), np.array([[0.0]]),
                           np.array([[-3.0]])])
    m = abs_elem(a)
    np.testing.assert_allclose(m.blocks[0], [[2.0]], atol=1e-14)
    np.testing.assert_allclose(m.blocks[1], [[0.0]], atol=1e-14)
    np.testing.assert_allclose(m.blocks[2], [[3.0]], atol=1e-14)


def test_abs_equals_pos_sqrt_bit_for_path():
    rng = np.random.default_rng(17)
    for _ in range(20):
        a = random_element(DESC_MIX, rng)
        m = abs_elem(a)
        ref = pos_sqrt(a.adjoint() @ a)
        for got, want in zip(m.blocks, ref.blocks):
            assert np.array_equal(got, want)


def test_polar_frozen_diagonal():
    d = AlgebraDescriptor((1, 1, 1))
    a = AlgebraElement(d, [np.array([[2.0j]]), np.array([[0.0]]),
                           np.array([[-3.0]])])
    s, m = polar_normal(a)
    np.testing.assert_allclose(s.blocks[0], [[1.0j]], atol=1e-14)
    np.testing.assert_allclose(s.blocks[1], [[0.0]], atol=1e-14)
    np.testing.assert_allclose(s.blocks[2], [[-1.0]], atol=1e-14)
    np.testing.assert_allclose(m.blocks[2], [[3.0]], atol=1e-14)


def test_polar_identities_sweep():
    rng = np.random.default_rng(19)
    for _ in range(30):
        a = random_normal_element(DESC_MIX, rng, zero_fraction=0.3)
        s, m = polar_normal(a)
        assert op_norm(s @ m - a) <= 1e-9
        assert op_norm(s.adjoint() @ a - m) <= 1e-9
        p = s.adjoint() @ s
        assert op_norm(p @ p - p) <= 1e-9
        assert op_norm(s @ a - a @ s) <= 1e-9
        # the polar sign of a normal element is normal itself
        assert op_norm(s @ s.adjoint() - s.adjoint() @ s) <= 1e-9


def test_spectral_decomp_eigenvalue_multiset():
    rng = np.random.default_rng(23)
    a = random_normal_element(DESC, rng)
    sd = spectral_decomp_normal(a)
    for vals, block in zip(sd.eigenvalues, a.blocks):
        want = np.sort_complex(np.linalg.eigvals(block))
        np.testing.assert_allclose(np.sort_complex(np.asarray(vals)), want,
                                   atol=1e-9)
    assert op_norm(sd.reconstruct() - a) <= 1e-9 * (1.0 + op_norm(a))


def test_spectral_decomp_rejects_non_normal():
    d = AlgebraDescriptor((2,))
    a = AlgebraElement(d, [np.array([[0.0, 1.0], [0.0, 0.0]])])
    with pytest.raises(NotNormalError):
        spectral_decomp_normal(a)
    with pytest.raises(NotNormalError):
        polar_normal(a)


def test_classify_battery():
    rng = np.random.default_rng(29)
    e = AlgebraElement.identity(DESC)
    flags = classify(e)
    assert flags.hermitian and flags.positive and flags.projection
    assert flags.partial_isometry and flags.normal

    u = random_unitary(DESC, rng)
    flags = classify(u)
    assert flags.partial_isometry and flags.normal

    h = random_hermitian(DESC, rng)
    assert classify(h).hermitian and classify(h).normal

    g = random_element(DESC, rng)  # generic: nothing special
    flags = classify(g)
    assert not flags.hermitian and not flags.projection


def test_random_generators_are_seeded():
    a = random_element(DESC, np.random.default_rng(77))
    b = random_element(DESC, np.random.default_rng(77))
    for x, y in zip(a.blocks, b.blocks):
        assert np.array_equal(x, y)
    u = random_unitary(DESC, np.random.default_rng(78))
    e = AlgebraElement.identity(DESC)
    assert op_norm(u.adjoint() @ u - e) <= 1e-12


def test_elements_are_immutable():
    a = AlgebraElement.identity(DESC)
    with pytest.raises(AttributeError):
        a.blocks = ()
    with pytest.raises(ValueError):
        a.blocks[0][0, 0] = 5.0
    b = a + a
    with pytest.raises(ValueError):
        b.blocks[0][0, 0] = 5.0


def test_descriptor_mismatch_is_rejected():
    a = AlgebraElement.identity(DESC)
    b = AlgebraElement.identity(AlgebraDescriptor((1, 2)))
    with pytest.raises(DescriptorMismatch):
        _ = a + b
    with pytest.raises(DescriptorMismatch):
        AlgebraElement(DESC, [np.eye(3), np.eye(1)])


def test_trace_and_zeros():
    z = AlgebraElement.zeros(DESC)
    assert op_norm(z) == 0.0
    e = AlgebraElement.identity(DESC)
    assert e.trace() == pytest.approx(3.0)
