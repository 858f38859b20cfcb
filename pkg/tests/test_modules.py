"""Module layer: inner product axioms, norms, polarization.

The polarization oracle below expands the four-term sum with raw numpy on
the component arrays, independently of the library's element arithmetic.
"""

import numpy as np
import pytest

from wignerlab import (
    AlgebraDescriptor,
    DescriptorMismatch,
    ModuleDescriptor,
    ModuleElement,
    distance_mod,
    inner,
    norm_mod,
    op_norm,
    polarize,
    random_element,
    random_module_element,
    right_act,
)

DESC = AlgebraDescriptor((2, 1))
MDESC = ModuleDescriptor(DESC, 3)


def polarize_oracle(x: ModuleElement, y: ModuleElement):
    """0.25 * sum_k conj(i^k) <x + i^k y, x + i^k y> on raw arrays."""
    out = [np.zeros((n, n), dtype=np.complex128)
           for n in DESC.block_sizes]
    for k in range(4):
        w = 1j ** k
        for xc, yc in zip(x.components, y.components):
            for slot, (xb, yb) in enumerate(zip(xc.blocks, yc.blocks)):
                z = xb + w * yb
                out[slot] += np.conj(w) * (z.conj().T @ z)
    return [0.25 * b for b in out]


def test_inner_positive_and_definite():
    rng = np.random.default_rng(31)
    for _ in range(50):
        x = random_module_element(MDESC, rng)
        g = inner(x, x)
        for b in g.blocks:
            eigs = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
            assert eigs.min() >= -1e-12
    z = ModuleElement.zeros(MDESC)
    assert norm_mod(z) == 0.0


def test_inner_hermitian_symmetry():
    rng = np.random.default_rng(37)
    for _ in range(50):
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        assert op_norm(inner(x, y).adjoint() - inner(y, x)) <= 1e-12


def test_inner_right_linearity_and_additivity():
    rng = np.random.default_rng(41)
    for _ in range(50):
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        w = random_module_element(MDESC, rng)
        a = random_element(DESC, rng)
        assert op_norm(inner(x, right_act(y, a)) - inner(x, y) @ a) <= 1e-12
        assert op_norm(inner(x, y + w) - inner(x, y) - inner(x, w)) <= 1e-12


def test_cauchy_schwarz_operator_form():
    rng = np.random.default_rng(43)
    for _ in range(50):
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        lhs = op_norm(inner(x, x)) * inner(y, y) - inner(y, x) @ inner(x, y)
        for b in lhs.blocks:
            eigs = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
            assert eigs.min() >= -1e-10 * (1.0 + op_norm(lhs))


def test_cauchy_schwarz_scalar_form():
    rng = np.random.default_rng(47)
    for _ in range(50):
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        assert (op_norm(inner(x, y)) ** 2
                <= norm_mod(x) ** 2 * norm_mod(y) ** 2 + 1e-12)


def test_polarize_matches_raw_expansion():
    rng = np.random.default_rng(53)
    for _ in range(20):
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        got = polarize(x, y)
        for gb, wb in zip(got.blocks, polarize_oracle(x, y)):
            np.testing.assert_allclose(gb, wb, rtol=0, atol=1e-12)


def test_polarize_reconstructs_inner():
    rng = np.random.default_rng(59)
    for _ in range(50):
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        assert op_norm(polarize(x, y) - inner(x, y)) <= 1e-10


def test_norm_mod_homogeneous_and_triangle():
    rng = np.random.default_rng(61)
    x = random_module_element(MDESC, rng)
    y = random_module_element(MDESC, rng)
    assert norm_mod(3.5 * x) == pytest.approx(3.5 * norm_mod(x), rel=1e-12)
    assert norm_mod(x + y) <= norm_mod(x) + norm_mod(y) + 1e-12
    assert distance_mod(x, x) == 0.0
    assert distance_mod(x, y) == norm_mod(x - y)


def test_module_descriptor_validation():
    with pytest.raises(ValueError):
        ModuleDescriptor(DESC, 0)
    x = random_module_element(MDESC, np.random.default_rng(0))
    other = random_module_element(ModuleDescriptor(DESC, 2),
                                  np.random.default_rng(0))
    with pytest.raises(DescriptorMismatch):
        inner(x, other)


def test_module_elements_are_immutable():
    x = ModuleElement.zeros(MDESC)
    with pytest.raises(AttributeError):
        x.components = ()
