"""Finite-dimensional *-algebras of block-diagonal complex matrices.

Every finite-dimensional C*-algebra is a direct sum of full matrix algebras,
so elements are stored as tuples of square complex blocks and all operations
act blockwise.  The spectral helpers (positive square root, modulus, spectral
decomposition and polar factorization of normal elements) are the workhorses
of the rest of the package.

Elements are immutable: block arrays are copied on construction and marked
read-only, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DescriptorMismatch, NotNormalError, NotPositiveError

__all__ = [
    "AlgebraDescriptor",
    "AlgebraElement",
    "ElementFlags",
    "SpectralData",
    "op_norm",
    "distance",
    "classify",
    "pos_sqrt",
    "abs_elem",
    "spectral_decomp_normal",
    "polar_normal",
    "random_element",
    "random_hermitian",
    "random_positive",
    "random_unitary",
    "random_normal_element",
]


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Block structure of a direct sum of full matrix algebras."""

    block_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.block_sizes)
        if len(sizes) == 0:
            raise ValueError("an algebra needs at least one block")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def is_abelian(self) -> bool:
        return all(n == 1 for n in self.block_sizes)


def _freeze(block: np.ndarray) -> np.ndarray:
    out = np.array(block, dtype=np.complex128, copy=True, ndmin=2)
    out.setflags(write=False)
    return out


class AlgebraElement:
    """One element of a block-diagonal *-algebra."""

    __slots__ = ("descriptor", "blocks")

    def __init__(self, descriptor: AlgebraDescriptor, blocks) -> None:
        blocks = tuple(_freeze(b) for b in blocks)
        if len(blocks) != descriptor.n_blocks:
            raise DescriptorMismatch(
                f"expected {descriptor.n_blocks} blocks, got {len(blocks)}")
        for b, n in zip(blocks, descriptor.block_sizes):
            if b.shape != (n, n):
                raise DescriptorMismatch(
                    f"block of shape {b.shape} does not fit size-{n} slot")
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("AlgebraElement is immutable")

    def __copy__(self) -> "AlgebraElement":
        return self

    def __deepcopy__(self, memo) -> "AlgebraElement":
        return self

    @classmethod
    def _wrap(cls, descriptor: AlgebraDescriptor, blocks) -> "AlgebraElement":
        # fast path for arithmetic results: the arrays are freshly computed
        # and owned here, so only the writeable flag needs flipping
        out = object.__new__(cls)
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(out, "descriptor", descriptor)
        object.__setattr__(out, "blocks", tuple(blocks))
        return out

    @classmethod
    def zeros(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        return cls(descriptor,
                   [np.zeros((n, n)) for n in descriptor.block_sizes])

    @classmethod
    def identity(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        return cls(descriptor, [np.eye(n) for n in descriptor.block_sizes])

    def _check_peer(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other)!r}")
        if other.descriptor != self.descriptor:
            raise DescriptorMismatch(
                f"{self.descriptor} vs {other.descriptor}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_peer(other)
        return AlgebraElement._wrap(
            self.descriptor,
            [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_peer(other)
        return AlgebraElement._wrap(
            self.descriptor,
            [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement._wrap(self.descriptor,
                                    [-a for a in self.blocks])

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_peer(other)
        return AlgebraElement._wrap(
            self.descriptor,
            [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar) -> "AlgebraElement":
        z = complex(scalar)
        return AlgebraElement._wrap(self.descriptor,
                                    [z * a for a in self.blocks])

    __rmul__ = __mul__

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement._wrap(self.descriptor,
                                    [np.conj(a.T) for a in self.blocks])

    def norm(self) -> float:
        return op_norm(self)

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def __repr__(self) -> str:
        sizes = self.descriptor.block_sizes
        return f"AlgebraElement(blocks={sizes}, norm={op_norm(self):.6g})"


def op_norm(a: AlgebraElement) -> float:
    """Operator norm: the largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in a.blocks)


def distance(a: AlgebraElement, b: AlgebraElement) -> float:
    return op_norm(a - b)


@dataclass(frozen=True)
class ElementFlags:
    """Tolerance-scaled structural classification of one element.

    All defects are compared against ``tol * (1 + op_norm(a))**2`` except the
    normality defect, which uses the quadratic scaling ``tol * op_norm(a)**2``
    natural for the commutator ``a* a - a a*``.
    """

    hermitian: bool
    positive: bool
    projection: bool
    partial_isometry: bool
    normal: bool
    hermitian_defect: float
    min_eigenvalue: float
    idempotent_defect: float
    isometry_defect: float
    normality_defect: float


def classify(a: AlgebraElement, tol: float = 1e-8) -> ElementFlags:
    """Classify ``a`` as positive / projection / partial isometry / normal."""
    na = op_norm(a)
    scale = tol * (1.0 + na) ** 2
    adj = a.adjoint()

    herm_defect = op_norm(a - adj)
    hermitian = herm_defect <= scale

    min_eig = min(
        float(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0]) for b in a.blocks)
    positive = hermitian and min_eig >= -scale

    idem_defect = op_norm(a @ a - a)
    projection = hermitian and idem_defect <= scale

    q = adj @ a
    iso_defect = op_norm(q @ q - q)
    partial_isometry = iso_defect <= scale

    norm_defect = op_norm(q - a @ adj)
    normal = norm_defect <= tol * na * na

    return ElementFlags(
        hermitian=hermitian,
        positive=positive,
        projection=projection,
        partial_isometry=partial_isometry,
        normal=normal,
        hermitian_defect=herm_defect,
        min_eigenvalue=min_eig,
        idempotent_defect=idem_defect,
        isometry_defect=iso_defect,
        normality_defect=norm_defect,
    )


def pos_sqrt(a: AlgebraElement, tol: float = 1e-10) -> AlgebraElement:
    """Positive square root of a positive element.

    Each block is diagonalized with a Hermitian eigensolver.  Eigenvalues in
    ``[-thr, 0)`` with ``thr = tol * (1 + op_norm(a))`` are treated as
    rounding noise and clamped to zero; anything below ``-thr`` raises
    :class:`NotPositiveError`, as does a non-Hermitian input.
    """
    thr = tol * (1.0 + op_norm(a))
    herm_defect = op_norm(a - a.adjoint())
    if herm_defect > thr:
        raise NotPositiveError(
            f"element is not Hermitian: defect {herm_defect:.3e} > {thr:.3e}")
    out = []
    for b in a.blocks:
        w, v = np.linalg.eigh(0.5 * (b + b.conj().T))
        if w[0] < -thr:
            raise NotPositiveError(
                f"negative eigenvalue {w[0]:.3e} below -{thr:.3e}")
        w = np.where(w > 0.0, w, 0.0)
        out.append((v * np.sqrt(w)) @ v.conj().T)
    return AlgebraElement(a.descriptor, out)


def abs_elem(a: AlgebraElement, tol: float = 1e-10) -> AlgebraElement:
    """Modulus |a| = (a* a)^(1/2), computed through :func:`pos_sqrt`."""
    return pos_sqrt(a.adjoint() @ a, tol)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues and a diagonalizing unitary of a normal element."""

    descriptor: AlgebraDescriptor
    eigenvalues: tuple[np.ndarray, ...]
    unitary: AlgebraElement

    def assemble(self, values) -> AlgebraElement:
        """Build ``u diag(values) u*`` blockwise from supplied eigenvalues."""
        blocks = [(u * np.asarray(v)) @ u.conj().T
                  for u, v in zip(self.unitary.blocks, values)]
        return AlgebraElement(self.descriptor, blocks)

    def reconstruct(self) -> AlgebraElement:
        return self.assemble(self.eigenvalues)


def spectral_decomp_normal(a: AlgebraElement,
                           tol: float = 1e-6) -> SpectralData:
    """Diagonalize a normal element.

    Normality is checked as ``op_norm(a* a - a a*) <= tol * op_norm(a)**2``.
    Each block goes through a complex Schur decomposition; for a normal block
    the triangular factor is diagonal up to rounding, and the reconstruction
    is verified to satisfy ``op_norm(u diag u* - a) <= tol * op_norm(a)``.
    """
    na = op_norm(a)
    defect = op_norm(a.adjoint() @ a - a @ a.adjoint())
    if defect > tol * na * na:
        raise NotNormalError(
            f"normality defect {defect:.3e} exceeds {tol * na * na:.3e}")
    eigs = []
    us = []
    for b in a.blocks:
        t, z = scipy.linalg.schur(np.array(b), output="complex")
        eigs.append(np.diag(t).copy())
        us.append(z)
    data = SpectralData(a.descriptor, tuple(eigs), AlgebraElement(a.descriptor, us))
    recon_err = op_norm(data.reconstruct() - a)
    if recon_err > tol * max(na, 1e-300):
        raise NotNormalError(
            f"spectral reconstruction error {recon_err:.3e} exceeds "
            f"{tol * na:.3e}; element is too far from normal")
    return data


def polar_normal(a: AlgebraElement, rank_tol: float = 1e-8,
                 normality_tol: float = 1e-6):
    """Polar factorization a = s |a| of a normal element.

    The phase factor ``s`` is the spectral sign function: on the eigenbasis of
    ``a`` it multiplies by ``lam/|lam|`` where ``|lam| > rank_tol *
    op_norm(a)`` and by 0 elsewhere.  Because ``s`` is a function of ``a`` it
    commutes with ``a`` and with everything ``a`` commutes with; ``s* s =
    s s*`` is the support projection of ``|a|``.

    Returns ``(s, absa)`` where ``absa`` is |a| assembled from the same
    spectral data.
    """
    data = spectral_decomp_normal(a, normality_tol)
    thr = rank_tol * op_norm(a)
    signs = []
    mags = []
    for vals in data.eigenvalues:
        m = np.abs(vals)
        keep = m > thr
        safe = np.where(keep, m, 1.0)
        signs.append(np.where(keep, vals / safe, 0.0))
        mags.append(m)
    return data.assemble(signs), data.assemble(mags)


# ---------------------------------------------------------------------------
# seeded element generators


def random_element(descriptor: AlgebraDescriptor, rng: np.random.Generator,
                   scale: float = 1.0) -> AlgebraElement:
    """Element with independent standard complex Gaussian entries."""
    blocks = []
    for n in descriptor.block_sizes:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks.append(scale / np.sqrt(2.0) * g)
    return AlgebraElement(descriptor, blocks)


def random_hermitian(descriptor: AlgebraDescriptor,
                     rng: np.random.Generator) -> AlgebraElement:
    g = random_element(descriptor, rng)
    return 0.5 * (g + g.adjoint())


def random_positive(descriptor: AlgebraDescriptor,
                    rng: np.random.Generator) -> AlgebraElement:
    g = random_element(descriptor, rng)
    return g.adjoint() @ g


def random_unitary(descriptor: AlgebraDescriptor,
                   rng: np.random.Generator) -> AlgebraElement:
    """Haar-ish block unitary via QR with the diagonal phases fixed."""
    blocks = []
    for n in descriptor.block_sizes:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        q = q * (d / np.abs(d))
        blocks.append(q)
    return AlgebraElement(descriptor, blocks)


def random_normal_element(descriptor: AlgebraDescriptor,
                          rng: np.random.Generator,
                          zero_fraction: float = 0.0) -> AlgebraElement:
    """Normal element u diag(lam) u* with complex Gaussian eigenvalues.

    ``zero_fraction`` of the eigenvalues (Bernoulli per entry) are forced to
    exactly zero so rank-deficient polar parts get exercised.
    """
    u = random_unitary(descriptor, rng)
    blocks = []
    for q, n in zip(u.blocks, descriptor.block_sizes):
        lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        if zero_fraction > 0.0:
            lam = np.where(rng.random(n) < zero_fraction, 0.0, lam)
        blocks.append((q * lam) @ q.conj().T)
    return AlgebraElement(descriptor, blocks)
