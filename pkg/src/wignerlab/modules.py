"""Inner product modules of fixed rank over a block matrix *-algebra.

A rank-k module element is a k-tuple of algebra elements; the algebra-valued
pairing is ``inner(x, y) = sum_i x_i* y_i``, conjugate-linear in the first
slot and linear in the second, and the module norm is
``sqrt(op_norm(inner(x, x)))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (AlgebraDescriptor, AlgebraElement, abs_elem, op_norm,
                      random_element)
from .exceptions import DescriptorMismatch

__all__ = [
    "ModuleDescriptor",
    "ModuleElement",
    "inner",
    "norm_mod",
    "distance_mod",
    "right_act",
    "polarize",
    "wigner_defect",
    "random_module_element",
]


@dataclass(frozen=True)
class ModuleDescriptor:
    """Rank-k free module over the given algebra."""

    algebra: AlgebraDescriptor
    rank: int

    def __post_init__(self) -> None:
        if int(self.rank) < 1:
            raise ValueError(f"module rank must be >= 1, got {self.rank}")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def is_abelian(self) -> bool:
        return self.algebra.is_abelian


class ModuleElement:
    """Immutable k-tuple of algebra elements."""

    __slots__ = ("descriptor", "components")

    def __init__(self, descriptor: ModuleDescriptor, components) -> None:
        components = tuple(components)
        if len(components) != descriptor.rank:
            raise DescriptorMismatch(
                f"expected {descriptor.rank} components, got {len(components)}")
        for c in components:
            if not isinstance(c, AlgebraElement):
                raise TypeError(f"component of type {type(c)!r}")
            if c.descriptor != descriptor.algebra:
                raise DescriptorMismatch("component algebra does not match")
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("ModuleElement is immutable")

    def __copy__(self) -> "ModuleElement":
        return self

    def __deepcopy__(self, memo) -> "ModuleElement":
        return self

    @classmethod
    def zeros(cls, descriptor: ModuleDescriptor) -> "ModuleElement":
        z = AlgebraElement.zeros(descriptor.algebra)
        return cls(descriptor, [z] * descriptor.rank)

    def _check_peer(self, other: "ModuleElement") -> None:
        if not isinstance(other, ModuleElement):
            raise TypeError(f"expected ModuleElement, got {type(other)!r}")
        if other.descriptor != self.descriptor:
            raise DescriptorMismatch(
                f"{self.descriptor} vs {other.descriptor}")

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        self._check_peer(other)
        return ModuleElement(
            self.descriptor,
            [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        self._check_peer(other)
        return ModuleElement(
            self.descriptor,
            [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.descriptor, [-a for a in self.components])

    def __mul__(self, scalar) -> "ModuleElement":
        z = complex(scalar)
        return ModuleElement(self.descriptor, [z * a for a in self.components])

    __rmul__ = __mul__

    def norm(self) -> float:
        return norm_mod(self)

    def __repr__(self) -> str:
        return (f"ModuleElement(rank={self.descriptor.rank}, "
                f"norm={norm_mod(self):.6g})")


def inner(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """Algebra-valued pairing sum_i x_i* y_i."""
    x._check_peer(y)
    acc = None
    for xc, yc in zip(x.components, y.components):
        term = xc.adjoint() @ yc
        acc = term if acc is None else acc + term
    return acc


def norm_mod(x: ModuleElement) -> float:
    """Module norm sqrt(op_norm(inner(x, x)))."""
    return float(np.sqrt(op_norm(inner(x, x))))


def distance_mod(x: ModuleElement, y: ModuleElement) -> float:
    return norm_mod(x - y)


def right_act(x: ModuleElement, a: AlgebraElement) -> ModuleElement:
    """Componentwise right action x . a = (x_i a)_i."""
    if a.descriptor != x.descriptor.algebra:
        raise DescriptorMismatch("acting element lives over a different algebra")
    return ModuleElement(x.descriptor, [c @ a for c in x.components])


def polarize(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """Reconstruct inner(x, y) from the four twisted squared norms.

    The k-th term carries weight conj(i^k); with the pairing conjugate-linear
    in the first slot this sum reproduces inner(x, y) exactly (the mirrored
    weights i^k would land on inner(y, x) instead).
    """
    x._check_peer(y)
    acc = None
    for k in range(4):
        w = 1j ** k
        z = x + w * y
        term = np.conj(w) * inner(z, z)
        acc = term if acc is None else acc + term
    return 0.25 * acc


def wigner_defect(fx: ModuleElement, fy: ModuleElement,
                  x: ModuleElement, y: ModuleElement) -> float:
    """op_norm(|inner(fx, fy)| - |inner(x, y)|), the phase-equation residual."""
    return op_norm(abs_elem(inner(fx, fy)) - abs_elem(inner(x, y)))


def random_module_element(descriptor: ModuleDescriptor,
                          rng: np.random.Generator,
                          scale: float = 1.0) -> ModuleElement:
    return ModuleElement(
        descriptor,
        [random_element(descriptor.algebra, rng, scale)
         for _ in range(descriptor.rank)])
