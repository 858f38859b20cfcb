"""Synthesis of exact phase-equation solutions and certified perturbations.

An exact solution is a scalar phase times a block unitary applied to permuted
coordinates; it preserves |inner(x, y)| identically.  A perturbation adds
``delta * ||x||^r * d(x)`` where ``d(x)`` is a unit module element derived
deterministically from a hash of the evaluation point and the seed, and
projected orthogonal to the core image at that point so that the planted
noise is exactly the orthogonal remainder the stability pipeline should
recover.  Certification checks the control bound on a sample set, halving
``delta`` on violation until the bound holds or the retry budget runs out.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, op_norm, random_unitary
from .exceptions import CannotCertifyError
from .modules import (ModuleDescriptor, ModuleElement, inner, norm_mod,
                      random_module_element, right_act, wigner_defect)

__all__ = [
    "PhaseRule",
    "ExactSolution",
    "ApproxMap",
    "Certificate",
    "make_exact_solution",
    "make_perturbation",
    "assemble_approximate_map",
]


@dataclass(frozen=True)
class PhaseRule:
    """Scalar phase attached to each evaluation point.

    ``constant`` mode multiplies by a fixed unimodular value; ``oscillating``
    mode multiplies by exp(i * alpha * log ||x||), with the phase at the zero
    element defined as 1.
    """

    mode: str = "constant"
    value: complex = 1.0 + 0.0j
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("constant", "oscillating"):
            raise ValueError(f"unknown phase mode {self.mode!r}")
        if self.mode == "constant":
            mag = abs(complex(self.value))
            if not math.isclose(mag, 1.0, rel_tol=0.0, abs_tol=1e-12):
                raise ValueError(f"constant phase must be unimodular, |v|={mag}")

    def __call__(self, norm: float) -> complex:
        if self.mode == "constant":
            return complex(self.value)
        if norm <= 0.0:
            return 1.0 + 0.0j
        return complex(np.exp(1j * self.alpha * np.log(norm)))


@dataclass(frozen=True)
class ExactSolution:
    """x -> phase(||x||) * w . (x o perm), an exact solution of the phase equation."""

    module: ModuleDescriptor
    unitary: AlgebraElement
    perm: tuple[int, ...]
    phase: PhaseRule

    def __post_init__(self) -> None:
        if self.unitary.descriptor != self.module.algebra:
            raise ValueError("unitary lives over a different algebra")
        if sorted(self.perm) != list(range(self.module.rank)):
            raise ValueError(f"perm {self.perm} is not a permutation of "
                             f"0..{self.module.rank - 1}")
        ident = AlgebraElement.identity(self.module.algebra)
        defect = op_norm(self.unitary.adjoint() @ self.unitary - ident)
        if defect > 1e-9:
            raise ValueError(f"core factor is not unitary, defect {defect:.3e}")

    def core(self, x: ModuleElement) -> ModuleElement:
        """The unphased image w . (x o perm); linear in x."""
        if x.descriptor != self.module:
            raise ValueError("point lives in a different module")
        comps = [self.unitary @ x.components[j] for j in self.perm]
        return ModuleElement(self.module, comps)

    def __call__(self, x: ModuleElement) -> ModuleElement:
        return self.phase(norm_mod(x)) * self.core(x)


def _point_digest(x: ModuleElement, seed: int, attempt: int) -> int:
    h = hashlib.blake2b(digest_size=16)
    h.update(repr(x.descriptor).encode())
    h.update(int(seed).to_bytes(8, "little", signed=True))
    h.update(int(attempt).to_bytes(2, "little"))
    for comp in x.components:
        for b in comp.blocks:
            h.update(np.ascontiguousarray(b).tobytes())
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class ApproxMap:
    """base(x) + delta * ||x||^r * d(x) with d(x) a hash-seeded unit direction.

    d(x) is orthogonal to the core image at x, so the added noise never leaks
    into inner(f(x), base-direction) terms; norm_mod(d(x)) = 1 up to rounding.
    A map with delta = 0 evaluates bit-for-bit like its base.
    """

    base: ExactSolution
    delta: float = 0.0
    r: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def module(self) -> ModuleDescriptor:
        return self.base.module

    def direction(self, x: ModuleElement) -> ModuleElement:
        """Unit noise direction at x, orthogonal to the core image there."""
        core = self.base.core(x)
        gram = inner(core, core)
        pinv_blocks = [np.linalg.pinv(np.array(b), rcond=1e-12, hermitian=True)
                       for b in gram.blocks]
        for attempt in range(16):
            rng = np.random.default_rng(_point_digest(x, self.seed, attempt))
            d0 = random_module_element(self.module, rng)
            cross = inner(core, d0)
            coeff = AlgebraElement(
                gram.descriptor,
                [p @ np.array(c) for p, c in zip(pinv_blocks, cross.blocks)])
            d = d0 - right_act(core, coeff)
            n = norm_mod(d)
            if n > 1e-8 * max(norm_mod(d0), 1.0):
                return (1.0 / n) * d
        raise CannotCertifyError(
            "no noise direction orthogonal to the exact core at this point; "
            "the module rank leaves no room (use delta = 0 or rank >= 2)",
            delta=self.delta)

    def __call__(self, x: ModuleElement) -> ModuleElement:
        b = self.base(x)
        if self.delta == 0.0:
            return b
        t = norm_mod(x)
        if t == 0.0:
            return b
        amp = self.delta * t ** self.r
        return b + amp * self.direction(x)


@dataclass(frozen=True)
class Certificate:
    """Outcome of certifying a map against its control bound on a sample set."""

    delta_initial: float
    delta_final: float
    halvings: int
    n_pairs: int
    n_vacuous: int
    worst_residual: float
    worst_allowance: float
    worst_excess: float
    slack: float

    def to_dict(self) -> dict:
        def f(v):
            v = float(v)
            return v if math.isfinite(v) else repr(v)
        return {
            "delta_initial": self.delta_initial,
            "delta_final": self.delta_final,
            "halvings": self.halvings,
            "n_pairs": self.n_pairs,
            "n_vacuous": self.n_vacuous,
            "worst_residual": f(self.worst_residual),
            "worst_allowance": f(self.worst_allowance),
            "worst_excess": f(self.worst_excess),
            "slack": self.slack,
        }


def make_exact_solution(module: ModuleDescriptor, seed: int,
                        phase_mode: str = "constant",
                        alpha: float = 0.0,
                        constant_value: complex = 1.0 + 0.0j) -> ExactSolution:
    """Seeded exact solution: random block unitary and coordinate permutation."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5eed]))
    w = random_unitary(module.algebra, rng)
    perm = tuple(int(i) for i in rng.permutation(module.rank))
    phase = PhaseRule(mode=phase_mode, value=constant_value, alpha=alpha)
    return ExactSolution(module=module, unitary=w, perm=perm, phase=phase)


def make_perturbation(base: ExactSolution, delta: float, r: float,
                      seed: int = 0) -> ApproxMap:
    return ApproxMap(base=base, delta=float(delta), r=float(r), seed=int(seed))


def assemble_approximate_map(candidate: ApproxMap, phi, pairs,
                             slack: float = 1e-11,
                             max_halvings: int = 8):
    """Certify the control bound on ``pairs``, halving delta on violation.

    Returns ``(certified_map, certificate)``.  Pairs where phi evaluates to
    +inf are vacuous and only counted.  Raises :class:`CannotCertifyError`
    when the bound still fails after ``max_halvings`` halvings.
    """
    pairs = list(pairs)
    f = candidate
    for halvings in range(max_halvings + 1):
        worst_excess = -math.inf
        worst_residual = 0.0
        worst_allowance = math.inf
        n_vacuous = 0
        ok = True
        for x, y in pairs:
            allowance = phi.evaluate(norm_mod(x), norm_mod(y))
            if math.isinf(allowance):
                n_vacuous += 1
                continue
            residual = wigner_defect(f(x), f(y), x, y)
            excess = residual - allowance
            if excess > worst_excess:
                worst_excess = excess
                worst_residual = residual
                worst_allowance = allowance
            if excess > slack:
                ok = False
        if ok or not pairs:
            return f, Certificate(
                delta_initial=candidate.delta,
                delta_final=f.delta,
                halvings=halvings,
                n_pairs=len(pairs),
                n_vacuous=n_vacuous,
                worst_residual=worst_residual,
                worst_allowance=worst_allowance,
                worst_excess=worst_excess if pairs else 0.0,
                slack=slack,
            )
        if halvings < max_halvings:
            f = dataclasses.replace(f, delta=f.delta / 2.0)
    raise CannotCertifyError(
        f"control bound still violated after {max_halvings} halvings: "
        f"worst residual {worst_residual:.3e} vs allowance "
        f"{worst_allowance:.3e} (delta ended at {f.delta:.3e})",
        delta=f.delta, halvings=max_halvings, worst_excess=worst_excess)
