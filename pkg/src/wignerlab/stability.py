"""Scaled-iterate stability pipeline: from an approximate map to an exact one.

Given a map f that satisfies the control bound, the pipeline runs, per sample
point x:

1. scaled iterates  f_n(x) = c^n f(c^-n x)  for n = 0..n_max;
2. limit extraction: densest cluster among the tail iterates, averaged;
3. the pairing a = inner(F(x), f(x)) is checked normal and polar-factored
   into a phase part s and modulus |a|;
4. the exact-solution value is I(x) = F(x) . s, the remainder h = f(x) - I(x).

Each step records the residuals of the identities it is supposed to satisfy;
the verify layer re-derives them independently before trusting a run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .algebra import AlgebraElement, op_norm, polar_normal
from .control import suggest_c
from .exceptions import NoAccumulationPointError, NotNormalError
from .modules import ModuleElement, inner, norm_mod, right_act
from .validation import ensure_module_elements, ensure_positive

__all__ = [
    "StabilityParams",
    "ScaledIterates",
    "FLimit",
    "StabilityResult",
    "iterate_scaled",
    "extract_limit",
    "construct_F",
    "construct_I",
    "WignerStabilizer",
]


@dataclass(frozen=True)
class StabilityParams:
    """Knobs of the stability pipeline.

    ``cluster_tol`` is a base value: the effective clustering radius at a
    point x is ``cluster_tol * (1 + norm_mod(x))``.  ``tail_fraction`` is the
    trailing share of the iterate sequence searched for clusters.
    """

    c: float
    n_max: int = 40
    cluster_tol: float = 1e-6
    normality_tol: float = 1e-6
    rank_tol: float = 1e-8
    min_cluster: int = 3
    tail_fraction: float = 0.8
    overflow_factor: float = 1e6

    def __post_init__(self) -> None:
        if self.c <= 0.0 or self.c == 1.0:
            raise ValueError(f"scale constant must be positive and != 1, got {self.c}")
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if not 0.0 < self.tail_fraction <= 1.0:
            raise ValueError(f"tail_fraction must lie in (0, 1], got {self.tail_fraction}")
        if self.min_cluster < 2:
            raise ValueError(f"min_cluster must be >= 2, got {self.min_cluster}")


@dataclass
class ScaledIterates:
    """The sequence c^n f(c^-n x) with its quadratic-difference residuals."""

    point: ModuleElement
    values: list
    quad_residuals: list      # op_norm(inner(f_n, f_n) - inner(x, x)) per n
    norms: list


@dataclass
class FLimit:
    """A cluster limit of the scaled iterates at one point."""

    point: ModuleElement
    value: ModuleElement
    cluster_indices: list
    cluster_spread: float
    iterates: ScaledIterates


@dataclass
class StabilityResult:
    """Everything the pipeline produced at one sample point."""

    point: ModuleElement
    point_id: str
    limit: ModuleElement            # F(x)
    sign: AlgebraElement            # s(x), partial isometry factor
    support: AlgebraElement         # p(x) = s* s
    exact: ModuleElement            # I(x) = F(x) . s
    remainder: ModuleElement        # h(x) = f(x) - I(x)
    cluster_indices: list
    cluster_spread: float
    quad_residuals: list
    iterate_norms: list
    iso_residual: float             # op_norm(inner(I, I) - inner(x, x))
    fit_residual: float             # op_norm(inner(f(x), I) - inner(x, x))
    abs_gap: float                  # op_norm(|a| - inner(x, x))
    normality_defect: float
    support_residual: float         # norm_mod(F . p - F)
    recovery_residual: float        # norm_mod(I . s* - F)
    orth_residual: float            # op_norm(inner(h, I))
    remainder_norm: float           # norm_mod(h) = distance from f(x) to I(x)


def iterate_scaled(f, x: ModuleElement,
                   params: StabilityParams) -> ScaledIterates:
    """Tabulate f_n(x) = c^n f(c^-n x) for n = 0..n_max.

    Guards against norm explosion (an inadmissible (f, c) pairing makes the
    sequence diverge, and nothing downstream could cluster it).
    """
    c = params.c
    gram = inner(x, x)
    cap = params.overflow_factor * (1.0 + norm_mod(x))
    values = []
    residuals = []
    norms = []
    for n in range(params.n_max + 1):
        cn = c ** n
        v = cn * f((1.0 / cn) * x)
        nv = norm_mod(v)
        if not math.isfinite(nv) or nv > cap:
            raise NoAccumulationPointError(
                f"scaled iterates diverge at n={n}: norm {nv:.3e} exceeds "
                f"{cap:.3e}; the pairing of map and scale constant is "
                "inadmissible", best_size=0, tol=params.cluster_tol)
        values.append(v)
        norms.append(nv)
        residuals.append(op_norm(inner(v, v) - gram))
    return ScaledIterates(point=x, values=values, quad_residuals=residuals,
                          norms=norms)


def _flatten_values(values) -> "np.ndarray":
    rows = [np.concatenate([b.ravel() for comp in v.components
                            for b in comp.blocks]) for v in values]
    return np.stack(rows)


def extract_limit(values, cluster_tol: float, tail_fraction: float = 0.8,
                  min_cluster: int = 3):
    """Densest cluster among the tail elements, averaged.

    A cluster is the set of tail elements within ``cluster_tol / 2`` of
    some tail element, measured in the flat coordinate norm (which
    dominates the module norm, so the ball is conservative).  The densest
    cluster wins, ties broken toward later centers; its average is the
    returned limit.  Guarantee: every returned index l satisfies
    ``norm_mod(values[l] - limit) <= cluster_tol``, enforced in the module
    norm before returning.

    Raises :class:`NoAccumulationPointError` when no cluster reaches
    ``min_cluster`` members.
    """
    m = len(values)
    window = max(min_cluster, int(round(tail_fraction * m)))
    start = max(0, m - window)
    tail = list(range(start, m))
    if len(tail) < min_cluster:
        raise NoAccumulationPointError(
            f"tail of {len(tail)} elements cannot contain a cluster of "
            f"{min_cluster}", best_size=len(tail), tol=cluster_tol)

    flat = _flatten_values([values[j] for j in tail])
    dmat = np.linalg.norm(flat[:, None, :] - flat[None, :, :], axis=2)
    radius = cluster_tol / 2.0

    best_members = np.empty(0, dtype=int)
    for row in range(len(tail)):
        members = np.nonzero(dmat[row] <= radius)[0]
        if len(members) >= len(best_members):
            best_members = members

    if len(best_members) < min_cluster:
        off_diag = dmat[np.triu_indices(len(tail), k=1)]
        min_gap = float(off_diag.min()) if off_diag.size else math.inf
        raise NoAccumulationPointError(
            f"densest tail cluster has {len(best_members)} member(s), need "
            f"{min_cluster}; smallest tail gap {min_gap:.3e} vs radius "
            f"{radius:.3e}", best_size=int(len(best_members)),
            tol=cluster_tol)

    chosen = [tail[row] for row in best_members.tolist()]
    acc = None
    for j in chosen:
        acc = values[j] if acc is None else acc + values[j]
    limit = (1.0 / len(chosen)) * acc
    spread = max(norm_mod(values[j] - limit) for j in chosen)
    if spread > cluster_tol:
        raise NoAccumulationPointError(
            f"cluster average drifted to spread {spread:.3e} > "
            f"{cluster_tol:.3e}", best_size=len(chosen), tol=cluster_tol)
    return limit, chosen


def construct_F(f, x: ModuleElement, params: StabilityParams) -> FLimit:
    """Scaled iterates plus cluster extraction at one point."""
    its = iterate_scaled(f, x, params)
    tol_eff = params.cluster_tol * (1.0 + norm_mod(x))
    value, indices = extract_limit(its.values, tol_eff,
                                   tail_fraction=params.tail_fraction,
                                   min_cluster=params.min_cluster)
    spread = max(norm_mod(its.values[j] - value) for j in indices)
    return FLimit(point=x, value=value, cluster_indices=indices,
                  cluster_spread=spread, iterates=its)


def construct_I(f, x: ModuleElement, params: StabilityParams,
                point_id: str = "") -> StabilityResult:
    """Full pipeline at one point: limit, polar phase, exact value, remainder."""
    fl = construct_F(f, x, params)
    fx = f(x)
    gram = inner(x, x)

    a = inner(fl.value, fx)
    na = op_norm(a)
    defect = op_norm(a.adjoint() @ a - a @ a.adjoint())
    if defect > params.normality_tol * na * na:
        raise NotNormalError(
            f"pairing of limit and map value is not normal at point "
            f"{point_id or '?'}: defect {defect:.3e} vs "
            f"{params.normality_tol * na * na:.3e}; the extracted limit is "
            "not trustworthy")

    sign, abs_a = polar_normal(a, rank_tol=params.rank_tol,
                               normality_tol=params.normality_tol)
    support = sign.adjoint() @ sign
    exact = right_act(fl.value, sign)
    remainder = fx - exact

    return StabilityResult(
        point=x,
        point_id=point_id,
        limit=fl.value,
        sign=sign,
        support=support,
        exact=exact,
        remainder=remainder,
        cluster_indices=fl.cluster_indices,
        cluster_spread=fl.cluster_spread,
        quad_residuals=fl.iterates.quad_residuals,
        iterate_norms=fl.iterates.norms,
        iso_residual=op_norm(inner(exact, exact) - gram),
        fit_residual=op_norm(inner(fx, exact) - gram),
        abs_gap=op_norm(abs_a - gram),
        normality_defect=defect,
        support_residual=norm_mod(right_act(fl.value, support) - fl.value),
        recovery_residual=norm_mod(right_act(exact, sign.adjoint()) - fl.value),
        orth_residual=op_norm(inner(remainder, exact)),
        remainder_norm=norm_mod(remainder),
    )


class WignerStabilizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the stability pipeline.

    Parameters mirror :class:`StabilityParams`; ``map`` is the approximate
    solution to stabilize and ``control`` its control function (used to
    resolve ``c="auto"``).  ``fit(X)`` runs the pipeline on every point of X
    and stores per-point :class:`StabilityResult` records in ``results_``;
    ``transform(X)`` returns the exact-solution values at the given points.
    """

    def __init__(self, map=None, control=None, c="auto", n_max=40,
                 cluster_tol=1e-6, normality_tol=1e-6, rank_tol=1e-8,
                 min_cluster=3, tail_fraction=0.8):
        self.map = map
        self.control = control
        self.c = c
        self.n_max = n_max
        self.cluster_tol = cluster_tol
        self.normality_tol = normality_tol
        self.rank_tol = rank_tol
        self.min_cluster = min_cluster
        self.tail_fraction = tail_fraction

    def _resolved_params(self) -> StabilityParams:
        c = self.c
        if c == "auto":
            if self.control is None or not hasattr(self.control, "p"):
                raise ValueError(
                    "c='auto' needs a power control function; pass c explicitly")
            c = suggest_c(self.control.p, self.control.q)
        return StabilityParams(
            c=float(c),
            n_max=int(self.n_max),
            cluster_tol=ensure_positive("cluster_tol", self.cluster_tol),
            normality_tol=ensure_positive("normality_tol", self.normality_tol),
            rank_tol=ensure_positive("rank_tol", self.rank_tol),
            min_cluster=int(self.min_cluster),
            tail_fraction=float(self.tail_fraction),
        )

    def fit(self, X, y=None):
        if self.map is None:
            raise ValueError("a map to stabilize is required")
        points = ensure_module_elements(X)
        params = self._resolved_params()
        results = [construct_I(self.map, x, params, point_id=str(i))
                   for i, x in enumerate(points)]
        self.params_ = params
        self.results_ = results
        self.n_points_ = len(points)
        return self

    def transform(self, X):
        check_is_fitted(self, "results_")
        points = ensure_module_elements(X)
        cache = {id(r.point): r.exact for r in self.results_}
        out = []
        for x in points:
            hit = cache.get(id(x))
            if hit is None:
                hit = construct_I(self.map, x, self.params_).exact
            out.append(hit)
        return out
