"""Independent verification of everything the stability pipeline promises.

The pipeline records its own residuals while it works; this layer does not
trust them.  Each check recomputes its quantity from the stored values (and
the map itself), through a different code path where one exists: the modulus
in the |a|-against-inner(x,x) check uses the Hermitian square-root route,
whereas the pipeline obtained it from the spectral polar factorization.

Every check yields a :class:`CheckRecord` with a plain-language statement of
the property, the worst observed value, the threshold it was held to, and a
witness identifying where the worst case occurred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AlgebraDescriptor,
    abs_elem,
    classify,
    op_norm,
    polar_normal,
    pos_sqrt,
    random_element,
    random_normal_element,
    random_positive,
    random_unitary,
    spectral_decomp_normal,
)
from .exceptions import NotAbelianError
from .modules import (
    ModuleDescriptor,
    inner,
    norm_mod,
    polarize,
    random_module_element,
    right_act,
    wigner_defect,
)

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "check_approx_wigner",
    "check_stability_conclusions",
    "check_limit_gates",
    "check_orthogonality",
    "check_exact_wigner",
    "check_polarization",
    "check_quadratic_envelope",
    "build_point_rows",
    "run_algebra_checks",
]


@dataclass
class CheckRecord:
    """One verified property with its worst case and verdict."""

    name: str
    property: str
    worst: float
    threshold: float
    passed: bool
    witness: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def f(v):
            if isinstance(v, float) and not math.isfinite(v):
                return repr(v)
            return v
        return {
            "name": self.name,
            "property": self.property,
            "worst": f(self.worst),
            "threshold": f(self.threshold),
            "passed": self.passed,
            "witness": self.witness,
            "extra": {k: f(v) for k, v in self.extra.items()},
        }


@dataclass
class VerificationReport:
    """All check records of one run plus anything skipped as not applicable."""

    records: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return bool(self.records) and all(r.passed for r in self.records)

    def add(self, record) -> None:
        if isinstance(record, CheckRecord):
            self.records.append(record)
        else:
            self.records.extend(record)

    def skip(self, name: str, reason: str) -> None:
        self.skipped.append({"name": name, "reason": reason})

    def to_dict(self) -> dict:
        return {
            "overall_pass": self.overall_pass,
            "records": [r.to_dict() for r in self.records],
            "skipped": list(self.skipped),
        }


def _worst(records):
    """(worst value, witness) over (value, witness) pairs; empty is -inf."""
    worst = -math.inf
    witness = ""
    for value, tag in records:
        if value > worst:
            worst = value
            witness = tag
    return worst, witness


def check_approx_wigner(f, pairs, phi, slack: float = 1e-11,
                        pair_ids=None) -> CheckRecord:
    """The control bound itself: residual(x, y) <= phi(||x||, ||y||) + slack."""
    pair_ids = pair_ids or [str(i) for i in range(len(pairs))]
    scored = []
    n_vacuous = 0
    for tag, (x, y) in zip(pair_ids, pairs):
        allowance = phi.evaluate(norm_mod(x), norm_mod(y))
        if math.isinf(allowance):
            n_vacuous += 1
            continue
        scored.append((wigner_defect(f(x), f(y), x, y) - allowance, tag))
    worst, witness = _worst(scored)
    if not scored:
        worst = 0.0
    return CheckRecord(
        name="approx_wigner",
        property="norm(|<f(x),f(y)>| - |<x,y>|) <= phi(x, y) on the sample set",
        worst=worst,
        threshold=slack,
        passed=worst <= slack,
        witness=witness,
        extra={"pairs": len(pairs), "vacuous": n_vacuous},
    )


def check_stability_conclusions(f, results, phi, tol: float = 1e-6):
    """Recompute the per-point conclusions from stored values and the map.

    Six records: the diagonal isometry of the exact values, the pairing of f
    against them, the modulus identity (via the Hermitian-root route), the
    distance bound, the remainder orthogonality, and the remainder bound.
    The two sqrt(phi)-bounded records score max(value - sqrt(phi(x, x))).
    """
    iso, fit, gap, dist, orth, hnorm = [], [], [], [], [], []
    for r in results:
        x = r.point
        gram = inner(x, x)
        nx = norm_mod(x)
        allowance = phi.evaluate(nx, nx)
        bound = math.sqrt(allowance) if not math.isinf(allowance) else math.inf
        fx = f(x)
        h = fx - r.exact
        iso.append((op_norm(inner(r.exact, r.exact) - gram), r.point_id))
        fit.append((op_norm(inner(fx, r.exact) - gram), r.point_id))
        gap.append((op_norm(abs_elem(inner(r.limit, fx)) - gram), r.point_id))
        dist.append((norm_mod(h) - bound, r.point_id))
        orth.append((op_norm(inner(h, r.exact)), r.point_id))
        hnorm.append((norm_mod(r.remainder) - bound, r.point_id))

    def rec(name, prop, scored):
        worst, witness = _worst(scored)
        if not scored:
            worst = 0.0
        return CheckRecord(name=name, property=prop, worst=worst,
                           threshold=tol, passed=worst <= tol,
                           witness=witness, extra={"points": len(results)})

    return [
        rec("isometry",
            "<I(x),I(x)> = <x,x> at every sample point", iso),
        rec("map_pairing",
            "<f(x),I(x)> = <x,x> at every sample point", fit),
        rec("modulus_gap",
            "|<F(x),f(x)>| = <x,x>, modulus taken via the Hermitian root", gap),
        rec("distance_bound",
            "norm(f(x) - I(x)) <= sqrt(phi(x, x)) at every sample point", dist),
        rec("remainder_orthogonal",
            "<h(x),I(x)> = 0 for the remainder h = f - I", orth),
        rec("remainder_bound",
            "norm(h(x)) <= sqrt(phi(x, x)) at every sample point", hnorm),
    ]


def check_limit_gates(f, results, probe_pairs, phi, tol: float = 1e-6):
    """Gates that catch a silently wrong extracted limit.

    Diagonal gate: <F(x),F(x)> = <x,x>.  Pair gate: |<F(x),F(y)>| = |<x,y>|
    on probe pairs (limits only, so the tolerance stays tight).  Map gate:
    |<F(x),f(y)>| = |<x,y>| up to the remainder the certified map may carry
    at y, bounded by 2 ||x|| sqrt(phi(y, y)).
    """
    diag = []
    for r in results:
        nx = norm_mod(r.point)
        value = op_norm(inner(r.limit, r.limit) - inner(r.point, r.point))
        diag.append((value - tol * (1.0 + nx) ** 2, r.point_id))

    ff = []
    ff_values = []
    fmap = []
    for i, j in probe_pairs:
        rx, ry = results[i], results[j]
        tag = f"{rx.point_id},{ry.point_id}"
        nx, ny = norm_mod(rx.point), norm_mod(ry.point)
        scale = tol * (1.0 + nx * ny)
        resid_ff = wigner_defect(rx.limit, ry.limit, rx.point, ry.point)
        ff.append((resid_ff - scale, tag))
        ff_values.append({"pair": tag, "residual": resid_ff})
        allowance = phi.evaluate(ny, ny)
        slack_map = (2.0 * nx * math.sqrt(allowance)
                     if not math.isinf(allowance) else math.inf)
        resid_fmap = wigner_defect(rx.limit, f(ry.point), rx.point, ry.point)
        fmap.append((resid_fmap - slack_map - scale, tag))

    def rec(name, prop, scored, n):
        worst, witness = _worst(scored)
        if not scored:
            worst = 0.0
        return CheckRecord(name=name, property=prop, worst=worst,
                           threshold=0.0, passed=worst <= 0.0,
                           witness=witness, extra={"count": n})

    records = [
        rec("limit_isometry",
            "<F(x),F(x)> = <x,x> for the extracted limit, up to the scaled "
            "tolerance", diag, len(results)),
        rec("limit_pair_relation",
            "|<F(x),F(y)>| = |<x,y>| on probe pairs (residuals reported "
            "per pair)", ff, len(probe_pairs)),
        rec("limit_map_relation",
            "|<F(x),f(y)>| = |<x,y>| up to the certified remainder budget "
            "2*||x||*sqrt(phi(y,y))", fmap, len(probe_pairs)),
    ]
    return records, ff_values


def check_orthogonality(orth_pairs, nonorth_pairs, margin: float = 0.1,
                        tol: float = 1e-6):
    """Orthogonality preserved both ways by the exact values.

    Forward: constructed-orthogonal pairs stay orthogonal.  Backward: pairs
    with norm(<x,y>) >= margin keep norm(<I(x),I(y)>) >= norm(<x,y>) - tol,
    which rests on the identity <F(x),F(y)> = s(x) <I(x),I(y)> s(y)*; the
    identity residual is checked alongside.  Pairs inside the margin gap are
    counted, not judged.
    """
    forward = []
    for rx, ry in orth_pairs:
        tag = f"{rx.point_id},{ry.point_id}"
        forward.append((op_norm(inner(rx.exact, ry.exact)), tag))

    backward = []
    identity = []
    n_gap = 0
    for rx, ry in nonorth_pairs:
        tag = f"{rx.point_id},{ry.point_id}"
        base = op_norm(inner(rx.point, ry.point))
        lhs = inner(rx.limit, ry.limit)
        rhs = rx.sign @ inner(rx.exact, ry.exact) @ ry.sign.adjoint()
        nx, ny = norm_mod(rx.point), norm_mod(ry.point)
        identity.append((op_norm(lhs - rhs) - tol * (1.0 + nx * ny), tag))
        if base < margin:
            n_gap += 1
            continue
        backward.append((base - tol - op_norm(inner(rx.exact, ry.exact)), tag))

    def rec(name, prop, scored, threshold, n, extra=None):
        worst, witness = _worst(scored)
        if not scored:
            worst = 0.0
        merged = {"count": n}
        merged.update(extra or {})
        return CheckRecord(name=name, property=prop, worst=worst,
                           threshold=threshold, passed=worst <= threshold,
                           witness=witness, extra=merged)

    return [
        rec("orthogonality_forward",
            "<x,y> = 0 implies <I(x),I(y)> = 0 on constructed pairs",
            forward, tol, len(orth_pairs)),
        rec("orthogonality_backward",
            "norm(<I(x),I(y)>) >= norm(<x,y>) - tol when norm(<x,y>) >= margin",
            backward, 0.0, len(nonorth_pairs),
            {"margin": margin, "skipped_in_gap": n_gap}),
        rec("sign_conjugation_identity",
            "<F(x),F(y)> = s(x) <I(x),I(y)> s(y)* on the same pairs",
            identity, 0.0, len(nonorth_pairs)),
    ]


def check_exact_wigner(result_pairs, tol: float = 1e-6) -> CheckRecord:
    """Over an abelian algebra the exact values solve the phase equation.

    Raises :class:`NotAbelianError` when any block is a genuine matrix block;
    the caller decides whether to skip instead.
    """
    scored = []
    for rx, ry in result_pairs:
        if not rx.point.descriptor.is_abelian:
            raise NotAbelianError(
                "exact phase-equation check needs an abelian algebra; "
                f"got blocks {rx.point.descriptor.algebra.block_sizes}")
        tag = f"{rx.point_id},{ry.point_id}"
        scored.append(
            (wigner_defect(rx.exact, ry.exact, rx.point, ry.point), tag))
    worst, witness = _worst(scored)
    if not scored:
        worst = 0.0
    return CheckRecord(
        name="exact_wigner",
        property="|<I(x),I(y)>| = |<x,y>| on probe pairs (abelian target)",
        worst=worst,
        threshold=tol,
        passed=worst <= tol,
        witness=witness,
        extra={"pairs": len(result_pairs)},
    )


def check_polarization(pairs, tol: float = 1e-10,
                       pair_ids=None) -> CheckRecord:
    """polarize(x, y) reconstructs inner(x, y) on the given pairs."""
    pair_ids = pair_ids or [str(i) for i in range(len(pairs))]
    scored = [(op_norm(polarize(x, y) - inner(x, y)), tag)
              for tag, (x, y) in zip(pair_ids, pairs)]
    worst, witness = _worst(scored)
    if not scored:
        worst = 0.0
    return CheckRecord(
        name="polarization",
        property="the four-term polarization sum reconstructs inner(x, y)",
        worst=worst,
        threshold=tol,
        passed=worst <= tol,
        witness=witness,
        extra={"pairs": len(pairs)},
    )


def check_quadratic_envelope(results, phi, c: float,
                             slack: float = 1e-9) -> CheckRecord:
    """Scaled-iterate residuals stay under the quadratic control envelope.

    For every point and every n: the recorded value of
    norm(<f_n(x),f_n(x)> - <x,x>) must not exceed
    c^2n * phi(c^-n ||x||, c^-n ||x||) + slack.
    """
    scored = []
    for r in results:
        nx = norm_mod(r.point)
        for n, resid in enumerate(r.quad_residuals):
            cn = c ** n
            envelope = cn * cn * phi.evaluate(nx / cn, nx / cn)
            if math.isinf(envelope):
                continue
            scored.append((resid - envelope, f"{r.point_id}:n={n}"))
    worst, witness = _worst(scored)
    if not scored:
        worst = 0.0
    return CheckRecord(
        name="quadratic_envelope",
        property="norm(<f_n(x),f_n(x)> - <x,x>) <= c^2n phi(c^-n x, c^-n x) "
                 "for every n",
        worst=worst,
        threshold=slack,
        passed=worst <= slack,
        witness=witness,
        extra={"points": len(results)},
    )


def _min_eig(a) -> float:
    return min(float(np.linalg.eigvalsh(0.5 * (b + b.conj().T)).min())
               for b in a.blocks)


def run_algebra_checks(block_sizes, rank: int = 3, seed: int = 0,
                       trials: int = 8, tol: float = 1e-8):
    """Seeded invariant battery for an algebra and the module over it.

    Exercises the structural identities everything downstream leans on:
    the norm identity, adjoint rules, the positive square root, modulus and
    polar factorizations, spectral reconstruction, and the module axioms
    (symmetry, right linearity, positivity, the operator Cauchy-Schwarz
    inequality, polarization, triangle inequality).  All values are worst
    cases over seeded random trials, normalized by the natural scale.
    """
    desc = AlgebraDescriptor(tuple(block_sizes))
    mdesc = ModuleDescriptor(desc, rank)
    rng = np.random.default_rng(seed)
    buckets: dict = {key: [] for key in (
        "norm_identity", "adjoint_involution", "product_adjoint",
        "norm_submultiplicative", "positive_root", "modulus_square",
        "polar_recovery", "partial_isometry", "polar_commutes",
        "spectral_reconstruct", "unitary_isometry",
        "module_symmetry", "module_right_linear", "module_positive",
        "cauchy_schwarz", "polarization_identity", "triangle_inequality",
    )}

    for t in range(trials):
        tag = f"trial={t}"
        a = random_element(desc, rng)
        b = random_element(desc, rng)
        na, nb = op_norm(a), op_norm(b)
        buckets["norm_identity"].append(
            (abs(op_norm(a.adjoint() @ a) - na * na) / (1.0 + na * na), tag))
        buckets["adjoint_involution"].append(
            (op_norm(a.adjoint().adjoint() - a), tag))
        buckets["product_adjoint"].append(
            (op_norm((a @ b).adjoint() - b.adjoint() @ a.adjoint())
             / (1.0 + na * nb), tag))
        buckets["norm_submultiplicative"].append(
            ((op_norm(a @ b) - na * nb) / (1.0 + na * nb), tag))

        p = random_positive(desc, rng)
        root = pos_sqrt(p)
        flags = classify(root)
        ok_pos = 0.0 if (flags.hermitian and flags.positive) else 1.0
        buckets["positive_root"].append(
            (max(op_norm(root @ root - p) / (1.0 + op_norm(p)), ok_pos), tag))
        buckets["modulus_square"].append(
            (op_norm(abs_elem(a) @ abs_elem(a) - a.adjoint() @ a)
             / (1.0 + na * na), tag))

        m = random_normal_element(desc, rng, zero_fraction=0.25)
        nm = op_norm(m)
        s, mod = polar_normal(m)
        buckets["polar_recovery"].append(
            (op_norm(s @ mod - m) / (1.0 + nm), tag))
        buckets["partial_isometry"].append(
            (op_norm(s @ s.adjoint() @ s - s), tag))
        buckets["polar_commutes"].append(
            (op_norm(s @ mod - mod @ s) / (1.0 + nm), tag))
        sd = spectral_decomp_normal(m)
        buckets["spectral_reconstruct"].append(
            (op_norm(sd.reconstruct() - m) / (1.0 + nm), tag))

        u = random_unitary(desc, rng)
        e = type(u).identity(desc)
        buckets["unitary_isometry"].append(
            (max(op_norm(u.adjoint() @ u - e), abs(op_norm(u) - 1.0)), tag))

        x = random_module_element(mdesc, rng)
        y = random_module_element(mdesc, rng)
        nx, ny = norm_mod(x), norm_mod(y)
        scale = 1.0 + nx * ny
        buckets["module_symmetry"].append(
            (op_norm(inner(x, y).adjoint() - inner(y, x)) / scale, tag))
        buckets["module_right_linear"].append(
            (op_norm(inner(x, right_act(y, a)) - inner(x, y) @ a)
             / (scale * (1.0 + na)), tag))
        buckets["module_positive"].append(
            (max(0.0, -_min_eig(inner(x, x))) / (1.0 + nx * nx), tag))
        cs = op_norm(inner(x, x)) * inner(y, y) - inner(y, x) @ inner(x, y)
        buckets["cauchy_schwarz"].append(
            (max(0.0, -_min_eig(cs)) / (1.0 + (nx * ny) ** 2), tag))
        buckets["polarization_identity"].append(
            (op_norm(polarize(x, y) - inner(x, y)) / scale, tag))
        buckets["triangle_inequality"].append(
            ((norm_mod(x + y) - nx - ny) / scale, tag))

    statements = {
        "norm_identity": "norm(a* a) equals norm(a)^2",
        "adjoint_involution": "(a*)* equals a",
        "product_adjoint": "(a b)* equals b* a*",
        "norm_submultiplicative": "norm(a b) <= norm(a) norm(b)",
        "positive_root": "the positive root squares back and stays positive",
        "modulus_square": "|a|^2 equals a* a",
        "polar_recovery": "s |a| recovers a normal element a",
        "partial_isometry": "the polar sign satisfies s s* s = s",
        "polar_commutes": "the polar sign commutes with the modulus",
        "spectral_reconstruct": "spectral data reassembles the element",
        "unitary_isometry": "seeded unitaries satisfy u* u = e, norm 1",
        "module_symmetry": "inner(x, y)* equals inner(y, x)",
        "module_right_linear": "inner(x, y a) equals inner(x, y) a",
        "module_positive": "inner(x, x) is positive",
        "cauchy_schwarz": "norm(<x,x>) <y,y> dominates <y,x><x,y>",
        "polarization_identity": "polarization reconstructs inner(x, y)",
        "triangle_inequality": "norm_mod is subadditive",
    }
    report = VerificationReport()
    for name, scored in buckets.items():
        worst, witness = _worst(scored)
        report.add(CheckRecord(
            name=name, property=statements[name], worst=worst,
            threshold=tol, passed=worst <= tol, witness=witness,
            extra={"trials": trials, "blocks": list(block_sizes),
                   "rank": rank}))
    return report


def build_point_rows(f, results, phi, tol: float = 1e-6):
    """Per-point table rows, recomputed the same way the checks are."""
    rows = []
    for r in results:
        x = r.point
        nx = norm_mod(x)
        gram = inner(x, x)
        allowance = phi.evaluate(nx, nx)
        bound = math.sqrt(allowance) if not math.isinf(allowance) else math.inf
        fx = f(x)
        h = fx - r.exact
        iso = op_norm(inner(r.exact, r.exact) - gram)
        dist = norm_mod(h)
        h_orth = op_norm(inner(h, r.exact))
        ok = (iso <= tol and h_orth <= tol and dist <= bound + tol)
        rows.append({
            "point_id": r.point_id,
            "norm_x": nx,
            "iso_residual": iso,
            "dist": dist,
            "sqrt_phi": bound,
            "h_orth": h_orth,
            "subseq_len": len(r.cluster_indices),
            "pass": ok,
            "cluster_spread": r.cluster_spread,
            "cluster_indices": list(r.cluster_indices),
            "fit_residual": op_norm(inner(fx, r.exact) - gram),
            "modulus_gap": op_norm(abs_elem(inner(r.limit, fx)) - gram),
            "normality_defect": r.normality_defect,
            "support_residual": r.support_residual,
            "recovery_residual": r.recovery_residual,
        })
    return rows
