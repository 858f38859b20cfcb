"""End-to-end experiment driver.

One run does, in order: sample module elements and pairs from the seed,
certify the candidate map against the control on every pair it will ever
be judged on, push each sample element through the stability pipeline,
optionally tamper with one stored result (negative control), verify every
claimed property by recomputation, and emit the JSON/CSV reports.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 invalid
configuration (raised as ConfigError before this module runs), 3 the
pipeline could not be completed (certification exhausted, no accumulation
point, or a non-normal pairing element).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import AlgebraDescriptor, AlgebraElement, op_norm, \
    random_element
from .config import ExperimentConfig
from .control import PowerControl, check_decay_conditions
from .exceptions import (
    CannotCertifyError,
    NoAccumulationPointError,
    NotNormalError,
    NotPositiveError,
)
from .mapgen import (
    assemble_approximate_map,
    make_exact_solution,
    make_perturbation,
)
from .modules import (
    ModuleDescriptor,
    ModuleElement,
    inner,
    norm_mod,
    random_module_element,
)
from .report import write_reports
from .stability import StabilityParams, construct_I
from .verify import (
    VerificationReport,
    build_point_rows,
    check_approx_wigner,
    check_exact_wigner,
    check_limit_gates,
    check_orthogonality,
    check_polarization,
    check_quadratic_envelope,
    check_stability_conclusions,
)

__all__ = ["ExperimentOutcome", "run_experiment", "worker_count",
           "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_CONFIG", "EXIT_INCOMPLETE"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INCOMPLETE = 3

_PIPELINE_ERRORS = (NoAccumulationPointError, NotNormalError,
                    NotPositiveError)


@dataclass
class ExperimentOutcome:
    """Everything a caller needs: verdict, payload, rows, file paths."""

    exit_code: int
    payload: dict
    rows: list = field(default_factory=list)
    paths: dict = field(default_factory=dict)
    failure: str = ""
    verification: VerificationReport | None = None
    certificate: object = None


def worker_count() -> int:
    """Worker threads for the pipeline, from WIGNERLAB_WORKERS (default 1)."""
    raw = os.environ.get("WIGNERLAB_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _sample_points(mdesc, rng, count):
    return [random_module_element(mdesc, rng) for _ in range(count)]


def _sample_orth_pairs(mdesc, rng, count):
    """Pairs supported on disjoint slots, so inner(x, y) is exactly zero."""
    desc = mdesc.algebra
    split = mdesc.rank // 2
    pairs = []
    for _ in range(count):
        first, second = [], []
        for j in range(mdesc.rank):
            if j < split:
                first.append(random_element(desc, rng))
                second.append(AlgebraElement.zeros(desc))
            else:
                first.append(AlgebraElement.zeros(desc))
                second.append(random_element(desc, rng))
        pairs.append((ModuleElement(mdesc, first), ModuleElement(mdesc, second)))
    return pairs


def _sample_nonorth_pairs(mdesc, rng, count, margin):
    """Generic pairs, resampled until the pairing clears the margin."""
    pairs = []
    for _ in range(count):
        for _attempt in range(64):
            x = random_module_element(mdesc, rng)
            y = random_module_element(mdesc, rng)
            if op_norm(inner(x, y)) >= margin:
                break
        pairs.append((x, y))
    return pairs


def _sample_probe_pairs(rng, count, n_points):
    if n_points < 2:
        return []
    pairs = []
    for _ in range(count):
        i = int(rng.integers(n_points))
        j = int(rng.integers(n_points))
        if i == j:
            j = (j + 1) % n_points
        pairs.append((i, j))
    return pairs


def _run_pipeline(f, targets, params, workers):
    """construct_I over (point_id, element) targets, order-stable.

    With several workers, every future is drained before any error is
    raised, and the error reported is the one with the smallest target
    index, so failures are deterministic regardless of thread timing.
    """
    def one(item):
        pid, x = item
        return construct_I(f, x, params, point_id=pid)

    if workers <= 1 or len(targets) <= 1:
        return [one(item) for item in targets]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(one, item) for item in targets]
        results, first_error = [], None
        for fut in futures:
            try:
                results.append(fut.result())
            except _PIPELINE_ERRORS as exc:
                if first_error is None:
                    first_error = exc
        if first_error is not None:
            raise first_error
    return results


def _failure_payload(config, stage, exc) -> dict:
    detail = {"stage": stage, "error": type(exc).__name__,
              "message": str(exc)}
    for attr in ("delta", "halvings", "worst_excess", "best_size", "tol"):
        if hasattr(exc, attr):
            detail[attr] = getattr(exc, attr)
    return {"config": config.to_dict(), "failure": detail,
            "summary": {"exit_code": EXIT_INCOMPLETE, "overall_pass": False}}


def run_experiment(config: ExperimentConfig,
                   emit: bool = True) -> ExperimentOutcome:
    """Run one configured experiment; never raises for exits 1 and 3."""
    desc = AlgebraDescriptor(config.block_sizes)
    mdesc = ModuleDescriptor(desc, config.rank)
    phi = PowerControl(epsilon=config.epsilon, p=config.p, q=config.q,
                       c=config.c)
    workers = worker_count()

    seeds = np.random.SeedSequence(config.seed).spawn(4)
    rng_points = np.random.default_rng(seeds[0])
    rng_orth = np.random.default_rng(seeds[1])
    rng_nonorth = np.random.default_rng(seeds[2])
    rng_probe = np.random.default_rng(seeds[3])

    points = _sample_points(mdesc, rng_points, config.n_points)
    orth_pairs = _sample_orth_pairs(mdesc, rng_orth, config.orth_pairs)
    nonorth_pairs = _sample_nonorth_pairs(mdesc, rng_nonorth,
                                          config.nonorth_pairs, config.margin)
    probe_pairs = _sample_probe_pairs(rng_probe, config.probe_pairs,
                                      len(points))

    base = make_exact_solution(mdesc, config.seed,
                               phase_mode=config.phase_mode,
                               alpha=config.alpha)
    candidate = make_perturbation(base, config.delta, config.r,
                                  seed=config.seed)

    cert_pairs, cert_ids = [], []
    for i, x in enumerate(points):
        cert_pairs.append((x, x))
        cert_ids.append(f"diag:p{i:03d}")
    for i, j in probe_pairs:
        cert_pairs.append((points[i], points[j]))
        cert_ids.append(f"probe:p{i:03d},p{j:03d}")
    for k, (x, y) in enumerate(orth_pairs):
        cert_pairs.append((x, y))
        cert_ids.append(f"orth:o{k:03d}")
    for k, (x, y) in enumerate(nonorth_pairs):
        cert_pairs.append((x, y))
        cert_ids.append(f"pair:m{k:03d}")

    try:
        f, certificate = assemble_approximate_map(
            candidate, phi, cert_pairs,
            slack=config.cert_slack, max_halvings=config.max_halvings)
    except CannotCertifyError as exc:
        payload = _failure_payload(config, "certification", exc)
        outcome = ExperimentOutcome(EXIT_INCOMPLETE, payload,
                                    failure=str(exc))
        if emit:
            outcome.paths = write_reports(payload, [], config.out_dir,
                                          config.format)
        return outcome

    params = StabilityParams(
        c=config.c, n_max=config.n_max, cluster_tol=config.cluster_tol,
        normality_tol=config.normality_tol, rank_tol=config.rank_tol,
        min_cluster=config.min_cluster, tail_fraction=config.tail_fraction)

    targets = [(f"p{i:03d}", x) for i, x in enumerate(points)]
    for k, (x, y) in enumerate(orth_pairs):
        targets.append((f"o{k:03d}a", x))
        targets.append((f"o{k:03d}b", y))
    for k, (x, y) in enumerate(nonorth_pairs):
        targets.append((f"m{k:03d}a", x))
        targets.append((f"m{k:03d}b", y))

    try:
        results = _run_pipeline(f, targets, params, workers)
    except _PIPELINE_ERRORS as exc:
        payload = _failure_payload(config, "pipeline", exc)
        outcome = ExperimentOutcome(EXIT_INCOMPLETE, payload,
                                    failure=str(exc))
        if emit:
            outcome.paths = write_reports(payload, [], config.out_dir,
                                          config.format)
        return outcome

    n_pts = len(points)
    point_results = results[:n_pts]
    offset = n_pts
    orth_results = [(results[offset + 2 * k], results[offset + 2 * k + 1])
                    for k in range(len(orth_pairs))]
    offset += 2 * len(orth_pairs)
    nonorth_results = [(results[offset + 2 * k], results[offset + 2 * k + 1])
                       for k in range(len(nonorth_pairs))]

    # negative control: scale one stored exact value after the pipeline,
    # before verification; an honest verifier must notice
    if config.tamper_mode == "scale_exact" and point_results:
        idx = min(config.tamper_point, len(point_results) - 1)
        victim = point_results[idx]
        point_results[idx] = replace(
            victim, exact=config.tamper_factor * victim.exact)
        results[idx] = point_results[idx]

    report = VerificationReport()
    pair_residuals = []
    if not points:
        report.skip("all", "no sample points were configured")
    else:
        report.add(check_approx_wigner(f, cert_pairs, phi,
                                       slack=config.wigner_slack,
                                       pair_ids=cert_ids))
        report.add(check_quadratic_envelope(point_results, phi, config.c))
        report.add(check_stability_conclusions(f, results, phi,
                                             tol=config.check_tol))
        gate_records, pair_residuals = check_limit_gates(
            f, point_results, probe_pairs, phi, tol=config.check_tol)
        report.add(gate_records)
        report.add(check_orthogonality(orth_results, nonorth_results,
                                       margin=config.margin,
                                       tol=config.check_tol))
        poly_pairs = ([(points[i], points[j]) for i, j in probe_pairs[:8]]
                      + nonorth_pairs[:8])
        report.add(check_polarization(poly_pairs))
        if config.exact_wigner:
            exact_pairs = ([(results[i], results[j])
                            for i, j in probe_pairs]
                           + orth_results + nonorth_results)
            report.add(check_exact_wigner(exact_pairs,
                                          tol=config.check_tol))
        else:
            report.skip("exact_wigner",
                        "needs an abelian algebra (all blocks size 1)")

    decay = check_decay_conditions(
        phi, [(norm_mod(x), norm_mod(y)) for x, y in cert_pairs[:8]]
        or [(1.0, 1.0)])

    rows = build_point_rows(f, point_results, phi, tol=config.check_tol)
    overall = report.overall_pass and decay.passed
    exit_code = EXIT_OK if overall else EXIT_CHECK_FAILED

    payload = {
        "config": config.to_dict(),
        "certificate": certificate.to_dict(),
        "decay": decay.to_dict(),
        "checks": report.to_dict(),
        "points": rows,
        "pair_residuals": pair_residuals,
        "summary": {
            "overall_pass": overall,
            "exit_code": exit_code,
            "n_points": len(points),
            "n_targets": len(targets),
            "n_cert_pairs": len(cert_pairs),
            "no_data": not points,
            "workers": workers,
        },
    }
    outcome = ExperimentOutcome(exit_code, payload, rows=rows,
                                verification=report, certificate=certificate)
    if emit:
        outcome.paths = write_reports(payload, rows, config.out_dir,
                                      config.format)
    return outcome
