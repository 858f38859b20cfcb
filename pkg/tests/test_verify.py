"""Verification layer: recomputed checks, tamper detection, invariant battery."""

import dataclasses
import math

import numpy as np
import pytest

from wignerlab import (
    AlgebraDescriptor,
    AlgebraElement,
    ModuleDescriptor,
    ModuleElement,
    NotAbelianError,
    PowerControl,
    StabilityParams,
    VerificationReport,
    check_approx_wigner,
    check_exact_wigner,
    check_limit_gates,
    check_orthogonality,
    check_polarization,
    check_quadratic_envelope,
    check_stability_conclusions,
    build_point_rows,
    construct_I,
    make_exact_solution,
    make_perturbation,
    norm_mod,
    random_module_element,
    run_algebra_checks,
)
from wignerlab.verify import CheckRecord

DESC = AlgebraDescriptor((2, 1))
MDESC = ModuleDescriptor(DESC, 3)
PARAMS = StabilityParams(c=2.0, n_max=40, cluster_tol=1e-6)
ALPHA = 2.0 * math.pi / (8.0 * math.log(2.0))
PHI = PowerControl(epsilon=1e-2, p=2.0, q=2.0, c=2.0)


def _make_map(seed=101):
    base = make_exact_solution(MDESC, seed=seed, phase_mode="oscillating",
                               alpha=ALPHA)
    return make_perturbation(base, delta=1e-3, r=2.0, seed=seed)


@pytest.fixture(scope="module")
def pipeline():
    f = _make_map()
    rng = np.random.default_rng(55)
    points = [random_module_element(MDESC, rng) for _ in range(4)]
    results = [construct_I(f, x, PARAMS, point_id=f"p{i:03d}")
               for i, x in enumerate(points)]
    return f, results


def _split_support(x: ModuleElement, low_slots: int):
    z = AlgebraElement.zeros(DESC)
    head = ModuleElement(MDESC, [c if i < low_slots else z
                                 for i, c in enumerate(x.components)])
    tail = ModuleElement(MDESC, [z if i < low_slots else c
                                 for i, c in enumerate(x.components)])
    return head, tail


def find_record(records, name):
    hits = [r for r in records if r.name == name]
    assert len(hits) == 1, f"expected exactly one {name!r} record"
    return hits[0]


def test_stability_conclusions_pass(pipeline):
    f, results = pipeline
    records = check_stability_conclusions(f, results, PHI, tol=1e-6)
    assert [r.name for r in records] == [
        "isometry", "map_pairing", "modulus_gap", "distance_bound",
        "remainder_orthogonal", "remainder_bound"]
    for r in records:
        assert r.passed, f"{r.name}: worst {r.worst:.3e}"
        assert r.extra["points"] == 4


def test_stability_conclusions_catch_tampered_exact(pipeline):
    f, results = pipeline
    victim = results[2]
    tampered = list(results)
    tampered[2] = dataclasses.replace(victim, exact=1.1 * victim.exact)
    records = check_stability_conclusions(f, tampered, PHI, tol=1e-6)
    by_name = {r.name: r for r in records}
    for name in ("isometry", "map_pairing", "remainder_orthogonal"):
        assert not by_name[name].passed
        assert by_name[name].witness == "p002"
    # the stored remainder was not touched, so its bound still holds
    assert by_name["remainder_bound"].passed


def test_limit_gates_pass_and_report_pairs(pipeline):
    f, results = pipeline
    probes = [(0, 1), (1, 2), (2, 3), (3, 0)]
    records, ff_values = check_limit_gates(f, results, probes, PHI, tol=1e-6)
    assert [r.name for r in records] == [
        "limit_isometry", "limit_pair_relation", "limit_map_relation"]
    for r in records:
        assert r.passed, f"{r.name}: worst {r.worst:.3e}"
        assert r.threshold == 0.0
    assert len(ff_values) == 4
    assert ff_values[0]["pair"] == "p000,p001"
    assert all(v["residual"] >= 0.0 for v in ff_values)


def test_limit_gates_catch_wrong_limit(pipeline):
    f, results = pipeline
    victim = results[1]
    skew = 0.5 * (1.0 + np.exp(1j * math.pi / 4.0))  # modulus 0.924
    tampered = list(results)
    tampered[1] = dataclasses.replace(victim, limit=complex(skew) * victim.limit)
    records, _ = check_limit_gates(f, tampered, [(0, 1), (1, 2)], PHI)
    by_name = {r.name: r for r in records}
    assert not by_name["limit_isometry"].passed
    assert by_name["limit_isometry"].witness == "p001"
    assert not by_name["limit_pair_relation"].passed


def test_orthogonality_both_directions():
    f = _make_map(seed=103)
    rng = np.random.default_rng(56)
    orth, nonorth = [], []
    for k in range(3):
        a, b = _split_support(random_module_element(MDESC, rng), 1)
        ra = construct_I(f, a, PARAMS, point_id=f"o{k}a")
        rb = construct_I(f, b, PARAMS, point_id=f"o{k}b")
        orth.append((ra, rb))
        x = random_module_element(MDESC, rng)
        y = random_module_element(MDESC, rng)
        nonorth.append((construct_I(f, x, PARAMS, point_id=f"m{k}a"),
                        construct_I(f, y, PARAMS, point_id=f"m{k}b")))
    records = check_orthogonality(orth, nonorth, margin=0.1, tol=1e-6)
    by_name = {r.name: r for r in records}
    fwd = by_name["orthogonality_forward"]
    assert fwd.passed and fwd.extra["count"] == 3
    bwd = by_name["orthogonality_backward"]
    assert bwd.passed and bwd.extra["skipped_in_gap"] == 0
    assert by_name["sign_conjugation_identity"].passed

    # shrinking one exact value must break the backward direction
    rx, ry = nonorth[0]
    broken = [(rx, dataclasses.replace(ry, exact=0.5 * ry.exact))]
    records = check_orthogonality(orth, broken, margin=0.1, tol=1e-6)
    bwd = find_record(records, "orthogonality_backward")
    assert not bwd.passed
    assert bwd.witness == "m0a,m0b"


def test_exact_wigner_abelian_only():
    adesc = ModuleDescriptor(AlgebraDescriptor((1, 1, 1)), 3)
    base = make_exact_solution(adesc, seed=105, phase_mode="oscillating",
                               alpha=ALPHA)
    f = make_perturbation(base, delta=1e-4, r=2.0, seed=105)
    rng = np.random.default_rng(57)
    results = [construct_I(f, random_module_element(adesc, rng), PARAMS,
                           point_id=f"a{i}") for i in range(3)]
    rec = check_exact_wigner([(results[0], results[1]),
                              (results[1], results[2])], tol=1e-6)
    assert rec.passed
    assert rec.extra["pairs"] == 2


def test_exact_wigner_rejects_matrix_blocks(pipeline):
    _, results = pipeline
    with pytest.raises(NotAbelianError, match="abelian"):
        check_exact_wigner([(results[0], results[1])])


def test_polarization_check(pipeline):
    rng = np.random.default_rng(58)
    pairs = [(random_module_element(MDESC, rng),
              random_module_element(MDESC, rng)) for _ in range(6)]
    rec = check_polarization(pairs, tol=1e-10)
    assert rec.passed
    assert rec.extra["pairs"] == 6


def test_quadratic_envelope(pipeline):
    f, results = pipeline
    rec = check_quadratic_envelope(results, PHI, c=PARAMS.c, slack=1e-9)
    assert rec.passed

    spiked = list(results[0].quad_residuals)
    spiked[5] = spiked[5] + 1.0
    tampered = [dataclasses.replace(results[0], quad_residuals=spiked)]
    rec = check_quadratic_envelope(tampered, PHI, c=PARAMS.c, slack=1e-9)
    assert not rec.passed
    assert rec.witness == "p000:n=5"


def test_approx_wigner_record(pipeline):
    f, results = pipeline
    rng = np.random.default_rng(59)
    pairs = [(random_module_element(MDESC, rng),
              random_module_element(MDESC, rng)) for _ in range(5)]
    rec = check_approx_wigner(f, pairs, PHI, slack=1e-11)
    assert rec.passed
    assert rec.extra == {"pairs": 5, "vacuous": 0}

    tiny = PowerControl(epsilon=1e-15, p=2.0, q=2.0, c=2.0)
    rec = check_approx_wigner(f, pairs, tiny, slack=1e-11)
    assert not rec.passed

    # a negative exponent sends phi to +inf at a zero point: vacuous pair
    blind = PowerControl(epsilon=1e-2, p=-1.0, q=2.0, c=2.0)
    zero = ModuleElement.zeros(MDESC)
    rec = check_approx_wigner(f, [(zero, pairs[0][1])], blind)
    assert rec.passed
    assert rec.extra["vacuous"] == 1


def test_checks_are_idempotent(pipeline):
    f, results = pipeline
    first = check_stability_conclusions(f, results, PHI)
    second = check_stability_conclusions(f, results, PHI)
    for a, b in zip(first, second):
        assert a.worst == b.worst
        assert a.witness == b.witness


def test_build_point_rows(pipeline):
    f, results = pipeline
    rows = build_point_rows(f, results, PHI, tol=1e-6)
    assert len(rows) == 4
    for r, row in zip(results, rows):
        assert row["point_id"] == r.point_id
        assert row["pass"] is True
        assert row["subseq_len"] == len(r.cluster_indices)
        assert row["dist"] <= row["sqrt_phi"] + 1e-6
        assert row["norm_x"] == norm_mod(r.point)
        assert 0.0 <= row["cluster_spread"] <= 1e-6 * (1.0 + row["norm_x"])


def test_run_algebra_checks_all_pass():
    for blocks in ((2, 1), (1, 1, 1, 1)):
        report = run_algebra_checks(blocks, rank=3, seed=7, trials=6)
        assert report.overall_pass
        assert len(report.records) == 17
        names = {r.name for r in report.records}
        assert "cauchy_schwarz" in names
        assert "norm_identity" in names


def test_verification_report_semantics():
    report = VerificationReport()
    assert report.overall_pass is False  # nothing checked is not a pass
    good = CheckRecord(name="a", property="p", worst=0.0, threshold=1.0,
                       passed=True)
    bad = CheckRecord(name="b", property="p", worst=2.0, threshold=1.0,
                      passed=False)
    report.add(good)
    assert report.overall_pass is True
    report.add([bad])
    assert report.overall_pass is False
    report.skip("c", "not applicable here")
    d = report.to_dict()
    assert d["overall_pass"] is False
    assert [r["name"] for r in d["records"]] == ["a", "b"]
    assert d["skipped"] == [{"name": "c", "reason": "not applicable here"}]


def test_check_record_serializes_inf():
    rec = CheckRecord(name="n", property="p", worst=math.inf, threshold=0.0,
                      passed=False, extra={"bound": -math.inf})
    d = rec.to_dict()
    assert d["worst"] == "inf"
    assert d["extra"]["bound"] == "-inf"
