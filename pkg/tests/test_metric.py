from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbithull import metric
from orbithull.matcore import (
    DensityMatrix,
    DimensionError,
    StateFamily,
    haar_unitary,
    random_complex,
    random_density,
    random_hermitian,
)
from orbithull.orbit import LmoOptions

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def brute_duel_lhs_rhs(A, B, C, U):
    w = U @ B @ U.conj().T
    return np.linalg.norm(A - w), np.linalg.norm(C - w)


# ---------------------------------------------------------------------------
# duels
# ---------------------------------------------------------------------------


def test_duel_target_equals_base():
    rng = np.random.default_rng(0)
    B = random_hermitian(3, rng)
    out = metric.duel(B, B, random_hermitian(3, rng))
    assert out.success and out.certified
    assert out.lhs <= out.rhs + 1e-12


def test_duel_diagonal_success():
    A = np.diag([0.5, 0.5])
    B = np.diag([1.0, 0.0])
    C = np.diag([5.0, 5.0])
    out = metric.duel(A, B, C)
    assert out.success and out.certified
    # h(A - C) over the orbit of B pairs -4.5 with 1 and -4.5 with 0
    assert out.support == pytest.approx(-4.5, abs=1e-12)
    assert out.threshold == pytest.approx(0.5 * (0.5 - 50.0), abs=1e-12)
    lhs, rhs = brute_duel_lhs_rhs(A, B, C, out.u)
    assert lhs == pytest.approx(out.lhs) and rhs == pytest.approx(out.rhs)


def test_duel_singleton_orbit_certified_failure():
    A = np.diag([1.0, 0.0])
    B = np.diag([0.5, 0.5])
    out = metric.duel(A, B, B)
    assert not out.success and out.certified
    assert out.lhs == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
    assert out.rhs == pytest.approx(0.0, abs=1e-12)
    assert out.u is None


def test_duel_heuristic_failure_is_uncertified():
    rng = np.random.default_rng(1)
    B = random_complex(3, rng)
    A = B + 4.0 * np.eye(3)
    out = metric.duel(A, B, B, opts=LmoOptions(restarts=2))
    assert not out.success
    assert not out.certified


def test_duel_dimension_mismatch():
    with pytest.raises(DimensionError):
        metric.duel(np.eye(2), np.eye(2), np.eye(3))


def test_duel_flags_non_faithful_state():
    out = metric.duel(np.eye(2), np.eye(2), np.zeros((2, 2)), DensityMatrix.from_diagonal([1.0, 0.0]))
    assert not out.faithful
    assert metric.duel(np.eye(2), np.eye(2), np.zeros((2, 2))).faithful


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 5), seed=seeds)
def test_reduction_identity(n, seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_complex(n, rng) for _ in range(3))
    U = haar_unitary(n, rng)
    rho = random_density(n, rng)
    w = U @ B @ U.conj().T
    lhs = metric.duel_gap(A, C, w, rho)
    rhs = metric.duel_gap_reduced(A, C, w, rho)
    # independent expansion with explicit traces
    direct = np.trace(rho @ (A - w).conj().T @ (A - w)).real - np.trace(rho @ (C - w).conj().T @ (C - w)).real
    scale = 1 + abs(direct)
    assert abs(lhs - direct) <= 1e-9 * scale
    assert abs(rhs - direct) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 5), seed=seeds)
def test_normalized_trace_duel_matches_frobenius(n, seed):
    rng = np.random.default_rng(seed)
    B = random_hermitian(n, rng)
    A = random_hermitian(n, rng)
    C = random_hermitian(n, rng)
    plain = metric.duel(A, B, C)
    weighted = metric.duel(A, B, C, DensityMatrix.normalized_trace(n))
    assert weighted.margin * n == pytest.approx(plain.margin, rel=1e-9, abs=1e-9)
    if abs(plain.margin) > 1e-8:
        assert weighted.success == plain.success


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 4), seed=seeds)
def test_hull_challenger_always_loses(n, seed):
    rng = np.random.default_rng(seed)
    B = random_hermitian(n, rng)
    A = metric.random_mixing(B, rng)
    C = metric.random_mixing(B, rng)
    assert metric.duel(A, B, C).success


# ---------------------------------------------------------------------------
# criterion scans
# ---------------------------------------------------------------------------


def test_scan_member_is_consistent():
    rng = np.random.default_rng(2)
    B = random_hermitian(4, rng)
    A = metric.random_mixing(B, rng)
    report = metric.criterion_scan(A, B, random_count=200, seed=3)
    assert report.verdict == metric.CONSISTENT
    assert report.challengers_tested == 201


def test_scan_trace_shift_is_refuted_by_projection():
    B = np.diag([1.0, -1.0, 2.0, -2.0]).astype(complex)
    A = B + np.eye(4)
    report = metric.criterion_scan(A, B, random_count=20, seed=0)
    assert report.verdict == metric.REFUTED
    adversarial = [r for r in report.refutations if r.adversarial]
    assert adversarial and adversarial[0].margin > 0


def test_scan_base_against_itself():
    B = random_hermitian(3, 4)
    report = metric.criterion_scan(B, B, random_count=50, seed=1)
    assert report.verdict == metric.CONSISTENT
    assert not report.refutations


def test_scan_is_deterministic():
    B = random_hermitian(3, 5)
    A = B + 0.3 * np.eye(3)
    a = metric.criterion_scan(A, B, random_count=10, seed=9).to_json()
    b = metric.criterion_scan(A, B, random_count=10, seed=9).to_json()
    assert a == b


def test_hermitian_instances_draw_hermitian_challengers():
    B = random_hermitian(3, 6)
    for C in metric.random_challengers(B, B, 10, seed=0):
        np.testing.assert_allclose(C, C.conj().T)
        assert np.linalg.norm(C) <= 4 * np.linalg.norm(B) + 1e-12


# ---------------------------------------------------------------------------
# state families
# ---------------------------------------------------------------------------


def test_family_member_holds_everywhere():
    rng = np.random.default_rng(7)
    n = 3
    pts = [random_complex(n, rng) for _ in range(4)]
    x = sum(t * p for t, p in zip(rng.dirichlet(np.ones(4)), pts))
    fam = StateFamily([DensityMatrix(random_density(n, rng)) for _ in range(3)])
    assert fam.separating
    challengers = [3 * random_complex(n, rng) for _ in range(30)]
    report = metric.family_criterion_check(x, pts, fam, challengers)
    assert len(report.rows) == 7
    for row in report.rows:
        assert row.member and row.holds_for_all and row.consistent


def test_family_single_point():
    x = random_complex(2, 8)
    fam = StateFamily([DensityMatrix.normalized_trace(2)])
    report = metric.family_criterion_check(x, [x], fam, [np.zeros((2, 2))])
    assert report.all_consistent and report.rows[0].holds_for_all


def test_family_outside_point_is_refuted():
    rng = np.random.default_rng(9)
    pts = [random_hermitian(2, rng) for _ in range(2)]
    x = pts[0] + 3 * np.eye(2)
    fam = StateFamily([DensityMatrix.normalized_trace(2)])
    row = metric.family_criterion_check(x, pts, fam).rows[0]
    assert not row.member and not row.holds_for_all and row.consistent


def test_family_subset_cap():
    fam = StateFamily([DensityMatrix.normalized_trace(2)] * 3)
    report = metric.family_criterion_check(np.eye(2), [np.eye(2)], fam, subset_size_cap=1)
    assert [r.subset for r in report.rows] == [(0,), (1,), (2,)]


def test_c2_counterexample():
    report = metric.counterexample_c2()
    assert report.norm_x_minus_a_phi <= 1e-12
    assert report.norm_x_minus_b_psi <= 1e-12
    assert report.distance_family == pytest.approx(np.sqrt(2) / 2, abs=1e-8)
    assert report.single_state_condition_holds
    assert not report.family_condition_holds
    assert not report.member
    assert report.passed


# ---------------------------------------------------------------------------
# equivalence suite
# ---------------------------------------------------------------------------


def test_equivalence_small_run():
    summary = metric.equivalence_suite(n=3, trials=5, seed=1)
    assert summary.agreement_rate == 1.0
    assert len(summary.records) == 10
    negatives = [r for r in summary.records if r.label == "negative"]
    assert all(r.margin is not None and r.margin > 0 for r in negatives)


def test_equal_pair_classification():
    B = random_hermitian(4, 10)
    assert metric.classify_pair(B, B)[:3] == (True, "inside", metric.CONSISTENT)


def test_non_majorized_instance_is_certified_by_partial_sums():
    rng = np.random.default_rng(11)
    for _ in range(20):
        B = random_hermitian(4, rng)
        A = metric.non_majorized_instance(B, rng)
        slack = np.cumsum(np.linalg.eigvalsh(B)[::-1]) - np.cumsum(np.linalg.eigvalsh(A)[::-1])
        assert np.min(slack[:-1]) < -1e-3 or abs(slack[-1]) > 1e-3


def test_equivalence_rejects_large_n():
    with pytest.raises(ValueError):
        metric.equivalence_suite(n=7, trials=1)
