from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbithull.matcore import haar_unitary, random_complex, random_hermitian, unitarity_defect
from orbithull.orbit import (
    Kind,
    LmoOptions,
    OrbitKind,
    lmo,
    support_conjugation_hermitian,
    support_riemannian,
    support_twosided,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def brute_force_hermitian_support(C, B):
    """max over pairings of the two spectra; attained at U = V_C P V_B*."""
    lc = np.linalg.eigvalsh(C)
    lb = np.linalg.eigvalsh(B)
    return max(float(lc @ lb[list(p)]) for p in itertools.permutations(range(len(lb))))


def test_diagonal_example():
    sv = support_conjugation_hermitian(np.diag([2.0, 1.0]), np.diag([1.0, 0.0]))
    assert sv.value == pytest.approx(2.0)
    assert sv.exact


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 4), seed=seeds)
def test_hermitian_closed_form_matches_pairings(n, seed):
    rng = np.random.default_rng(seed)
    C = random_hermitian(n, rng)
    B = random_hermitian(n, rng)
    sv = support_conjugation_hermitian(C, B)
    assert abs(sv.value - brute_force_hermitian_support(C, B)) <= 1e-10 * (1 + np.linalg.norm(C) * np.linalg.norm(B))
    # the point is a genuine orbit element achieving the value
    assert unitarity_defect(sv.left) < 1e-10
    np.testing.assert_allclose(sv.point, sv.left @ B @ sv.left.conj().T, atol=1e-10)
    assert np.real(np.vdot(sv.point, C)) == pytest.approx(sv.value, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 5), seed=seeds)
def test_twosided_closed_form_is_von_neumann(n, seed):
    rng = np.random.default_rng(seed)
    C = random_complex(n, rng)
    B = random_complex(n, rng)
    sv = support_twosided(C, B)
    expected = np.linalg.svd(C, compute_uv=False) @ np.linalg.svd(B, compute_uv=False)
    assert sv.value == pytest.approx(expected, rel=1e-10)
    np.testing.assert_allclose(sv.point, sv.left @ B @ sv.right, atol=1e-10)
    # no sampled orbit point beats the closed form
    for _ in range(20):
        w = haar_unitary(n, rng) @ B @ haar_unitary(n, rng)
        assert np.real(np.vdot(w, C)) <= sv.value + 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_ascent_matches_hermitian_closed_form(seed):
    rng = np.random.default_rng(seed)
    C = random_hermitian(4, rng)
    B = random_hermitian(4, rng)
    exact = support_conjugation_hermitian(C, B).value
    approx = support_riemannian(C, B, Kind.CONJUGATION, restarts=20, seed=seed)
    assert not approx.exact
    assert approx.value <= exact + 1e-9
    assert abs(approx.value - exact) <= 1e-6 * abs(exact)


@pytest.mark.parametrize("seed", range(5))
def test_ascent_matches_twosided_closed_form(seed):
    rng = np.random.default_rng(seed)
    C = random_complex(4, rng)
    B = random_complex(4, rng)
    exact = support_twosided(C, B).value
    approx = support_riemannian(C, B, Kind.TWO_SIDED, restarts=20, seed=seed)
    assert approx.value <= exact + 1e-9
    assert abs(approx.value - exact) <= 1e-6 * abs(exact)


def test_ascent_value_is_achieved_by_its_point():
    rng = np.random.default_rng(9)
    C = random_complex(3, rng)
    B = random_complex(3, rng)
    sv = support_riemannian(C, B, Kind.CONJUGATION, restarts=3)
    np.testing.assert_allclose(sv.point, sv.left @ B @ sv.left.conj().T, atol=1e-10)
    assert sv.value == pytest.approx(float(np.real(np.vdot(sv.point, C))), abs=1e-12)


def test_ascent_is_deterministic():
    rng = np.random.default_rng(4)
    C = random_complex(3, rng)
    B = random_complex(3, rng)
    a = support_riemannian(C, B, Kind.CONJUGATION, restarts=4, seed=7)
    b = support_riemannian(C, B, Kind.CONJUGATION, restarts=4, seed=7)
    assert a.value == b.value
    np.testing.assert_array_equal(a.left, b.left)


def test_ascent_threaded_matches_serial(monkeypatch):
    rng = np.random.default_rng(5)
    C = random_complex(3, rng)
    B = random_complex(3, rng)
    serial = support_riemannian(C, B, Kind.TWO_SIDED, restarts=6, seed=1)
    monkeypatch.setenv("ORBITHULL_THREADS", "4")
    threaded = support_riemannian(C, B, Kind.TWO_SIDED, restarts=6, seed=1)
    assert serial.value == threaded.value


def test_contraction_ascent_with_identity_base():
    # over {u u* : ||u|| <= 1} = {0 <= P <= I}, the support is the sum of positive eigenvalues of herm(C)
    rng = np.random.default_rng(6)
    C = random_hermitian(4, rng)
    sv = support_riemannian(C, np.eye(4), Kind.CONTRACTION, restarts=8)
    expected = np.clip(np.linalg.eigvalsh(C), 0, None).sum()
    assert sv.value <= expected + 1e-9
    assert sv.value == pytest.approx(expected, rel=1e-6)
    assert np.linalg.norm(sv.left, 2) <= 1 + 1e-12


def test_zero_direction():
    sv = support_riemannian(np.zeros((2, 2)), np.eye(2), Kind.CONJUGATION)
    assert sv.value == 0.0


def test_lmo_dispatch():
    rng = np.random.default_rng(8)
    B = random_hermitian(3, rng)
    C = random_complex(3, rng)
    sv = lmo(OrbitKind(Kind.CONJUGATION, B), C)
    assert sv.exact
    # a non-Hermitian direction against a Hermitian base pairs through its Hermitian part
    ref = brute_force_hermitian_support(0.5 * (C + C.conj().T), B)
    assert sv.value == pytest.approx(ref, abs=1e-10)
    assert lmo(OrbitKind(Kind.TWO_SIDED, random_complex(3, rng)), C).exact
    assert not lmo(OrbitKind(Kind.CONJUGATION, random_complex(3, rng)), C, LmoOptions(restarts=2)).exact
    assert not lmo(OrbitKind(Kind.CONTRACTION, B), C, LmoOptions(restarts=2)).exact


def test_kind_parse():
    assert Kind.parse("conj") is Kind.CONJUGATION
    assert Kind.parse("contr") is Kind.CONTRACTION
    assert Kind.parse("twosided") is Kind.TWO_SIDED
    with pytest.raises(ValueError):
        Kind.parse("sideways")


def test_ascent_never_exceeds_closed_forms():
    rng = np.random.default_rng(2024)
    for i in range(1000):
        n = int(rng.integers(2, 5))
        if i % 2:
            C, B = random_hermitian(n, rng), random_hermitian(n, rng)
            exact = support_conjugation_hermitian(C, B).value
            kind = Kind.CONJUGATION
        else:
            C, B = random_complex(n, rng), random_complex(n, rng)
            exact = support_twosided(C, B).value
            kind = Kind.TWO_SIDED
        approx = support_riemannian(C, B, kind, restarts=1, seed=i, max_iter=50)
        assert approx.value <= exact + 1e-9 * (1 + abs(exact))
