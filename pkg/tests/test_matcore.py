from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from orbithull.matcore import (
    DensityMatrix,
    DimensionError,
    StateFamily,
    ValidationError,
    as_hermitian,
    as_matrix,
    as_unitary,
    eigh,
    expm_skew,
    frobenius_inner,
    haar_unitary,
    matrix_from_json,
    matrix_to_json,
    positive_part,
    random_complex,
    random_contraction,
    random_density,
    random_hermitian,
    seminorm2,
    seminorm2_family,
    svd,
    unitarity_defect,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=6)


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_eigh_matches_lapack(n, seed):
    h = random_hermitian(n, seed)
    w, v = eigh(h)
    ref = np.linalg.eigvalsh(h)[::-1]
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(w, ref, atol=1e-10 * (1 + np.abs(ref).max()))
    assert unitarity_defect(v) < 1e-10
    np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-10 * (1 + np.linalg.norm(h)))


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_svd_matches_lapack(n, seed):
    a = random_complex(n, seed)
    u, s, v = svd(a)
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False), atol=1e-10 * (1 + s[0]))
    assert unitarity_defect(u) < 1e-10
    assert unitarity_defect(v) < 1e-10
    np.testing.assert_allclose((u * s) @ v.conj().T, a, atol=1e-10 * (1 + s[0]))


def test_svd_rank_deficient_completes_unitaries():
    rng = np.random.default_rng(3)
    x = random_complex(4, rng)[:, :2]
    a = x @ x.conj().T  # rank 2
    u, s, v = svd(a)
    assert s[2] < 1e-10 and s[3] < 1e-10
    assert unitarity_defect(u) < 1e-10
    assert unitarity_defect(v) < 1e-10
    np.testing.assert_allclose((u * s) @ v.conj().T, a, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=dims, seed=seeds)
def test_expm_skew_matches_scipy(n, seed):
    h = random_hermitian(n, seed)
    k = 1j * h
    u = expm_skew(k)
    np.testing.assert_allclose(u, scipy.linalg.expm(k), atol=1e-10)
    assert unitarity_defect(u) < 1e-10


def test_expm_skew_rejects_non_skew():
    with pytest.raises(ValidationError):
        expm_skew(np.eye(2))


@pytest.mark.parametrize("n", [1, 2, 5])
def test_haar_unitary_is_unitary_and_seeded(n):
    u = haar_unitary(n, 7)
    assert unitarity_defect(u) < 1e-12
    np.testing.assert_array_equal(u, haar_unitary(n, 7))


def test_haar_first_moment_vanishes():
    rng = np.random.default_rng(0)
    mean = sum(haar_unitary(3, rng) for _ in range(4000)) / 4000
    assert np.abs(mean).max() < 0.05


def test_validation_errors():
    with pytest.raises(ValidationError):
        as_matrix(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(ValidationError):
        as_hermitian([[0, 1], [0, 0]])
    with pytest.raises(ValidationError):
        as_unitary([[1, 1], [0, 1]])
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([2.0, -1.0]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValidationError):
        StateFamily([DensityMatrix.from_diagonal([1, 0])], require_separating=True)
    with pytest.raises(DimensionError):
        StateFamily([DensityMatrix.from_diagonal([1, 0]), DensityMatrix.normalized_trace(3)])


def test_density_faithfulness_flag():
    assert DensityMatrix.normalized_trace(3).faithful
    assert not DensityMatrix.from_diagonal([1.0, 0.0]).faithful


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 5), k=st.integers(1, 4), seed=seeds)
def test_family_seminorm_equals_weight_form(n, k, seed):
    rng = np.random.default_rng(seed)
    fam = StateFamily(DensityMatrix(random_density(n, rng)) for _ in range(k))
    x = random_complex(n, rng)
    direct = np.sqrt(sum(seminorm2(x, m) ** 2 for m in fam.members))
    W = fam.weight_matrix
    via_weight = np.sqrt(np.trace(W @ x.conj().T @ x).real)
    assert seminorm2_family(x, fam) == pytest.approx(direct, rel=1e-12)
    assert seminorm2_family(x, fam) == pytest.approx(via_weight, rel=1e-10)
    # averaging the family rescales the squared semi-norm by 1/k
    assert seminorm2(x, fam.averaged()) ** 2 == pytest.approx(seminorm2_family(x, fam) ** 2 / k, rel=1e-10)


def test_normalized_trace_seminorm_is_scaled_frobenius():
    x = random_complex(4, 1)
    assert seminorm2(x, DensityMatrix.normalized_trace(4)) == pytest.approx(np.linalg.norm(x) / 2.0, rel=1e-12)


def test_frobenius_inner_convention():
    a = random_complex(3, 1)
    b = random_complex(3, 2)
    assert frobenius_inner(a, b) == pytest.approx(np.trace(b.conj().T @ a))


def test_positive_part():
    h = np.diag([3.0, 1.0, -2.0])
    np.testing.assert_allclose(positive_part(h, 1.5), np.diag([1.5, 0.0, 0.0]), atol=1e-14)


def test_random_contraction_norm():
    for seed in range(20):
        assert np.linalg.norm(random_contraction(4, seed), 2) <= 1.0 + 1e-12


def test_matrix_json_round_trip():
    a = random_complex(3, 5)
    np.testing.assert_array_equal(matrix_from_json(matrix_to_json(a)), a)
    with pytest.raises(ValidationError):
        matrix_from_json({"n": 2, "entries": [[1, 2], [3, 4]]})
    with pytest.raises(ValidationError):
        matrix_from_json({"entries": []})
