"""Spectral majorization and constructive unitary-mixing certificates.

The certificate pipeline for Hermitian ``A`` majorized by ``B``::

    A = V diag(a) V*,  B = W diag(b) W*
    a = D b                    (product of T-transforms)
    D = sum_k t_k P(sigma_k)   (Birkhoff decomposition)
    A = sum_k t_k U_k B U_k*,  U_k = V P(sigma_k) W*

Conventions: spectra are sorted descending. The tracial state on M_n is
the normalized trace ``tr(.)/n``; the level-set predicate compares
``n * psi(.)``, i.e. plain traces, so that both predicate forms share one
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES
from .matcore import (
    DimensionError,
    ValidationError,
    as_hermitian,
    eigh,
    matrix_from_json,
    matrix_to_json,
    unitarity_defect,
)


class MajorizationError(ValueError):
    """``a`` is not majorized by ``b``; ``index`` is the first failing partial sum (0-based)."""

    def __init__(self, index: int, slack: float):
        super().__init__(f"majorization fails at partial sum {index + 1} (slack {slack:.3e})")
        self.index = index
        self.slack = slack


class BirkhoffError(RuntimeError):
    def __init__(self, residual: float):
        super().__init__(f"no perfect matching on the support while residual mass is {residual:.3e}")
        self.residual = residual


def as_spectrum(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValidationError("spectrum has non-finite entries")
    return np.sort(v)[::-1].copy()


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def partial_sum_slack(a, b) -> np.ndarray:
    """``cumsum(b) - cumsum(a)`` over descending spectra; the last entry is the trace gap."""
    a = as_spectrum(a)
    b = as_spectrum(b)
    if a.size != b.size:
        raise DimensionError(f"spectra have lengths {a.size} and {b.size}")
    return np.cumsum(b) - np.cumsum(a)


def first_violation(a, b, tol: float = 1e-10) -> int | None:
    slack = partial_sum_slack(a, b)
    for k, s in enumerate(slack[:-1]):
        if s < -tol:
            return k
    if abs(slack[-1]) > tol:
        return slack.size - 1
    return None


def majorizes_partial_sums(a, b, tol: float = 1e-10) -> bool:
    """True iff ``a`` is majorized by ``b`` (partial sums of ``a`` never exceed those of ``b``)."""
    return first_violation(a, b, tol) is None


def majorizes_levelsets(x, y, tol: float = 1e-10) -> bool:
    """Trace form: ``tr x = tr y`` and ``tr (x - r)_+ <= tr (y - r)_+`` for all real r.

    Both sides are convex piecewise-linear in r with kinks only at eigenvalues,
    so checking the union of the two spectra suffices.
    """
    x = as_hermitian(x)
    y = as_hermitian(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    lx = eigh(x)[0]
    ly = eigh(y)[0]
    if abs(lx.sum() - ly.sum()) > tol:
        return False
    for r in np.concatenate([lx, ly]):
        if np.maximum(lx - r, 0.0).sum() > np.maximum(ly - r, 0.0).sum() + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Hardy-Littlewood-Polya transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TTransform:
    """``lam * I + (1 - lam) * P_(i j)`` acting on coordinates i < j."""

    i: int
    j: int
    lam: float

    def matrix(self, n: int) -> np.ndarray:
        t = np.eye(n)
        t[self.i, self.i] = t[self.j, self.j] = self.lam
        t[self.i, self.j] = t[self.j, self.i] = 1.0 - self.lam
        return t


def t_transform_schedule(a, b, tol: float = 1e-10) -> list[TTransform]:
    """T-transforms T_1, ..., T_m (m <= n - 1) with ``a = T_m ... T_1 b``.

    Each step pairs the largest index j with b_j > a_j and the smallest k > j
    with b_k < a_k, and moves mass until one of the two coordinates matches.
    """
    a = as_spectrum(a)
    b = as_spectrum(b)
    if a.size != b.size:
        raise DimensionError(f"spectra have lengths {a.size} and {b.size}")
    bad = first_violation(a, b, tol)
    if bad is not None:
        raise MajorizationError(bad, float(partial_sum_slack(a, b)[bad]))
    n = a.size
    eps = 1e-13 * (1.0 + float(np.max(np.abs(b))))
    cur = b.copy()
    done = np.zeros(n, dtype=bool)
    steps: list[TTransform] = []
    while len(steps) < n - 1:
        diff = cur - a
        above = [i for i in range(n) if not done[i] and diff[i] > eps]
        if not above:
            break
        j = above[-1]
        below = [k for k in range(j + 1, n) if not done[k] and diff[k] < -eps]
        if not below:
            break
        k = below[0]
        delta = min(cur[j] - a[j], a[k] - cur[k])
        gap = cur[j] - cur[k]
        lam = min(max(1.0 - delta / gap, 0.0), 1.0)
        steps.append(TTransform(j, k, float(lam)))
        new_j = lam * cur[j] + (1.0 - lam) * cur[k]
        new_k = lam * cur[k] + (1.0 - lam) * cur[j]
        cur[j], cur[k] = new_j, new_k
        if cur[j] - a[j] <= eps:
            done[j] = True
        if a[k] - cur[k] <= eps:
            done[k] = True
    return steps


def compose_transforms(steps: Sequence[TTransform], n: int) -> np.ndarray:
    d = np.eye(n)
    for step in steps:
        d = step.matrix(n) @ d
    return d


def hlp_transfer(a, b, tol: float = 1e-10) -> np.ndarray:
    """Doubly stochastic D with ``a = D b`` (a majorized by b, both sorted descending)."""
    a = as_spectrum(a)
    return compose_transforms(t_transform_schedule(a, b, tol), a.size)


def is_doubly_stochastic(d, entry_tol: float = 1e-10, sum_tol: float = 1e-8) -> bool:
    d = np.asarray(d, dtype=float)
    return bool(
        d.ndim == 2
        and d.shape[0] == d.shape[1]
        and np.all(d >= -entry_tol)
        and np.all(np.abs(d.sum(axis=0) - 1.0) <= sum_tol)
        and np.all(np.abs(d.sum(axis=1) - 1.0) <= sum_tol)
    )


# ---------------------------------------------------------------------------
# Birkhoff decomposition
# ---------------------------------------------------------------------------


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """P with ``P[i, perm[i]] = 1``, so ``(P b)_i = b[perm[i]]``."""
    n = len(perm)
    p = np.zeros((n, n))
    p[np.arange(n), list(perm)] = 1.0
    return p


def _perfect_matching(allowed: np.ndarray, fixed: dict[int, int]) -> bool:
    """Kuhn augmenting paths; ``fixed`` pins some rows to columns."""
    n = allowed.shape[0]
    match_col = [-1] * n
    used_cols = set(fixed.values())
    for r, c in fixed.items():
        if not allowed[r, c]:
            return False
        match_col[c] = r

    def augment(r, seen):
        for c in range(n):
            if allowed[r, c] and c not in seen and c not in used_cols:
                seen.add(c)
                if match_col[c] == -1 or augment(match_col[c], seen):
                    match_col[c] = r
                    return True
        return False

    for r in range(n):
        if r in fixed:
            continue
        if not augment(r, set()):
            return False
    return True


def _lex_smallest_matching(allowed: np.ndarray) -> tuple[int, ...] | None:
    n = allowed.shape[0]
    if not _perfect_matching(allowed, {}):
        return None
    fixed: dict[int, int] = {}
    for r in range(n):
        for c in range(n):
            if c in fixed.values() or not allowed[r, c]:
                continue
            trial = dict(fixed)
            trial[r] = c
            if _perfect_matching(allowed, trial):
                fixed = trial
                break
    return tuple(fixed[r] for r in range(n))


@dataclass(frozen=True)
class BirkhoffDecomposition:
    weights: tuple[float, ...]
    permutations: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        n = len(self.permutations[0])
        return sum((w * permutation_matrix(p) for w, p in zip(self.weights, self.permutations)), np.zeros((n, n)))


def birkhoff_decompose(d, support_tol: float = DEFAULT_TOLERANCES.birkhoff_support) -> BirkhoffDecomposition:
    """Greedy bottleneck decomposition of a doubly stochastic matrix.

    Each round takes the largest threshold t for which the entries >= t still
    carry a perfect matching, picks the lexicographically smallest such
    matching, and subtracts it with weight equal to its smallest entry.
    """
    d = np.array(d, dtype=float)
    if not is_doubly_stochastic(d):
        raise ValidationError("input is not doubly stochastic")
    n = d.shape[0]
    residual = np.where(d > support_tol, d, 0.0)
    weights: list[float] = []
    perms: list[tuple[int, ...]] = []
    while residual.max() > support_tol:
        values = np.unique(residual[residual > support_tol])[::-1]
        perm = None
        lo, hi = 0, values.size - 1
        # largest bottleneck: binary search on thresholds (descending list)
        while lo <= hi:
            mid = (lo + hi) // 2
            if _perfect_matching(residual >= values[mid], {}):
                hi = mid - 1
            else:
                lo = mid + 1
        if lo >= values.size:
            raise BirkhoffError(float(residual.sum()) / n)
        threshold = values[lo]
        perm = _lex_smallest_matching(residual >= threshold)
        if perm is None:
            raise BirkhoffError(float(residual.sum()) / n)
        w = float(min(residual[i, perm[i]] for i in range(n)))
        weights.append(w)
        perms.append(perm)
        for i in range(n):
            residual[i, perm[i]] -= w
        residual[residual <= support_tol] = 0.0
    return BirkhoffDecomposition(tuple(weights), tuple(perms))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixingCertificate:
    """Witness for ``target = sum_i weights[i] * U_i base U_i*``."""

    weights: tuple[float, ...]
    unitaries: tuple[np.ndarray, ...]
    base: np.ndarray
    target: np.ndarray

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.base, dtype=complex)
        for t, u in zip(self.weights, self.unitaries):
            out = out + t * (u @ self.base @ u.conj().T)
        return out

    @property
    def residual(self) -> float:
        if not self.weights:
            return float(np.linalg.norm(self.target))
        return float(np.linalg.norm(self.target - self.reconstruct()))

    def to_json(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "unitaries": [matrix_to_json(u) for u in self.unitaries],
            "base": matrix_to_json(self.base),
            "target": matrix_to_json(self.target),
            "residual": self.residual,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MixingCertificate":
        try:
            weights = tuple(float(w) for w in obj["weights"])
            unitaries = tuple(matrix_from_json(u) for u in obj["unitaries"])
            base = matrix_from_json(obj["base"])
            target = matrix_from_json(obj["target"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed certificate JSON: {exc}") from exc
        if len(weights) != len(unitaries):
            raise ValidationError("certificate has mismatched weights and unitaries")
        return cls(weights, unitaries, base, target)


def unitary_mixing_certificate(A, B, tol: float = DEFAULT_TOLERANCES.majorization) -> MixingCertificate:
    """Explicit weights and unitaries with ``A = sum t_k U_k B U_k*`` for Hermitian A majorized by B."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")
    a, V = eigh(A)
    b, W = eigh(B)
    scaled = tol * (1.0 + np.linalg.norm(B))
    steps = t_transform_schedule(a, b, scaled)
    n = a.size
    D = compose_transforms(steps, n)
    bvn = birkhoff_decompose(D)
    weights = np.asarray(bvn.weights)
    weights = np.clip(weights, 0.0, None)
    weights = weights / weights.sum()
    unitaries = tuple(V @ permutation_matrix(p) @ W.conj().T for p in bvn.permutations)
    return MixingCertificate(tuple(float(w) for w in weights), unitaries, B, A)


@dataclass
class CertificateReport:
    valid: bool
    residual: float
    weight_defect: float
    max_unitarity_defect: float
    n_terms: int
    min_weight: float

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "residual": self.residual,
            "weight_defect": self.weight_defect,
            "max_unitarity_defect": self.max_unitarity_defect,
            "n_terms": self.n_terms,
            "min_weight": self.min_weight,
        }


def verify_certificate(cert: MixingCertificate, tol: float | None = None) -> CertificateReport:
    """Recompute every certificate invariant; never raises on bad data."""
    tols = DEFAULT_TOLERANCES
    try:
        n = cert.base.shape[0]
        if not cert.weights:
            return CertificateReport(False, float("inf"), 1.0, float("inf"), 0, 0.0)
        res_tol = (tols.certificate if tol is None else tol) * (1.0 + np.linalg.norm(cert.base))
        weight_defect = abs(sum(cert.weights) - 1.0)
        unit = max(unitarity_defect(u) for u in cert.unitaries)
        residual = cert.residual
        min_weight = min(cert.weights)
        valid = (
            residual <= res_tol
            and weight_defect <= tols.weight_sum
            and unit <= tols.unitary * n
            and min_weight > 0.0
        )
        return CertificateReport(bool(valid), residual, weight_defect, unit, len(cert.weights), min_weight)
    except Exception:  # malformed certificates are reported, not raised
        return CertificateReport(False, float("inf"), float("inf"), float("inf"), len(cert.weights), 0.0)
