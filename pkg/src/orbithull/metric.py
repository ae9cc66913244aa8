"""Metric membership criteria for convex hulls of unitary orbits.

The duel asks for a unitary U with ``||A - U B U*|| <= ||C - U B U*||``. With
``w = U B U*`` and weight W (a density matrix, a sum of them, or I for the
Frobenius norm),

    ||A - w||_W^2 - ||C - w||_W^2 = ||A||_W^2 - ||C||_W^2 - 2 Re <(A - C) W, w>

so a winning U exists iff ``h((A - C) W) >= (||A||_W^2 - ||C||_W^2) / 2``,
where h is the support function of the orbit. An exact h turns a failed
duel into a certified refutation.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import hilbsep
from .config import DEFAULT_TOLERANCES, thread_cap
from .majorization import majorizes_partial_sums, partial_sum_slack
from .matcore import (
    DensityMatrix,
    DimensionError,
    StateFamily,
    as_matrix,
    eigh,
    haar_unitary,
    is_hermitian,
    matrix_to_json,
    random_hermitian,
    seminorm2,
    weighted_sq_norm,
)
from .orbit import INSIDE, OUTSIDE, Kind, LmoOptions, OrbitKind, frank_wolfe_project, lmo

CONSISTENT = "consistent-with-membership"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


def weight_matrix(weight, n: int) -> np.ndarray | None:
    """None (Frobenius), a DensityMatrix, a StateFamily or a raw PSD matrix -> W or None."""
    if weight is None:
        return None
    if isinstance(weight, DensityMatrix):
        w = weight.rho
    elif isinstance(weight, StateFamily):
        w = weight.weight_matrix
    else:
        w = np.asarray(weight, dtype=complex)
    if w.shape != (n, n):
        raise DimensionError(f"weight has shape {w.shape}, expected {(n, n)}")
    return np.asarray(w)


def _is_faithful(W: np.ndarray | None) -> bool:
    if W is None:
        return True
    return bool(eigh(W)[0][-1] > DEFAULT_TOLERANCES.faithful)


def _sq(x: np.ndarray, W: np.ndarray | None) -> float:
    if W is None:
        return float(np.real(np.vdot(x, x)))
    return weighted_sq_norm(x, W)


def duel_gap(A, C, w, weight=None) -> float:
    """``||A - w||_W^2 - ||C - w||_W^2`` computed directly."""
    W = weight_matrix(weight, np.asarray(A).shape[0])
    return _sq(np.asarray(A) - w, W) - _sq(np.asarray(C) - w, W)


def duel_gap_reduced(A, C, w, weight=None) -> float:
    """The same quantity through ``||A||^2 - ||C||^2 - 2 Re <(A - C) W, w>``."""
    A = np.asarray(A)
    C = np.asarray(C)
    W = weight_matrix(weight, A.shape[0])
    D = (A - C) if W is None else (A - C) @ W
    return _sq(A, W) - _sq(C, W) - 2.0 * float(np.real(np.vdot(w, D)))


@dataclass(eq=False)
class DuelOutcome:
    success: bool
    u: np.ndarray | None
    lhs: float
    rhs: float
    certified: bool
    support: float
    threshold: float
    faithful: bool

    @property
    def margin(self) -> float:
        """``h - threshold``; negative values measure how far the duel is lost."""
        return self.support - self.threshold

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "u": None if self.u is None else matrix_to_json(self.u),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "certified": self.certified,
            "support": self.support,
            "threshold": self.threshold,
            "margin": self.margin,
            "faithful": self.faithful,
        }


def duel(A, B, C, weight=None, opts: LmoOptions | None = None, tol: float = DEFAULT_TOLERANCES.duel) -> DuelOutcome:
    """Search for U with ``||A - U B U*||_W <= ||C - U B U*||_W`` via one support evaluation."""
    A = np.asarray(as_matrix(A))
    B = np.asarray(as_matrix(B))
    C = np.asarray(as_matrix(C))
    if not (A.shape == B.shape == C.shape):
        raise DimensionError(f"dimension mismatch: {A.shape}, {B.shape}, {C.shape}")
    W = weight_matrix(weight, A.shape[0])
    D = (A - C) if W is None else (A - C) @ W
    threshold = 0.5 * (_sq(A, W) - _sq(C, W))
    sv = lmo(OrbitKind(Kind.CONJUGATION, B), D, opts)
    w = sv.point
    lhs = float(np.sqrt(_sq(A - w, W)))
    rhs = float(np.sqrt(_sq(C - w, W)))
    scale = 1.0 + np.linalg.norm(A) + np.linalg.norm(B) + np.linalg.norm(C)
    success = lhs <= rhs + tol * scale
    return DuelOutcome(
        success=bool(success),
        u=sv.left if success else None,
        lhs=lhs,
        rhs=rhs,
        certified=bool(sv.exact),
        support=float(sv.value),
        threshold=float(threshold),
        faithful=_is_faithful(W),
    )


@dataclass(eq=False)
class Refutation:
    index: int
    challenger: np.ndarray
    margin: float
    adversarial: bool


@dataclass(eq=False)
class CriterionReport:
    target: np.ndarray
    base: np.ndarray
    challengers_tested: int
    refutations: list[Refutation] = field(default_factory=list)
    uncertified_failures: int = 0
    faithful: bool = True

    @property
    def verdict(self) -> str:
        if self.refutations:
            return REFUTED
        if self.uncertified_failures:
            return INCONCLUSIVE
        return CONSISTENT

    def to_json(self) -> dict:
        return {
            "target": matrix_to_json(self.target),
            "base": matrix_to_json(self.base),
            "challengers_tested": self.challengers_tested,
            "refutations": [
                {"index": r.index, "margin": r.margin, "adversarial": r.adversarial, "challenger": matrix_to_json(r.challenger)}
                for r in self.refutations
            ],
            "uncertified_failures": self.uncertified_failures,
            "faithful": self.faithful,
            "verdict": self.verdict,
        }


def random_challengers(A, B, count: int, seed=0, hermitian: bool | None = None) -> list[np.ndarray]:
    """Gaussian challengers rescaled to Frobenius norms uniform in [0, 2(||A|| + ||B||)]."""
    A = np.asarray(A)
    B = np.asarray(B)
    n = A.shape[0]
    if hermitian is None:
        hermitian = is_hermitian(A) and is_hermitian(B)
    rng = np.random.default_rng(seed)
    top = 2.0 * (np.linalg.norm(A) + np.linalg.norm(B))
    out = []
    for _ in range(count):
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if hermitian:
            z = 0.5 * (z + z.conj().T)
        z = z / np.linalg.norm(z) * rng.uniform(0.0, top)
        out.append(z)
    return out


def adversarial_challenger(A, B, weight=None, tol: float = 1e-8, max_iter: int = 2000) -> np.ndarray:
    """The projection of A onto the hull of the unitary orbit of B (in the W-geometry)."""
    W = weight_matrix(weight, np.asarray(A).shape[0])
    verdict = frank_wolfe_project(
        A, OrbitKind(Kind.CONJUGATION, B), tol=tol, max_iter=max_iter, weight=W, stop_on_outside=False
    )
    return verdict.projection


def criterion_scan(
    A,
    B,
    random_count: int = 200,
    include_adversarial: bool = True,
    weight=None,
    seed: int = 0,
    opts: LmoOptions | None = None,
    adversarial_tol: float = 1e-8,
) -> CriterionReport:
    """Run duels against random challengers (and the projection challenger).

    Sampling can only refute the metric criterion or fail to refute it;
    ``consistent-with-membership`` is not a membership certificate.
    """
    A = np.asarray(as_matrix(A))
    B = np.asarray(as_matrix(B))
    W = weight_matrix(weight, A.shape[0])
    challengers = random_challengers(A, B, random_count, seed)
    flags = [False] * len(challengers)
    if include_adversarial:
        challengers.append(adversarial_challenger(A, B, W, adversarial_tol))
        flags.append(True)

    def run(C):
        return duel(A, B, C, W, opts)

    workers = min(thread_cap(), max(1, len(challengers)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, challengers))
    else:
        outcomes = [run(C) for C in challengers]

    report = CriterionReport(A, B, len(challengers), faithful=_is_faithful(W))
    for i, (C, out, adv) in enumerate(zip(challengers, outcomes, flags)):
        if out.success:
            continue
        if out.certified:
            report.refutations.append(Refutation(i, C, -out.margin, adv))
        else:
            report.uncertified_failures += 1
    return report


# ---------------------------------------------------------------------------
# finite families of states
# ---------------------------------------------------------------------------


def _sqrt_psd(W: np.ndarray) -> np.ndarray:
    w, v = eigh(W)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _embed(y: np.ndarray, root: np.ndarray) -> np.ndarray:
    z = (np.asarray(y) @ root).reshape(-1)
    return np.concatenate([z.real, z.imag])


@dataclass(eq=False)
class FamilyRow:
    subset: tuple[int, ...]
    distance: float
    member: bool
    holds_for_all: bool
    failures: list[int]
    consistent: bool


@dataclass(eq=False)
class FamilyReport:
    rows: list[FamilyRow]
    challengers_tested: int

    @property
    def all_consistent(self) -> bool:
        return all(r.consistent for r in self.rows)

    def row(self, subset: Sequence[int]) -> FamilyRow:
        key = tuple(sorted(subset))
        for r in self.rows:
            if r.subset == key:
                return r
        raise KeyError(key)

    def to_json(self) -> dict:
        return {
            "challengers_tested": self.challengers_tested,
            "all_consistent": self.all_consistent,
            "rows": [
                {
                    "subset": list(r.subset),
                    "distance": r.distance,
                    "member": r.member,
                    "holds_for_all": r.holds_for_all,
                    "failures": r.failures,
                    "consistent": r.consistent,
                }
                for r in self.rows
            ],
        }


def family_criterion_check(
    x,
    X_points: Sequence,
    W: StateFamily,
    challengers: Iterable = (),
    subset_size_cap: int | None = None,
    member_tol: float = 1e-8,
) -> FamilyReport:
    """For every sub-family F (up to the size cap), compare the metric condition
    under ``||.||_{2,F}`` with exact membership of x in conv X in that geometry.

    ``y -> y (sum_F rho)^(1/2)`` maps the F-semi-norm onto a Euclidean norm, so the
    finite-set separation machinery applies verbatim. The projection of x (pulled
    back to a convex combination of X) is always added as a challenger.
    """
    x = np.asarray(as_matrix(x))
    pts = [np.asarray(as_matrix(p)) for p in X_points]
    if not pts:
        raise ValueError("X_points must be non-empty")
    for p in pts:
        if p.shape != x.shape:
            raise DimensionError(f"point shape {p.shape} != {x.shape}")
    if W.n != x.shape[0]:
        raise DimensionError("state family dimension mismatch")
    base_challengers = [np.asarray(c, dtype=complex) for c in challengers]
    cap = len(W) if subset_size_cap is None else min(subset_size_cap, len(W))
    rows = []
    tested = 0
    for size in range(1, cap + 1):
        for subset in itertools.combinations(range(len(W)), size):
            root = _sqrt_psd(W.subfamily(subset).weight_matrix)
            xe = _embed(x, root)
            Xe = [_embed(p, root) for p in pts]
            proj = hilbsep.project_hull(xe, Xe, tol=1e-12)
            pulled_back = sum(c * p for c, p in zip(proj.coefficients, pts))
            cands = base_challengers + [pulled_back]
            tested += len(cands)
            check = hilbsep.metric_condition_check(xe, Xe, [_embed(c, root) for c in cands])
            member = proj.distance <= member_tol
            rows.append(
                FamilyRow(
                    subset=subset,
                    distance=proj.distance,
                    member=member,
                    holds_for_all=check.holds_for_all,
                    failures=check.failures,
                    consistent=member == check.holds_for_all,
                )
            )
    return FamilyReport(rows, tested)


@dataclass
class C2Report:
    norm_x_minus_a_phi: float
    norm_x_minus_b_psi: float
    distance_family: float
    single_state_condition_holds: bool
    family_condition_holds: bool
    member: bool

    @property
    def passed(self) -> bool:
        return (
            self.norm_x_minus_a_phi <= 1e-12
            and self.norm_x_minus_b_psi <= 1e-12
            and abs(self.distance_family - np.sqrt(2.0) / 2.0) <= 1e-8
            and self.single_state_condition_holds
            and not self.family_condition_holds
            and not self.member
        )

    def to_json(self) -> dict:
        return {
            "norm_x_minus_a_phi": self.norm_x_minus_a_phi,
            "norm_x_minus_b_psi": self.norm_x_minus_b_psi,
            "distance_family": self.distance_family,
            "expected_distance": float(np.sqrt(2.0) / 2.0),
            "single_state_condition_holds": self.single_state_condition_holds,
            "family_condition_holds": self.family_condition_holds,
            "member": self.member,
            "passed": self.passed,
        }


def counterexample_c2(challenger_count: int = 200, seed: int = 0) -> C2Report:
    """C + C as diagonal 2x2 matrices: a = (1,0), b = (0,1), x = (1,1), coordinate states.

    Each single coordinate state sees x as a member of conv{a, b}; the pair
    (a separating family) does not, and x is not in the hull.
    """
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.0, 1.0]).astype(complex)
    x = np.diag([1.0, 1.0]).astype(complex)
    phi = DensityMatrix.from_diagonal([1.0, 0.0])
    psi = DensityMatrix.from_diagonal([0.0, 1.0])
    family = StateFamily([phi, psi], require_separating=True)
    rng = np.random.default_rng(seed)
    challengers = [np.diag(rng.uniform(-2.0, 3.0, size=2)).astype(complex) for _ in range(challenger_count)]
    report = family_criterion_check(x, [a, b], family, challengers)
    singles = [report.row([0]), report.row([1])]
    pair = report.row([0, 1])
    return C2Report(
        norm_x_minus_a_phi=seminorm2(x - a, phi),
        norm_x_minus_b_psi=seminorm2(x - b, psi),
        distance_family=pair.distance,
        single_state_condition_holds=all(r.holds_for_all for r in singles),
        family_condition_holds=pair.holds_for_all,
        member=pair.member,
    )


# ---------------------------------------------------------------------------
# three-way equivalence for Hermitian pairs
# ---------------------------------------------------------------------------


def random_mixing(B, rng, terms: int = 3) -> np.ndarray:
    """A random convex combination of unitary conjugates of B."""
    B = np.asarray(B)
    n = B.shape[0]
    weights = rng.dirichlet(np.ones(terms))
    out = np.zeros((n, n), dtype=complex)
    for t in weights:
        U = haar_unitary(n, rng)
        out = out + t * (U @ B @ U.conj().T)
    return 0.5 * (out + out.conj().T)


def non_majorized_instance(B, rng) -> np.ndarray:
    """Hermitian A whose spectrum is certifiably not majorized by that of B."""
    B = np.asarray(B)
    n = B.shape[0]
    b = eigh(B)[0]
    spread = b[0] - b[-1]
    if rng.uniform() < 0.5:
        a = b.copy()
        delta = rng.uniform(0.05, 0.5) * spread
        a[0] += delta
        a[-1] -= delta
    else:
        a = eigh(random_mixing(B, rng))[0] + rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.5) * spread / n
    V = haar_unitary(n, rng)
    A = (V * a) @ V.conj().T
    return 0.5 * (A + A.conj().T)


@dataclass
class EquivalenceRecord:
    label: str
    majorized: bool
    membership: str
    criterion: str
    agree: bool
    margin: float | None
    slack: list[float]
    target: dict
    base: dict


@dataclass
class EquivalenceSummary:
    records: list[EquivalenceRecord]

    @property
    def agreement_rate(self) -> float:
        return sum(r.agree for r in self.records) / max(1, len(self.records))

    @property
    def disagreements(self) -> list[EquivalenceRecord]:
        return [r for r in self.records if not r.agree]

    def to_json(self) -> dict:
        return {
            "instances": len(self.records),
            "agreement_rate": self.agreement_rate,
            "positives": sum(r.label == "positive" for r in self.records),
            "negatives": sum(r.label == "negative" for r in self.records),
            "min_refutation_margin": min(
                (r.margin for r in self.records if r.margin is not None), default=None
            ),
            "disagreements": [r.__dict__ for r in self.disagreements],
        }


def classify_pair(A, B, tol: float = 1e-5, challengers: int = 50, seed: int = 0) -> tuple[bool, str, str, float | None]:
    """Spectral majorization, hull-membership verdict and metric-criterion verdict for one pair."""
    majorized = majorizes_partial_sums(eigh(A)[0], eigh(B)[0], tol=1e-8 * (1.0 + np.linalg.norm(B)))
    verdict = frank_wolfe_project(A, OrbitKind(Kind.CONJUGATION, B), tol=tol)
    scan = criterion_scan(A, B, random_count=challengers, seed=seed)
    margin = max((r.margin for r in scan.refutations), default=None)
    return majorized, verdict.status, scan.verdict, margin


def equivalence_suite(n: int = 4, trials: int = 50, seed: int = 0, tol: float = 1e-5, challengers: int = 50) -> EquivalenceSummary:
    """Positive (random mixing) and negative (perturbed spectrum) Hermitian instances.

    Agreement means (True, inside, consistent) on positives and
    (False, outside, refuted) on negatives.
    """
    if n > 6:
        raise ValueError("equivalence_suite is meant for n <= 6")
    rng = np.random.default_rng(seed)
    records = []
    for i in range(trials):
        B = random_hermitian(n, rng)
        for label, A in (("positive", random_mixing(B, rng)), ("negative", non_majorized_instance(B, rng))):
            maj, status, crit, margin = classify_pair(A, B, tol, challengers, seed=[seed, i])
            if label == "positive":
                agree = maj and status == INSIDE and crit == CONSISTENT
            else:
                agree = (not maj) and status == OUTSIDE and crit == REFUTED
            slack = partial_sum_slack(eigh(A)[0], eigh(B)[0]).tolist()
            records.append(
                EquivalenceRecord(label, maj, status, crit, agree, margin, slack, matrix_to_json(A), matrix_to_json(B))
            )
    return EquivalenceSummary(records)
