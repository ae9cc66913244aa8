"""Separation geometry for finite point sets in Euclidean space.

Projection onto the convex hull of finitely many points, the metric
condition "some hull generator is at least as close to xi as to eta",
constructive refuting challengers, and the unbounded half-space scenario
where the metric condition holds for every off-axis challenger although the
point is outside.

Complex vectors are handled as real vectors of doubled length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .matcore import DimensionError, ValidationError


class ProjectionError(RuntimeError):
    """Iteration cap reached; carries the best iterate and its duality gap."""

    def __init__(self, message: str, best: "ProjectionResult"):
        super().__init__(f"{message} (gap {best.gap:.3e})")
        self.best = best


def as_real_vector(v) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if np.iscomplexobj(arr):
        arr = np.concatenate([arr.real, arr.imag])
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite entries")
    return arr


def as_point_set(points) -> np.ndarray:
    """Stack points into a (k, d) real array."""
    pts = [as_real_vector(p) for p in points]
    if not pts:
        raise ValidationError("point set must be non-empty")
    dim = pts[0].size
    if any(p.size != dim for p in pts):
        raise DimensionError("points have differing dimensions")
    return np.vstack(pts)


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    distance: float
    coefficients: np.ndarray
    gap: float
    iterations: int = 0
    active: tuple[int, ...] = field(default=())


def _affine_minimizer(P: np.ndarray) -> np.ndarray:
    """Weights (summing to 1) of the min-norm point of the affine hull of the rows of P."""
    k = P.shape[0]
    if k == 1:
        return np.ones(1)
    G = P @ P.T
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = G
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    lam = sol[:k]
    return lam / lam.sum()


def project_hull(xi, X, tol: float = 1e-10, max_iter: int = 1000) -> ProjectionResult:
    """Orthogonal projection of ``xi`` onto ``conv X`` for a finite set X.

    Wolfe's min-norm-point method on the translated set ``X - xi``. The
    returned ``gap`` is the Frank-Wolfe duality gap
    ``max_p <xi - point, p - point>``, which certifies optimality.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    xi = as_real_vector(xi)
    pts = as_point_set(X)
    if pts.shape[1] != xi.size:
        raise DimensionError(f"point dimension {pts.shape[1]} != vector dimension {xi.size}")
    Q = pts - xi
    k = Q.shape[0]
    scale = max(1.0, float(np.max(np.sum(Q * Q, axis=1))))
    eps = 1e-15 * scale

    start = int(np.argmin(np.sum(Q * Q, axis=1)))
    active = [start]
    weights = np.array([1.0])
    iterations = 0

    def result(active, weights, gap):
        coeffs = np.zeros(k)
        coeffs[active] = weights
        point = coeffs @ pts
        return ProjectionResult(
            point=point,
            distance=float(np.linalg.norm(xi - point)),
            coefficients=coeffs,
            gap=float(gap),
            iterations=iterations,
            active=tuple(sorted(active)),
        )

    while True:
        iterations += 1
        x = weights @ Q[active]
        scores = Q @ x
        j = int(np.argmin(scores))
        gap = float(x @ x - scores[j])
        if gap <= max(eps, min(0.5 * tol * tol, tol)) or j in active:
            return result(active, weights, max(gap, 0.0))
        if iterations > max_iter:
            raise ProjectionError("project_hull iteration cap exceeded", result(active, weights, gap))
        prev_active, prev_weights = active, weights
        active = active + [j]
        weights = np.append(weights, 0.0)
        for _ in range(len(active) + 1):
            lam = _affine_minimizer(Q[active])
            if np.all(lam > 1e-14):
                weights = lam
                break
            neg = lam <= 1e-14
            ratios = weights[neg] / (weights[neg] - lam[neg])
            theta = float(np.min(ratios))
            weights = theta * lam + (1.0 - theta) * weights
            keep = weights > 1e-14
            keep[np.argmax(weights)] = True
            active = [a for a, kp in zip(active, keep) if kp]
            weights = weights[keep]
            weights = weights / weights.sum()
        if j not in active:
            # the new vertex was dropped immediately: no further progress is possible
            return result(prev_active, prev_weights, max(gap, 0.0))


def hull_distance(xi, X, tol: float = 1e-10) -> float:
    return project_hull(xi, X, tol).distance


def _closeness(xi: np.ndarray, eta: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """``||eta - zeta|| - ||xi - zeta||`` per point; >= 0 means zeta is at least as close to xi."""
    return np.linalg.norm(pts - eta, axis=1) - np.linalg.norm(pts - xi, axis=1)


@dataclass
class MetricConditionReport:
    holds_for_all: bool
    failures: list[int]
    tested: int


def condition_holds(xi, X, eta, slack: float = 1e-12) -> bool:
    """Is there a generator zeta with ``||xi - zeta|| <= ||eta - zeta||``?"""
    xi = as_real_vector(xi)
    eta = as_real_vector(eta)
    pts = as_point_set(X)
    scale = 1.0 + np.linalg.norm(xi) + np.linalg.norm(eta)
    return bool(np.max(_closeness(xi, eta, pts)) >= -slack * scale)


def metric_condition_check(xi, X, challengers: Iterable, slack: float = 1e-12) -> MetricConditionReport:
    """Evaluate the metric condition exhaustively over X for every challenger.

    ``failures`` lists the indices of the challengers that refute it.
    """
    xi = as_real_vector(xi)
    pts = as_point_set(X)
    if pts.shape[1] != xi.size:
        raise DimensionError("point/vector dimension mismatch")
    failures = []
    tested = 0
    for idx, eta in enumerate(challengers):
        tested += 1
        if not condition_holds(xi, pts, eta, slack):
            failures.append(idx)
    return MetricConditionReport(holds_for_all=not failures, failures=failures, tested=tested)


def separating_challenger(xi, X, inside_tol: float = 1e-6, margin: float = 1e-10) -> np.ndarray | None:
    """A challenger eta strictly closer than xi to every point of conv X.

    Returns ``None`` when ``xi`` is within ``inside_tol`` of the hull. The
    default candidate is the projection of xi onto the hull; if it is not
    strict against some generator, candidates on the segment towards xi are
    tried by bisection.
    """
    xi = as_real_vector(xi)
    pts = as_point_set(X)
    proj = project_hull(xi, pts)
    if proj.distance <= inside_tol:
        return None
    need = margin * (1.0 + np.linalg.norm(xi))
    eta0 = proj.point
    if np.min(_closeness(eta0, xi, pts)) > need:
        return eta0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        t = 0.5 * (lo + hi)
        eta = eta0 + t * (xi - eta0)
        if np.min(_closeness(eta, xi, pts)) > need:
            return eta
        hi = t
    raise ProjectionError("no strictly separating challenger found on the projection segment", proj)


@dataclass
class BoundaryReport:
    fraction: float
    satisfied: int
    total: int
    vacuous: bool


def boundary_condition_check(xi, X, boundary_samples: Sequence, slack: float = 1e-12) -> BoundaryReport:
    """Fraction of boundary samples eta for which the metric condition holds."""
    xi = as_real_vector(xi)
    pts = as_point_set(X)
    samples = list(boundary_samples)
    if not samples:
        return BoundaryReport(fraction=1.0, satisfied=0, total=0, vacuous=True)
    ok = sum(condition_holds(xi, pts, eta, slack) for eta in samples)
    return BoundaryReport(fraction=ok / len(samples), satisfied=ok, total=len(samples), vacuous=False)


# ---------------------------------------------------------------------------
# unbounded half-space X = {x : x_1 <= 0}, xi = e_1
# ---------------------------------------------------------------------------


def halfspace_distance(v) -> float:
    """Distance from v to the closed half-space {x_1 <= 0}."""
    return max(float(as_real_vector(v)[0]), 0.0)


def halfspace_margin(eta, zeta) -> float:
    """``||eta - zeta||^2 - ||e_1 - zeta||^2`` evaluated in a cancellation-free form."""
    eta = as_real_vector(eta)
    zeta = as_real_vector(zeta)
    xi = np.zeros_like(eta)
    xi[0] = 1.0
    return float(eta @ eta - 1.0 - 2.0 * zeta @ (eta - xi))


def halfspace_scenario(dim: int, eta) -> np.ndarray:
    """A witness zeta in {x_1 <= 0} strictly closer to e_1 than to eta.

    Starts at the point where the bisector of [e_1, eta] meets the boundary
    hyperplane {x_1 = 0} and moves along that hyperplane away from eta.
    """
    if dim < 2:
        raise ValidationError("the half-space scenario needs dimension >= 2")
    eta = as_real_vector(eta)
    if eta.size != dim:
        raise DimensionError(f"challenger has dimension {eta.size}, expected {dim}")
    norm = np.linalg.norm(eta)
    axis = np.zeros(dim)
    axis[0] = 1.0
    if norm == 0.0 or min(np.linalg.norm(eta / norm - axis), np.linalg.norm(eta / norm + axis)) <= 1e-9:
        raise ValidationError("challenger lies on the axis through xi")
    perp = eta.copy()
    perp[0] = 0.0
    pnorm = np.linalg.norm(perp)
    direction = perp / pnorm
    # bisector: 2 <z, eta - e_1> = ||eta||^2 - 1 ; with z_1 = 0 this is 2 c ||perp|| = ||eta||^2 - 1
    c = (norm * norm - 1.0) / (2.0 * pnorm)
    push = 1.0 + abs(c)
    zeta = (c - push) * direction
    zeta[0] = 0.0
    if halfspace_margin(eta, zeta) <= 0.0:
        raise ValidationError("failed to build a strict half-space witness")
    return zeta


@dataclass
class HalfspaceReport:
    dims: tuple[int, ...]
    challengers: int
    witnessed: int
    min_margin: float
    distance: float

    @property
    def passed(self) -> bool:
        return self.witnessed == self.challengers and self.min_margin > 0.0 and self.distance == 1.0

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "challengers": self.challengers,
            "witnessed": self.witnessed,
            "min_margin": self.min_margin,
            "distance": self.distance,
            "passed": self.passed,
        }


def halfspace_check(dims: Sequence[int] = (2, 3), count: int = 10_000, seed=0) -> HalfspaceReport:
    """Witness search for ``count`` Gaussian off-axis challengers in each dimension.

    The target e_1 is at distance 1 from {x_1 <= 0}, yet every challenger
    has a strictly closer-to-e_1 witness inside the half-space.
    """
    rng = np.random.default_rng(seed)
    witnessed = 0
    total = 0
    min_margin = np.inf
    for dim in dims:
        xi = np.zeros(dim)
        xi[0] = 1.0
        for _ in range(count):
            eta = rng.standard_normal(dim)
            while np.linalg.norm(eta[1:]) <= 1e-9 * np.linalg.norm(eta):
                eta = rng.standard_normal(dim)
            total += 1
            zeta = halfspace_scenario(dim, eta)
            m = halfspace_margin(eta, zeta)
            if zeta[0] <= 0.0 and m > 0.0:
                witnessed += 1
            min_margin = min(min_margin, m)
    return HalfspaceReport(tuple(dims), total, witnessed, float(min_margin), halfspace_distance(xi))
