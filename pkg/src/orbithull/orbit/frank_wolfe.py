"""Hull membership by away-step Frank-Wolfe projection.

Minimizes ``0.5 * ||x - A||_W^2`` over the convex hull of an orbit, where
``||y||_W^2 = tr(W y* y)`` (W = I gives the Frobenius norm). The iterate is
always an explicit convex combination of orbit points, so an ``inside``
verdict carries a certificate. With an exact oracle, the duality gap ``g``
yields the certified lower bound

    dist_W(A, hull) >= (||A - x||_W^2 - g) / ||A - x||_W

which backs ``outside`` verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..hilbsep import project_hull
from ..matcore import DimensionError, as_matrix, eigh, matrix_to_json
from .kinds import Kind, OrbitCertificate, OrbitKind
from .support import LmoOptions, lmo

INSIDE = "inside"
OUTSIDE = "outside"
UNDECIDED = "undecided"

MAX_ATOMS = 64


@dataclass(eq=False)
class MembershipVerdict:
    status: str
    distance: float
    lower_bound: float | None
    margin: float | None
    certificate: OrbitCertificate | None
    witness: np.ndarray | None
    lmo_exact: bool
    iterations: int
    gap: float
    projection: np.ndarray
    tolerance: float
    tolerances: dict = field(default_factory=DEFAULT_TOLERANCES.as_dict)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "distance": self.distance,
            "lower_bound": self.lower_bound,
            "margin": self.margin,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "witness": None if self.witness is None else matrix_to_json(self.witness),
            "lmo_exact": self.lmo_exact,
            "iterations": self.iterations,
            "gap": self.gap,
            "tol": self.tolerance,
            "tolerances": self.tolerances,
        }


@dataclass(eq=False)
class _Atom:
    weight: float
    point: np.ndarray
    left: np.ndarray
    right: np.ndarray


def _inner(x: np.ndarray, y: np.ndarray, weight: np.ndarray | None) -> float:
    """``Re tr(W y* x)``."""
    if weight is None:
        return float(np.real(np.vdot(y, x)))
    return float(np.real(np.vdot(y, x @ weight)))


def _embedding(weight: np.ndarray | None):
    """Real-vector embedding y -> vec(y W^(1/2)) turning the W-geometry Euclidean."""
    if weight is None:
        root = None
    else:
        w, v = eigh(weight)
        root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T

    def embed(y: np.ndarray) -> np.ndarray:
        z = y if root is None else y @ root
        z = z.reshape(-1)
        return np.concatenate([z.real, z.imag])

    return embed


def _corrective(atoms: list[_Atom], A: np.ndarray, embed) -> list[_Atom]:
    """Re-weight the stored atoms to the exact projection of A onto their hull."""
    proj = project_hull(embed(A), [embed(a.point) for a in atoms], tol=1e-12)
    kept = []
    for a, w in zip(atoms, proj.coefficients):
        if w > 0.0:
            a.weight = float(w)
            kept.append(a)
    total = sum(a.weight for a in kept)
    for a in kept:
        a.weight /= total
    return kept


def frank_wolfe_project(
    A,
    orbit: OrbitKind,
    tol: float = 1e-6,
    max_iter: int = 2000,
    weight=None,
    lmo_options: LmoOptions | None = None,
    fully_corrective: bool = True,
    stop_on_outside: bool = True,
) -> MembershipVerdict:
    """Decide whether ``A`` lies in the closed convex hull of ``orbit``.

    ``inside``: ``||A - x||_W <= tol`` for the returned convex combination x.
    ``outside``: certified distance lower bound ``>= 2 tol`` from an exact oracle.
    ``undecided``: otherwise (heuristic oracle, or iteration cap).

    With ``fully_corrective`` the weights over the stored atoms are re-solved
    exactly after every step (min-norm point over the atom hull); otherwise
    plain away-step updates with exact line search are used.

    With ``stop_on_outside=False`` the iteration continues past an ``outside``
    certificate until the gap drops below ``tol * distance``, so the returned
    ``projection`` is a near-exact nearest point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = np.asarray(as_matrix(A))
    if A.shape != orbit.base.shape:
        raise DimensionError(f"target shape {A.shape} != base shape {orbit.base.shape}")
    W = None if weight is None else np.asarray(weight, dtype=complex)
    embed = _embedding(W)
    opts = lmo_options or LmoOptions(restarts=4)

    n = orbit.n
    eye = np.eye(n, dtype=complex)
    atoms = [_Atom(1.0, orbit.base.copy(), eye, eye)]
    scale = 1.0 + np.linalg.norm(A) + np.linalg.norm(orbit.base)

    best_lower = None
    witness = None
    margin = None
    exact_seen = True
    last_init = None
    status = UNDECIDED
    gap = float("inf")
    it = 0
    x = atoms[0].point

    for it in range(1, max_iter + 1):
        x = sum((a.weight * a.point for a in atoms), np.zeros((n, n), dtype=complex))
        resid = A - x
        dist = np.sqrt(max(_inner(resid, resid, W), 0.0))
        if dist <= tol:
            status = INSIDE
            break
        direction = resid if W is None else resid @ W
        sv = lmo(orbit, direction, opts, init=last_init)
        exact_seen = exact_seen and sv.exact
        if not sv.exact:
            last_init = (sv.left, sv.right)
        gap = _inner(resid, sv.point - x, W)
        if sv.exact:
            lower = (dist * dist - gap) / dist
            if best_lower is None or lower > best_lower:
                best_lower = lower
                witness = direction / dist
                margin = float(np.real(np.vdot(witness, A))) - sv.value / dist
            if best_lower >= 2.0 * tol:
                status = OUTSIDE
                if stop_on_outside or gap <= tol * dist:
                    break
        if gap <= 1e-15 * scale * scale:
            break

        # away vertex: the atom least aligned with the descent direction
        scores = [_inner(resid, a.point, W) for a in atoms]
        ia = int(np.argmin(scores))
        away_gap = _inner(resid, x - atoms[ia].point, W)

        if gap >= away_gap or len(atoms) == 1:
            d = sv.point - x
            gamma_max = 1.0
            fw_step = True
        else:
            wa = atoms[ia].weight
            d = x - atoms[ia].point
            gamma_max = wa / (1.0 - wa)
            fw_step = False
        dd = _inner(d, d, W)
        if dd <= 0.0:
            break
        gamma = min(max(_inner(resid, d, W) / dd, 0.0), gamma_max)

        if fw_step:
            for a in atoms:
                a.weight *= 1.0 - gamma
            match = None
            for a in atoms:
                if np.linalg.norm(a.point - sv.point) <= 1e-12 * scale:
                    match = a
                    break
            if match is None:
                atoms.append(_Atom(gamma, sv.point, sv.left, sv.right))
            else:
                match.weight += gamma
        else:
            for a in atoms:
                a.weight *= 1.0 + gamma
            atoms[ia].weight -= gamma
        atoms = [a for a in atoms if a.weight > 1e-15]
        if fully_corrective and len(atoms) > 1:
            atoms = _corrective(atoms, A, embed)
        if len(atoms) > MAX_ATOMS:
            atoms.remove(min(atoms, key=lambda a: a.weight))
        total = sum(a.weight for a in atoms)
        for a in atoms:
            a.weight /= total
    else:
        x = sum((a.weight * a.point for a in atoms), np.zeros((n, n), dtype=complex))

    resid = A - x
    dist = float(np.sqrt(max(_inner(resid, resid, W), 0.0)))
    cert = OrbitCertificate(
        orbit.kind,
        tuple(float(a.weight) for a in atoms),
        tuple(a.left for a in atoms),
        tuple(a.right for a in atoms),
        orbit.base,
        A,
    )
    lmo_exact = exact_seen
    if status == OUTSIDE and not lmo_exact:
        status = UNDECIDED
    return MembershipVerdict(
        status=status,
        distance=dist,
        lower_bound=best_lower if lmo_exact else None,
        margin=margin if status == OUTSIDE else None,
        certificate=cert if status == INSIDE else None,
        witness=witness if status == OUTSIDE else None,
        lmo_exact=lmo_exact,
        iterations=it,
        gap=float(gap),
        projection=x,
        tolerance=tol,
    )
