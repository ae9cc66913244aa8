"""Support functions (linear maximization oracles) of the three orbits.

``h(C) = max_w Re <C, w>`` with ``<C, w> = tr(w* C)``. Closed forms exist
for the conjugation orbit of a Hermitian base (sorted-spectrum pairing) and
for the two-sided orbit (singular-value pairing). Everything else goes
through Riemannian gradient ascent, whose value is a certified lower bound.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..config import thread_cap
from ..matcore import (
    DimensionError,
    as_hermitian,
    as_matrix,
    eigh,
    haar_unitary,
    hermitian_part,
    svd,
)
from .. import _jacobi
from .kinds import Kind, OrbitKind, SupportValue

ARMIJO_C = 1e-4
MAX_HALVINGS = 30
MAX_ASCENT_ITER = 500
GRAD_TOL = 1e-9


def _pairing_value(direction: np.ndarray, point: np.ndarray) -> float:
    return float(np.real(np.vdot(point, direction)))


def support_conjugation_hermitian(C, B) -> SupportValue:
    """Exact support of {U B U*} for Hermitian B, C: sum of products of sorted eigenvalues."""
    C = as_hermitian(C)
    B = as_hermitian(B)
    if C.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {C.shape} vs {B.shape}")
    lc, vc = eigh(C)
    lb, vb = eigh(B)
    u = vc @ vb.conj().T
    point = (vc * lb) @ vc.conj().T
    return SupportValue(float(lc @ lb), point, u, u.conj().T, exact=True)


def support_twosided(C, B) -> SupportValue:
    """Exact support of {U B V}: sum of products of singular values (von Neumann trace inequality)."""
    C = np.asarray(as_matrix(C))
    B = np.asarray(as_matrix(B))
    if C.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {C.shape} vs {B.shape}")
    uc, sc, vc = svd(C)
    ub, sb, vb = svd(B)
    left = uc @ ub.conj().T
    right = vb @ vc.conj().T
    point = (uc * sb) @ vc.conj().T
    return SupportValue(float(sc @ sb), point, left, right, exact=True)


# ---------------------------------------------------------------------------
# ascent
# ---------------------------------------------------------------------------


def _expm_skew(k: np.ndarray) -> np.ndarray:
    h = -1j * k
    h = 0.5 * (h + h.conj().T)
    a, v, _, _ = _jacobi.jacobi_eigh(np.ascontiguousarray(h), 60, 1e-15)
    w = np.real(np.diag(a))
    return (v * np.exp(1j * w)) @ v.conj().T


def _skew(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - m.conj().T)


def _clip_to_ball(m: np.ndarray) -> np.ndarray:
    u, s, v = svd(m)
    return (u * np.minimum(s, 1.0)) @ v.conj().T


def _bb_step(s_prev, g_prev, g_now, fallback):
    """Barzilai-Borwein step from the last displacement and gradient change (ascent form)."""
    y = g_prev - g_now
    sy = float(np.real(np.vdot(s_prev, y)))
    if sy <= 0.0:
        return 2.0 * fallback
    return float(np.real(np.vdot(s_prev, s_prev))) / sy


@dataclass
class _AscentResult:
    value: float
    left: np.ndarray
    right: np.ndarray
    iterations: int


def _ascend_conjugation(C, B, U, gtol, max_iter):
    Ch, Bh = C.conj().T, B.conj().T

    def f(U):
        return float(np.real(np.vdot(C, U @ B @ U.conj().T)))

    fU = f(U)
    step = 1.0 / (np.linalg.norm(C) * np.linalg.norm(B) + 1e-300)
    prev = None
    it = 0
    for it in range(1, max_iter + 1):
        G = C @ U @ Bh + Ch @ U @ B
        omega = _skew(G @ U.conj().T)
        g2 = float(np.real(np.vdot(omega, omega)))
        if np.sqrt(g2) <= gtol:
            break
        if prev is not None:
            step = _bb_step(prev[0], prev[1], omega, step)
        prev = None
        for _ in range(MAX_HALVINGS):
            Un = _expm_skew(step * omega) @ U
            fn = f(Un)
            if fn >= fU + ARMIJO_C * step * g2:
                break
            step *= 0.5
        else:
            break
        prev = (step * omega, omega)
        U, fU = Un, fn
    return _AscentResult(fU, U, U.conj().T, it)


def _ascend_twosided(C, B, U, V, gtol, max_iter):
    Ch, Bh = C.conj().T, B.conj().T

    def f(U, V):
        return float(np.real(np.vdot(C, U @ B @ V)))

    fU = f(U, V)
    step = 1.0 / (np.linalg.norm(C) * np.linalg.norm(B) + 1e-300)
    prev = None
    it = 0
    for it in range(1, max_iter + 1):
        om_u = _skew(C @ V.conj().T @ Bh @ U.conj().T)
        om_v = _skew(Bh @ U.conj().T @ C @ V.conj().T)
        g2 = float(np.real(np.vdot(om_u, om_u) + np.vdot(om_v, om_v)))
        if np.sqrt(g2) <= gtol:
            break
        omega = np.stack([om_u, om_v])
        if prev is not None:
            step = _bb_step(prev[0], prev[1], omega, step)
        prev = None
        for _ in range(MAX_HALVINGS):
            Un = _expm_skew(step * om_u) @ U
            Vn = _expm_skew(step * om_v) @ V
            fn = f(Un, Vn)
            if fn >= fU + ARMIJO_C * step * g2:
                break
            step *= 0.5
        else:
            break
        prev = (step * omega, omega)
        U, V, fU = Un, Vn, fn
    return _AscentResult(fU, U, V, it)


def _ascend_contraction(C, B, u, gtol, max_iter):
    """Projected gradient ascent; iterates stay in the operator-norm unit ball."""
    Ch, Bh = C.conj().T, B.conj().T

    def f(u):
        return float(np.real(np.vdot(C, u @ B @ u.conj().T)))

    fu = f(u)
    step = 1.0 / (np.linalg.norm(C) * np.linalg.norm(B) + 1e-300)
    it = 0
    for it in range(1, max_iter + 1):
        G = C @ u @ Bh + Ch @ u @ B
        accepted = False
        for _ in range(MAX_HALVINGS):
            un = _clip_to_ball(u + step * G)
            fn = f(un)
            ascent = float(np.real(np.vdot(G, un - u)))
            if fn >= fu + ARMIJO_C * ascent and fn >= fu:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        moved = np.linalg.norm(un - u) / step
        u, fu = un, fn
        if moved <= gtol:
            break
        step *= 2.0
    return _AscentResult(fu, u, u.conj().T, it)


def _start_point(kind: Kind, n: int, seed: int, restart: int):
    if restart == 0:
        return np.eye(n, dtype=complex), np.eye(n, dtype=complex)
    rng = np.random.default_rng([seed, restart])
    u = haar_unitary(n, rng)
    v = haar_unitary(n, rng) if kind is Kind.TWO_SIDED else u.conj().T
    return u, v


def _run_restart(C, B, kind, seed, restart, gtol, max_iter, init):
    n = B.shape[0]
    if restart == 0 and init is not None:
        left, right = init
    else:
        left, right = _start_point(kind, n, seed, restart)
    if kind is Kind.CONJUGATION:
        return _ascend_conjugation(C, B, left, gtol, max_iter)
    if kind is Kind.TWO_SIDED:
        return _ascend_twosided(C, B, left, right, gtol, max_iter)
    return _ascend_contraction(C, B, left, gtol, max_iter)


def support_riemannian(
    C,
    B,
    kind=Kind.CONJUGATION,
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = MAX_ASCENT_ITER,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> SupportValue:
    """Multi-start ascent of ``Re <C, w>`` over an orbit; the value is a lower bound.

    Restart 0 starts from the identity (or from ``init``), the others from
    Haar samples seeded by ``(seed, restart)``. Restarts may run on a thread
    pool; the best value wins, ties going to the lowest restart index.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if isinstance(kind, OrbitKind):
        kind = kind.kind
    kind = Kind.parse(kind)
    C = np.asarray(as_matrix(C))
    B = np.asarray(as_matrix(B))
    if C.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {C.shape} vs {B.shape}")
    scale = np.linalg.norm(C) * np.linalg.norm(B)
    if scale == 0.0:
        eye = np.eye(B.shape[0], dtype=complex)
        return SupportValue(0.0, B.copy(), eye, eye, exact=False)
    gtol = GRAD_TOL * max(1.0, scale)

    def job(r):
        return _run_restart(C, B, kind, seed, r, gtol, max_iter, init)

    workers = min(thread_cap(), restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(restarts)))
    else:
        results = [job(r) for r in range(restarts)]
    best = max(range(restarts), key=lambda r: (results[r].value, -r))
    res = results[best]
    point = res.left @ B @ res.right
    # recompute from the returned parameters so the bound is exactly what the point achieves
    return SupportValue(_pairing_value(C, point), point, res.left, res.right, exact=False)


@dataclass(frozen=True)
class LmoOptions:
    restarts: int = 20
    seed: int = 0
    max_iter: int = MAX_ASCENT_ITER


def lmo(orbit: OrbitKind, direction, opts: LmoOptions | None = None, init=None) -> SupportValue:
    """Dispatch to the exact oracle when one exists, otherwise to ascent.

    For a Hermitian base every conjugation-orbit point is Hermitian, so
    ``Re <C, w> = <herm(C), w>`` and the closed form applies to any direction.
    """
    opts = opts or LmoOptions()
    direction = np.asarray(direction, dtype=complex)
    if direction.shape != orbit.base.shape:
        raise DimensionError(f"direction shape {direction.shape} != base shape {orbit.base.shape}")
    if orbit.kind is Kind.CONJUGATION and orbit.hermitian_base:
        sv = support_conjugation_hermitian(hermitian_part(direction), orbit.base)
        return SupportValue(_pairing_value(direction, sv.point), sv.point, sv.left, sv.right, exact=True)
    if orbit.kind is Kind.TWO_SIDED:
        return support_twosided(direction, orbit.base)
    return support_riemannian(
        direction, orbit.base, orbit.kind, opts.restarts, opts.seed, opts.max_iter, init=init
    )
