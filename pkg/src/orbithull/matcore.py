"""Dense complex-matrix kernel: validation, norms, semi-norms, factorizations, sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _jacobi
from .config import DEFAULT_TOLERANCES, Tolerances


class ValidationError(ValueError):
    """Input violates a type invariant (non-square, non-finite, not Hermitian, ...)."""


class DimensionError(ValidationError):
    """Operands have incompatible dimensions."""


class ConvergenceError(RuntimeError):
    """An iterative kernel hit its iteration cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(a) -> np.ndarray:
    """Return a read-only complex128 copy of a square, finite matrix."""
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValidationError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return _frozen(arr)


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - a.conj().T))


def is_hermitian(a, tol: float = DEFAULT_TOLERANCES.hermitian) -> bool:
    a = np.asarray(a)
    return hermitian_defect(a) <= tol * (1.0 + np.linalg.norm(a))


def as_hermitian(a, tol: float = DEFAULT_TOLERANCES.hermitian) -> np.ndarray:
    """Validate and return the exactly-symmetrized Hermitian matrix."""
    m = as_matrix(a)
    if not is_hermitian(m, tol):
        raise ValidationError(f"matrix is not Hermitian (defect {hermitian_defect(m):.3e})")
    return _frozen(0.5 * (m + m.conj().T))


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def as_unitary(u, tol: float = DEFAULT_TOLERANCES.unitary) -> np.ndarray:
    m = as_matrix(u)
    if unitarity_defect(m) > tol * m.shape[0]:
        raise ValidationError(f"matrix is not unitary (defect {unitarity_defect(m):.3e})")
    return m


def _check_same_dim(*mats: np.ndarray) -> int:
    n = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape != mats[0].shape:
            raise DimensionError(f"dimension mismatch: {mats[0].shape} vs {m.shape}")
    return n


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def fro_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def op_norm(a: np.ndarray) -> float:
    return float(svd(a)[1][0])


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityMatrix:
    """A state ``x -> tr(rho x)`` on the n x n matrices."""

    rho: np.ndarray
    faithful: bool = field(init=False)

    def __post_init__(self):
        tol = DEFAULT_TOLERANCES
        rho = as_hermitian(self.rho, tol.hermitian)
        evals = eigh(rho)[0]
        if evals[-1] < -tol.density:
            raise ValidationError(f"density matrix is not positive (min eigenvalue {evals[-1]:.3e})")
        trace = float(np.trace(rho).real)
        if abs(trace - 1.0) > tol.density:
            raise ValidationError(f"density matrix trace is {trace!r}, expected 1")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "faithful", bool(evals[-1] > tol.faithful))

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def normalized_trace(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(n) / n)

    @classmethod
    def from_diagonal(cls, diag: Sequence[float]) -> "DensityMatrix":
        return cls(np.diag(np.asarray(diag, dtype=float)))

    def expectation(self, x: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ x))


@dataclass(frozen=True)
class StateFamily:
    """A finite family F of states; ``||x||_{2,F}^2 = sum_F tr(rho x* x)``."""

    members: tuple[DensityMatrix, ...]

    def __init__(self, members: Iterable[DensityMatrix], require_separating: bool = False):
        members = tuple(members)
        if not members:
            raise ValidationError("state family must be non-empty")
        _check_same_dim(*(m.rho for m in members))
        object.__setattr__(self, "members", members)
        if require_separating and not self.separating:
            raise ValidationError("state family is not separating (sum of densities is singular)")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        return self.members[0].n

    @property
    def weight_matrix(self) -> np.ndarray:
        """Sum of the member densities; the family semi-norm is the tr(W x* x) form."""
        return sum((m.rho for m in self.members), np.zeros((self.n, self.n), dtype=complex))

    @property
    def separating(self) -> bool:
        return bool(eigh(self.weight_matrix)[0][-1] > DEFAULT_TOLERANCES.faithful)

    def averaged(self) -> DensityMatrix:
        return DensityMatrix(self.weight_matrix / len(self))

    def subfamily(self, indices: Iterable[int]) -> "StateFamily":
        return StateFamily(self.members[i] for i in indices)


# ---------------------------------------------------------------------------
# inner products and semi-norms
# ---------------------------------------------------------------------------


def frobenius_inner(a, b) -> complex:
    """``tr(b* a)``: linear in ``a``, conjugate-linear in ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_dim(a, b)
    return complex(np.vdot(b, a))


def weighted_sq_norm(x: np.ndarray, weight: np.ndarray) -> float:
    """``tr(W x* x)`` for a positive semidefinite weight W (not necessarily trace one)."""
    val = float(np.real(np.vdot(x, x @ weight)))
    return max(val, 0.0)


def seminorm2(x, psi: DensityMatrix) -> float:
    x = np.asarray(x)
    _check_same_dim(x, psi.rho)
    return float(np.sqrt(weighted_sq_norm(x, psi.rho)))


def seminorm2_family(x, family: StateFamily) -> float:
    if len(family) == 0:
        raise ValidationError("empty state family")
    x = np.asarray(x)
    _check_same_dim(x, family.members[0].rho)
    return float(np.sqrt(sum(weighted_sq_norm(x, m.rho) for m in family.members)))


# ---------------------------------------------------------------------------
# factorizations
# ---------------------------------------------------------------------------

_MAX_SWEEPS = 60
_JACOBI_REL_TOL = 1e-15


def eigh(h, max_sweeps: int = _MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi.

    Returns eigenvalues sorted descending (stable for ties) and the unitary
    whose columns are the matching eigenvectors, so ``h = V diag(w) V*``.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    a, v, _, off = _jacobi.jacobi_eigh(h, max_sweeps, _JACOBI_REL_TOL)
    scale = 1.0 + np.linalg.norm(h)
    if off > 1e-10 * scale:
        raise ConvergenceError("Jacobi eigensolver did not converge", off)
    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def _complete_columns(u: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Replace the columns not flagged in ``keep`` with an orthonormal completion."""
    n = u.shape[0]
    basis = [u[:, j] for j in range(u.shape[1]) if keep[j]]
    fill = []
    for e in np.eye(n, dtype=complex):
        if len(basis) + len(fill) == n:
            break
        vec = e.copy()
        for _ in range(2):
            for b in basis + fill:
                vec = vec - np.vdot(b, vec) * b
        norm = np.linalg.norm(vec)
        if norm > 1e-8:
            fill.append(vec / norm)
    out = u.copy()
    it = iter(fill)
    for j in range(u.shape[1]):
        if not keep[j]:
            out[:, j] = next(it)
    return out


def svd(a, max_sweeps: int = _MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``a = U diag(s) V*`` with ``s`` descending, via one-sided Jacobi."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    w, v, _, converged = _jacobi.jacobi_svd(a, max_sweeps, _JACOBI_REL_TOL)
    s = np.linalg.norm(w, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    w = w[:, order]
    v = v[:, order]
    smax = s[0] if s.size else 0.0
    keep = s > 1e-13 * max(smax, 1e-300)
    if smax == 0.0:
        keep[:] = False
    u = np.zeros_like(w)
    u[:, keep] = w[:, keep] / s[keep]
    if not np.all(keep):
        u = _complete_columns(u, keep)
    residual = np.linalg.norm(u @ (s[:, None] * v.conj().T) - a)
    if not converged and residual > 1e-8 * (1.0 + np.linalg.norm(a)):
        raise ConvergenceError("one-sided Jacobi SVD did not converge", residual)
    return u, s, v


def expm_skew(k, tol: float = DEFAULT_TOLERANCES.skew) -> np.ndarray:
    """Exponential of a skew-Hermitian matrix (a unitary), via the spectrum of -ik."""
    k = np.asarray(k, dtype=np.complex128)
    if np.linalg.norm(k + k.conj().T) > tol * (1.0 + np.linalg.norm(k)):
        raise ValidationError("expm_skew requires a skew-Hermitian argument")
    h = -1j * k
    w, v = eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(1j * w)) @ v.conj().T


def positive_part(h, r: float) -> np.ndarray:
    """``(h - r)_+`` by functional calculus."""
    w, v = eigh(h)
    return (v * np.maximum(w - r, 0.0)) @ v.conj().T


def spectrum(h) -> np.ndarray:
    return eigh(h)[0]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix, phases of diag(R) fixed."""
    if n < 1:
        raise ValidationError("n must be positive")
    rng = _rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z + z.conj().T)


def random_complex(n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_density(n: int, seed=None, rank: int | None = None) -> np.ndarray:
    rng = _rng(seed)
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_contraction(n: int, seed=None) -> np.ndarray:
    """Gaussian matrix with singular values clipped to the unit ball."""
    u, s, v = svd(random_complex(n, seed))
    return (u * np.minimum(s, 1.0)) @ v.conj().T


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    return {
        "n": int(a.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        n = int(obj["n"])
        raw = np.asarray(obj["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix JSON: {exc}") from exc
    if raw.ndim != 3 or raw.shape != (n, n, 2):
        raise ValidationError(f"matrix JSON entries must have shape ({n}, {n}, 2), got {raw.shape}")
    return as_matrix(raw[..., 0] + 1j * raw[..., 1])


def tolerances_or_default(tol: Tolerances | None) -> Tolerances:
    return DEFAULT_TOLERANCES if tol is None else tol
