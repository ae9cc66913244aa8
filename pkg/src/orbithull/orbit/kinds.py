"""Orbit descriptors, support values and orbit certificates."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..majorization import MixingCertificate
from ..matcore import (
    ValidationError,
    as_matrix,
    is_hermitian,
    matrix_from_json,
    matrix_to_json,
    op_norm,
    unitarity_defect,
)


class Kind(str, enum.Enum):
    CONJUGATION = "conj"  # {U B U* : U unitary}
    CONTRACTION = "contr"  # {u B u* : ||u|| <= 1}
    TWO_SIDED = "twosided"  # {U B V : U, V unitary}

    @classmethod
    def parse(cls, value) -> "Kind":
        if isinstance(value, Kind):
            return value
        aliases = {
            "conj": cls.CONJUGATION,
            "conjugation": cls.CONJUGATION,
            "unitary_conjugation": cls.CONJUGATION,
            "contr": cls.CONTRACTION,
            "contraction": cls.CONTRACTION,
            "contraction_conjugation": cls.CONTRACTION,
            "twosided": cls.TWO_SIDED,
            "two_sided": cls.TWO_SIDED,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValidationError(f"unknown orbit kind {value!r}") from None


@dataclass(frozen=True, eq=False)
class OrbitKind:
    kind: Kind
    base: np.ndarray
    hermitian_base: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        object.__setattr__(self, "base", as_matrix(self.base))
        object.__setattr__(self, "hermitian_base", is_hermitian(self.base))

    @property
    def n(self) -> int:
        return self.base.shape[0]

    def point(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        return left @ self.base @ right

    def contains_parameters(self, left, right, tol: float = 1e-8) -> bool:
        """Check that (left, right) parametrize an orbit point of this kind."""
        n = self.n
        if self.kind is Kind.TWO_SIDED:
            return unitarity_defect(left) <= tol * n and unitarity_defect(right) <= tol * n
        if np.linalg.norm(right - left.conj().T) > tol * n:
            return False
        if self.kind is Kind.CONJUGATION:
            return unitarity_defect(left) <= tol * n
        return op_norm(left) <= 1.0 + tol


@dataclass(frozen=True, eq=False)
class SupportValue:
    """``value = Re <direction, point>`` at an orbit point ``point = left B right``."""

    value: float
    point: np.ndarray
    left: np.ndarray
    right: np.ndarray
    exact: bool


@dataclass(frozen=True, eq=False)
class OrbitCertificate:
    """``target ~ sum_i weights[i] * lefts[i] @ base @ rights[i]``."""

    kind: Kind
    weights: tuple[float, ...]
    lefts: tuple[np.ndarray, ...]
    rights: tuple[np.ndarray, ...]
    base: np.ndarray
    target: np.ndarray

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.base.shape, dtype=complex)
        for w, l, r in zip(self.weights, self.lefts, self.rights):
            out = out + w * (l @ self.base @ r)
        return out

    @property
    def residual(self) -> float:
        return float(np.linalg.norm(self.target - self.reconstruct()))

    def parameters_valid(self, tol: float = 1e-8) -> bool:
        orbit = OrbitKind(self.kind, self.base)
        return all(orbit.contains_parameters(l, r, tol) for l, r in zip(self.lefts, self.rights))

    def as_mixing_certificate(self) -> MixingCertificate:
        if self.kind is not Kind.CONJUGATION:
            raise ValidationError("only conjugation-orbit certificates are unitary mixings")
        return MixingCertificate(self.weights, self.lefts, self.base, self.target)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind.value,
            "weights": [float(w) for w in self.weights],
            "unitaries": [matrix_to_json(l) for l in self.lefts],
            "right": None,
            "base": matrix_to_json(self.base),
            "target": matrix_to_json(self.target),
            "residual": self.residual,
        }
        if self.kind is Kind.TWO_SIDED:
            out["right"] = [matrix_to_json(r) for r in self.rights]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "OrbitCertificate":
        kind = Kind.parse(obj.get("kind", "conj"))
        lefts = tuple(matrix_from_json(m) for m in obj["unitaries"])
        if kind is Kind.TWO_SIDED:
            rights = tuple(matrix_from_json(m) for m in obj["right"])
        else:
            rights = tuple(l.conj().T for l in lefts)
        return cls(
            kind,
            tuple(float(w) for w in obj["weights"]),
            lefts,
            rights,
            matrix_from_json(obj["base"]),
            matrix_from_json(obj["target"]),
        )
