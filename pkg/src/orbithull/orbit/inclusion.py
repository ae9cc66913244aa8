"""Support-level check of conv(U B U*) <= conv(u B u*, ||u|| <= 1) <= conv(U B V)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..matcore import DimensionError, ValidationError, as_matrix
from .kinds import Kind, OrbitCertificate, OrbitKind
from .support import LmoOptions, lmo, support_riemannian


@dataclass
class ChainRow:
    h_unitary: float
    h_contraction: float
    h_twosided: float
    unitary_exact: bool
    hard_violation: bool
    advisory: bool


@dataclass
class InclusionReport:
    rows: list[ChainRow] = field(default_factory=list)
    tol: float = 1e-8

    @property
    def hard_violations(self) -> list[int]:
        return [i for i, r in enumerate(self.rows) if r.hard_violation]

    @property
    def advisories(self) -> list[int]:
        return [i for i, r in enumerate(self.rows) if r.advisory]

    @property
    def ok(self) -> bool:
        return not self.hard_violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "tol": self.tol,
            "hard_violations": self.hard_violations,
            "advisories": self.advisories,
            "rows": [
                {
                    "h_unitary": r.h_unitary,
                    "h_contraction": r.h_contraction,
                    "h_twosided": r.h_twosided,
                    "unitary_exact": r.unitary_exact,
                }
                for r in self.rows
            ],
        }


def inclusion_chain_check(
    B, directions: Sequence, opts: LmoOptions | None = None, tol: float = 1e-8
) -> InclusionReport:
    """Evaluate (h_unitary, h_contraction, h_twosided) per direction.

    The two-sided value is exact. The contraction value is an ascent lower
    bound, warm-started at the unitary maximizer (unitaries are contractions),
    so only a lower bound exceeding an exact value counts as a hard violation.
    """
    B = np.asarray(as_matrix(B))
    opts = opts or LmoOptions(restarts=4)
    conj = OrbitKind(Kind.CONJUGATION, B)
    contr = OrbitKind(Kind.CONTRACTION, B)
    two = OrbitKind(Kind.TWO_SIDED, B)
    report = InclusionReport(tol=tol)
    for C in directions:
        C = np.asarray(C, dtype=complex)
        if C.shape != B.shape:
            raise DimensionError(f"direction shape {C.shape} != base shape {B.shape}")
        scale = tol * (1.0 + np.linalg.norm(C) * np.linalg.norm(B))
        h1 = lmo(conj, C, opts)
        h2 = support_riemannian(
            C, B, Kind.CONTRACTION, opts.restarts, opts.seed, opts.max_iter, init=(h1.left, h1.right)
        )
        h3 = lmo(two, C, opts)
        # h1 and h2 are achieved by explicit orbit points, so both are valid lower bounds
        hard = h2.value > h3.value + scale or h1.value > h3.value + scale
        advisory = h1.value > h2.value + scale
        report.rows.append(ChainRow(h1.value, h2.value, h3.value, h1.exact, bool(hard), bool(advisory)))
    return report


def contraction_scaling_check(cert: OrbitCertificate, t: float) -> OrbitCertificate:
    """Certificate for ``t * target`` obtained by scaling each contraction by sqrt(t)."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError("t must lie in [0, 1]")
    if cert.kind is Kind.TWO_SIDED:
        raise ValidationError("scaling applies to conjugation-type certificates")
    r = np.sqrt(t)
    return OrbitCertificate(
        Kind.CONTRACTION,
        cert.weights,
        tuple(r * l for l in cert.lefts),
        tuple(r * rt for rt in cert.rights),
        cert.base,
        t * cert.target,
    )
