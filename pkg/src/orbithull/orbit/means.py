"""Contractions as averages of unitaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..matcore import ValidationError, as_matrix, svd


@dataclass(frozen=True, eq=False)
class UnitaryMean:
    """``a = mean(unitaries)``.

    ``strict_bound`` records whether ``||a|| < 1 - 2/n_terms`` held;
    ``fallback`` is set when the requested odd count could not be built and
    an even decomposition was returned instead.
    """

    unitaries: tuple[np.ndarray, ...]
    strict_bound: bool
    fallback: bool = False

    def mean(self) -> np.ndarray:
        return sum(self.unitaries) / len(self.unitaries)


def russo_dye_mean2(a, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Two unitaries with ``a = (U1 + U2) / 2`` for a contraction ``a``.

    With ``a = U diag(s) V*`` and ``s = cos(theta)``:
    ``U1, U2 = U diag(exp(+-i theta)) V*``.
    """
    a = np.asarray(as_matrix(a))
    u, s, v = svd(a)
    if s[0] > 1.0 + tol:
        raise ValidationError(f"operator norm {s[0]:.12g} exceeds 1")
    theta = np.arccos(np.clip(s, 0.0, 1.0))
    vh = v.conj().T
    u1 = (u * np.exp(1j * theta)) @ vh
    u2 = (u * np.exp(-1j * theta)) @ vh
    return u1, u2


def kadison_pedersen_mean(a, n_terms: int, tol: float = 1e-10) -> UnitaryMean:
    """``n_terms`` unitaries averaging to the contraction ``a``.

    Even counts repeat the two-term decomposition. Odd counts first peel off
    the polar unitary W of ``a``: ``a = W/n + (n-1)/n * b`` where
    ``b = (n a - W)/(n-1)`` is again a contraction, then recurse on ``b``.
    """
    if n_terms < 2:
        raise ValueError("n_terms must be >= 2")
    a = np.asarray(as_matrix(a))
    u, s, v = svd(a)
    if s[0] > 1.0 + tol:
        raise ValidationError(f"operator norm {s[0]:.12g} exceeds 1")
    strict = bool(s[0] < 1.0 - 2.0 / n_terms)
    if n_terms % 2 == 0:
        u1, u2 = russo_dye_mean2(a, tol)
        return UnitaryMean(tuple([u1, u2] * (n_terms // 2)), strict)

    polar = u @ v.conj().T
    b = (n_terms * a - polar) / (n_terms - 1)
    if svd(b)[1][0] > 1.0 + tol:
        fallback = kadison_pedersen_mean(a, n_terms + 1, tol)
        return UnitaryMean(fallback.unitaries, strict, fallback=True)
    rest = kadison_pedersen_mean(b, n_terms - 1, tol)
    return UnitaryMean((polar,) + rest.unitaries, strict, fallback=rest.fallback)
