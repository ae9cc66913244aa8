"""Central tolerance record and runtime knobs."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module.

    Relative thresholds are multiplied by ``1 + ||input||_F`` (or by ``n`` for
    unitarity) at the point of use.
    """

    hermitian: float = 1e-10
    unitary: float = 1e-8
    density: float = 1e-10
    faithful: float = 1e-10
    skew: float = 1e-10
    reconstruction: float = 1e-8
    certificate: float = 1e-8
    weight_sum: float = 1e-8
    majorization: float = 1e-8
    doubly_stochastic_entry: float = 1e-10
    doubly_stochastic_sum: float = 1e-8
    birkhoff_support: float = 1e-10
    hull_inside: float = 1e-6
    strict_margin: float = 1e-10
    duel: float = 1e-10

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def thread_cap() -> int:
    """Upper bound on internal worker threads (``ORBITHULL_THREADS``, default 1)."""
    raw = os.environ.get("ORBITHULL_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)
