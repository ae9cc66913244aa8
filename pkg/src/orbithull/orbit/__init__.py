"""Convex geometry of the conjugation, contraction and two-sided orbits of a matrix."""

from .kinds import Kind, OrbitCertificate, OrbitKind, SupportValue
from .support import (
    LmoOptions,
    lmo,
    support_conjugation_hermitian,
    support_riemannian,
    support_twosided,
)
from .frank_wolfe import INSIDE, OUTSIDE, UNDECIDED, MembershipVerdict, frank_wolfe_project
from .inclusion import InclusionReport, contraction_scaling_check, inclusion_chain_check
from .means import UnitaryMean, kadison_pedersen_mean, russo_dye_mean2
