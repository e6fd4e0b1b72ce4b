"""Moment relaxations, their SDP solves and SDPA interchange."""
from .builders import (
    appendix_matrices,
    build_diagonal_relaxation,
    build_diagonal_sdp,
    build_gpm_fixed_y,
    build_private_relaxation,
    diagonal_variables,
    relaxation_order,
)
from .certify import Certificate, lower_bound
from .polynomial import Poly, lexicographic_words, monomials
from .program import Localizing, MomentBlock, MomentConstraint, MomentError, MomentProgram
from .rank import ADMISSIBLE, NOT_RANK1, VIOLATED, TmsCheck, check_rank1, round_to_rank1
from .sdpa import SdpaProblem, export_sdpa, import_sdpa, to_sdpa, write_sdpa
from .solver import SdpInfeasibleError, SdpResult, diagonal_point, solve_moment_sdp
from .univariate import UnivariateResult, two_link_univariate_sdp

__all__ = [
    "ADMISSIBLE",
    "NOT_RANK1",
    "VIOLATED",
    "Certificate",
    "Localizing",
    "MomentBlock",
    "MomentConstraint",
    "MomentError",
    "MomentProgram",
    "Poly",
    "SdpInfeasibleError",
    "SdpResult",
    "SdpaProblem",
    "TmsCheck",
    "UnivariateResult",
    "appendix_matrices",
    "build_diagonal_relaxation",
    "build_diagonal_sdp",
    "build_gpm_fixed_y",
    "build_private_relaxation",
    "check_rank1",
    "diagonal_point",
    "diagonal_variables",
    "export_sdpa",
    "import_sdpa",
    "lexicographic_words",
    "lower_bound",
    "monomials",
    "relaxation_order",
    "round_to_rank1",
    "solve_moment_sdp",
    "to_sdpa",
    "two_link_univariate_sdp",
    "write_sdpa",
]
