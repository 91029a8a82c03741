"""Discrete singular value polyconvexity toolkit for isotropic energies."""

from .certify import Certificate, is_svpc, steigmann_check, supporting_hyperplane
from .conjugate import (
    ConjugationConfig,
    adaptive_beta_grid,
    auto_beta_grid,
    cross_check,
    lf_biconjugate,
    lf_conjugate,
    lp_biconjugate_at,
    sv_conjugate,
    sv_dual_conjugate,
    sv_envelope,
)
from .gridfn import GridFunction, GridSpec
from .lifting import lift
from .matkit import signed_svd
from .models import catalog, get_model
from .symmetry import enumerate_group, lambda_support

__version__ = "0.1.0"

__all__ = [
    "Certificate", "is_svpc", "steigmann_check", "supporting_hyperplane",
    "ConjugationConfig", "adaptive_beta_grid", "auto_beta_grid", "cross_check",
    "lf_biconjugate", "lf_conjugate", "lp_biconjugate_at", "sv_conjugate",
    "sv_dual_conjugate", "sv_envelope", "GridFunction", "GridSpec", "lift",
    "signed_svd", "catalog", "get_model", "enumerate_group", "lambda_support",
]
