"""Default numeric tolerances, shared package-wide.

Functions that the public contract says are tolerance-configurable take an
explicit argument defaulting to one of these.
"""

EPS_LORENTZ = 1e-9
"""Max residual allowed in U^T J U - J and in the orthochronicity check."""

EPS_GEO = 1e-9
"""Geometric identities: zero-sum conventions, |c_ij|^2 - 1 - k_ij^2, |p| - 1."""

EPS_MEM = 1e-7
"""Strict-dominance margin for membership in interface / triple-point tests."""

TIE_TOL = 1e-9
"""Runner-up margin below which cell assignment reports a tie."""

RANK_RTOL = 1e-10
"""Singular values below RANK_RTOL * sigma_max are treated as zero."""
