"""Numerical laboratory for elliptic-elliptic rotopulsators of the curved n-body problem on S^3."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    cancellation_signature,
    lemma1_residuals,
    lemma4_residuals,
    polygon_report,
    theorem_verdict,
    ultimate_identity_check,
)
from .dynamics import Body, IntegrateOptions, SystemState, acceleration, angular_momentum, integrate  # noqa: E402
from .manifold import on_clifford_torus, project, rotation2, sigma_inner, wedge  # noqa: E402
from .rotopulse import (  # noqa: E402
    FiberState,
    RotopulsatorShape,
    criterion_residuals,
    embed,
    integrate_reduced,
    reduced_rhs,
)
from .solver import build_constraint_matrix, solve_masses  # noqa: E402
