"""Positive masses that make the rotopulsator criterion hold for every ``r``.

The three criterion identities are linear in the masses, so sampling them on
a grid of radii gives a homogeneous linear system ``A m = 0``.  Masses are
searched on the simplex ``sum(m) = 1, m >= mass_floor`` by non-negative
least squares with a heavily weighted normalisation row.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .analysis import chebyshev_grid
from .dynamics import EPS_SING
from .errors import BadParameter, SingularDenominator
from .rotopulse import normalize_angles

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
UNDERDETERMINED = "Underdetermined"


@dataclass
class SolverOptions:
    feas_tol: float = 1e-10
    mass_floor: float = 1e-8
    rank_tol: float = 1e-8
    r_grid: object = None
    eps_sing: float = EPS_SING


@dataclass
class FeasibilityResult:
    status: str
    masses: np.ndarray
    residual_norm: float
    grid: list
    max_violation: float
    rank: int
    null_dim: int
    warning: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.status in (FEASIBLE, UNDERDETERMINED)

    def to_dict(self):
        d = {
            "status": self.status,
            "masses": self.masses.tolist() if self.masses is not None else None,
            "residual_norm": self.residual_norm,
            "grid": list(self.grid),
            "max_violation": self.max_violation,
            "rank": self.rank,
            "null_dim": self.null_dim,
        }
        if self.warning:
            d["warning"] = self.warning
        return d


def default_grid(count=7):
    return chebyshev_grid(count, 0.1, 0.9)


def _pair_blocks(alphas, betas, r, eps_sing):
    da = alphas[None, :] - alphas[:, None]
    db = betas[None, :] - betas[:, None]
    ca, cb = np.cos(da), np.cos(db)
    D = 1.0 - (cb + r * r * (ca - cb)) ** 2
    np.fill_diagonal(D, np.inf)
    i, j = np.unravel_index(np.argmin(D), D.shape)
    if D[i, j] < eps_sing:
        raise SingularDenominator(
            f"criterion denominator for pair ({i}, {j}) is {D[i, j]:.3e} at r = {r:.6g}", pair=(int(i), int(j))
        )
    w = D**-1.5  # zero on the diagonal
    return w * np.sin(da), w * np.sin(db), r * (1.0 - r * r) * w * (ca - cb)


def build_constraint_matrix(alphas, betas, r_grid, eps_sing=EPS_SING):
    """Rows of coefficients of ``m_j`` in the sampled criterion.

    For every radius: ``n`` rows for the first sine identity, ``n`` for the
    second, and ``n - 1`` rows for ``delta_i - delta_0``.  Columns index the
    masses.
    """
    alphas = normalize_angles(alphas)
    betas = normalize_angles(betas)
    r_grid = np.asarray(r_grid, dtype=float).reshape(-1)
    if len(r_grid) < 3:
        raise BadParameter("the r grid needs at least 3 points")
    if np.any((r_grid <= 0) | (r_grid >= 1)):
        raise BadParameter("r grid points must lie in (0, 1)")
    rows = []
    for r in r_grid:
        s_a, s_b, delta = _pair_blocks(alphas, betas, r, eps_sing)
        rows.extend([s_a, s_b, delta[1:] - delta[0]])
    return np.vstack(rows)


def _simplex_lstsq(A, floor):
    """Minimise ``||A m||`` over ``sum(m) = 1, m >= floor``."""
    n = A.shape[1]
    scale = max(1.0, float(np.abs(A).max()))
    weight = 1e4 * scale
    budget = 1.0 - n * floor
    rhs = np.concatenate([-floor * A.sum(axis=1), [weight * budget]])
    M = np.vstack([A, weight * np.ones(n)])
    w, _ = nnls(M, rhs, maxiter=50 * n)
    w *= budget / w.sum()
    return floor + w


def _null_space(A, rank_tol):
    n = A.shape[1]
    if not np.any(A):
        return 0, np.eye(n)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s >= rank_tol * s[0]))
    return rank, vt[rank:].T


def solve_masses(alphas, betas, opts=None):
    """Decide whether positive masses exist for the angles and return them.

    Feasible when the smallest achievable ``||A m||_inf`` is at most
    ``feas_tol``; Underdetermined when in addition the null space of ``A``
    has dimension two or more; Infeasible otherwise.  Results between
    ``feas_tol`` and ``10 * feas_tol`` are reported Infeasible with a warning.
    """
    opts = opts or SolverOptions()
    grid = default_grid() if opts.r_grid is None else np.asarray(opts.r_grid, dtype=float)
    # each denominator mixes ca and cb convexly in r^2, so it vanishes only
    # for antipodal pairs, whatever the grid
    A = build_constraint_matrix(alphas, betas, grid, opts.eps_sing)
    n = A.shape[1]
    rank, null = _null_space(A, opts.rank_tol)
    null_dim = null.shape[1]
    masses = _simplex_lstsq(A, opts.mass_floor)
    if null_dim >= 1:
        # polish: the nnls optimum sits within round-off of the null space when
        # the shape is feasible; snap onto it if that stays on the simplex
        target = masses if null_dim == 1 else np.full(n, 1.0 / n)
        cand = null @ (null.T @ target)
        if cand.sum() > 0:
            cand = cand / cand.sum()
            if cand.min() > opts.mass_floor and np.abs(A @ cand).max() <= np.abs(A @ masses).max():
                masses = cand
    masses = masses / masses.sum()
    violation = float(np.abs(A @ masses).max())
    warning = ""
    if violation <= opts.feas_tol:
        status = UNDERDETERMINED if null_dim >= 2 else FEASIBLE
    else:
        status = INFEASIBLE
        if violation <= 10 * opts.feas_tol:
            warning = "inconclusive: residual between feas_tol and 10*feas_tol"
    return FeasibilityResult(
        status=status,
        masses=masses,
        residual_norm=violation,
        grid=[float(x) for x in grid],
        max_violation=violation,
        rank=rank,
        null_dim=null_dim,
        warning=warning,
    )
