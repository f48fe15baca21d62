"""Elliptic-elliptic rotopulsators on Clifford tori.

Body ``i`` sits at ``(r cos(theta + a_i), r sin(theta + a_i),
rho cos(phi + b_i), rho sin(phi + b_i))`` with ``r^2 + rho^2 = 1``.  The
shape constants ``a_i, b_i`` and masses are fixed; the fiber variables
``r, theta, phi`` evolve.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import EPS_SING, SystemState
from .errors import BadParameter, CoincidentBodies, CriterionViolated, FiberSingular, SingularDenominator
from .integrators import StepOptions, march, sample_times

TWO_PI = 2.0 * np.pi
EPS_R = 1e-6


def normalize_angles(angles):
    a = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    a[a >= TWO_PI] = 0.0  # np.mod can round up to exactly 2*pi
    return a


@dataclass(frozen=True, eq=False)
class RotopulsatorShape:
    alphas: np.ndarray
    betas: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        alphas = normalize_angles(self.alphas).reshape(-1)
        betas = normalize_angles(self.betas).reshape(-1)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        n = len(alphas)
        if n < 2:
            raise BadParameter("a rotopulsator needs at least two bodies")
        if len(betas) != n or len(masses) != n:
            raise BadParameter(f"alphas, betas and masses must all have length {n}")
        if not (np.all(np.isfinite(alphas)) and np.all(np.isfinite(betas))):
            raise BadParameter("angles must be finite")
        if np.any(~np.isfinite(masses)) or np.any(masses <= 0):
            raise BadParameter("masses must be positive")
        i, j = np.triu_indices(n, 1)
        same = (alphas[i] == alphas[j]) & (betas[i] == betas[j])
        if np.any(same):
            k = int(np.argmax(same))
            raise CoincidentBodies(f"bodies {i[k]} and {j[k]} share both angles", pair=(int(i[k]), int(j[k])))
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def equal_masses(cls, alphas, betas=None):
        """Shape with every mass ``1/n``."""
        n = len(alphas)
        if betas is None:
            betas = np.zeros(n)
        return cls(alphas, betas, np.full(n, 1.0 / n))

    @classmethod
    def regular(cls, n, beta_step=0, alpha0=0.0, beta0=0.0):
        """Regular n-gon in the first plane, ``b_i = beta0 + 2*pi*beta_step*i/n``."""
        idx = np.arange(n)
        return cls.equal_masses(alpha0 + TWO_PI * idx / n, beta0 + TWO_PI * beta_step * idx / n)

    @property
    def n(self):
        return len(self.alphas)

    def with_masses(self, masses):
        return replace(self, masses=masses)

    def cos_diffs(self):
        """Matrices ``cos(a_j - a_i)`` and ``cos(b_j - b_i)`` indexed ``[i, j]``."""
        da = self.alphas[None, :] - self.alphas[:, None]
        db = self.betas[None, :] - self.betas[:, None]
        return np.cos(da), np.cos(db)

    def sin_diffs(self):
        da = self.alphas[None, :] - self.alphas[:, None]
        db = self.betas[None, :] - self.betas[:, None]
        return np.sin(da), np.sin(db)


@dataclass(frozen=True)
class FiberState:
    """Reduced coordinates; ``c_theta = r^2 theta'`` and ``c_phi = rho^2 phi'`` are conserved."""

    r: float
    rdot: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    c_theta: float = 0.0
    c_phi: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise BadParameter(f"r must lie in (0, 1), got {self.r}")

    @property
    def rho(self):
        return float(np.sqrt(1.0 - self.r * self.r))

    @property
    def rhodot(self):
        return -self.r * self.rdot / self.rho

    @property
    def thetadot(self):
        return self.c_theta / self.r**2

    @property
    def phidot(self):
        return self.c_phi / self.rho**2


def embed_positions(shape, r, theta, phi):
    rho = np.sqrt(1.0 - r * r)
    ta = theta + shape.alphas
    pb = phi + shape.betas
    return np.stack([r * np.cos(ta), r * np.sin(ta), rho * np.cos(pb), rho * np.sin(pb)], axis=-1)


def embed(shape, fiber, t=0.0, eps_sing=EPS_SING):
    """Full ``SystemState`` of the rotopulsator described by ``shape`` and ``fiber``."""
    r, rho = fiber.r, fiber.rho
    rdot, rhodot = fiber.rdot, fiber.rhodot
    wt, wp = fiber.thetadot, fiber.phidot
    ta = fiber.theta + shape.alphas
    pb = fiber.phi + shape.betas
    ca, sa, cb, sb = np.cos(ta), np.sin(ta), np.cos(pb), np.sin(pb)
    q = np.stack([r * ca, r * sa, rho * cb, rho * sb], axis=1)
    v = np.stack(
        [
            rdot * ca - r * wt * sa,
            rdot * sa + r * wt * ca,
            rhodot * cb - rho * wp * sb,
            rhodot * sb + rho * wp * cb,
        ],
        axis=1,
    )
    n = shape.n
    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(q[i] - q[j])) <= 1e-14:
                raise CoincidentBodies(f"bodies {i} and {j} coincide", pair=(i, j))
            g = float(q[i] @ q[j])
            if 1.0 - g * g <= eps_sing:
                raise SingularDenominator(f"bodies {i} and {j} are antipodal", pair=(i, j))
    return SystemState(shape.masses, q, v, sigma=1, t=t)


def criterion_denominators(shape, r):
    """``D_ij(r) = 1 - (cos db + r^2 (cos da - cos db))^2``; diagonal set to ``inf``."""
    ca, cb = shape.cos_diffs()
    D = 1.0 - (cb + r * r * (ca - cb)) ** 2
    np.fill_diagonal(D, np.inf)
    return D


def _check_denominators(D, eps_sing):
    i, j = np.unravel_index(np.argmin(D), D.shape)
    if D[i, j] < eps_sing:
        raise SingularDenominator(
            f"criterion denominator for pair ({i}, {j}) is {D[i, j]:.3e}", pair=(int(i), int(j))
        )


@dataclass
class CriterionReport:
    r: float
    res1: np.ndarray
    res2: np.ndarray
    delta_rhs: np.ndarray

    @property
    def spread(self):
        return float(self.delta_rhs.max() - self.delta_rhs.min())

    @property
    def max_residual(self):
        return float(max(np.abs(self.res1).max(), np.abs(self.res2).max(), self.spread))

    def to_dict(self):
        return {
            "r": self.r,
            "res1": self.res1.tolist(),
            "res2": self.res2.tolist(),
            "delta_rhs": self.delta_rhs.tolist(),
            "spread": self.spread,
        }


def criterion_residuals(shape, r, eps_sing=EPS_SING):
    """Evaluate the three existence identities of the criterion at ``r``.

    ``res1`` and ``res2`` must vanish and ``delta_rhs`` must be the same for
    every body for a rotopulsator to pass through radius ``r``.
    """
    if not 0.0 < r < 1.0:
        raise BadParameter(f"r must lie in (0, 1), got {r}")
    D = criterion_denominators(shape, r)
    _check_denominators(D, eps_sing)
    ca, cb = shape.cos_diffs()
    sa, sb = shape.sin_diffs()
    w = shape.masses[None, :] / D**1.5
    res1 = np.sum(w * sa, axis=1)
    res2 = np.sum(w * sb, axis=1)
    delta = r * (1.0 - r * r) * np.sum(w * (ca - cb), axis=1)
    return CriterionReport(float(r), res1, res2, delta)


def _check_fiber_r(r, eps_r):
    if r <= eps_r or r >= 1.0 - eps_r:
        raise FiberSingular(f"r = {r:.9g} left the admissible band ({eps_r}, {1 - eps_r})")


def reduced_rhs(shape, fiber, eps_r=EPS_R, eps_sing=EPS_SING, report=None):
    """Return ``(rdot, rddot, thetadot, phidot)`` for the reduced system.

    ``rddot`` is solved from the delta identity using body 0's value; the
    other bodies' values are not averaged in.
    """
    r = fiber.r
    _check_fiber_r(r, eps_r)
    report = report or criterion_residuals(shape, r, eps_sing)
    rho2 = 1.0 - r * r
    wt = fiber.c_theta / (r * r)
    wp = fiber.c_phi / rho2
    rddot = report.delta_rhs[0] - r * rho2 * (wp * wp - wt * wt) - r * fiber.rdot**2 / rho2
    return fiber.rdot, float(rddot), wt, wp


@dataclass
class ReducedTrajectory:
    t: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    c_theta: float
    c_phi: float
    delta_spread: np.ndarray
    res1_max: np.ndarray
    res2_max: np.ndarray
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for k in range(len(self.t)):
            yield float(self.t[k]), self.fiber(k)

    def fiber(self, k):
        return FiberState(
            float(self.r[k]), float(self.rdot[k]), float(self.theta[k]), float(self.phi[k]), self.c_theta, self.c_phi
        )

    @property
    def max_spread(self):
        return float(self.delta_spread.max())

    def positions(self, shape):
        """Embedded positions for every sample, shape ``(samples, n, 4)``."""
        return np.array([embed_positions(shape, r, th, ph) for r, th, ph in zip(self.r, self.theta, self.phi)])


@dataclass
class ReducedOptions(StepOptions):
    rtol: float = 1e-12
    atol: float = 1e-14
    eps_r: float = EPS_R
    eps_sing: float = EPS_SING
    criterion_tol: float = 1e-9


def integrate_reduced(shape, fiber0, dt, t_end, opts=None, t0=0.0):
    """Integrate ``(r, rdot, theta, phi)`` with the conserved ``c_theta, c_phi`` held fixed.

    The criterion is re-checked after every accepted step; any residual above
    ``criterion_tol * sum(masses)`` raises ``CriterionViolated``.
    """
    opts = opts or ReducedOptions()
    c_theta, c_phi = fiber0.c_theta, fiber0.c_phi
    limit = opts.criterion_tol * float(shape.masses.sum())

    def evaluate(r):
        _check_fiber_r(r, opts.eps_r)
        rep = criterion_residuals(shape, r, opts.eps_sing)
        worst = rep.max_residual
        if worst > limit:
            raise CriterionViolated(
                f"criterion residual {worst:.3e} exceeds {limit:.1e} at r = {r:.9g}; "
                "the shape does not admit a rotopulsator"
            )
        return rep

    def rhs(t, y):
        fiber = FiberState(y[0], y[1], y[2], y[3], c_theta, c_phi)
        return np.array(reduced_rhs(shape, fiber, opts.eps_r, opts.eps_sing))

    def after_step(t, y):
        evaluate(y[0])
        return y

    diagnostics = []

    def record(y):
        rep = evaluate(y[0])
        diagnostics.append((rep.spread, np.abs(rep.res1).max(), np.abs(rep.res2).max()))

    y0 = np.array([fiber0.r, fiber0.rdot, fiber0.theta, fiber0.phi])
    record(y0)
    times = sample_times(t0, dt, t_end)
    ys = march(rhs, y0, times, opts, after_step, lambda k, y: record(y))
    diag = np.array(diagnostics)
    return ReducedTrajectory(
        t=times,
        r=ys[:, 0],
        rdot=ys[:, 1],
        theta=ys[:, 2],
        phi=ys[:, 3],
        c_theta=c_theta,
        c_phi=c_phi,
        delta_spread=diag[:, 0],
        res1_max=diag[:, 1],
        res2_max=diag[:, 2],
    )
