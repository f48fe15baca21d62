"""Equations of motion of the curved n-body problem and their integration."""

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, SingularConfiguration
from .integrators import StepOptions, march, sample_times
from .manifold import check_sigma, metric, project, sigma_inner, wedge

EPS_SING = 1e-10


@dataclass(frozen=True)
class Body:
    mass: float
    q: np.ndarray
    v: np.ndarray


@dataclass
class SystemState:
    """``n`` point masses on the unit sphere (or hyperboloid) at time ``t``.

    ``q`` and ``v`` are ``(n, 4)`` arrays of positions and velocities.
    """

    masses: np.ndarray
    q: np.ndarray
    v: np.ndarray
    sigma: int = 1
    t: float = 0.0

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float).reshape(-1)
        self.q = np.asarray(self.q, dtype=float).reshape(-1, 4)
        self.v = np.asarray(self.v, dtype=float).reshape(-1, 4)
        self.sigma = check_sigma(self.sigma)
        n = len(self.masses)
        if n < 2:
            raise BadParameter("need at least two bodies")
        if self.q.shape != (n, 4) or self.v.shape != (n, 4):
            raise BadParameter("positions and velocities must have shape (n, 4)")
        if np.any(self.masses <= 0):
            raise BadParameter("masses must be positive")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.v))):
            raise BadParameter("state contains non-finite components")

    @classmethod
    def from_bodies(cls, bodies, sigma=1, t=0.0):
        return cls(
            masses=[b.mass for b in bodies],
            q=[b.q for b in bodies],
            v=[b.v for b in bodies],
            sigma=sigma,
            t=t,
        )

    @property
    def n(self):
        return len(self.masses)

    @property
    def bodies(self):
        return [Body(float(m), q.copy(), v.copy()) for m, q, v in zip(self.masses, self.q, self.v)]

    def constraint_drift(self):
        """Largest violation of ``q.q = sigma`` and ``q.v = 0`` over the bodies."""
        pos = np.abs(sigma_inner(self.q, self.q, self.sigma) - self.sigma)
        tan = np.abs(sigma_inner(self.q, self.v, self.sigma))
        return float(max(pos.max(), tan.max()))

    def permuted(self, order):
        order = list(order)
        return SystemState(self.masses[order], self.q[order], self.v[order], self.sigma, self.t)


def pair_denominators(q, sigma=1):
    """Matrix of ``sigma - sigma * (q_i . q_j)^2``; the diagonal is set to ``inf``."""
    g = sigma_inner(q[:, None, :], q[None, :, :], sigma)
    den = sigma - sigma * g**2
    np.fill_diagonal(den, np.inf)
    return g, den


def check_separation(q, sigma=1, eps_sing=EPS_SING):
    _, den = pair_denominators(q, sigma)
    i, j = np.unravel_index(np.argmin(den), den.shape)
    if den[i, j] <= eps_sing:
        raise SingularConfiguration(
            f"singular configuration: bodies {i} and {j} collide or are antipodal "
            f"(sigma - sigma*(q_i.q_j)^2 = {den[i, j]:.3e})",
            pair=(int(i), int(j)),
        )


def _acceleration(masses, q, v, sigma, eps_sing):
    g, den = pair_denominators(q, sigma)
    if den.min() <= eps_sing:
        check_separation(q, sigma, eps_sing)
    w = masses[None, :] / den**1.5  # zero on the diagonal
    # sum_j w_ij (q_j - sigma g_ij q_i)
    acc = w @ q - sigma * np.sum(w * g, axis=1)[:, None] * q
    acc -= sigma * sigma_inner(v, v, sigma)[:, None] * q
    return acc


def acceleration(state, eps_sing=EPS_SING):
    """Accelerations of all bodies as an ``(n, 4)`` array.

    The right-hand side is evaluated literally; positions slightly off the
    manifold are not renormalised first.
    """
    return _acceleration(state.masses, state.q, state.v, state.sigma, eps_sing)


def angular_momentum(state):
    """Total angular-momentum bivector ``sum_j m_j q_j ^ v_j``."""
    return np.sum(state.masses[:, None] * wedge(state.q, state.v), axis=0)


@dataclass
class IntegrateOptions(StepOptions):
    eps_sing: float = EPS_SING
    project: bool = True


@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostics.

    ``drift[k]`` is the largest ``|q.q - sigma|`` seen before projection on any
    step ending in ``(t[k-1], t[k]]``; ``drift[0]`` describes the initial state.
    """

    t: np.ndarray
    q: np.ndarray  # (samples, n, 4)
    v: np.ndarray
    masses: np.ndarray
    sigma: int
    angular_momentum: np.ndarray  # (samples, 6)
    drift: np.ndarray
    info: dict = field(default_factory=dict)

    def state(self, k):
        return SystemState(self.masses, self.q[k], self.v[k], self.sigma, float(self.t[k]))

    def __len__(self):
        return len(self.t)

    @property
    def max_drift(self):
        return float(self.drift[1:].max()) if len(self.drift) > 1 else 0.0


def integrate(state, dt, t_end, opts=None):
    """Integrate the equations of motion from ``state`` to ``t_end``.

    ``dt`` is the output spacing; in adaptive mode the integrator takes as
    many internal steps as the tolerances require, in fixed-step mode it takes
    exactly one step per output interval.  Each accepted step is followed by
    a projection back onto the sphere.
    """
    opts = opts or IntegrateOptions()
    n, sigma = state.n, state.sigma
    masses = state.masses.copy()
    check_separation(state.q, sigma, opts.eps_sing)
    times = sample_times(state.t, dt, t_end)
    sig = metric(sigma)

    def rhs(t, y):
        q = y[: 4 * n].reshape(n, 4)
        v = y[4 * n :].reshape(n, 4)
        return np.concatenate([v.ravel(), _acceleration(masses, q, v, sigma, opts.eps_sing).ravel()])

    drift_since_sample = [0.0]

    def after_step(t, y):
        q = y[: 4 * n].reshape(n, 4)
        v = y[4 * n :].reshape(n, 4)
        d = float(np.max(np.abs(np.sum(q * q * sig, axis=1) - sigma)))
        drift_since_sample[0] = max(drift_since_sample[0], d)
        check_separation(q, sigma, opts.eps_sing)
        if opts.project:
            q, v = project(q, v, sigma)
        return np.concatenate([q.ravel(), v.ravel()])

    y0 = np.concatenate([state.q.ravel(), state.v.ravel()])
    drift = [float(np.max(np.abs(sigma_inner(state.q, state.q, sigma) - sigma)))]

    def on_sample(k, y):
        drift.append(drift_since_sample[0])
        drift_since_sample[0] = 0.0

    ys = march(rhs, y0, times, opts, after_step, on_sample)
    q = ys[:, : 4 * n].reshape(-1, n, 4)
    v = ys[:, 4 * n :].reshape(-1, n, 4)
    L = np.sum(masses[None, :, None] * wedge(q, v), axis=1)
    return Trajectory(times, q, v, masses, sigma, L, np.array(drift))
