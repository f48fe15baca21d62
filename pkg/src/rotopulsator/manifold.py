"""Curvature-signed linear algebra on R^4.

Points are plain ``numpy`` arrays of shape ``(4,)`` (or ``(..., 4)`` for
batches).  Bivectors are arrays of shape ``(6,)`` with components ordered
``(12, 13, 14, 23, 24, 34)``.
"""

import numpy as np

from .errors import BadParameter, Unsupported, ZeroVector

BIVECTOR_LABELS = ("12", "13", "14", "23", "24", "34")
_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def check_sigma(sigma):
    if sigma not in (1, -1):
        raise BadParameter(f"curvature sign must be +1 or -1, got {sigma!r}")
    return int(sigma)


def metric(sigma):
    """Diagonal of the signed inner product as an array."""
    return np.array([1.0, 1.0, 1.0, float(check_sigma(sigma))])


def sigma_inner(x, y, sigma=1):
    """x1*y1 + x2*y2 + x3*y3 + sigma*x4*y4, broadcast over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x * y * metric(sigma), axis=-1)


def rotation2(angle, v):
    """Rotate the planar vector ``v`` counter-clockwise by ``angle`` radians."""
    c, s = np.cos(angle), np.sin(angle)
    v = np.asarray(v, dtype=float)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def wedge(q, v):
    """Bivector ``q ^ v`` with components ``q_k v_l - q_l v_k`` for ``k < l``."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack([q[..., k] * v[..., l] - q[..., l] * v[..., k] for k, l in _PAIRS], axis=-1)


def project(q, v, sigma=1):
    """Pull ``(q, v)`` back onto the unit sphere and its tangent space.

    Returns ``(q / |q|, v - (q' . v) q')``.  Works on single points or on
    ``(n, 4)`` stacks.  Only the sphere is supported.
    """
    if check_sigma(sigma) != 1:
        raise Unsupported("projection onto the hyperboloid (sigma = -1) is not implemented")
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise ZeroVector("cannot project the zero vector onto the sphere")
    qp = q / norm
    vp = v - np.sum(qp * v, axis=-1, keepdims=True) * qp
    return qp, vp


def on_clifford_torus(q, a, b, tol=1e-12):
    """True iff ``x1^2 + x2^2 = a^2`` and ``x3^2 + x4^2 = b^2`` within ``tol``."""
    if a <= 0 or b <= 0:
        raise BadParameter(f"torus radii must be positive, got a={a}, b={b}")
    if tol <= 0:
        raise BadParameter("tol must be positive")
    q = np.asarray(q, dtype=float)
    return bool(abs(q[0] ** 2 + q[1] ** 2 - a * a) <= tol and abs(q[2] ** 2 + q[3] ** 2 - b * b) <= tol)
