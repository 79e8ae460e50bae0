"""Scalar fields on the shape-space torus.

Everything here is an explicit trigonometric polynomial in the alpha
coordinates: the moment of inertia I, the three coupling coefficients that
tie orientation rate to shape velocity, the constraint gradient, and the
curvature-like field B whose zero contours are the locally optimal loops.
B is kept in the raw (unnormalized) form; only its zero set matters for
optimality, so any positive rescaling would do.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure
from .geometry import (PENTAGON_ALPHA, PENTAGRAM_ALPHA, constraint_C,
                       normalize_alpha, wrap_angle)
from . import symmetry

I_MIN = (5 - math.sqrt(5)) / 2  # at the pentagrams
I_MAX = (5 + math.sqrt(5)) / 2  # at the regular pentagons
I_SADDLE = 2.5

SADDLE_KAPPA = math.acos(7.0 / 8.0)
SADDLE_ALPHA = np.array([0.0, 0.0, math.pi - SADDLE_KAPPA])


class AngMomCoefficients(NamedTuple):
    """Moment of inertia and the coupling coefficients at one point."""

    inertia: float
    f1: float
    f2: float
    f3: float


class CriticalPoint(NamedTuple):
    alpha: np.ndarray
    value: float
    kind: str  # 'min', 'saddle', 'max'


def _cs(p):
    p = np.asarray(p, dtype=float)
    a1, a2, a3 = p[..., 0], p[..., 1], p[..., 2]
    return (np.cos(a1), np.cos(a2), np.cos(a3),
            np.sin(a1), np.sin(a2), np.sin(a3))


def inertia(p):
    """Moment of inertia about the centroid (unit masses, unit edges)."""
    c1, c2, c3, s1, s2, _ = _cs(p)
    return 4 + 2 * c1 * c2 + 1.6 * c1 * c3 + 2.4 * c2 * c3 + 1.2 * s1 * s2


def grad_inertia(p):
    c1, c2, c3, s1, s2, s3 = _cs(p)
    return np.stack([-2 * s1 * c2 - 1.6 * s1 * c3 + 1.2 * c1 * s2,
                     -2 * c1 * s2 - 2.4 * s2 * c3 + 1.2 * s1 * c2,
                     -1.6 * c1 * s3 - 2.4 * c2 * s3], axis=-1)


def coupling(p):
    """The three coefficients multiplying alpha_dot in the momentum balance."""
    c1, c2, c3, s1, s2, s3 = _cs(p)
    base = 2 + c1 * c2 + 0.8 * c1 * c3 + 1.2 * c2 * c3 + 0.6 * s1 * s2
    return np.stack([base + 1.2 * s2 * s3,
                     base + 0.8 * s1 * s3,
                     2.4 + 1.6 * c1 * c2 + 0.8 * c1 * c3 + 1.2 * c2 * c3
                     + 1.6 * s1 * s2], axis=-1)


def angmom_coefficients(p) -> AngMomCoefficients:
    f = coupling(p)
    return AngMomCoefficients(float(inertia(p)), float(f[..., 0]),
                              float(f[..., 1]), float(f[..., 2]))


def gauge_potential(p):
    """F with components -coupling/I; the geometric phase is its line integral."""
    return -coupling(p) / inertia(p)[..., None]


def theta_dot(p, alpha_dot, L: float = 0.0):
    """Orientation rate: rigid rotation L/I plus the shape-change term."""
    alpha_dot = np.asarray(alpha_dot, dtype=float)
    i = inertia(p)
    return L / i - np.sum(coupling(p) * alpha_dot, axis=-1) / i


def grad_C(p):
    """Gradient of the closure constraint."""
    c1, c2, c3, s1, s2, s3 = _cs(p)
    return np.stack([-4 * s1 * (c2 + c3),
                     -4 * s2 * (c1 + c3),
                     -4 * s3 * (c1 + c2)], axis=-1)


def _poly_P(p):
    """Numerator polynomial of B (B = 1.6 * P / I^2)."""
    p = np.asarray(p, dtype=float)
    a1, a2, a3 = p[..., 0], p[..., 1], p[..., 2]
    c1, c2 = np.cos(a1), np.cos(a2)
    return (np.cos(3 * a3) * (c1 + c2)
            + np.cos(2 * a3) * (3 + 2 * np.cos(a1 - a2) + np.cos(a1 + a2))
            + np.cos(a3) * (c1 + c2 - np.cos(3 * a2) - np.cos(2 * a1 - a2)
                            - 2 * np.cos(a1 + 2 * a2))
            + np.sin(a1) * np.sin(a2) - c1 * (2 * c2 + np.cos(3 * a2))
            - np.cos(2 * a1) - 2 * np.cos(2 * a2))


def _grad_P(p):
    """Term-by-term partials of _poly_P."""
    p = np.asarray(p, dtype=float)
    a1, a2, a3 = p[..., 0], p[..., 1], p[..., 2]
    c1, c2 = np.cos(a1), np.cos(a2)
    s1, s2 = np.sin(a1), np.sin(a2)
    g1 = (-s1 * np.cos(3 * a3)
          - (2 * np.sin(a1 - a2) + np.sin(a1 + a2)) * np.cos(2 * a3)
          + (-s1 + 2 * np.sin(2 * a1 - a2) + 2 * np.sin(a1 + 2 * a2))
          * np.cos(a3)
          + c1 * s2 + s1 * (2 * c2 + np.cos(3 * a2)) + 2 * np.sin(2 * a1))
    g2 = (-s2 * np.cos(3 * a3)
          + (2 * np.sin(a1 - a2) - np.sin(a1 + a2)) * np.cos(2 * a3)
          + (-s2 + 3 * np.sin(3 * a2) - np.sin(2 * a1 - a2)
             + 4 * np.sin(a1 + 2 * a2)) * np.cos(a3)
          + s1 * c2 + c1 * (2 * s2 + 3 * np.sin(3 * a2)) + 4 * np.sin(2 * a2))
    g3 = (-3 * np.sin(3 * a3) * (c1 + c2)
          - 2 * np.sin(2 * a3) * (3 + 2 * np.cos(a1 - a2) + np.cos(a1 + a2))
          - np.sin(a3) * (c1 + c2 - np.cos(3 * a2) - np.cos(2 * a1 - a2)
                          - 2 * np.cos(a1 + 2 * a2)))
    return np.stack([g1, g2, g3], axis=-1)


def magnetic_B(p):
    """Curvature scalar whose zero contour is the locally optimal loop."""
    return 1.6 * _poly_P(p) / inertia(p) ** 2


def hamiltonian_H(p):
    """B * I^2; the generating function used to trace the zero contours."""
    return 1.6 * _poly_P(p)


def grad_H(p):
    return 1.6 * _grad_P(p)


# ---------------------------------------------------------------------------
# critical points of the inertia on the surface


def _hess_inertia(a):
    c1, c2, c3, s1, s2, s3 = _cs(a)
    h11 = -2 * c1 * c2 - 1.6 * c1 * c3 - 1.2 * s1 * s2
    h22 = -2 * c1 * c2 - 2.4 * c2 * c3 - 1.2 * s1 * s2
    h33 = -1.6 * c1 * c3 - 2.4 * c2 * c3
    h12 = 2 * s1 * s2 + 1.2 * c1 * c2
    h13 = 1.6 * s1 * s3
    h23 = 2.4 * s2 * s3
    return np.array([[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]])


def _hess_C(a):
    c1, c2, c3, s1, s2, s3 = _cs(a)
    h11 = -4 * c1 * (c2 + c3)
    h22 = -4 * c2 * (c1 + c3)
    h33 = -4 * c3 * (c1 + c2)
    return np.array([[h11, 4 * s1 * s2, 4 * s1 * s3],
                     [4 * s1 * s2, h22, 4 * s2 * s3],
                     [4 * s1 * s3, 4 * s2 * s3, h33]])


def _newton_constrained(seed, tol=1e-13, maxit=50):
    """Solve grad I = lambda * grad C, C = 0 near seed."""
    a = np.array(seed, dtype=float)
    gc = grad_C(a)
    lam = float(gc @ grad_inertia(a) / (gc @ gc)) if gc @ gc > 1e-12 else 0.0
    for _ in range(maxit):
        gi, gc = grad_inertia(a), grad_C(a)
        res = np.append(gi - lam * gc, constraint_C(a))
        if np.max(np.abs(res)) < tol:
            return a, lam
        jac = np.zeros((4, 4))
        jac[:3, :3] = _hess_inertia(a) - lam * _hess_C(a)
        jac[:3, 3] = -gc
        jac[3, :3] = gc
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"singular system at {a}") from exc
        a = a + step[:3]
        lam += step[3]
    raise ConvergenceFailure(f"no convergence from seed {seed}")


def _classify(a, lam, tol=1e-8):
    n = grad_C(a)
    n = n / np.linalg.norm(n)
    u = np.cross(n, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 0.1:
        u = np.cross(n, [0.0, 1.0, 0.0])
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    w = _hess_inertia(a) - lam * _hess_C(a)
    s = np.array([[u @ w @ u, u @ w @ v], [v @ w @ u, v @ w @ v]])
    ev = np.linalg.eigvalsh(s)
    if ev[0] > tol:
        return "min"
    if ev[1] < -tol:
        return "max"
    return "saddle"


_SEEDS = (PENTAGRAM_ALPHA, -PENTAGRAM_ALPHA, PENTAGON_ALPHA, -PENTAGON_ALPHA,
          SADDLE_ALPHA)


def inertia_critical_points() -> list:
    """All constrained critical points of the inertia on the surface.

    Newton refinement from the five known representatives, then the group
    action fills in the full saddle orbit; returns 2 minima, 10 saddles and
    2 maxima.
    """
    points = []
    for seed in _SEEDS:
        a, lam = _newton_constrained(normalize_alpha(seed))
        kind = _classify(a, lam)
        for g in symmetry.D5_PLUS:
            q = symmetry.act_alpha(g, a, tol=1e-8)
            if not any(np.max(np.abs(wrap_angle(q - r.alpha))) < 1e-9
                       for r in points):
                points.append(CriticalPoint(q, float(inertia(q)), kind))
    points.sort(key=lambda cp: (cp.value, tuple(np.round(cp.alpha, 9))))
    return points


def euler_characteristic(points=None) -> int:
    """Alternating count of the inertia critical points (minus saddles)."""
    if points is None:
        points = inertia_critical_points()
    kinds = [cp.kind for cp in points]
    return kinds.count("min") - kinds.count("saddle") + kinds.count("max")
