"""Closed-form geometry of the equilateral pentagon.

A labelled shape is the vector of relative angles psi1..psi5, each in
(-pi, pi]: psi_i rotates the edge leaving vertex i onto the negated edge
arriving at it.  Only (psi2, psi3, psi4) are free; closure of the unit
five-bar chain fixes psi1 and psi5 and imposes one scalar relation on the
free triple.  An affine change of variables to (alpha1, alpha2, alpha3)
turns that relation into the symmetric surface C(alpha) = 0 on the
three-torus, which is the shape space this package works on.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateEdge, Inconsistent, NotClosed

TOL_CLOSURE = 1e-10     # residual bound for accepting a chain as closed
TOL_SINGULAR = 1e-9     # |zeta| threshold for the degenerate psi4 cases
ARCCOS_SLACK = 1e-12    # clamp arccos arguments this far outside [-1, 1]

# alpha = ALPHA_MAT @ (psi2, psi3, psi4) + ALPHA_OFF.  det = -1/2, so the
# inverse is single valued only after fixing the lattice representative.
ALPHA_MAT = np.array([[-0.5, -1.0, -0.5],
                      [-0.5, 0.0, -0.5],
                      [-0.5, 0.0, 0.5]])
ALPHA_OFF = np.array([0.0, math.pi, 0.0])

PENTAGRAM_ALPHA = np.array([-2 * math.pi / 5, 4 * math.pi / 5, 0.0])
PENTAGON_ALPHA = np.array([4 * math.pi / 5, 2 * math.pi / 5, 0.0])


def wrap_angle(x):
    """Reduce mod 2pi into (-pi, pi]; an exact -pi maps to +pi."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return float(y) if np.ndim(x) == 0 else y


class PsiShape(NamedTuple):
    """Labelled shape: the five relative angles, each in (-pi, pi]."""

    psi1: float
    psi2: float
    psi3: float
    psi4: float
    psi5: float

    @property
    def array(self) -> np.ndarray:
        return np.array(self, dtype=float)


class VertexConfig(NamedTuple):
    """Planar configuration: orientation theta plus centred vertices."""

    theta: float
    z: np.ndarray  # complex, shape (5,), centroid zero

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.z.real, self.z.imag])


class Psi4Solutions(NamedTuple):
    """Solution set of the closure relation for psi4 at fixed (psi2, psi3).

    kind is one of 'no_solution', 'one', 'two', 'undetermined'; values holds
    the corresponding angles (empty for 'no_solution' and 'undetermined',
    where every psi4 closes the chain).
    """

    kind: str
    values: tuple


def closure_residual(psi2, psi3, psi4):
    """Scalar whose vanishing makes the fifth edge of the chain unit length."""
    return (3 - 2 * np.cos(psi2) - 2 * np.cos(psi3) - 2 * np.cos(psi4)
            + 2 * np.cos(psi2 + psi3) + 2 * np.cos(psi3 + psi4)
            - 2 * np.cos(psi2 + psi3 + psi4))


def vertices_from_shape(psi2, psi3, psi4, theta=0.0) -> VertexConfig:
    """Centred vertices of the chain with edge z2 - z1 at direction theta.

    Total: edges 1..4 are unit by construction whether or not the chain
    closes; the fifth edge is unit iff the closure residual vanishes.
    """
    w1 = np.exp(-1j * psi2)
    w2 = np.exp(-1j * (psi2 + psi3))
    w3 = np.exp(-1j * (psi2 + psi3 + psi4))
    f = np.exp(1j * theta) / 5.0
    z = f * np.array([-4 + 3 * w1 - 2 * w2 + w3,
                      1 + 3 * w1 - 2 * w2 + w3,
                      1 - 2 * w1 - 2 * w2 + w3,
                      1 - 2 * w1 + 3 * w2 + w3,
                      1 - 2 * w1 + 3 * w2 - 4 * w3])
    return VertexConfig(float(theta), z)


def psi_from_vertices(v: VertexConfig, tol: float = 1e-12) -> PsiShape:
    """Relative angles of a vertex configuration, principal branch."""
    z = np.asarray(v.z, dtype=complex)
    edges = np.roll(z, -1) - z  # edges[i] leaves vertex i+1 (0-based i)
    if np.any(np.abs(edges) < tol):
        raise DegenerateEdge("consecutive vertices coincide")
    psi = -np.angle(-edges / np.roll(edges, 1))
    return PsiShape(*wrap_angle(psi))


def closing_angles(psi2, psi3, psi4, tol: float = TOL_CLOSURE):
    """The two angles fixed by closure, as (psi1, psi5)."""
    res = closure_residual(psi2, psi3, psi4)
    if np.any(np.abs(res) > tol):
        raise NotClosed(f"closure residual {np.max(np.abs(res)):.3e} > {tol:.1e}")
    return _closing_unchecked(psi2, psi3, psi4)


def _closing_unchecked(psi2, psi3, psi4):
    psi5 = -np.angle(1 - np.exp(1j * psi4) + np.exp(1j * (psi3 + psi4))
                     - np.exp(1j * (psi2 + psi3 + psi4)))
    psi1 = np.angle(1 - np.exp(-1j * psi2) + np.exp(-1j * (psi2 + psi3))
                    - np.exp(-1j * (psi2 + psi3 + psi4)))
    return wrap_angle(psi1), wrap_angle(psi5)


def close_shape(psi2, psi3, psi4, tol: float = TOL_CLOSURE) -> PsiShape:
    """Full shape from the free triple."""
    psi1, psi5 = closing_angles(psi2, psi3, psi4, tol=tol)
    return PsiShape(float(psi1), wrap_angle(psi2), wrap_angle(psi3),
                    wrap_angle(psi4), float(psi5))


def solve_psi4(psi2, psi3, tol: float = TOL_SINGULAR) -> Psi4Solutions:
    """All psi4 closing the chain at fixed (psi2, psi3).

    With zeta = -1 + e^{i psi3} - e^{i (psi2+psi3)} the candidates are
    psi4 = +-arccos(-|zeta|/2) - arg zeta.  |zeta| > 2 leaves no solution,
    |zeta| = 2 a double root, and zeta = 0 (psi2 = psi3 = +-pi/3) makes
    every psi4 admissible.
    """
    zeta = -1 + np.exp(1j * psi3) - np.exp(1j * (psi2 + psi3))
    r = abs(zeta)
    if r < tol:
        return Psi4Solutions("undetermined", ())
    if abs(r - 2.0) < tol:
        return Psi4Solutions("one", (wrap_angle(math.pi - np.angle(zeta)),))
    if r > 2.0:
        return Psi4Solutions("no_solution", ())
    half = math.acos(-0.5 * r)
    arg = np.angle(zeta)
    return Psi4Solutions("two", (wrap_angle(half - arg), wrap_angle(-half - arg)))


def constraint_C(p):
    """Closure constraint on the three-torus; the surface is C = 0."""
    p = np.asarray(p, dtype=float)
    c1, c2, c3 = np.cos(p[..., 0]), np.cos(p[..., 1]), np.cos(p[..., 2])
    return 3 + 4 * c1 * c2 + 4 * c1 * c3 + 4 * c2 * c3


def normalize_alpha(p):
    """Unique lattice representative: alpha3 in [0, pi), alpha1,2 in (-pi, pi].

    The admissible shifts are pi*(i, j, k) with i = j = k mod 2, so after
    reducing alpha3 mod 2pi an extra (pi, pi, pi) shift may be needed.
    """
    p = np.asarray(p, dtype=float)
    a3 = np.mod(p[..., 2], 2 * np.pi)
    shift = np.where(a3 >= np.pi, np.pi, 0.0)
    return np.stack([wrap_angle(p[..., 0] - shift),
                     wrap_angle(p[..., 1] - shift),
                     a3 - shift], axis=-1)


def psi_triple_to_alpha_raw(triple):
    """Affine map to alpha without lattice reduction; triple is (..., 3)."""
    triple = np.asarray(triple, dtype=float)
    return triple @ ALPHA_MAT.T + ALPHA_OFF


def alpha_to_psi_triple_raw(p):
    """Inverse affine map; returns unreduced (psi2, psi3, psi4) as (..., 3)."""
    p = np.asarray(p, dtype=float)
    a1, a2, a3 = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([np.pi - a2 - a3, a2 - a1 - np.pi, np.pi - a2 + a3], axis=-1)


def psi_to_alpha(s) -> np.ndarray:
    """Normalized alpha coordinates of a closed shape."""
    arr = np.asarray(s, dtype=float)
    return normalize_alpha(psi_triple_to_alpha_raw(arr[..., 1:4]))


def alpha_to_psi(p, tol: float = TOL_CLOSURE) -> PsiShape:
    """Shape at a surface point; inverse of psi_to_alpha."""
    p = np.asarray(p, dtype=float)
    c = constraint_C(p)
    if abs(float(c)) > tol:
        raise NotClosed(f"|C| = {abs(float(c)):.3e} > {tol:.1e}")
    t = wrap_angle(alpha_to_psi_triple_raw(p))
    # constraint residual equals the closure residual, already checked
    psi1, psi5 = _closing_unchecked(t[0], t[1], t[2])
    return PsiShape(float(psi1), float(t[0]), float(t[1]), float(t[2]),
                    float(psi5))


class _LiftCase:
    """Sentinel for the non-numeric outcomes of alpha3_lift."""

    __slots__ = ("_name",)

    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name


UNDEFINED = _LiftCase("Undefined")
OFF_SURFACE = _LiftCase("OffSurface")


def lift_ratio(alpha1, alpha2):
    """cos(alpha3) on the surface as a function of the chart point.

    Vectorized; returns +-inf where the denominator vanishes.
    """
    num = -3.0 - 4.0 * np.cos(alpha1) * np.cos(alpha2)
    den = 4.0 * (np.cos(alpha1) + np.cos(alpha2))
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


def alpha3_lift(alpha1, alpha2, tol: float = TOL_SINGULAR):
    """Surface alpha3 over a chart point, or UNDEFINED / OFF_SURFACE.

    UNDEFINED marks the singular points (numerator and denominator both
    vanish; a whole segment of the surface projects there), OFF_SURFACE the
    chart points with no surface above them.
    """
    num = -3.0 - 4.0 * math.cos(alpha1) * math.cos(alpha2)
    den = 4.0 * (math.cos(alpha1) + math.cos(alpha2))
    if abs(num) < tol and abs(den) < tol:
        return UNDEFINED
    if den == 0.0:
        return OFF_SURFACE
    ratio = num / den
    if abs(ratio) > 1.0 + ARCCOS_SLACK:
        return OFF_SURFACE
    return math.acos(min(1.0, max(-1.0, ratio)))


def angle_sum_class(s, tol: float = 1e-8) -> int:
    """Index k with sum(psi) = (1 + 2k)*pi, k in {-2, -1, 0, 1}."""
    total = float(np.sum(np.asarray(s, dtype=float)))
    k = round((total / math.pi - 1.0) / 2.0)
    if abs(total - (1 + 2 * k) * math.pi) > tol or not -2 <= k <= 1:
        raise Inconsistent(f"angle sum {total:.12f} not near (1+2k)*pi")
    return int(k)
