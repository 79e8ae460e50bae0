"""Discrete symmetries of labelled pentagon shapes.

Three generators act on the angle vector by signed permutations: the cyclic
relabelling R, the reversing relabelling V, and the mirror M = -id.  They
generate a group of order 20; the orientation-preserving half (R and MV)
has order 10 and tiles the constraint surface with copies of a quadrilateral
fundamental region whose four sides are arcs of the five mirror-symmetry
curves.  canonicalize moves any surface point into that region.

On the alpha torus V and M are simple sign maps, while R has no convenient
closed form; it is computed by passing through angle space.
"""
from __future__ import annotations

import functools
import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NotClosed
from .geometry import (PsiShape, _closing_unchecked, alpha_to_psi_triple_raw,
                       constraint_C, normalize_alpha, psi_triple_to_alpha_raw,
                       wrap_angle)

BOUNDARY_TOL = 1e-9    # membership tolerance at the region boundary
_ARC_SAMPLES = 1400    # polyline resolution of each boundary arc

_B1_LO = -2 * math.pi / 5
_B1_HI = 4 * math.pi / 5


class GroupElement(NamedTuple):
    """Element in the normal form M^m V^v R^r."""

    r: int
    v: int
    m: int


IDENTITY = GroupElement(0, 0, 0)
R = GroupElement(1, 0, 0)
V = GroupElement(0, 1, 0)
M = GroupElement(0, 0, 1)

# orientation-preserving elements first the rotations, then the MV coset
D5_PLUS = tuple([GroupElement(r, 0, 0) for r in range(5)]
                + [GroupElement(r, 1, 1) for r in range(5)])
D10 = tuple(GroupElement(r, v, m) for m in (0, 1) for v in (0, 1)
            for r in range(5))


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Product g*h (h applied first)."""
    sign = -1 if h.v else 1
    return GroupElement((h.r + sign * g.r) % 5, (g.v + h.v) % 2,
                        (g.m + h.m) % 2)


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.r if g.v else (-g.r) % 5, g.v, g.m)


def act_psi(g: GroupElement, s):
    """Apply M^m V^v R^r to a shape (or an (..., 5) array of shapes)."""
    arr = np.asarray(s, dtype=float)
    out = np.roll(arr, -(g.r % 5), axis=-1)
    if g.v:
        out = -out[..., ::-1]
    if g.m:
        out = -out
    out = wrap_angle(out)
    if isinstance(s, PsiShape):
        return PsiShape(*(float(x) for x in out))
    return out


def _full_psi(p):
    """Continuousness-agnostic angle vector of surface points (..., 3)."""
    t = wrap_angle(alpha_to_psi_triple_raw(p))
    psi1, psi5 = _closing_unchecked(t[..., 0], t[..., 1], t[..., 2])
    return np.stack([psi1, t[..., 0], t[..., 1], t[..., 2], psi5], axis=-1)


def act_alpha(g: GroupElement, p, tol: float = 1e-10) -> np.ndarray:
    """Image of surface points under g, in normalized alpha coordinates."""
    p = np.asarray(p, dtype=float)
    c = constraint_C(p)
    if np.any(np.abs(c) > tol):
        raise NotClosed(f"|C| = {np.max(np.abs(c)):.3e} > {tol:.1e}")
    psi = act_psi(g, _full_psi(p))
    return normalize_alpha(psi_triple_to_alpha_raw(psi[..., 1:4]))


def orbit(s, group: str = "D5plus") -> list:
    """Distinct images of a shape under the chosen group."""
    if group in ("D5plus", "d5plus", "D5+"):
        elements = D5_PLUS
    elif group in ("D10", "d10"):
        elements = D10
    else:
        raise ValueError(f"unknown group {group!r}")
    arr = np.asarray(s, dtype=float)
    images = []
    for g in elements:
        im = np.asarray(act_psi(g, arr))
        if not any(np.max(np.abs(wrap_angle(im - o))) < 1e-9 for o in images):
            images.append(im)
    return [PsiShape(*(float(x) for x in im)) for im in images]


def symmetry_curve_b1(t):
    """Base arc of the mirror-symmetry curve in the alpha3 = 0 slice.

    Runs from the pentagram at t = -2pi/5 to the regular pentagon at
    t = 4pi/5 (end point included).
    """
    ts = np.asarray(t, dtype=float)
    if np.any(ts < _B1_LO - 1e-12) or np.any(ts > _B1_HI + 1e-12):
        raise DomainError(f"parameter outside [{_B1_LO:.6f}, {_B1_HI:.6f}]")
    arg = -0.125 * (3 + 4 * np.cos(ts)) / np.cos(0.5 * ts) ** 2
    a2 = np.arccos(np.clip(arg, -1.0, 1.0))
    return np.stack([ts, a2, np.zeros_like(ts)], axis=-1)


# ---------------------------------------------------------------------------
# fundamental region


def _quarter_xy(i, ts):
    """Quarter rotations of the base arc inside the alpha3 = 0 plane."""
    base = symmetry_curve_b1(ts)
    x, y = base[..., 0], base[..., 1]
    if i == 1:
        return x, y
    if i == 2:
        return y, -x
    if i == 3:
        return -x, -y
    if i == 4:
        return -y, x
    raise ValueError(i)


def _boundary_arc(i, k, n=_ARC_SAMPLES):
    """Continuous raw-coordinate polyline of the R^k image of quarter i."""
    ts = np.linspace(_B1_LO, _B1_HI, n)
    x, y = _quarter_xy(i, ts)
    al = np.stack([x, y, np.zeros_like(x)], axis=-1)
    t = alpha_to_psi_triple_raw(al)  # linear in alpha, already continuous
    psi1, psi5 = _closing_unchecked(t[:, 0], t[:, 1], t[:, 2])
    psi = np.column_stack([np.unwrap(psi1), t, np.unwrap(psi5)])
    rolled = psi[:, [(1 + k) % 5, (2 + k) % 5, (3 + k) % 5]]
    return psi_triple_to_alpha_raw(rolled)


def _lattice_fix(target, point):
    """Lattice vector pi*(a,b,c), a=b=c mod 2, moving point onto target."""
    d = np.asarray(target) - np.asarray(point)
    k = np.round(d / math.pi).astype(int)
    if not np.allclose(d, k * math.pi, atol=1e-8) or len(set(k % 2)) != 1:
        raise RuntimeError(f"not a lattice gap: {d}")
    return k * math.pi


@functools.lru_cache(maxsize=1)
def _phi_polygon():
    """Closed boundary polyline of the fundamental region, raw coordinates.

    The four sides are images of quarter arcs under specific relabellings;
    the pairing below is the unique one whose arcs chain into a closed
    quadrilateral.  Corners are the regular shapes (both orientations of
    pentagon and pentagram, up to lattice shifts).
    """
    pieces = [_boundary_arc(1, 3), _boundary_arc(2, 4),
              _boundary_arc(3, 2), _boundary_arc(4, 1)]
    chain = [pieces[0]]
    for arc in pieces[1:]:
        chain.append(arc + _lattice_fix(chain[-1][-1], arc[0]))
    gap = chain[0][0] - chain[-1][-1]
    if not np.allclose(gap, 0.0, atol=1e-8):
        raise RuntimeError(f"fundamental region boundary does not close: {gap}")
    poly = np.vstack([arc[:-1] for arc in chain])[:, :2]
    return np.ascontiguousarray(poly)


def _in_poly(x, y, poly):
    """Even-odd ray casting."""
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    cond = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = px + (y - py) * (qx - px) / (qy - py)
    return bool(np.sum(cond & (x < xint)) % 2)


def _poly_distance(x, y, poly):
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    ap = np.stack([x - a[:, 0], y - a[:, 1]], axis=-1)
    denom = np.einsum("ij,ij->i", ab, ab)
    tt = np.clip(np.einsum("ij,ij->i", ap, ab) / denom, 0.0, 1.0)
    dx = ap[:, 0] - tt * ab[:, 0]
    dy = ap[:, 1] - tt * ab[:, 1]
    return math.sqrt(float(np.min(dx * dx + dy * dy)))


_ODD = tuple((i, j) for i in (-3, -1, 1, 3) for j in (-3, -1, 1, 3))
_EVEN = tuple((i, j) for i in (-2, 0, 2) for j in (-2, 0, 2))


def fundamental_region_distance(p) -> float:
    """Signed planar distance from a normalized point to the region boundary.

    Negative inside.  The region is a graph over (alpha1, alpha2), so the
    test projects out alpha3; interior points reach the boundary polygon
    through odd multiples of pi (the raw-coordinate face sits one lattice
    step below the normalized representative), while points in the alpha3 = 0
    slice (the corners) may also need even multiples.
    """
    poly = _phi_polygon()
    x, y, z = (float(p[0]), float(p[1]), float(p[2]))
    translates = _ODD
    if abs(z) < 1e-9 or abs(z - math.pi) < 1e-9:
        translates = _ODD + _EVEN
    best = math.inf
    for i, j in translates:
        qx, qy = x + math.pi * i, y + math.pi * j
        d = _poly_distance(qx, qy, poly)
        sd = -d if _in_poly(qx, qy, poly) else d
        if sd < best:
            best = sd
    return best


def in_fundamental_region(p, tol: float = BOUNDARY_TOL) -> bool:
    """True if the normalized point lies in the region (boundary included)."""
    return fundamental_region_distance(p) <= tol


def canonicalize(p, tol: float = 1e-10):
    """Move a surface point into the fundamental region.

    Returns (image, g) with image = act_alpha(g, p).  For interior orbits the
    image is the unique representative; for orbits touching the boundary the
    winner is chosen deterministically (smallest image point, then smallest
    group element), which keeps the result constant on the whole orbit and
    makes the map idempotent.
    """
    p = np.asarray(p, dtype=float)
    cands = []
    for g in D5_PLUS:
        q = act_alpha(g, p, tol=tol)
        cands.append((fundamental_region_distance(q), q, g))
    best = min(c[0] for c in cands)
    winners = [c for c in cands if c[0] <= best + BOUNDARY_TOL]
    winners.sort(key=lambda c: (tuple(np.round(c[1], 9)),
                                (c[2].m, c[2].v, c[2].r)))
    _, q, g = winners[0]
    return q, g


def mirror_curve_crossings(psi_samples) -> int:
    """Count crossings of the five mirror-symmetry curves by a closed loop.

    psi_samples is the (N, 5) array of one full period without the duplicate
    endpoint.  On curve k the angles satisfy psi_{2-k} = psi_{4-k} (indices
    1-based, mod 5); a crossing is a sign change of that difference.
    """
    psi = np.asarray(psi_samples, dtype=float)
    total = 0
    for k in range(5):
        w = wrap_angle(psi[:, (1 - k) % 5] - psi[:, (3 - k) % 5])
        nxt = np.roll(w, -1)
        flips = (w * nxt < 0) & (np.abs(w - nxt) < math.pi)
        total += int(np.sum(flips))
    return total
