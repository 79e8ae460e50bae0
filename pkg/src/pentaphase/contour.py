"""Tracing closed loops on the constraint surface.

Two families are built here: the zero contours of the field B, traced as
trajectories of alpha_dot = grad C x grad H with H = B * I^2 (both C and H
are first integrals of that flow, so the trajectory stays on the contour),
and the boundary of the convex shapes, which is piecewise explicit.  Loops
are returned as densely sampled immutable objects with a measured period.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .errors import (ChartError, ChartExit, DomainError, DriftExceeded,
                     NoClosure, NoCrossing)
from .fields import (coupling, grad_C, grad_H, hamiltonian_H, inertia,
                     magnetic_B, theta_dot)
from .geometry import (PENTAGON_ALPHA, PENTAGRAM_ALPHA, alpha3_lift,
                       alpha_to_psi_triple_raw, angle_sum_class, constraint_C,
                       lift_ratio, normalize_alpha, wrap_angle,
                       _closing_unchecked)

P_S = math.acos(3 * math.sqrt(3) / (4 * math.sqrt(2)))  # 0.4063775273419716

# unit directions (towards the contour, inside the chart) used to seed the
# two standard zero contours from the enclosed regular shapes
SEED_DIRECTIONS = {"pentagram": (-0.229753, 0.973249),
                   "pentagon": (0.973249, 0.229753)}

_BALL_OUT = 0.1     # must leave this ball before return detection arms
_BALL_IN = 0.05     # and re-enter this one to look for the section crossing
_RETURN_TOL = 1e-3  # accepted distance at the refined return time
_CHART_C3_EXIT = 1e-3  # chart tracer stops when |dC/dalpha3| drops below


class ChartArc(NamedTuple):
    """Partial curve traced before a chart exit."""

    t: np.ndarray
    alpha: np.ndarray
    alpha_dot: np.ndarray


@dataclass(eq=False)
class ParametrizedLoop:
    """Closed sampled curve on the surface.

    alpha and psi hold one full period as continuous (unwrapped) samples;
    row 0 is a normalized representative and the last row repeats row 0.
    orientation is -1 for the standard traversals (they make delta-theta
    positive, which is the negatively oriented direction on the surface).
    """

    t: np.ndarray
    alpha: np.ndarray
    psi: np.ndarray
    alpha_dot: np.ndarray
    tau: float
    label: str
    orientation: int = -1
    corners: tuple = ()
    conserve: str = "C"  # which invariants resampling re-imposes: 'C' or 'CH'
    max_abs_C: float = field(default=0.0)
    max_abs_B: float | None = field(default=None)

    def segment_bounds(self):
        """Break points of the smooth pieces: 0, the corners, tau."""
        return (0.0,) + tuple(self.corners) + (self.tau,)

    def reversed(self) -> "ParametrizedLoop":
        """Same curve traversed backwards (t -> tau - t)."""
        corners = tuple(sorted(self.tau - c for c in self.corners))
        return ParametrizedLoop(
            t=self.t.copy(),
            alpha=self.alpha[::-1].copy(),
            psi=self.psi[::-1].copy(),
            alpha_dot=-self.alpha_dot[::-1],
            tau=self.tau,
            label=self.label,
            orientation=-self.orientation,
            corners=corners,
            conserve=self.conserve,
            max_abs_C=self.max_abs_C,
            max_abs_B=self.max_abs_B,
        )

    def _piece_splines(self):
        bounds = self.segment_bounds()
        pieces = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            sel = (self.t >= lo - 1e-12) & (self.t <= hi + 1e-12)
            ts = self.t[sel]
            if len(self.corners) == 0:
                ext = np.concatenate([self.alpha, self.alpha])  # unused
                spl = CubicSpline(ts, self.alpha[sel], axis=0,
                                  bc_type="periodic"
                                  if np.allclose(self.alpha[0], self.alpha[-1])
                                  else "not-a-knot")
            else:
                spl = CubicSpline(ts, self.alpha[sel], axis=0)
            pieces.append((lo, hi, spl))
        return pieces

    def resample(self, samples: int) -> "ParametrizedLoop":
        """New loop with `samples` uniform intervals (samples + 1 rows)."""
        pieces = self._piece_splines()
        ts = np.linspace(0.0, self.tau, samples + 1)
        alpha = np.empty((samples + 1, 3))
        alpha_dot = np.empty((samples + 1, 3))
        for lo, hi, spl in pieces:
            sel = (ts >= lo - 1e-12) & (ts <= hi + 1e-12)
            alpha[sel] = spl(ts[sel])
            alpha_dot[sel] = spl(ts[sel], 1)
        if self.conserve == "CH":
            alpha = _project_CH_batch(alpha)
        else:
            alpha = _project_C_batch(alpha)
        alpha[-1] = alpha[0] + (alpha[-1] - alpha[0])  # keep raw continuity
        return _assemble_loop(ts, alpha, alpha_dot, self.tau, self.label,
                              self.orientation, self.corners, self.conserve)


# ---------------------------------------------------------------------------
# right-hand sides and projections


def _rhs(a):
    gc = grad_C(a)
    gh = grad_H(a)
    return np.array([gc[1] * gh[2] - gc[2] * gh[1],
                     gc[2] * gh[0] - gc[0] * gh[2],
                     gc[0] * gh[1] - gc[1] * gh[0]])


def _rhs_batch(a):
    gc = grad_C(a)
    gh = grad_H(a)
    return np.cross(gc, gh)


def _project_CH_batch(a, tol=1e-12, maxit=4):
    """Newton projection onto {C = 0, H = 0}, vectorized over rows."""
    a = np.array(a, dtype=float)
    for _ in range(maxit):
        r1 = constraint_C(a)
        r2 = hamiltonian_H(a)
        if max(np.max(np.abs(r1)), np.max(np.abs(r2))) < tol:
            break
        g1 = grad_C(a)
        g2 = grad_H(a)
        a11 = np.einsum("...i,...i->...", g1, g1)
        a12 = np.einsum("...i,...i->...", g1, g2)
        a22 = np.einsum("...i,...i->...", g2, g2)
        det = a11 * a22 - a12 * a12
        l1 = (r1 * a22 - r2 * a12) / det
        l2 = (r2 * a11 - r1 * a12) / det
        a = a - l1[..., None] * g1 - l2[..., None] * g2
    return a


def _project_C_batch(a, tol=1e-13, maxit=4):
    """Newton projection onto {C = 0} along grad C, vectorized."""
    a = np.array(a, dtype=float)
    for _ in range(maxit):
        r = constraint_C(a)
        if np.max(np.abs(r)) < tol:
            break
        g = grad_C(a)
        a = a - (r / np.einsum("...i,...i->...", g, g))[..., None] * g
    return a


def _project_CH(a):
    return _project_CH_batch(a[None])[0]


# ---------------------------------------------------------------------------
# adaptive Dormand-Prince 5(4) with invariant projection

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                  11 / 84, 0.0])
_DP_E = _DP_B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                          -92097 / 339200, 187 / 2100, 1 / 40])


class _Boundary(Exception):
    """Internal: right-hand side signalled a chart boundary."""


def _trace_until_return(f, project, y0, rtol, atol, max_steps=200000,
                        max_time=60.0):
    """Integrate y' = f(y) from y0 until the first return to y0.

    Returns (ts, ys, fs, tau); tau is None when f raised _Boundary, in which
    case the history ends at the last accepted step before the boundary.
    """
    y0 = np.asarray(y0, dtype=float)
    f0 = f(y0)
    v0 = f0 / np.linalg.norm(f0)
    ts, ys, fs = [0.0], [y0], [f0]
    t, y, fy = 0.0, y0, f0
    h = 1e-4
    left_ball = False
    nsteps = 0
    while t < max_time and nsteps < max_steps:
        if h < 1e-13:
            raise NoClosure("step size collapsed")
        k = np.empty((7, y.size))
        k[0] = fy
        try:
            for i in range(1, 7):
                yi = y + h * (np.asarray(_DP_A[i]) @ k[:i])
                k[i] = f(yi)
        except _Boundary:
            return ts, ys, fs, None
        y_new = y + h * (_DP_B @ k)
        err = h * (_DP_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = math.sqrt(float(np.mean((err / scale) ** 2)))
        if enorm > 1.0:
            h *= max(0.2, 0.9 * enorm ** -0.2)
            continue
        nsteps += 1
        t_new = t + h
        y_new = project(y_new)
        try:
            f_new = f(y_new)
        except _Boundary:
            return ts, ys, fs, None
        ts.append(t_new)
        ys.append(y_new)
        fs.append(f_new)
        d_prev = np.linalg.norm(y - y0)
        d_new = np.linalg.norm(y_new - y0)
        if not left_ball and d_new > _BALL_OUT:
            left_ball = True
        if left_ball and d_prev < _BALL_IN and d_new < _BALL_IN:
            g_prev = float((y - y0) @ v0)
            g_new = float((y_new - y0) @ v0)
            if g_prev < 0.0 <= g_new:
                seg = CubicHermiteSpline(np.array([t, t_new]),
                                         np.vstack([y, y_new]),
                                         np.vstack([fy, f_new]), axis=0)
                tau = brentq(lambda s: float((seg(s) - y0) @ v0),
                             t, t_new, xtol=1e-14)
                y_tau = project(seg(tau))
                if np.linalg.norm(y_tau - y0) < _RETURN_TOL:
                    ts[-1] = tau
                    ys[-1] = y_tau
                    fs[-1] = f(y_tau)
                    return ts, ys, fs, tau
                ts.pop(), ys.pop(), fs.pop()
                ts.append(t_new), ys.append(y_new), fs.append(f_new)
        t, y, fy = t_new, y_new, f_new
        h = min(h * min(5.0, 0.9 * max(enorm, 1e-10) ** -0.2), 0.05)
    raise NoClosure(f"no return to the seed within budget (t = {t:.2f})")


# ---------------------------------------------------------------------------
# zero contours of B


def seed_zero_B(center, direction, max_range=3.0):
    """First zero of B along a chart ray from center, lifted to the surface."""
    cx, cy = float(center[0]), float(center[1])
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)

    def b_at(s):
        a3 = alpha3_lift(cx + s * d[0], cy + s * d[1])
        if not isinstance(a3, float):
            raise NoCrossing(f"ray left the chart at s = {s:.4f}")
        return float(magnetic_B(np.array([cx + s * d[0], cy + s * d[1], a3])))

    s_prev, b_prev = 0.0, b_at(0.0)
    if b_prev == 0.0:
        raise ValueError("center already sits on the zero contour")
    s = 0.01
    while s <= max_range:
        b = b_at(s)
        if b == 0.0 or b * b_prev < 0.0:
            lo, hi = s_prev, s
            root = brentq(b_at, lo, hi, xtol=1e-15)
            a3 = alpha3_lift(cx + root * d[0], cy + root * d[1])
            seed = normalize_alpha([cx + root * d[0], cy + root * d[1], a3])
            if abs(float(magnetic_B(seed))) > 1e-12:
                # fall back to a secant polish in the rare flat case
                raise NoCrossing("root refinement did not reach |B| < 1e-12")
            return seed
        s_prev, b_prev = s, b
        s += 0.01
    raise NoCrossing("no sign change of B along the ray")


def _continuous_psi(alpha):
    """Unwrapped angle samples along a continuous alpha path."""
    t = alpha_to_psi_triple_raw(alpha)
    psi1, psi5 = _closing_unchecked(t[:, 0], t[:, 1], t[:, 2])
    return np.column_stack([np.unwrap(psi1), t, np.unwrap(psi5)])


def _assemble_loop(ts, alpha, alpha_dot, tau, label, orientation, corners,
                   conserve):
    psi = _continuous_psi(alpha)
    max_c = float(np.max(np.abs(constraint_C(alpha))))
    max_b = None
    if conserve == "CH":
        max_b = float(np.max(np.abs(magnetic_B(alpha))))
    return ParametrizedLoop(t=ts, alpha=alpha, psi=psi, alpha_dot=alpha_dot,
                            tau=float(tau), label=label,
                            orientation=orientation, corners=tuple(corners),
                            conserve=conserve, max_abs_C=max_c, max_abs_B=max_b)


def _detect_label(alpha):
    """pentagram or pentagon, by proximity of the normalized samples."""
    norm = normalize_alpha(alpha)
    best = ("", math.inf)
    for label, rep in (("pentagram", PENTAGRAM_ALPHA),
                       ("pentagon", PENTAGON_ALPHA)):
        for sign in (1.0, -1.0):
            d = np.min(np.linalg.norm(wrap_angle(norm - sign * rep), axis=-1))
            if d < best[1]:
                best = (label, float(d))
    return best[0]


def _delta_theta_estimate(loop_t, alpha, alpha_dot):
    td = theta_dot(alpha, alpha_dot)
    return float(np.trapezoid(td, loop_t))


def trace_zero_contour(seed, rtol: float = 1e-10, atol: float = 1e-12,
                       samples: int = 4096) -> ParametrizedLoop:
    """Trace the closed B = 0 contour through seed.

    The traversal direction is chosen to make the geometric phase positive,
    and the time origin is moved to the mirror-symmetric point that makes
    the fifth angle an even function of time.
    """
    seed = np.asarray(seed, dtype=float)
    if abs(float(magnetic_B(seed))) > 1e-10 or abs(float(constraint_C(seed))) > 1e-10:
        raise ValueError("seed must satisfy B = 0 and C = 0 to 1e-10")
    ts, ys, fs, tau = _trace_until_return(_rhs, _project_CH, seed,
                                          rtol=rtol, atol=atol)
    if tau is None:  # _rhs never raises _Boundary; defensive
        raise NoClosure("tracer stopped before returning")
    dense = CubicHermiteSpline(np.asarray(ts), np.vstack(ys), np.vstack(fs),
                               axis=0)
    defect = ys[-1] - ys[0]
    tgrid = np.linspace(0.0, tau, samples, endpoint=False)
    alpha = dense(tgrid) - np.outer(tgrid / tau, defect)
    alpha = _project_CH_batch(alpha)
    if np.max(np.abs(constraint_C(alpha))) > 1e-8:
        raise DriftExceeded("projection could not restore C = 0")
    alpha_dot = _rhs_batch(alpha)
    sign = 1.0
    tfull = np.append(tgrid, tau)
    afull = np.vstack([alpha, alpha[0]])
    vfull = np.vstack([alpha_dot, alpha_dot[0]])
    if _delta_theta_estimate(tfull, afull, vfull) < 0.0:
        sign = -1.0
        alpha = np.roll(alpha[::-1], 1, axis=0)
        alpha_dot = -np.roll(alpha_dot[::-1], 1, axis=0)
    # move t = 0 to the even-symmetry point of the fifth angle
    psi = _continuous_psi(np.vstack([alpha, alpha[0]]))
    x1 = np.sum(psi[:-1, 4] * np.exp(-2j * np.pi * np.arange(samples) / samples))
    omega = 2 * np.pi / tau
    t0 = (np.pi - np.angle(x1)) / omega % tau
    per = CubicSpline(np.append(tgrid, tau), np.vstack([alpha, alpha[0]]),
                      axis=0, bc_type="periodic")
    alpha = _project_CH_batch(per((t0 + tgrid) % tau))
    alpha_dot = sign * _rhs_batch(alpha)
    tfull = np.append(tgrid, tau)
    afull = np.vstack([alpha, alpha[0]])
    vfull = np.vstack([alpha_dot, alpha_dot[0]])
    loop = _assemble_loop(tfull, afull, vfull, tau,
                          _detect_label(alpha), -1, (), "CH")
    return loop
