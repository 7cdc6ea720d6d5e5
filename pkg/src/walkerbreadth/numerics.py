"""Numerical building blocks shared by the curve, frame and breadth code."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

# Gauss-Legendre nodes on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def rk4_step(rhs: Callable, s: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(s, y)
    k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(s + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def uniform_grid(s_max: float, step: float, s0: float = 0.0) -> np.ndarray:
    n = int(round((s_max - s0) / step))
    if n < 1 or abs(s0 + n * step - s_max) > 1e-9 * max(1.0, abs(s_max)):
        raise ValueError(f"s range {s_max - s0} is not a multiple of step {step}")
    return s0 + step * np.arange(n + 1)


def rk4_solve(rhs: Callable, y0, s_max: float, step: float, s0: float = 0.0, post=None):
    """Fixed-step RK4 on [s0, s_max]; returns (grid, states).

    ``post(y) -> y`` is applied after every step (used for re-orthonormalisation).
    """
    grid = uniform_grid(s_max, step, s0)
    y = np.array(y0, dtype=float)
    out = np.empty((len(grid),) + y.shape)
    out[0] = y
    for i in range(len(grid) - 1):
        y = rk4_step(rhs, grid[i], y, step)
        if post is not None:
            y = post(y)
        out[i + 1] = y
    return grid, out


def _stencil_weights(offsets, at: float) -> np.ndarray:
    """Weights w with sum w_k v(offsets_k) = v'(at) exactly for polynomials up to len(offsets) - 1."""
    x = np.asarray(offsets, dtype=float) - at
    n = len(x)
    A = np.vander(x, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(A, rhs)


def fd_derivative(values: np.ndarray, step: float, order: int = 4) -> np.ndarray:
    """Finite-difference derivative along axis 0 of uniform samples.

    ``order`` is 4 or 6; samples too close to an end for the central
    stencil use one-sided stencils of the same order.
    """
    if order not in (4, 6):
        raise ValueError("order must be 4 or 6")
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if n < order + 1:
        raise ValueError(f"need at least {order + 1} samples")
    d = np.empty_like(v)
    if order == 4:
        d[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * step)
    else:
        d[3:-3] = (
            -v[:-6] + 9.0 * v[1:-5] - 45.0 * v[2:-4] + 45.0 * v[4:-2] - 9.0 * v[5:-1] + v[6:]
        ) / (60.0 * step)
    half, width = order // 2, order + 1
    for i in range(half):
        w = _stencil_weights(range(width), i) / step
        d[i] = np.tensordot(w, v[:width], axes=1)
        d[n - 1 - i] = -np.tensordot(w, v[: n - 1 - width : -1] if n > width else v[::-1], axes=1)
    return d


def local_poly_derivatives(t: np.ndarray, values: np.ndarray, at: float, order: int = 3, width: int = 7):
    """Value and derivatives up to ``order`` at ``at`` from a local interpolating polynomial.

    Uses the ``width`` samples nearest to ``at``; ``values`` has shape (n, d).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(t)
    width = min(width, n)
    k = int(np.searchsorted(t, at))
    lo = min(max(k - width // 2, 0), n - width)
    ts = t[lo : lo + width]
    scale = (ts[-1] - ts[0]) / 2.0 or 1.0
    x = (ts - at) / scale
    coeffs = np.polynomial.polynomial.polyfit(x, values[lo : lo + width], width - 1)
    out = []
    for m in range(order + 1):
        # m-th derivative at x = 0 is m! * c_m, rescaled
        out.append(math.factorial(m) * coeffs[m] / scale**m)
    return out


def cumulative_integral(values: np.ndarray, step: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled values, starting at 0.

    Fourth-order accurate: cubic Hermite-free Simpson-type update using a
    local cubic through four neighbouring samples.
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    out = np.zeros_like(v)
    if n < 4:
        out[1:] = np.cumsum(0.5 * step * (v[1:] + v[:-1]), axis=0)
        return out
    inc = np.empty((n - 1,) + v.shape[1:])
    # interior intervals [i, i+1] with neighbours i-1 and i+2
    inc[1:-1] = step * (-v[:-3] + 13.0 * v[1:-2] + 13.0 * v[2:-1] - v[3:]) / 24.0
    inc[0] = step * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]) / 24.0
    inc[-1] = step * (9.0 * v[-1] + 19.0 * v[-2] - 5.0 * v[-3] + v[-4]) / 24.0
    out[1:] = np.cumsum(inc, axis=0)
    return out


def gauss_integral(func: Callable, a: float, b: float, pieces: int = 1) -> float:
    """Composite 8-point Gauss-Legendre quadrature of a vectorised function."""
    edges = np.linspace(a, b, pieces + 1)
    h = np.diff(edges)
    nodes = edges[:-1, None] + h[:, None] * _GL_X[None, :]
    vals = np.asarray(func(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return float(np.sum(h[:, None] * _GL_W[None, :] * vals))


def antiderivative(func: Callable, s_max: float, step: float, s0: float = 0.0, c: float = 0.0):
    """Callable F with F(s0) = c and F' = func, accurate to ~step^4.

    Node values come from Gauss-Legendre quadrature per interval; in between,
    cubic Hermite interpolation uses the exact derivative ``func``.
    """
    grid = uniform_grid(s_max, step, s0) if s_max > s0 else np.array([s0, s0 + step])
    lo, hi = grid[:-1], grid[1:]
    h = hi - lo
    nodes = lo[:, None] + h[:, None] * _GL_X[None, :]
    vals = np.asarray(func(nodes.ravel()), dtype=float).reshape(nodes.shape)
    pieces = np.sum(h[:, None] * _GL_W[None, :] * vals, axis=1)
    F = np.concatenate([[c], c + np.cumsum(pieces)])
    dF = np.asarray(func(grid), dtype=float) * np.ones_like(grid)
    return CubicHermiteSpline(grid, F, dF, extrapolate=True)


class Profile:
    """Scalar function of arc length with an exact antiderivative.

    ``const + sum(amp * sin(freq * s + phase))``; used to manufacture
    curvature / torsion data whose integrals are known in closed form.
    """

    def __init__(self, const: float, terms=()):
        self.const = float(const)
        self.terms = tuple((float(a), float(w), float(p)) for a, w, p in terms)

    def __repr__(self):
        return f"Profile({self.const}, {list(self.terms)})"

    def __call__(self, s):
        if isinstance(s, float):
            return self.const + sum(a * math.sin(w * s + p) for a, w, p in self.terms)
        s = np.asarray(s, dtype=float)
        out = self.const + 0.0 * s
        for a, w, p in self.terms:
            out = out + a * np.sin(w * s + p)
        return out if out.ndim else float(out)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        out = 0.0 * s
        for a, w, p in self.terms:
            out = out + a * w * np.cos(w * s + p)
        return out if out.ndim else float(out)

    def integral(self, s):
        """Antiderivative vanishing at s = 0."""
        if isinstance(s, float):
            out = self.const * s
            for a, w, p in self.terms:
                x = 0.5 * w * s
                out += a * s * math.sin(x + p) * (math.sin(x) / x if x != 0.0 else 1.0)
            return out
        s = np.asarray(s, dtype=float)
        out = self.const * s
        for a, w, p in self.terms:
            # (a/w)(cos p - cos(ws + p)) in a form without cancellation as w -> 0
            out = out + a * s * np.sin(0.5 * w * s + p) * np.sinc(w * s / (2.0 * math.pi))
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "Profile":
        return Profile(self.const * factor, [(a * factor, w, p) for a, w, p in self.terms])

    def plus(self, other: "Profile") -> "Profile":
        return Profile(self.const + other.const, self.terms + other.terms)

    @property
    def is_constant(self):
        return all(a == 0.0 for a, _, _ in self.terms)
