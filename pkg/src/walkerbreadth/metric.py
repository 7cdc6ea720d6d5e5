"""Strict Walker 3-metric ``g = dx dz + dy^2 + f(y,z) dz^2`` and its connection.

Two layers live here.  The array layer (methods on :class:`WalkerMetric`)
takes plain ``(..., 3)`` numpy arrays and is what the integrators use.  The
typed layer (:class:`Point`, :class:`Tangent` and the module functions) checks
base points and is the public, self-documenting surface.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .exceptions import BasePointMismatch, ConfigError
from .expression import ScalarField2, parse_field

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite point {self}")

    @classmethod
    def of(cls, p) -> "Point":
        if isinstance(p, Point):
            return p
        x, y, z = (float(c) for c in p)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True, eq=False)
class Tangent:
    """Tangent vector in the coordinate basis (d/dx, d/dy, d/dz) at ``base``."""

    components: np.ndarray
    base: Point

    def __post_init__(self):
        comps = np.array(self.components, dtype=float).reshape(3)
        if not np.all(np.isfinite(comps)):
            raise ValueError("non-finite tangent components")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "base", Point.of(self.base))

    def __eq__(self, other):
        return (
            isinstance(other, Tangent)
            and self.base == other.base
            and np.array_equal(self.components, other.components)
        )

    def __repr__(self):
        return f"Tangent({self.components.tolist()}, base={self.base})"

    def __iter__(self):
        return iter(self.components)


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"

    @property
    def sign(self) -> int:
        return {"spacelike": 1, "timelike": -1, "null": 0}[self.value]


FieldLike = Union[str, ScalarField2]


class WalkerMetric:
    """The metric for a given defining function ``f(y, z)``.

    ``epsilon`` exists only so that configurations asking for the other
    signature fail loudly.
    """

    def __init__(self, f: FieldLike = "0", epsilon: int = 1):
        if epsilon != 1:
            raise ConfigError("only epsilon = +1 is supported")
        self.f = f if isinstance(f, ScalarField2) else parse_field(f)
        self.epsilon = 1
        # constant f: every Christoffel symbol vanishes
        self.is_flat = self.f.f_y.is_constant and self.f.f_z.is_constant and float(
            self.f.f_y(0.0, 0.0)
        ) == 0.0 and float(self.f.f_z(0.0, 0.0)) == 0.0

    def __repr__(self):
        return f"WalkerMetric(f={self.f.source_text!r})"

    # -- array layer -------------------------------------------------------

    def fval(self, p):
        p = np.asarray(p, dtype=float)
        return self.f(p[..., 1], p[..., 2])

    def matrix(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        f = self.fval(p)
        out = np.zeros(p.shape[:-1] + (3, 3))
        out[..., 0, 2] = 1.0
        out[..., 2, 0] = 1.0
        out[..., 1, 1] = 1.0
        out[..., 2, 2] = f
        return out

    def inverse(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        f = self.fval(p)
        out = np.zeros(p.shape[:-1] + (3, 3))
        out[..., 0, 0] = -f
        out[..., 0, 2] = 1.0
        out[..., 2, 0] = 1.0
        out[..., 1, 1] = 1.0
        return out

    def inner(self, p, u, v):
        """g_p(u, v); broadcasts over leading axes."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        f = self.fval(p)
        return (
            u[..., 0] * v[..., 2]
            + u[..., 2] * v[..., 0]
            + u[..., 1] * v[..., 1]
            + f * u[..., 2] * v[..., 2]
        )

    def _fy_fz(self, p):
        p = np.asarray(p, dtype=float)
        return self.f.f_y(p[..., 1], p[..., 2]), self.f.f_z(p[..., 1], p[..., 2])

    def christoffel_array(self, p) -> np.ndarray:
        """gamma[..., i, j, k] = Gamma^i_{jk} (0-based indices)."""
        fy, fz = self._fy_fz(p)
        shape = np.shape(fy)
        out = np.zeros(shape + (3, 3, 3))
        out[..., 0, 1, 2] = 0.5 * fy
        out[..., 0, 2, 1] = 0.5 * fy
        out[..., 0, 2, 2] = 0.5 * fz
        out[..., 1, 2, 2] = -0.5 * fy
        return out

    @staticmethod
    def _contract(fy, fz, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        out[..., 0] = 0.5 * fy * (a[..., 1] * b[..., 2] + a[..., 2] * b[..., 1]) + 0.5 * fz * a[
            ..., 2
        ] * b[..., 2]
        out[..., 1] = -0.5 * fy * a[..., 2] * b[..., 2]
        return out

    def gamma(self, p, a, b):
        """Gamma^i_{jk} a^j b^k."""
        fy, fz = self._fy_fz(p)
        return self._contract(fy, fz, a, b)

    def dgamma(self, p, d, a, b):
        """(d^l partial_l Gamma^i_{jk}) a^j b^k: derivative of the contraction along d."""
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        y, z = p[..., 1], p[..., 2]
        fyy, fyz, fzz = self.f.f_yy(y, z), self.f.f_yz(y, z), self.f.f_zz(y, z)
        dfy = fyy * d[..., 1] + fyz * d[..., 2]
        dfz = fyz * d[..., 1] + fzz * d[..., 2]
        return self._contract(dfy, dfz, a, b)

    def cross(self, p, u, v):
        """Vector product defined by g(u x v, w) = det(u, v, w)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        f = self.fval(p)
        d12 = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
        d13 = u[..., 0] * v[..., 2] - u[..., 2] * v[..., 0]
        d23 = u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]
        return np.stack([d12 - f * d23, -d13, d23], axis=-1)

    def covariant(self, p, velocity, value, derivative):
        """(nabla_T V)^i = dV^i/ds + Gamma^i_{jk} T^j V^k."""
        return np.asarray(derivative, dtype=float) + self.gamma(p, velocity, value)

    def frame(self, p):
        """Pseudo-orthonormal frame (e1, e2, e3) with signs (+1, +1, -1)."""
        f = self.fval(p)
        e1 = np.array([0.0, 1.0, 0.0])
        e2 = np.array([(2.0 - f) / (2.0 * SQRT2), 0.0, 1.0 / SQRT2])
        e3 = np.array([(2.0 + f) / (2.0 * SQRT2), 0.0, -1.0 / SQRT2])
        return e1, e2, e3

    def null_tolerance(self, p, u) -> float:
        u = np.asarray(u, dtype=float)
        f = float(self.fval(p))
        terms = (abs(u[0] * u[2]), abs(u[1] * u[1]), abs(f * u[2] * u[2]))
        return 1e-9 * max(1.0, *terms)


# -- typed layer -----------------------------------------------------------


def _check_base(*vectors: Tangent) -> Point:
    base = vectors[0].base
    for other in vectors[1:]:
        if other.base != base:
            raise BasePointMismatch(f"{other.base} != {base}")
    return base


def metric_value(g: WalkerMetric, u: Tangent, v: Tangent) -> float:
    base = _check_base(u, v)
    return float(g.inner(base.as_array(), u.components, v.components))


@dataclass(frozen=True, eq=False)
class ChristoffelTable:
    """Christoffel symbols at ``point``; ``gamma[i][j][k]`` is Gamma^{i+1}_{j+1,k+1}."""

    point: Point
    gamma: np.ndarray = field(repr=False)

    def __call__(self, i: int, j: int, k: int) -> float:
        """1-based access, matching the usual index notation."""
        return float(self.gamma[i - 1, j - 1, k - 1])


def christoffel(g: WalkerMetric, p) -> ChristoffelTable:
    p = Point.of(p)
    table = g.christoffel_array(p.as_array())
    table.setflags(write=False)
    return ChristoffelTable(p, table)


def cross(g: WalkerMetric, u: Tangent, v: Tangent) -> Tangent:
    base = _check_base(u, v)
    return Tangent(g.cross(base.as_array(), u.components, v.components), base)


def frame_e123(g: WalkerMetric, p) -> tuple[Tangent, Tangent, Tangent]:
    p = Point.of(p)
    return tuple(Tangent(e, p) for e in g.frame(p.as_array()))


def causal_character(g: WalkerMetric, u: Tangent, tol: float | None = None) -> CausalCharacter:
    p = u.base.as_array()
    q = float(g.inner(p, u.components, u.components))
    if tol is None:
        tol = g.null_tolerance(p, u.components)
    if q < -tol:
        return CausalCharacter.TIMELIKE
    if q > tol:
        return CausalCharacter.SPACELIKE
    return CausalCharacter.NULL


def covariant_derivative_along(
    g: WalkerMetric,
    curve_point,
    curve_velocity: Tangent,
    field_value: Tangent,
    field_derivative: Tangent,
) -> Tangent:
    p = Point.of(curve_point)
    for t in (curve_velocity, field_value, field_derivative):
        if t.base != p:
            raise BasePointMismatch(f"{t.base} != {p}")
    out = g.covariant(
        p.as_array(), curve_velocity.components, field_value.components, field_derivative.components
    )
    return Tangent(out, p)
