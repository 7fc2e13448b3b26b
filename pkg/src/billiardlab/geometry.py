"""The elliptical table: coordinates, curvature, conformal factor, caustic parameters."""

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import periodic_trapezoid


class RegimeError(ValueError):
    """Raised when a computation leaves the elliptic-caustic regime or its domain."""


@dataclass(frozen=True)
class EllipseTable:
    a: float
    b: float
    c: float = field(init=False)
    mu0: float = field(init=False)
    ell: float = field(init=False)

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (b > 0.0 and a > b):
            raise ValueError(f"need a > b > 0, got a={a!r}, b={b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        c = math.sqrt((a - b) * (a + b))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "mu0", math.acosh(a / c))
        perimeter = periodic_trapezoid(
            lambda t: np.sqrt(a * a * np.sin(t) ** 2 + b * b * np.cos(t) ** 2), 512
        )
        object.__setattr__(self, "ell", perimeter)

    def boundary(self, phi):
        return self.a * math.cos(phi), self.b * math.sin(phi)

    def speed(self, phi):
        """|γ'(φ)|, the arclength density of the boundary in φ."""
        s, c = math.sin(phi), math.cos(phi)
        return math.sqrt(self.a**2 * s * s + self.b**2 * c * c)

    def focal_weight(self, phi):
        """C(φ) = b² + (a² − b²) sin²φ."""
        return self.b**2 + self.c**2 * math.sin(phi) ** 2

    def focal_weight_array(self, phi):
        return self.b**2 + self.c**2 * np.sin(phi) ** 2

    def boundary_angle(self, x, y):
        """Parameter φ of a boundary point (x, y) = (a cos φ, b sin φ), in (−π, π]."""
        return math.atan2(y / self.b, x / self.a)


@dataclass(frozen=True)
class CausticParam:
    lam: float

    @property
    def lam2(self):
        return self.lam * self.lam

    @classmethod
    def from_lambda2(cls, lam2, table):
        if not 0.0 < lam2 < table.b**2:
            raise RegimeError(
                f"caustic parameter lambda^2={lam2!r} outside the elliptic regime (0, {table.b**2!r})"
            )
        return cls(math.sqrt(lam2))

    def semi_axes(self, table):
        return math.sqrt(table.a**2 - self.lam2), math.sqrt(table.b**2 - self.lam2)


def elliptical_to_cartesian(mu, phi, table):
    if mu <= 0.0:
        raise ValueError("elliptical radius mu must be positive")
    return (
        table.c * math.cosh(mu) * math.cos(phi),
        table.c * math.sinh(mu) * math.sin(phi),
    )


def cartesian_to_elliptical(x, y, table):
    """Inverse of :func:`elliptical_to_cartesian`; φ returned in (−π, π]."""
    c = table.c
    r_plus = math.hypot(x + c, y)
    r_minus = math.hypot(x - c, y)
    cosh_mu = 0.5 * (r_plus + r_minus) / c
    if cosh_mu <= 1.0 + 1e-15:
        raise RegimeError("point lies on the focal segment")
    mu = math.acosh(cosh_mu)
    return mu, math.atan2(y / (c * math.sinh(mu)), x / (c * cosh_mu))


def conformal_factor(mu, phi, table):
    """f = sqrt(a²(cosh²μ − cos²φ)) (a² normalization, see the decisions ledger)."""
    return math.sqrt(table.a**2 * (math.cosh(mu) ** 2 - math.cos(phi) ** 2))


def curvature(phi, table):
    s, c = math.sin(phi), math.cos(phi)
    return table.a * table.b / (table.a**2 * s * s + table.b**2 * c * c) ** 1.5


def caustic_lambda2_from_boundary(phi, omega, table):
    """Unchecked λ² = sin²ω · C(φ) for a boundary ray (may exceed b²)."""
    return math.sin(omega) ** 2 * table.focal_weight(phi)


def caustic_from_boundary(phi, omega, table):
    lam2 = caustic_lambda2_from_boundary(phi, omega, table)
    if lam2 >= table.b**2:
        raise RegimeError("hyperbolic caustic regime")
    return CausticParam.from_lambda2(lam2, table)


def line_lambda2(point, direction, table):
    """Unchecked λ² of the line through ``point`` along ``direction``."""
    dx, dy = direction
    norm = math.hypot(dx, dy)
    nx, ny = -dy / norm, dx / norm
    p = nx * point[0] + ny * point[1]
    return table.a**2 * nx * nx + table.b**2 * ny * ny - p * p


def caustic_of_ray(point, direction, table):
    return CausticParam.from_lambda2(line_lambda2(point, direction, table), table)


def polar_caustic_lambda2(phi, omega, table):
    """λ² from the circular-polar form M(α)(1 − cos 2ω), α the polar angle of γ(φ)."""
    a2, b2 = table.a**2, table.b**2
    alpha = math.atan2(table.b * math.sin(phi), table.a * math.cos(phi))
    m = 0.5 * (a2 + b2) - a2 * b2 / (a2 + b2 - (a2 - b2) * math.cos(2.0 * alpha))
    return m * (1.0 - math.cos(2.0 * omega))
