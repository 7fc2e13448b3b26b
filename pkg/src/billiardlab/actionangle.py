"""Action-angle coordinates for elliptic caustics, periodic families, and their lengths."""

import math
from dataclasses import dataclass

import numpy as np

from .billiard import PhasePoint, iterate
from .geometry import CausticParam, RegimeError, caustic_lambda2_from_boundary
from .quadrature import gauss_legendre
from .specfun import Modulus, ellip_F, ellip_K, jacobi_am, jacobi_sn_cn

HALF_PI = 0.5 * math.pi


def caustic_modulus(lam, table):
    """k_λ with k² = (a² − b²)/(a² − λ²)."""
    return Modulus(math.sqrt(table.c**2 / (table.a**2 - lam.lam2)))


def phase_step(lam, table):
    """δ_λ = 2 F(arcsin(λ/b), k_λ)."""
    return 2.0 * ellip_F(math.asin(lam.lam / table.b), caustic_modulus(lam, table))


@dataclass(frozen=True)
class ActionAngle:
    s: float
    lam: CausticParam
    k: Modulus
    delta: float
    orientation: int = 1

    @property
    def period(self):
        return 4.0 * ellip_K(self.k)

    def footpoint(self, table):
        sn, cn = jacobi_sn_cn(self.s, self.k)
        return -table.a * sn, table.b * cn


def aa_from_phase(state, table):
    lam2 = caustic_lambda2_from_boundary(state.phi, state.omega, table)
    if not 0.0 < lam2 < table.b**2:
        raise RegimeError("state is not in the elliptic caustic regime")
    lam = CausticParam(math.sqrt(lam2))
    k = caustic_modulus(lam, table)
    s = ellip_F(state.phi - HALF_PI, k)
    orientation = 1 if state.omega <= HALF_PI else -1
    return ActionAngle(s, lam, k, phase_step(lam, table), orientation)


def phase_from_aa(state, table):
    phi = jacobi_am(state.s, state.k) + HALF_PI
    sin_omega = state.lam.lam / math.sqrt(table.focal_weight(phi))
    omega = math.asin(min(sin_omega, 1.0))
    if state.orientation < 0:
        omega = math.pi - omega
    return PhasePoint(phi, omega)


def aa_step(state, count=1):
    return ActionAngle(
        state.s + state.orientation * count * state.delta,
        state.lam,
        state.k,
        state.delta,
        state.orientation,
    )


def sin2_weight(k2):
    """Integrand sin²τ (1 − k² sin²τ)^(−3/2) as a vectorized function of τ."""

    def weight(t):
        s2 = np.sin(t) ** 2
        return s2 * (1.0 - k2 * s2) ** -1.5

    return weight


def incomplete_sin2_integral(psi, k):
    """∫₀^ψ sin²τ (1 − k² sin²τ)^(−3/2) dτ by 64-point Gauss-Legendre."""
    k2 = k.k2 if isinstance(k, Modulus) else k * k
    if psi == 0.0:
        return 0.0
    return gauss_legendre(sin2_weight(k2), 0.0, psi, n=64)


def d_delta_d_lambda2(lam, table):
    """Derivative of δ_λ with respect to λ² (k²/(a²−λ²) coefficient, see ledger)."""
    lam_value, b = lam.lam, table.b
    if not 0.0 < lam_value < b:
        raise RegimeError("lambda must lie in (0, b)")
    k = caustic_modulus(lam, table)
    ratio2 = lam.lam2 / b**2
    direct = 1.0 / (b * lam_value * math.sqrt(1.0 - k.k2 * ratio2) * math.sqrt(1.0 - ratio2))
    through_modulus = k.k2 / (table.a**2 - lam.lam2) * incomplete_sin2_integral(
        math.asin(lam_value / b), k
    )
    return direct + through_modulus


def d_quarter_period_d_lambda2(lam, table):
    k = caustic_modulus(lam, table)
    dk2 = k.k2 / (table.a**2 - lam.lam2)
    return 0.5 * incomplete_sin2_integral(HALF_PI, k) * dk2


@dataclass(frozen=True)
class PeriodicFamily:
    j: int
    lam_j: CausticParam
    T_j: float
    delta_j: float
    p: int = 1

    @property
    def q(self):
        return self.j


def _closure_defect(lam_value, p, q, table):
    lam = CausticParam(lam_value)
    return q * phase_step(lam, table) - 4.0 * p * ellip_K(caustic_modulus(lam, table))


def solve_rotation(p, q, table, tol=1e-12):
    """Caustic of the rotation-number p/q family from q·δ_λ = 4p·K(k_λ)."""
    if p < 1 or q < 3 or 2 * p > q or math.gcd(p, q) != 1:
        raise RegimeError(f"rotation number {p}/{q} not supported (need coprime, q >= 3, p/q < 1/2)")
    lo = 1e-9 * table.b
    hi = table.b * (1.0 - 1e-12)
    if _closure_defect(lo, p, q, table) >= 0.0 or _closure_defect(hi, p, q, table) <= 0.0:
        raise RegimeError(f"no elliptic caustic with rotation number {p}/{q}")
    while hi - lo > tol * table.b:
        mid = 0.5 * (lo + hi)
        if _closure_defect(mid, p, q, table) > 0.0:
            hi = mid
        else:
            lo = mid
    lam_value = 0.5 * (lo + hi)
    for _ in range(2):
        lam = CausticParam(lam_value)
        slope = q * d_delta_d_lambda2(lam, table) - 4.0 * p * d_quarter_period_d_lambda2(lam, table)
        lam2 = lam.lam2 - _closure_defect(lam_value, p, q, table) / slope
        candidate = math.sqrt(lam2) if lam2 > 0.0 else lam_value
        if abs(candidate - lam_value) < 10.0 * tol * table.b:
            lam_value = candidate
    lam = CausticParam(lam_value)
    family = PeriodicFamily(q, lam, 0.0, phase_step(lam, table), p)
    length = poncelet_length(family, 0.0, table)
    return PeriodicFamily(q, lam, length, family.delta_j, p)


def chain_points(family, s0, table):
    k = caustic_modulus(family.lam_j, table)
    points = []
    for m in range(family.j + 1):
        sn, cn = jacobi_sn_cn(s0 + m * family.delta_j, k)
        points.append((-table.a * sn, table.b * cn))
    return points


def poncelet_length(family, s0, table):
    """Length of the closed chain q_λ(s0), q_λ(s0 + δ), …, q_λ(s0 + jδ)."""
    points = chain_points(family, s0, table)
    return math.fsum(
        math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in zip(points, points[1:])
    )


def family_start(family, s0, table):
    """Phase point of the family's orbit at action-angle coordinate s0 (CCW)."""
    k = caustic_modulus(family.lam_j, table)
    return phase_from_aa(ActionAngle(s0, family.lam_j, k, family.delta_j), table)


def closure_residual(family, table, s0=0.0):
    """Footpoint distance after j geometric steps, and the winding of the closed orbit."""
    start = family_start(family, s0, table)
    orbit = iterate(start, family.j, table)
    end = orbit.states[-1]
    x0, y0 = table.boundary(start.phi)
    x1, y1 = table.boundary(end.phi)
    return math.hypot(x1 - x0, y1 - y0), orbit.winding, orbit
