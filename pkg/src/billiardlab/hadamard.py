"""Robin eigenvalues of the disk and a finite-difference check of the eigenvalue variation.

Boundary condition convention: ∂u/∂ν = K u on the circle r = R.
"""

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre
from .specfun import bessel_j, bessel_j_prime


class BranchError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiskRobinMode:
    R: float
    K0: float
    n: int
    branch: int
    lam: float
    norm: float
    multiplicity: int

    @property
    def angular_mass(self):
        """∫₀^{2π} of the squared angular factor (1 for n = 0, cos² for n ≥ 1)."""
        return 2.0 * math.pi if self.n == 0 else math.pi


def robin_residual(lam, R, K0, n):
    return lam * bessel_j_prime(n, lam * R) - K0 * bessel_j(n, lam * R)


def _residual_slope(lam, R, K0, n):
    # d/dλ [λ J_n'(λR) − K0 J_n(λR)], using J_n'' from Bessel's equation
    z = lam * R
    jn = bessel_j(n, z)
    jp = bessel_j_prime(n, z)
    jpp = -jp / z - (1.0 - n * n / (z * z)) * jn
    return jp + lam * R * jpp - K0 * R * jp


def _refine(lo, hi, R, K0, n, iterations=100):
    g_lo = robin_residual(lo, R, K0, n)
    g_hi = robin_residual(hi, R, K0, n)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0.0) == (g_hi > 0.0):
        raise BranchError("root not bracketed")
    x = 0.5 * (lo + hi)
    for _ in range(iterations):
        gx = robin_residual(x, R, K0, n)
        if gx == 0.0:
            return x
        if (gx > 0.0) == (g_lo > 0.0):
            lo, g_lo = x, gx
        else:
            hi = x
        slope = _residual_slope(x, R, K0, n)
        trial = x - gx / slope if slope != 0.0 else lo - 1.0
        if not lo < trial < hi:
            trial = 0.5 * (lo + hi)
        if abs(trial - x) <= 4e-16 * x:
            return trial
        x = trial
    return x


def norm_integral(lam, R, n):
    """Closed form of ∫₀^R J_n(λr)² r dr."""
    z = lam * R
    return 0.5 * R * R * (bessel_j_prime(n, z) ** 2 + (1.0 - n * n / (z * z)) * bessel_j(n, z) ** 2)


def radial_mass(lam, R, n, points=64):
    """∫₀^R J_n(λr)² r dr by Gauss-Legendre (independent of the closed form)."""

    def integrand(r):
        return np.array([bessel_j(n, lam * x) ** 2 * x for x in r])

    return gauss_legendre(integrand, 0.0, R, n=points)


def _make_mode(R, K0, n, branch, lam):
    angular = 2.0 * math.pi if n == 0 else math.pi
    norm = 1.0 / math.sqrt(angular * norm_integral(lam, R, n))
    return DiskRobinMode(R, K0, n, branch, lam, norm, 1 if n == 0 else 2)


def disk_eigenvalue(R, K0, n, branch=1, scan_step=0.02, max_z=200.0):
    """The ``branch``-th positive λ with λ J_n'(λR) = K0 J_n(λR)."""
    if R <= 0.0 or n < 0 or branch < 1:
        raise ValueError("need R > 0, n >= 0, branch >= 1")
    found = 0
    z_prev = 1e-6
    g_prev = robin_residual(z_prev / R, R, K0, n)
    z = z_prev
    while z < max_z:
        z = z_prev + scan_step
        g = robin_residual(z / R, R, K0, n)
        if g == 0.0 or (g > 0.0) != (g_prev > 0.0):
            found += 1
            if found == branch:
                lam = _refine(z_prev / R, z / R, R, K0, n)
                return _make_mode(R, K0, n, branch, lam)
        z_prev, g_prev = z, g
    raise BranchError(f"branch {branch} not found for lambda*R < {max_z}")


def _track(mode, R, K0, width):
    """Follow ``mode``'s root to nearby parameters (R, K0) without renumbering branches."""
    lo = mode.lam * (1.0 - width)
    hi = mode.lam * (1.0 + width)
    g_lo = robin_residual(lo, R, K0, mode.n)
    g_hi = robin_residual(hi, R, K0, mode.n)
    if (g_lo > 0.0) == (g_hi > 0.0):
        raise BranchError("perturbed eigenvalue left the tracking window; shrink epsilon")
    probe = [robin_residual(lo + (hi - lo) * i / 16, R, K0, mode.n) for i in range(17)]
    changes = sum((p > 0.0) != (q > 0.0) for p, q in zip(probe, probe[1:]))
    if changes != 1:
        raise BranchError("eigenvalue branch crossing within the perturbation stencil")
    return _refine(lo, hi, R, K0, mode.n)


def perturbed_eigenvalue(mode, rho_dot, k_dot, eps):
    return _track(mode, mode.R + eps * rho_dot, mode.K0 + eps * k_dot, 1e-3)


def eigenvalue_derivative(mode, rho_dot, k_dot, eps=1e-4):
    """Richardson-extrapolated central difference of λ² along (R + ερ̇, K0 + εK̇)."""

    def central(h):
        up = perturbed_eigenvalue(mode, rho_dot, k_dot, h) ** 2
        down = perturbed_eigenvalue(mode, rho_dot, k_dot, -h) ** 2
        return (up - down) / (2.0 * h)

    return (4.0 * central(0.5 * eps) - central(eps)) / 3.0


def boundary_mass(mode):
    """∮|Ψ|² dq over the circle, per basis function."""
    return mode.norm**2 * bessel_j(mode.n, mode.lam * mode.R) ** 2 * mode.angular_mass * mode.R


def variational_rhs(mode, rho_dot, k_dot):
    """Boundary-integral side of the variation for one basis function of the mode."""
    mass = boundary_mass(mode)
    tangential = mode.n**2 / mode.R**2 * mass * rho_dot
    lam2 = mode.lam**2
    curvature = 1.0 / mode.R
    return tangential - mass * (lam2 * rho_dot + mode.K0**2 * rho_dot + k_dot + mode.K0 * curvature * rho_dot)


def variational_check(mode, rho_dot, k_dot, eps=1e-4):
    """(lhs, rhs, relative error); for n ≥ 1 both sides are summed over the 2-dim eigenspace."""
    lhs = mode.multiplicity * eigenvalue_derivative(mode, rho_dot, k_dot, eps)
    rhs = mode.multiplicity * variational_rhs(mode, rho_dot, k_dot)
    scale = max(abs(lhs), abs(rhs))
    return lhs, rhs, abs(lhs - rhs) / scale if scale > 0.0 else 0.0
