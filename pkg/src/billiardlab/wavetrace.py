"""Wave-trace variation coefficients c_j, ĉ_j, the amplitude A_j and the moment analysis."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .actionangle import caustic_modulus, d_delta_d_lambda2, sin2_weight, solve_rotation
from .geometry import conformal_factor
from .quadrature import gauss_legendre, periodic_grid, periodic_trapezoid

log = logging.getLogger(__name__)

RHO_DOT = "rho_dot"
K_DOT = "k_dot"

SYMMETRY_TOL = 1e-10


class AsymmetricProfileError(ValueError):
    pass


def _trig_interpolant(samples):
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    coeffs = np.fft.rfft(samples) / n
    weights = np.full(coeffs.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    coeffs = coeffs * weights
    modes = np.arange(coeffs.size)

    def values(phi):
        phi = np.asarray(phi, dtype=float)
        phase = np.exp(1j * np.multiply.outer(phi, modes))
        return np.real(phase @ coeffs)

    return values


@dataclass(frozen=True)
class BoundaryProfile:
    """A ℤ₂×ℤ₂-symmetric boundary function of φ (vectorized ``values``)."""

    values: object
    kind: str = RHO_DOT
    name: str = "custom"

    def __post_init__(self):
        if self.kind not in (RHO_DOT, K_DOT):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        grid = periodic_grid(256)
        v = np.asarray(self(grid), dtype=float)
        defect = max(
            float(np.max(np.abs(v - self(-grid)))),
            float(np.max(np.abs(v - self(math.pi - grid)))),
        )
        if defect >= SYMMETRY_TOL:
            raise AsymmetricProfileError(
                f"profile {self.name!r} is not invariant under the ellipse symmetries (defect {defect:.3g})"
            )

    def __call__(self, phi):
        return np.broadcast_to(np.asarray(self.values(phi), dtype=float), np.shape(phi))

    @classmethod
    def from_samples(cls, samples, kind=RHO_DOT, name="sampled"):
        """Profile from samples on the uniform grid 2πi/N, i = 0..N−1 (trigonometric interpolation)."""
        return cls(_trig_interpolant(samples), kind, name)


BUILTIN_PROFILES = {
    "zero": lambda phi: np.zeros_like(np.asarray(phi, dtype=float)),
    "const": lambda phi: np.ones_like(np.asarray(phi, dtype=float)),
    "cos2phi": lambda phi: np.cos(2.0 * np.asarray(phi, dtype=float)),
    "cos4phi": lambda phi: np.cos(4.0 * np.asarray(phi, dtype=float)),
}


def builtin_profile(name, kind=RHO_DOT):
    try:
        return BoundaryProfile(BUILTIN_PROFILES[name], kind, name)
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(BUILTIN_PROFILES)}") from None


@dataclass(frozen=True)
class SpectralCoefficient:
    j: int
    lam_j: object
    c_j: float | None
    chat_j: float | None
    quadrature_error: float


def complete_sin2_integral(k, n=2048):
    """∫₀^{2π} sin²τ (1 − k² sin²τ)^(−3/2) dτ by the periodic trapezoid rule."""
    return periodic_trapezoid(sin2_weight(k * k), n)


def g_factor(lam, j, table, n=2048):
    """G(λ) = −k²/(2(a²−λ²))·∫₀^{2π} sin²τ(1−k²sin²τ)^{−3/2}dτ + (j+1)·dδ/dλ²."""
    k = caustic_modulus(lam, table)
    modulus_term = -k.k2 / (2.0 * (table.a**2 - lam.lam2)) * complete_sin2_integral(k.k, n)
    return modulus_term + (j + 1) * d_delta_d_lambda2(lam, table)


def _family_g(family, table, n=2048):
    # A family with j links closes after j billiard steps, i.e. the (j+1) factor with j-1.
    value = g_factor(family.lam_j, family.j - 1, table, n)
    if value <= 0.0:
        log.debug("G(lambda_%d) = %.17g is not positive; absolute value used", family.j, value)
    return value


def family_angle(phi, family, table):
    """Counterclockwise incidence angle of the family's orbit at boundary angle φ."""
    return math.asin(family.lam_j.lam / math.sqrt(table.focal_weight(phi)))


def domega_dtheta(phi, family, table):
    """dω/dθ at the family's orbit through boundary angle φ."""
    lam = family.lam_j
    weight = table.focal_weight(phi)
    sin_omega = lam.lam / math.sqrt(weight)
    cos_omega = math.sqrt((1.0 - sin_omega) * (1.0 + sin_omega))
    dlam2_domega = 2.0 * sin_omega * cos_omega * weight
    k = caustic_modulus(lam, table)
    # am(t_φ) = φ − π/2, so sn(t_φ) = −cos φ
    amp_speed = math.sqrt(1.0 - k.k2 * math.cos(phi) ** 2)
    return 1.0 / (dlam2_domega * amp_speed * _family_g(family, table))


def amplitude_Aj(phi, family, table):
    f = conformal_factor(table.mu0, phi, table)
    sin_omega = family.lam_j.lam / math.sqrt(table.focal_weight(phi))
    return abs(f**5 / sin_omega * domega_dtheta(phi, family, table))


def _radial_weight(phi, table):
    # |f⁵ (a²cos²φ + b²sin²φ)|^{1/2}, with f taken on the boundary
    a2, b2 = table.a**2, table.b**2
    f2 = a2 * (a2 / table.c**2 - np.cos(phi) ** 2)
    return np.sqrt(np.abs(f2**2.5 * (a2 * np.cos(phi) ** 2 + b2 * np.sin(phi) ** 2)))


def _rho_integrand(profile, family, g, table):
    lam2 = family.lam_j.lam2
    a2 = table.a**2

    def integrand(phi):
        weight = table.focal_weight_array(phi)
        return (
            math.sqrt(abs(lam2 / (2.0 * g)))
            * _radial_weight(phi, table)
            * np.abs((a2 - lam2) / weight) ** 0.25
            * profile(phi)
            / np.sqrt(weight - lam2)
        )

    return integrand


def _k_integrand(profile, family, g, table):
    lam2 = family.lam_j.lam2
    a2 = table.a**2

    def integrand(phi):
        weight = table.focal_weight_array(phi)
        scale = np.sqrt(np.abs(np.sqrt(weight) * math.sqrt(a2 - lam2) / (2.0 * g * lam2)))
        return scale * _radial_weight(phi, table) * profile(phi) / np.sqrt(weight - lam2)

    return integrand


def _refined(integrand, n):
    fine = periodic_trapezoid(integrand, n)
    coarse = periodic_trapezoid(integrand, n // 2)
    return fine, abs(fine - coarse)


def _check_kind(profile, kind):
    if profile.kind != kind:
        raise ValueError(f"expected a {kind} profile, got {profile.kind}")


def coefficient_cj(profile, j, table, n=2048, family=None):
    _check_kind(profile, RHO_DOT)
    family = family or solve_rotation(1, j, table)
    g = _family_g(family, table)
    value, err = _refined(_rho_integrand(profile, family, g, table), n)
    return SpectralCoefficient(j, family.lam_j, value, None, err)


def coefficient_chat_j(profile, j, table, n=2048, family=None):
    _check_kind(profile, K_DOT)
    family = family or solve_rotation(1, j, table)
    g = _family_g(family, table)
    value, err = _refined(_k_integrand(profile, family, g, table), n)
    return SpectralCoefficient(j, family.lam_j, None, value, err)


def separated_factor(family, table):
    """The λ-only prefactor of c_j: |λ²/(2G)|^{1/2}·(a²−λ²)^{1/4}."""
    lam2 = family.lam_j.lam2
    g = _family_g(family, table)
    return math.sqrt(abs(lam2 / (2.0 * g))) * (table.a**2 - lam2) ** 0.25


def moment_weight(phi, table):
    """F(φ) = |f⁵(a²cos²φ + b²sin²φ)|^{1/2}·C(φ)^{−1/4}."""
    return _radial_weight(phi, table) * table.focal_weight_array(phi) ** -0.25


@dataclass(frozen=True)
class MomentReport:
    moments: tuple
    residual: float
    k_max: int


def moments(profile, k_max, table, n=2048):
    """m_k = ∫₀^{π/2} F ρ̇ / C^{1/2+k} dφ, as a quarter of the full-period integral."""
    if not 0 <= k_max <= 40:
        raise ValueError("k_max must lie in [0, 40]")
    out = []
    for k in range(k_max + 1):
        out.append(
            0.25
            * periodic_trapezoid(
                lambda phi: moment_weight(phi, table)
                * profile(phi)
                * table.focal_weight_array(phi) ** (-0.5 - k),
                n,
            )
        )
    return out


def quarter_moment(profile, k, table, n=200):
    """Same moment by Gauss-Legendre directly on [0, π/2]."""
    return gauss_legendre(
        lambda phi: moment_weight(phi, table) * profile(phi) * table.focal_weight_array(phi) ** (-0.5 - k),
        0.0,
        0.5 * math.pi,
        n=n // 4,
        panels=4,
    )


def reconstruction_residual(profile, k_max, table, samples=400):
    """Relative least-squares residual of ρ̇F/√C in span{C^{−k}, k = 0..k_max} on [0, π/2]."""
    phi = np.linspace(0.0, 0.5 * math.pi, samples)
    weight = table.focal_weight_array(phi)
    target = profile(phi) * moment_weight(phi, table) / np.sqrt(weight)
    norm = float(np.linalg.norm(target))
    if norm == 0.0:
        return 0.0
    basis = np.stack([weight ** (-k) for k in range(k_max + 1)], axis=1)
    basis /= np.linalg.norm(basis, axis=0)
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    return float(np.linalg.norm(target - basis @ coef)) / norm


def moment_analysis(profile, k_max, table, n=2048):
    return MomentReport(
        tuple(moments(profile, k_max, table, n)),
        reconstruction_residual(profile, k_max, table),
        k_max,
    )


def series_coefficients(moment_values):
    """Coefficients of λ^{2k} in the reduced c_j: 4·binom(2k,k)/4^k·m_k."""
    return [4.0 * math.comb(2 * k, k) / 4.0**k * m for k, m in enumerate(moment_values)]
