"""Elliptic integrals of the first kind, the Jacobi amplitude, and Bessel J_n.

Moduli are passed as ``k`` (a float in [0, 1) or a :class:`Modulus`).
"""

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class Modulus:
    k: float

    def __post_init__(self):
        if not 0.0 <= self.k < 1.0:
            raise ValueError(f"elliptic modulus must lie in [0, 1), got {self.k!r}")

    @property
    def k2(self):
        return self.k * self.k

    @property
    def kprime(self):
        return math.sqrt((1.0 - self.k) * (1.0 + self.k))


def _as_k(k):
    if isinstance(k, Modulus):
        return k.k
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ValueError(f"elliptic modulus must lie in [0, 1), got {k!r}")
    return k


def agm(x, y):
    """Arithmetic-geometric mean of two positive numbers."""
    for _ in range(64):
        if abs(x - y) <= 1e-16 * x:
            break
        x, y = 0.5 * (x + y), math.sqrt(x * y)
    return 0.5 * (x + y)


def ellip_K(k):
    """Complete elliptic integral of the first kind, π / (2 AGM(1, k'))."""
    k = _as_k(k)
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def _reduce_amplitude(phi):
    # phi = m*pi + r with r in [-pi/2, pi/2]
    m = math.floor(phi / math.pi + 0.5)
    return m, phi - m * math.pi


def _landen_F(r, k):
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    phase = r
    scale = 1.0
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        squeezed = math.atan2(b * math.sin(phase), a * math.cos(phase))
        squeezed += 2.0 * math.pi * round((phase - squeezed) / (2.0 * math.pi))
        phase += squeezed
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        scale *= 2.0
    return phase / (scale * a)


def _quad_F(r, k):
    if r == 0.0:
        return 0.0
    k2 = k * k
    return gauss_legendre(
        lambda t: 1.0 / np.sqrt(1.0 - k2 * np.sin(t) ** 2), 0.0, r, n=32, panels=8
    )


def ellip_F(phi, k, method="landen"):
    """Incomplete elliptic integral of the first kind F(φ, k).

    ``method`` selects the descending Landen (AGM phase) iteration or a
    composite Gauss-Legendre quadrature of the defining integral.
    """
    k = _as_k(k)
    m, r = _reduce_amplitude(float(phi))
    if method == "landen":
        part = _landen_F(r, k)
    elif method == "quad":
        part = _quad_F(r, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    if m == 0:
        return part
    return 2.0 * m * ellip_K(k) + part


def jacobi_am(s, k):
    """Jacobi amplitude: the inverse of φ ↦ F(φ, k)."""
    k = _as_k(k)
    s = float(s)
    if k == 0.0:
        return s
    quarter = ellip_K(k)
    m = math.floor(s / (2.0 * quarter) + 0.5)
    r = s - 2.0 * m * quarter
    k2 = k * k
    lo, hi = -_HALF_PI, _HALF_PI
    phi = min(max(r, lo), hi)
    for _ in range(60):
        resid = _landen_F(phi, k) - r
        if resid > 0.0:
            hi = phi
        else:
            lo = phi
        step = resid * math.sqrt(1.0 - k2 * math.sin(phi) ** 2)
        trial = phi - step
        if not lo <= trial <= hi:
            trial = 0.5 * (lo + hi)
        if abs(trial - phi) <= 1e-16 * max(1.0, abs(phi)):
            phi = trial
            break
        phi = trial
    return m * math.pi + phi


def jacobi_sn_cn(s, k):
    amp = jacobi_am(s, k)
    return math.sin(amp), math.cos(amp)


def _bessel_series(n, x):
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    q = half * half
    i = 0
    while True:
        i += 1
        term *= -q / (i * (i + n))
        total += term
        if abs(term) <= 1e-17 * abs(total) and i > half:
            return total
        if term == 0.0:
            return total


def _bessel_miller(n, x):
    start = 2 * ((max(n, int(x)) + int(math.sqrt(160.0 * max(n, int(x)))) + 20) // 2)
    upper, current = 0.0, 1e-30
    norm = 0.0
    result = 0.0
    for order in range(start, 0, -1):
        lower = 2.0 * order / x * current - upper
        upper, current = current, lower
        if abs(current) > 1e250:
            current *= 1e-250
            upper *= 1e-250
            result *= 1e-250
            norm *= 1e-250
        if order - 1 == n:
            result = current
        if (order - 1) % 2 == 0 and order - 1 > 0:
            norm += 2.0 * current
    norm += current
    return result / norm


def bessel_j(n, x):
    """Bessel function of the first kind J_n(x) for integer n ≥ 0 and x ≥ 0."""
    n = int(n)
    x = float(x)
    if n < 0 or x < 0.0:
        raise ValueError("bessel_j needs n >= 0 and x >= 0")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < n + 10.0:
        return _bessel_series(n, x)
    return _bessel_miller(n, x)


def bessel_j_prime(n, x):
    """Derivative J_n'(x) via (J_{n-1} - J_{n+1}) / 2, with J_{-1} = -J_1."""
    n = int(n)
    if n == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
