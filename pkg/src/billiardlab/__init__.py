"""Numerical laboratory for elliptical billiards, caustics and spectral-rigidity coefficients."""

from .actionangle import (
    ActionAngle,
    PeriodicFamily,
    aa_from_phase,
    aa_step,
    d_delta_d_lambda2,
    phase_from_aa,
    poncelet_length,
    solve_rotation,
)
from .billiard import GlancingError, LiftedOrbit, PhasePoint, billiard_step, interior_launch, iterate
from .connect import ConnectingOrbit, critical_point_check, find_connecting_orbits, psi_gradient
from .geometry import (
    CausticParam,
    EllipseTable,
    RegimeError,
    caustic_from_boundary,
    caustic_of_ray,
    cartesian_to_elliptical,
    elliptical_to_cartesian,
)
from .hadamard import DiskRobinMode, disk_eigenvalue, variational_check
from .specfun import Modulus, bessel_j, bessel_j_prime, ellip_F, ellip_K, jacobi_am, jacobi_sn_cn
from .wavetrace import (
    BoundaryProfile,
    amplitude_Aj,
    coefficient_chat_j,
    coefficient_cj,
    domega_dtheta,
    g_factor,
    moment_analysis,
)

__all__ = [
    "aa_from_phase",
    "aa_step",
    "ActionAngle",
    "amplitude_Aj",
    "bessel_j",
    "bessel_j_prime",
    "billiard_step",
    "BoundaryProfile",
    "cartesian_to_elliptical",
    "caustic_from_boundary",
    "caustic_of_ray",
    "CausticParam",
    "coefficient_chat_j",
    "coefficient_cj",
    "ConnectingOrbit",
    "critical_point_check",
    "d_delta_d_lambda2",
    "disk_eigenvalue",
    "DiskRobinMode",
    "domega_dtheta",
    "ellip_F",
    "ellip_K",
    "EllipseTable",
    "elliptical_to_cartesian",
    "find_connecting_orbits",
    "g_factor",
    "GlancingError",
    "interior_launch",
    "iterate",
    "jacobi_am",
    "jacobi_sn_cn",
    "LiftedOrbit",
    "Modulus",
    "moment_analysis",
    "PeriodicFamily",
    "phase_from_aa",
    "PhasePoint",
    "poncelet_length",
    "psi_gradient",
    "RegimeError",
    "solve_rotation",
    "variational_check",
]

__version__ = "0.1.0"
