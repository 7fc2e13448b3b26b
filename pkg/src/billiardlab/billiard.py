"""Exact billiard map on the ellipse, orbit iteration and interior launches."""

import math
from dataclasses import dataclass

from .geometry import RegimeError

TWO_PI = 2.0 * math.pi


class GlancingError(RegimeError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


@dataclass(frozen=True)
class PhasePoint:
    phi: float
    omega: float


@dataclass(frozen=True)
class LiftedOrbit:
    states: tuple
    lengths: tuple
    winding: int

    @property
    def total_length(self):
        return math.fsum(self.lengths)


def frame(phi, table):
    """Boundary point, unit positive tangent and unit inward normal at φ."""
    s, c = math.sin(phi), math.cos(phi)
    tx, ty = -table.a * s, table.b * c
    norm = math.hypot(tx, ty)
    tx, ty = tx / norm, ty / norm
    return (table.a * c, table.b * s), (tx, ty), (-ty, tx)


def _forward_exit(px, py, dx, dy, table):
    # Forward root of |p + t d| = 1 in the ellipse norm, for p inside or on the boundary.
    ia2, ib2 = 1.0 / table.a**2, 1.0 / table.b**2
    qa = dx * dx * ia2 + dy * dy * ib2
    qb = 2.0 * (px * dx * ia2 + py * dy * ib2)
    qc = px * px * ia2 + py * py * ib2 - 1.0
    disc = max(qb * qb - 4.0 * qa * qc, 0.0)
    root = math.sqrt(disc)
    if qb >= 0.0:
        return -2.0 * qc / (qb + root) if qb + root > 0.0 else 0.0
    return (-qb + root) / (2.0 * qa)


def _chord_length(phi, dx, dy, table):
    # Base point on the boundary: the zero root is deflated exactly.
    px, py = table.a * math.cos(phi), table.b * math.sin(phi)
    ia2, ib2 = 1.0 / table.a**2, 1.0 / table.b**2
    return -2.0 * (px * dx * ia2 + py * dy * ib2) / (dx * dx * ia2 + dy * dy * ib2)


def _land(phi_from, px, py, dx, dy, table):
    """Reflect an incoming direction at boundary point (px, py); returns lifted φ, ω."""
    angle = table.boundary_angle(px, py)
    phi = phi_from + (angle - phi_from) % TWO_PI
    _, (tx, ty), (nx, ny) = frame(phi, table)
    omega = math.atan2(-(dx * nx + dy * ny), dx * tx + dy * ty)
    return phi, omega


def _step(phi, omega, table):
    (px, py), (tx, ty), (nx, ny) = frame(phi, table)
    co, so = math.cos(omega), math.sin(omega)
    dx, dy = co * tx + so * nx, co * ty + so * ny
    t = _chord_length(phi, dx, dy, table)
    if t <= 1e-12 * table.a:
        raise GlancingError("glancing ray: forward root coincides with the base point")
    new_phi, new_omega = _land(phi, px + t * dx, py + t * dy, dx, dy, table)
    if new_phi == phi:
        raise GlancingError("glancing ray: no angular advance")
    return new_phi, new_omega, t


def billiard_step(state, table):
    if not 0.0 < state.omega < math.pi:
        raise GlancingError("incidence angle must lie strictly inside (0, pi)")
    phi, omega, _ = _step(state.phi, state.omega, table)
    return PhasePoint(phi, omega)


def iterate(state, n, table):
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < state.omega < math.pi:
        raise GlancingError("incidence angle must lie strictly inside (0, pi)", step=0)
    states = [state]
    lengths = []
    # Trig is evaluated on the reduced angle; the lifted value only feeds the output.
    turns, phi = divmod(state.phi, TWO_PI)
    omega = state.omega
    for i in range(n):
        try:
            phi, omega, t = _step(phi, omega, table)
        except GlancingError as err:
            raise GlancingError("glancing ray", step=i) from err
        if phi >= TWO_PI:
            phi -= TWO_PI
            turns += 1
        states.append(PhasePoint(phi + turns * TWO_PI, omega))
        lengths.append(t)
    winding = round((states[-1].phi - state.phi) / TWO_PI)
    return LiftedOrbit(tuple(states), tuple(lengths), winding)


def outgoing_direction(state, table):
    _, (tx, ty), (nx, ny) = frame(state.phi, table)
    co, so = math.cos(state.omega), math.sin(state.omega)
    return co * tx + so * nx, co * ty + so * ny


@dataclass(frozen=True)
class InteriorOrbit:
    """Ray from an interior point followed by ``len(impacts)`` reflections.

    ``impacts`` hold lifted φ and the (equal) angle of reflection at each
    footpoint; ``lengths`` are the link lengths from the start point up to
    the last impact; the final link leaves ``points[-1]`` along
    ``final_direction``.
    """

    start: tuple
    direction: tuple
    impacts: tuple
    points: tuple
    lengths: tuple
    final_direction: tuple

    @property
    def final_line(self):
        return self.points[-1], self.final_direction


def interior_launch(x, direction, j, table):
    if j < 1:
        raise ValueError("need at least one reflection")
    dx, dy = direction
    norm = math.hypot(dx, dy)
    dx, dy = dx / norm, dy / norm
    x0, y0 = float(x[0]), float(x[1])
    if x0 * x0 / table.a**2 + y0 * y0 / table.b**2 >= 1.0:
        raise ValueError("launch point must be strictly inside the table")
    t = _forward_exit(x0, y0, dx, dy, table)
    start_angle = table.boundary_angle(x0, y0)
    px, py = x0 + t * dx, y0 + t * dy
    first = table.boundary_angle(px, py)
    phi = start_angle + math.remainder(first - start_angle, TWO_PI)
    _, (tx, ty), (nx, ny) = frame(phi, table)
    omega = math.atan2(-(dx * nx + dy * ny), dx * tx + dy * ty)
    impacts = [PhasePoint(phi, omega)]
    lengths = [t]
    for i in range(1, j):
        try:
            phi, omega, t = _step(phi, omega, table)
        except GlancingError as err:
            raise GlancingError("glancing ray", step=i) from err
        impacts.append(PhasePoint(phi, omega))
        lengths.append(t)
    points = tuple(table.boundary(p.phi) for p in impacts)
    return InteriorOrbit(
        start=(x0, y0),
        direction=(dx, dy),
        impacts=tuple(impacts),
        points=points,
        lengths=tuple(lengths),
        final_direction=outgoing_direction(impacts[-1], table),
    )
