"""Broken geodesics with j reflections joining two points near the boundary diagonal.

For interior points x, y close to each other and to the boundary there are
eight such orbits with winding one: four counterclockwise ones, split by
whether the first and last links touch the caustic before (T) or after (N)
their endpoint, and their four clockwise mirror images.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .actionangle import solve_rotation
from .billiard import TWO_PI, GlancingError, interior_launch
from .geometry import RegimeError, cartesian_to_elliptical, line_lambda2
from .quadrature import gauss_legendre

CONFIGS = ("TT", "TN", "NT", "NN")
DIRECTIONS = ("CCW", "CW")
BRANCH_CONVENTION = "k=1..4: CCW TT,TN,NT,NN; k=5..8: CW in the same order (k+4 mirrors k)"


class InsufficientRangeError(RegimeError):
    def __init__(self, message, sweep=None):
        super().__init__(message)
        self.sweep = sweep


@dataclass(frozen=True)
class ConnectSettings:
    j_min: int = 12
    winding_window: float = 0.01
    sweep_points: int = 240
    bisection_iters: int = 80


@dataclass(frozen=True)
class ConnectingOrbit:
    x: tuple
    y: tuple
    j: int
    impacts: tuple
    impact_angles: tuple
    length: float
    direction: str
    config: str
    branch_index: int
    advance: float
    lam2: float
    launch_angle: float = field(repr=False)
    bracket_width: float = field(repr=False)

    def path(self):
        return (self.x, *self.impacts, self.y)


def _mirror(p):
    return (-p[0], p[1])


def _unit(vx, vy):
    norm = math.hypot(vx, vy)
    return vx / norm, vy / norm


def distance_to_boundary(p, table):
    """Euclidean distance from an interior point to the ellipse."""
    a, b = table.a, table.b
    grid = np.linspace(0.0, TWO_PI, 129)[:-1]
    phi = float(grid[np.argmin((a * np.cos(grid) - p[0]) ** 2 + (b * np.sin(grid) - p[1]) ** 2)])
    for _ in range(30):
        s, c = math.sin(phi), math.cos(phi)
        rx, ry = a * c - p[0], b * s - p[1]
        g = -rx * a * s + ry * b * c
        dg = a * a * s * s + b * b * c * c - rx * a * c - ry * b * s
        step = g / dg
        phi -= step
        if abs(step) < 1e-15:
            break
    return math.hypot(a * math.cos(phi) - p[0], b * math.sin(phi) - p[1])


def confocal_tangent_angle(p, table):
    """Direction angle of the positively oriented tangent to the confocal ellipse through p."""
    mu, phi = cartesian_to_elliptical(p[0], p[1], table)
    return math.atan2(math.sinh(mu) * math.cos(phi), -math.cosh(mu) * math.sin(phi))


def _tangency_parameter(px, py, dx, dy, lam2, table):
    # ray parameter of the tangency point with the caustic x²/(a²−λ²) + y²/(b²−λ²) = 1
    ia, ib = 1.0 / (table.a**2 - lam2), 1.0 / (table.b**2 - lam2)
    return -(px * dx * ia + py * dy * ib) / (dx * dx * ia + dy * dy * ib)


def _lift_near(angle, reference):
    return reference + math.remainder(angle - reference, TWO_PI)


def boundary_arclength(phi0, phi1, table):
    return gauss_legendre(
        lambda t: np.sqrt(table.a**2 * np.sin(t) ** 2 + table.b**2 * np.cos(t) ** 2),
        phi0,
        phi1,
        n=64,
        panels=8,
    )


class _Shooter:
    """Counterclockwise shooting from x towards y in one table frame."""

    def __init__(self, x, y, j, table):
        self.x, self.y, self.j, self.table = x, y, j, table
        self.mu_x, self.phi_x = cartesian_to_elliptical(x[0], x[1], table)
        mu_y, phi_y = cartesian_to_elliptical(y[0], y[1], table)
        self.axis_a = table.c * math.cosh(mu_y)
        self.axis_b = table.c * math.sinh(mu_y)
        self.lam2_y = table.b**2 - self.axis_b**2
        self.target = _lift_near(phi_y, self.phi_x) + TWO_PI
        self.alpha_x = confocal_tangent_angle(x, table)

    def launch(self, alpha):
        return interior_launch(self.x, (math.cos(alpha), math.sin(alpha)), self.j, self.table)

    def lam2(self, alpha):
        return line_lambda2(self.x, (math.cos(alpha), math.sin(alpha)), self.table)

    def crossings(self, orbit):
        """Parameters along the final link of its entry into and exit from C_{λ_y}."""
        (px, py), (dx, dy) = orbit.final_line
        ia, ib = 1.0 / self.axis_a**2, 1.0 / self.axis_b**2
        qa = dx * dx * ia + dy * dy * ib
        qb = 2.0 * (px * dx * ia + py * dy * ib)
        qc = px * px * ia + py * py * ib - 1.0
        disc = qb * qb - 4.0 * qa * qc
        if disc <= 0.0:
            mid = -qb / (2.0 * qa)
            return mid, mid
        root = math.sqrt(disc)
        near = 2.0 * qc / (-qb + root) if qb < 0.0 else (-qb - root) / (2.0 * qa)
        return near, qc / (qa * near)

    def mismatch(self, alpha, final):
        orbit = self.launch(alpha)
        near, far = self.crossings(orbit)
        t = far if final == "T" else near
        (px, py), (dx, dy) = orbit.final_line
        qx, qy = px + t * dx, py + t * dy
        angle = math.atan2(qy / self.axis_b, qx / self.axis_a)
        return _lift_near(angle, orbit.impacts[-1].phi) - self.target

    def alpha(self, first, u):
        return self.alpha_x + u if first == "T" else self.alpha_x - u


def _classify(x, y, orbit, lam2, table):
    (x0, y0) = x
    dx, dy = orbit.direction
    t_first = _tangency_parameter(x0, y0, dx, dy, lam2, table)
    first = "T" if 0.0 < t_first else "N"
    (px, py), (fx, fy) = orbit.final_line
    t_last = _tangency_parameter(px, py, fx, fy, lam2, table)
    t_y = (y[0] - px) * fx + (y[1] - py) * fy
    last = "T" if t_last < t_y else "N"
    return first + last


def _bisect(func, lo, hi, f_lo, iterations):
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = func(mid)
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return lo, hi


def _polish(func, lo, hi):
    # one Newton step on the mismatch from the better bracket end, kept only if it helps
    f_lo, f_hi = func(lo), func(hi)
    best, f_best = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
    if hi == lo or f_hi == f_lo:
        return best
    trial = best - f_best * (hi - lo) / (f_hi - f_lo)
    if lo <= trial <= hi and abs(func(trial)) < abs(f_best):
        return trial
    return best


def _sweep_limit(x, j, table):
    # launch-angle window: up to roughly four times the incidence angle of the 1/j family
    try:
        lam = solve_rotation(1, j, table).lam_j.lam
    except RegimeError:
        lam = 0.5 * table.b
    return min(4.0 * math.asin(min(lam / table.b, 1.0)), 0.5 * math.pi)


def _solve_branch(shooter, config, settings, window=None):
    first, last = config
    table = shooter.table

    def along(u):
        return shooter.mismatch(shooter.alpha(first, u), last)

    if window is None:
        u_hi = _sweep_limit(shooter.x, shooter.j, table)
        grid = np.linspace(0.0, u_hi, settings.sweep_points + 1)[1:]
    else:
        grid = np.array(window)
    values = []
    lo = None
    for u in grid:
        alpha = shooter.alpha(first, float(u))
        if shooter.lam2(alpha) >= 0.999 * table.b**2:
            break
        try:
            value = along(float(u))
        except GlancingError:
            values.append(float("nan"))
            continue
        values.append(value)
        if len(values) >= 2 and values[-2] < 0.0 <= value:
            lo = float(grid[len(values) - 2])
            hi = float(u)
            f_lo = values[-2]
            break
    if lo is None:
        raise InsufficientRangeError(
            f"winding target not bracketed for {config} (j={shooter.j})",
            sweep=list(zip(map(float, grid[: len(values)]), values)),
        )
    width = hi - lo
    lo, hi = _bisect(along, lo, hi, f_lo, settings.bisection_iters)
    u = _polish(along, lo, hi)
    return shooter.alpha(first, u), width


def _build(shooter, alpha, width, config_wanted, direction, branch, settings):
    table = shooter.table
    orbit = shooter.launch(alpha)
    lam2 = shooter.lam2(alpha)
    if lam2 <= shooter.lam2_y:
        raise RegimeError("final link does not reach the confocal ellipse through y")
    config = _classify(shooter.x, shooter.y, orbit, lam2, table)
    if config != config_wanted:
        raise RegimeError(f"solver converged to a {config} orbit while targeting {config_wanted}")
    x, y = shooter.x, shooter.y
    points = orbit.points
    length = (
        math.hypot(points[0][0] - x[0], points[0][1] - x[1])
        + math.fsum(orbit.lengths[1:])
        + math.hypot(y[0] - points[-1][0], y[1] - points[-1][1])
    )
    advance = boundary_arclength(shooter.phi_x, shooter.target, table)
    if abs(advance - table.ell) > settings.winding_window * table.ell:
        raise RegimeError("endpoints outside the approximately-one-rotation window")
    angles = tuple(p.phi for p in orbit.impacts)
    if direction == "CW":
        x, y = _mirror(x), _mirror(y)
        points = tuple(_mirror(p) for p in points)
        angles = tuple(math.pi - a for a in angles)
    return ConnectingOrbit(
        x=x,
        y=y,
        j=shooter.j,
        impacts=tuple(points),
        impact_angles=angles,
        length=length,
        direction=direction,
        config=config,
        branch_index=branch,
        advance=advance,
        lam2=lam2,
        launch_angle=alpha,
        bracket_width=width,
    )


def _validate(x, y, j, table, settings):
    if j < settings.j_min:
        raise ValueError(f"j={j} is below j_min={settings.j_min}")
    for name, p in (("x", x), ("y", y)):
        if p[0] ** 2 / table.a**2 + p[1] ** 2 / table.b**2 >= 1.0:
            raise ValueError(f"{name} must lie strictly inside the table")
        if distance_to_boundary(p, table) >= 5.0 * table.b / j:
            raise ValueError(f"{name} is farther than 5b/j from the boundary")
    _, phi_x = cartesian_to_elliptical(x[0], x[1], table)
    _, phi_y = cartesian_to_elliptical(y[0], y[1], table)
    if abs(math.remainder(phi_y - phi_x, TWO_PI)) >= 5.0 / j:
        raise ValueError("x and y are farther apart than 5/j in boundary angle")


def find_connecting_orbits(x, y, j, table, settings=ConnectSettings()):
    """All eight winding-one orbits from x to y with j reflections, ordered by branch index."""
    x = (float(x[0]), float(x[1]))
    y = (float(y[0]), float(y[1]))
    _validate(x, y, j, table, settings)
    orbits = []
    for offset, direction in enumerate(DIRECTIONS):
        if direction == "CCW":
            shooter = _Shooter(x, y, j, table)
        else:
            shooter = _Shooter(_mirror(x), _mirror(y), j, table)
        for i, config in enumerate(CONFIGS):
            alpha, width = _solve_branch(shooter, config, settings)
            orbits.append(
                _build(shooter, alpha, width, config, direction, 4 * offset + i + 1, settings)
            )
    return orbits


def resolve(orbit, x, y, table, settings=ConnectSettings()):
    """Re-solve ``orbit``'s branch for nearby endpoints, warm-started from its launch angle."""
    x = (float(x[0]), float(x[1]))
    y = (float(y[0]), float(y[1]))
    if orbit.direction == "CW":
        x, y = _mirror(x), _mirror(y)
    shooter = _Shooter(x, y, orbit.j, table)
    first = orbit.config[0]
    u0 = orbit.launch_angle - shooter.alpha_x if first == "T" else shooter.alpha_x - orbit.launch_angle
    half = 0.1 * orbit.bracket_width
    window = [max(u0 - half, 1e-15), u0 + half]
    try:
        alpha, _ = _solve_branch(shooter, orbit.config, settings, window=window)
    except InsufficientRangeError:
        alpha, _ = _solve_branch(shooter, orbit.config, settings)
    return _build(
        shooter, alpha, orbit.bracket_width, orbit.config, orbit.direction, orbit.branch_index, settings
    )


def psi_gradient(orbit):
    """Gradients of the length in x and in y: unit vectors from q₁ to x and from q_j to y."""
    (x0, x1), (y0, y1) = orbit.x, orbit.y
    q_first, q_last = orbit.impacts[0], orbit.impacts[-1]
    return _unit(x0 - q_first[0], x1 - q_first[1]), _unit(y0 - q_last[0], y1 - q_last[1])


def stationarity_residual(x, y, impact_angles, table):
    """Max tangential component of ∂L/∂q_m over impacts placed at the given boundary angles."""
    points = [x] + [table.boundary(phi) for phi in impact_angles] + [y]
    worst = 0.0
    for m, phi in enumerate(impact_angles, start=1):
        prev, here, nxt = points[m - 1], points[m], points[m + 1]
        ux, uy = _unit(here[0] - prev[0], here[1] - prev[1])
        vx, vy = _unit(nxt[0] - here[0], nxt[1] - here[1])
        tx, ty = _unit(-table.a * math.sin(phi), table.b * math.cos(phi))
        worst = max(worst, abs((ux - vx) * tx + (uy - vy) * ty))
    return worst


def critical_point_check(orbit, table):
    return stationarity_residual(orbit.x, orbit.y, orbit.impact_angles, table)


def path_length(orbit):
    path = orbit.path()
    return math.fsum(math.hypot(q[0] - p[0], q[1] - p[1]) for p, q in zip(path, path[1:]))


def point_inside(phi, depth, table):
    """Point at distance ``depth`` inside the boundary along the inward normal at φ."""
    s, c = math.sin(phi), math.cos(phi)
    nx, ny = _unit(-table.b * c, -table.a * s)
    return table.a * c + depth * nx, table.b * s + depth * ny


@dataclass(frozen=True)
class AsymptoticReport:
    js: tuple
    dB_dlambda: tuple
    domega_dlambda: tuple
    dphi_dlambda: tuple
    exponent: float
    ratio_range: tuple
    omega_bound: float


def _alpha_for_lambda(shooter, lam2):
    lo, hi = 0.0, 0.5 * math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if shooter.lam2(shooter.alpha("T", mid)) < lam2:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return shooter.alpha("T", 0.5 * (lo + hi))


def asymptotic_checks(j_range, table, phi0=0.3, relative_depth=0.01, step=1e-6):
    """Finite-difference λ-derivatives of the j-th impact angle, reflection angle and target crossing.

    The launch point sits ``relative_depth``·λ_j² inside the boundary so that
    the confocal ellipse through it stays outside the caustic C_{λ_j}.
    """
    js = tuple(int(j) for j in j_range)
    if not js or min(js) < 12 or max(js) > 200:
        raise ValueError("j_range must lie within [12, 200]")
    db, dw, dp = [], [], []
    for j in js:
        lam = solve_rotation(1, j, table).lam_j.lam
        x = point_inside(phi0, relative_depth * lam**2, table)
        shooter = _Shooter(x, x, j, table)
        if shooter.lam2_y >= (lam - step) ** 2:
            raise RegimeError("launch point too deep for the requested caustic")

        def observe(lam_value):
            orbit = shooter.launch(_alpha_for_lambda(shooter, lam_value**2))
            last = orbit.impacts[-1]
            _, far = shooter.crossings(orbit)
            (px, py), (dx, dy) = orbit.final_line
            angle = math.atan2((py + far * dy) / shooter.axis_b, (px + far * dx) / shooter.axis_a)
            return last.phi, last.omega, _lift_near(angle, last.phi)

        up, down = observe(lam + step), observe(lam - step)
        db.append((up[0] - down[0]) / (2.0 * step))
        dw.append((up[1] - down[1]) / (2.0 * step))
        dp.append((up[2] - down[2]) / (2.0 * step))
    ratios = [d / j for d, j in zip(db, js)]
    exponent = float(np.polyfit(np.log(js), np.log(db), 1)[0]) if len(js) > 1 else float("nan")
    return AsymptoticReport(
        js, tuple(db), tuple(dw), tuple(dp), exponent, (min(ratios), max(ratios)), max(map(abs, dw))
    )
