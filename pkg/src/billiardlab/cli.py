"""Command-line front end writing plot-ready CSV/JSON tables.

Configuration precedence: command-line flags, then the config file given by
``--config`` (or the ``BILLIARDLAB_CONFIG`` environment variable), then
built-in defaults.  Config files hold one ``key = value`` per line; ``#``
starts a comment.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .actionangle import closure_residual, solve_rotation
from .billiard import PhasePoint, iterate
from .connect import (
    BRANCH_CONVENTION,
    ConnectSettings,
    critical_point_check,
    find_connecting_orbits,
    psi_gradient,
)
from .geometry import EllipseTable, RegimeError, caustic_lambda2_from_boundary
from .hadamard import BranchError, disk_eigenvalue, variational_check
from .wavetrace import (
    BUILTIN_PROFILES,
    K_DOT,
    RHO_DOT,
    BoundaryProfile,
    builtin_profile,
    coefficient_chat_j,
    coefficient_cj,
    moment_analysis,
    series_coefficients,
)

CONFIG_ENV = "BILLIARDLAB_CONFIG"
EXIT_OK, EXIT_VALIDATION, EXIT_REGIME = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    a: float = 2.0
    b: float = 1.0
    closure_tol: float = 1e-9
    quad_n: int = 2048
    bisection_iters: int = 80
    winding_window: float = 0.01
    j_min: int = 12
    j_max: int = 100
    q_min: int = 3
    q_max: int = 100
    k_max: int = 10
    profile: str = "cos2phi"
    channel: str = "rho"
    out_dir: str = "."
    format: str = "csv"

    def __post_init__(self):
        if not (self.b > 0 and self.a > self.b):
            raise ValueError(f"need a > b > 0, got a={self.a}, b={self.b}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.channel not in ("rho", "K", "both"):
            raise ValueError("channel must be rho, K or both")

    @property
    def table(self):
        return EllipseTable(self.a, self.b)


_FIELDS = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def read_config_file(path):
    values = {}
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ValueError(f"{path}:{number}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(flag_values, config_path=None):
    """Merge defaults, config file and flags (highest precedence last)."""
    merged = {}
    path = config_path or os.environ.get(CONFIG_ENV)
    if path:
        merged.update(read_config_file(path))
    merged.update({k: v for k, v in flag_values.items() if v is not None and k in _FIELDS})
    typed = {}
    for key, value in merged.items():
        cast = _FIELDS[key]
        try:
            typed[key] = cast(value)
        except ValueError:
            raise ValueError(f"bad value for {key}: {value!r}") from None
    return RunConfig(**typed)


def _fmt(value):
    if isinstance(value, float):
        return "%.17g" % value
    if value is None:
        return "nan"
    return str(value)


def write_table(path_stem, columns, rows, fmt):
    path = Path(f"{path_stem}.{fmt}")
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        records = [dict(zip(columns, (_json_safe(v) for v in row))) for row in rows]
        write_json(path, records)
    return path


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path, payload):
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False) + "\n", encoding="utf-8"
    )
    return Path(path)


def _out(config, name):
    directory = Path(config.out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


def cmd_orbit(config, phi0, omega0, n):
    table = config.table
    orbit = iterate(PhasePoint(phi0, omega0), n, table)
    lam2_start = caustic_lambda2_from_boundary(phi0, omega0, table)
    rows = []
    for step, state in enumerate(orbit.states):
        x, y = table.boundary(state.phi)
        lam2 = caustic_lambda2_from_boundary(state.phi, state.omega, table)
        link = orbit.lengths[step - 1] if step else 0.0
        drift = abs(lam2 - lam2_start) / lam2_start
        rows.append((step, state.phi, state.omega, x, y, link, lam2, int(lam2 < table.b**2), drift))
    columns = ("step", "phi", "omega", "x", "y", "link_length", "lambda2", "elliptic", "lambda_drift")
    return [write_table(_out(config, "orbit"), columns, rows, config.format)]


def cmd_spectrum(config, q_min, q_max):
    table = config.table
    rows = []
    for q in range(q_min, q_max + 1):
        try:
            family = solve_rotation(1, q, table)
        except RegimeError as err:
            rows.append((q, None, None, None, None, f"regime_error: {err}"))
            continue
        residual, winding, _ = closure_residual(family, table)
        ok = residual < config.closure_tol * table.b and winding == 1
        rows.append(
            (q, family.lam_j.lam, family.delta_j, family.T_j, residual, "ok" if ok else "not_closed")
        )
    columns = ("q", "lambda_q", "delta_q", "T_q", "closure_residual", "status")
    table_path = write_table(_out(config, "spectrum"), columns, rows, config.format)
    meta = write_json(
        _out(config, "spectrum_meta.json"),
        {
            "a": table.a,
            "b": table.b,
            "rotation_numbers": f"1/q for q in [{q_min}, {q_max}]",
            "assumes_simple_lengths": True,
            "note": "length-spectrum collisions are not detected; every 1/q family is treated as simple",
        },
    )
    return [table_path, meta]


def load_profile(spec, kind):
    if spec in BUILTIN_PROFILES:
        return builtin_profile(spec, kind)
    path = Path(spec)
    if not path.exists():
        raise ValueError(f"profile {spec!r} is neither a built-in ({sorted(BUILTIN_PROFILES)}) nor a file")
    text = path.read_text(encoding="utf-8").replace(",", " ").split()
    try:
        samples = [float(v) for v in text]
    except ValueError:
        raise ValueError(f"profile file {spec} must contain numbers only") from None
    if len(samples) < 8:
        raise ValueError("profile file needs at least 8 samples")
    return BoundaryProfile.from_samples(samples, kind, name=path.name)


def cmd_rigidity(config, profile_spec, channel, j_min, j_max, k_max):
    table = config.table
    rho = load_profile(profile_spec, RHO_DOT) if channel in ("rho", "both") else None
    kdot = load_profile(profile_spec, K_DOT) if channel in ("K", "both") else None
    rows = []
    for j in range(j_min, j_max + 1):
        family = solve_rotation(1, j, table)
        c = ch = None
        errors = []
        if rho is not None:
            result = coefficient_cj(rho, j, table, n=config.quad_n, family=family)
            c = result.c_j
            errors.append(result.quadrature_error)
        if kdot is not None:
            result = coefficient_chat_j(kdot, j, table, n=config.quad_n, family=family)
            ch = result.chat_j
            errors.append(result.quadrature_error)
        rows.append((j, family.lam_j.lam, family.T_j, c, ch, max(errors)))
    columns = ("j", "lambda_j", "T_j", "c_j", "chat_j", "quadrature_error")
    coeff_path = write_table(_out(config, "rigidity_coefficients"), columns, rows, config.format)
    report = moment_analysis(rho or kdot, k_max, table, n=config.quad_n)
    moments_path = write_json(
        _out(config, "rigidity_moments.json"),
        {
            "profile": profile_spec,
            "channel": channel,
            "a": table.a,
            "b": table.b,
            "k_max": k_max,
            "moments": list(report.moments),
            "series_coefficients": series_coefficients(report.moments),
            "reconstruction_residual": report.residual,
            "max_abs_moment": max(abs(m) for m in report.moments),
        },
    )
    return [coeff_path, moments_path]


def cmd_connect(config, x, y, j):
    table = config.table
    settings = ConnectSettings(
        j_min=config.j_min,
        winding_window=config.winding_window,
        bisection_iters=config.bisection_iters,
    )
    orbits = find_connecting_orbits(x, y, j, table, settings)
    records = []
    for orbit in orbits:
        grad_x, grad_y = psi_gradient(orbit)
        records.append(
            {
                "branch_index": orbit.branch_index,
                "direction": orbit.direction,
                "config": orbit.config,
                "length": orbit.length,
                "lambda2": orbit.lam2,
                "advance": orbit.advance,
                "critical_residual": critical_point_check(orbit, table),
                "gradient_x": list(grad_x),
                "gradient_y": list(grad_y),
                "impacts": [list(p) for p in orbit.impacts],
            }
        )
    payload = {
        "metadata": {
            "a": table.a,
            "b": table.b,
            "j": j,
            "x": list(x),
            "y": list(y),
            "perimeter": table.ell,
            "winding_window": settings.winding_window,
            "branch_convention": BRANCH_CONVENTION,
        },
        "orbits": records,
    }
    return [write_json(_out(config, "connect.json"), payload)]


def _pairs(text, cast):
    out = []
    for item in text.split(","):
        left, right = item.split(":")
        out.append((cast[0](left), cast[1](right)))
    return out


def cmd_hadamard(config, R, k0_values, modes, perturbations):
    rows = []
    for K0 in k0_values:
        for n, branch in modes:
            mode = disk_eigenvalue(R, K0, n, branch)
            for rho_dot, k_dot in perturbations:
                lhs, rhs, err = variational_check(mode, rho_dot, k_dot)
                rows.append((R, K0, n, branch, mode.lam, rho_dot, k_dot, lhs, rhs, err))
    columns = ("R", "K0", "n", "branch", "lambda", "rho_dot", "k_dot", "lhs", "rhs", "rel_error")
    return [write_table(_out(config, "hadamard"), columns, rows, config.format)]


def _parser():
    parser = argparse.ArgumentParser(prog="billiardlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key = value config file (default: ${CONFIG_ENV})")
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--format", choices=("csv", "json"))
    sub = parser.add_subparsers(dest="command", required=True)

    orbit = sub.add_parser("orbit", parents=[common], help="iterate the billiard map")
    orbit.add_argument("--phi", type=float, required=True)
    orbit.add_argument("--omega", type=float, required=True)
    orbit.add_argument("--n", type=int, required=True)

    spectrum = sub.add_parser("spectrum", parents=[common], help="lengths of the 1/q periodic families")
    spectrum.add_argument("--q-min", dest="q_min", type=int)
    spectrum.add_argument("--q-max", dest="q_max", type=int)
    spectrum.add_argument("--closure-tol", dest="closure_tol", type=float)

    rigidity = sub.add_parser("rigidity", parents=[common], help="wave-trace coefficients and moments")
    rigidity.add_argument("--profile", help="zero, const, cos2phi, cos4phi or a sample file")
    rigidity.add_argument("--channel", choices=("rho", "K", "both"))
    rigidity.add_argument("--j-min", dest="j_min", type=int)
    rigidity.add_argument("--j-max", dest="j_max", type=int)
    rigidity.add_argument("--k-max", dest="k_max", type=int)
    rigidity.add_argument("--quad-n", dest="quad_n", type=int)

    connect = sub.add_parser("connect", parents=[common], help="the eight connecting orbits x -> y")
    connect.add_argument("--x", nargs=2, type=float, required=True)
    connect.add_argument("--y", nargs=2, type=float, required=True)
    connect.add_argument("--j", type=int, required=True)
    connect.add_argument("--j-min", dest="j_min", type=int)
    connect.add_argument("--winding-window", dest="winding_window", type=float)
    connect.add_argument("--bisection-iters", dest="bisection_iters", type=int)

    hadamard = sub.add_parser("hadamard", parents=[common], help="disk eigenvalue variation battery")
    hadamard.add_argument("--R", type=float, default=1.0)
    hadamard.add_argument("--K0", default="0,0.5,2", help="comma-separated Robin constants")
    hadamard.add_argument("--modes", default="0:1,1:1,2:1", help="comma-separated n:branch")
    hadamard.add_argument(
        "--perturbations", default="1:0,0:1,1:1", help="comma-separated rho_dot:k_dot"
    )
    return parser


def run(argv=None):
    args = _parser().parse_args(argv)
    flags = vars(args)
    config = build_config(flags, args.config)
    if args.command == "orbit":
        return cmd_orbit(config, args.phi, args.omega, args.n)
    if args.command == "spectrum":
        return cmd_spectrum(config, config.q_min, config.q_max)
    if args.command == "rigidity":
        if config.j_min < 3 or config.j_max < config.j_min:
            raise ValueError("need 3 <= j_min <= j_max")
        return cmd_rigidity(config, config.profile, config.channel, config.j_min, config.j_max, config.k_max)
    if args.command == "connect":
        return cmd_connect(config, tuple(args.x), tuple(args.y), args.j)
    try:
        k0_values = [float(v) for v in args.K0.split(",")]
        modes = _pairs(args.modes, (int, int))
        perturbations = _pairs(args.perturbations, (float, float))
    except ValueError:
        raise ValueError("malformed --K0, --modes or --perturbations list") from None
    return cmd_hadamard(config, args.R, k0_values, modes, perturbations)


def main(argv=None):
    try:
        paths = run(argv)
    except (RegimeError, BranchError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_REGIME
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
