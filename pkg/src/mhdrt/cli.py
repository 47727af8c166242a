"""Command-line front end.

Four subcommands share the physical and mesh flags::

    mhdrt critical   --rho-plus 2 --rho-minus 1 --B 0.5
    mhdrt dispersion --orientation vertical --B 0.5 --out-csv d.csv --out-svg d.svg
    mhdrt evolve     --orientation vertical --B 0.5 --xi 8 --init mode
    mhdrt verify     [--criteria 1,2,3]

Any flag may also come from a flat ``key = value`` file passed with
``--config``; flags given on the command line win. Exit status is 0 on
success, 1 on domain or configuration errors (and failed verification),
2 on usage errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .core import (
    FluidParams,
    Frequency,
    MagneticConfig,
    MHDRTError,
    Orientation,
    build_mesh,
)
from .evolve import (
    eigenmode_initial_data,
    energy_balance_residual,
    evolve_mode,
    fit_growth_exponent,
)
from .forms import HermiteSpace, LinearSpace
from .growth import NoModeError, dispersion_sweep, growth_bound, solve_growth_rate
from .report import (
    curve_records,
    format_float,
    plot_dispersion,
    plot_energy,
    write_dispersion_csv,
    write_report,
    write_trajectory_csv,
)
from .variational import (
    critical_freq_horizontal,
    critical_freq_vertical,
    critical_magnetic_number,
    xi_hc_oracle,
    xi_vc_oracle,
)

COMMANDS = ("critical", "dispersion", "evolve", "verify")

# meshes for the H1 problems: uniform suffices for the critical number, the
# horizontal critical frequency needs interface grading at weak fields
P1_CRITICAL_MESH = (256, 0.0)
P1_FREQUENCY_MESH = (512, 1.0)


class ConfigError(MHDRTError):
    pass


def _float(text):
    return float(text)


def _opt_float(text):
    return None if text in (None, "", "none", "None") else float(text)


FIELDS = {
    "rho_plus": (_float, 2.0),
    "rho_minus": (_float, 1.0),
    "mu_plus": (_float, 0.1),
    "mu_minus": (_float, 0.1),
    "g": (_float, 1.0),
    "orientation": (str, "vertical"),
    "B": (_opt_float, None),
    "n_per_side": (int, 32),
    "grading": (_float, 0.5),
    "xi_min": (_opt_float, None),
    "xi_max": (_opt_float, None),
    "xi_count": (int, 24),
    "xi_scale": (str, "linear"),
    "xi2": (_float, 0.0),
    "xi": (_opt_float, None),
    "dt": (_opt_float, None),
    "t_end": (_opt_float, None),
    "init": (str, "mode"),
    "seed": (int, 0),
    "phi_tol": (_float, 1e-10),
    "pencil_tol": (_float, 1e-8),
    "out_csv": (str, None),
    "out_svg": (str, None),
    "out_json": (str, None),
    "criteria": (str, None),
}


@dataclass(frozen=True)
class RunConfig:
    params: FluidParams
    mag: MagneticConfig
    mesh: tuple[int, float]
    xi_grid: tuple  # (min, max, count, scale); min/max may be None
    xi: tuple[float | None, float]
    dt: float | None
    t_end: float | None
    init: str
    tolerances: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    criteria: tuple[int, ...] | None = None

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        params = FluidParams(values["rho_plus"], values["rho_minus"],
                             values["mu_plus"], values["mu_minus"], values["g"])
        try:
            orient = Orientation(values["orientation"])
        except ValueError:
            raise ConfigError(f"unknown orientation {values['orientation']!r}") from None
        b = values["B"]
        mag = MagneticConfig(orient, 0.0 if b is None else b)
        tol = {"phi": values["phi_tol"], "pencil": values["pencil_tol"]}
        if not all(t > 0 for t in tol.values()):
            raise ConfigError("tolerances must be positive")
        if values["xi_count"] < 2:
            raise ConfigError("xi_count must be at least 2")
        if values["xi_scale"] not in ("linear", "log"):
            raise ConfigError("xi_scale must be 'linear' or 'log'")
        lo, hi = values["xi_min"], values["xi_max"]
        if lo is not None and hi is not None and not 0 < lo < hi:
            raise ConfigError("need 0 < xi_min < xi_max")
        if values["init"] not in ("mode", "random"):
            raise ConfigError("init must be 'mode' or 'random'")
        for key in ("dt", "t_end"):
            if values[key] is not None and not values[key] > 0:
                raise ConfigError(f"{key} must be positive")
        criteria = None
        if values["criteria"]:
            try:
                criteria = tuple(int(p) for p in str(values["criteria"]).split(",") if p.strip())
            except ValueError:
                raise ConfigError("criteria must be a comma-separated list of numbers") from None
        outputs = {k: values[f"out_{k}"] for k in ("csv", "svg", "json")}
        return cls(params, mag, (values["n_per_side"], values["grading"]),
                   (lo, hi, values["xi_count"], values["xi_scale"]),
                   (values["xi"], values["xi2"]), values["dt"], values["t_end"],
                   values["init"], tol, outputs, values["seed"], criteria)

    def hermite_space(self) -> HermiteSpace:
        return HermiteSpace(build_mesh(*self.mesh))

    def echo(self) -> dict:
        p = self.params
        return {
            "rho_plus": p.rho_plus, "rho_minus": p.rho_minus,
            "mu_plus": p.mu_plus, "mu_minus": p.mu_minus, "g": p.g,
            "orientation": self.mag.orientation.value, "B": self.mag.magnitude,
            "n_per_side": self.mesh[0], "grading": self.mesh[1],
            "seed": self.seed,
        }


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes map to underscores."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELDS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        try:
            out[key] = FIELDS[key][0](value)
        except ValueError:
            raise ConfigError(f"{path}:{num}: bad value for {key}: {value!r}") from None
    return out


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value file; flags override it")
    phys = common.add_argument_group("physical parameters")
    phys.add_argument("--rho-plus", type=float, dest="rho_plus")
    phys.add_argument("--rho-minus", type=float, dest="rho_minus")
    phys.add_argument("--mu-plus", type=float, dest="mu_plus")
    phys.add_argument("--mu-minus", type=float, dest="mu_minus")
    phys.add_argument("--g", type=float)
    phys.add_argument("--orientation", choices=[o.value for o in Orientation])
    phys.add_argument("--B", type=float, help="field magnitude")
    mesh = common.add_argument_group("mesh")
    mesh.add_argument("--n-per-side", type=int, dest="n_per_side")
    mesh.add_argument("--grading", type=float)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="mhdrt", description=(
        "Linear stability of the viscous two-fluid MHD Rayleigh-Taylor problem."))
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("critical", parents=[common], argument_default=argparse.SUPPRESS,
                   help="critical magnetic number and critical frequency")

    p = sub.add_parser("dispersion", parents=[common], argument_default=argparse.SUPPRESS,
                       help="growth-rate sweep over xi")
    p.add_argument("--xi-min", type=float, dest="xi_min")
    p.add_argument("--xi-max", type=float, dest="xi_max")
    p.add_argument("--xi-count", type=int, dest="xi_count")
    p.add_argument("--xi-scale", choices=["linear", "log"], dest="xi_scale")
    p.add_argument("--xi2", type=float, help="fixed across-field wavenumber (3D)")
    p.add_argument("--phi-tol", type=float, dest="phi_tol")
    p.add_argument("--pencil-tol", type=float, dest="pencil_tol")
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out-svg", dest="out_svg")
    p.add_argument("--out-json", dest="out_json")

    p = sub.add_parser("evolve", parents=[common], argument_default=argparse.SUPPRESS,
                       help="time-integrate one Fourier mode")
    p.add_argument("--xi", type=float, help="wavenumber along the first direction")
    p.add_argument("--xi2", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--init", choices=["mode", "random"])
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out-svg", dest="out_svg")

    p = sub.add_parser("verify", argument_default=argparse.SUPPRESS, help="run the acceptance suite")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,3,8")
    return parser


def _rel(a: float, b: float) -> float:
    return abs(a / b - 1.0)


def _cmd_critical(cfg: RunConfig, out) -> int:
    params, mag = cfg.params, cfg.mag
    bc = critical_magnetic_number(params, LinearSpace(build_mesh(*P1_CRITICAL_MESH)))
    exact = math.sqrt(params.drive() / 2.0)
    print("quantity,value,oracle,rel_error", file=out)
    print(f"b_critical,{format_float(bc)},{format_float(exact)},{_rel(bc, exact):.3e}", file=out)
    if mag.magnitude == 0:
        return 0
    if mag.magnitude >= bc:
        print("regime,supercritical,,", file=out)
        return 0
    print("regime,subcritical,,", file=out)
    if mag.orientation is Orientation.VERTICAL:
        xi = critical_freq_vertical(params, mag, cfg.hermite_space())
        oracle = xi_vc_oracle(params, mag)
        name = "xi_vc"
    else:
        xi = critical_freq_horizontal(params, mag, LinearSpace(build_mesh(*P1_FREQUENCY_MESH)))
        oracle = xi_hc_oracle(params, mag)
        name = "xi_hc"
    print(f"{name},{format_float(xi)},{format_float(oracle)},{_rel(xi, oracle):.3e}", file=out)
    return 0


def _critical_frequency(cfg: RunConfig, space) -> float | None:
    mag = cfg.mag
    if mag.magnitude == 0 or mag.magnitude >= critical_magnetic_number(cfg.params, space):
        return None
    if mag.orientation is Orientation.VERTICAL:
        return critical_freq_vertical(cfg.params, mag, space)
    return critical_freq_horizontal(cfg.params, mag, space)


def _xi_grid(cfg: RunConfig, crit: float | None) -> np.ndarray:
    lo, hi, count, scale = cfg.xi_grid
    if lo is None or hi is None:
        if crit is None:
            dlo, dhi = 0.1, 20.0
        elif cfg.mag.orientation is Orientation.VERTICAL:
            dlo, dhi = 1.01 * crit, 20.0 * crit
        else:
            dlo, dhi = 0.01 * crit, 0.99 * crit
        lo = dlo if lo is None else lo
        hi = dhi if hi is None else hi
        if not 0 < lo < hi:
            raise ConfigError("need 0 < xi_min < xi_max")
    if scale == "log":
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _cmd_dispersion(cfg: RunConfig, out) -> int:
    params, mag = cfg.params, cfg.mag
    params.require_unstable_stratification()
    space = cfg.hermite_space()
    crit = _critical_frequency(cfg, space)
    xi2 = cfg.xi[1]
    grid = [Frequency(float(k), xi2) for k in _xi_grid(cfg, crit)]
    curve = dispersion_sweep(params, mag, grid, space)

    bound = growth_bound(params, mag) if mag.orientation is Orientation.VERTICAL else math.inf
    unstable = curve.unstable_samples()
    csv_path = cfg.outputs["csv"] or "dispersion.csv"
    svg_path = cfg.outputs["svg"] or "dispersion.svg"
    write_dispersion_csv(curve, csv_path)
    plot_dispersion(curve, svg_path, critical=crit,
                    bound=bound if math.isfinite(bound) else None)
    if cfg.outputs["json"]:
        bc = critical_magnetic_number(params, space)
        crit_key = "xi_vc" if mag.orientation is Orientation.VERTICAL else "xi_hc"
        write_report({
            "config": cfg.echo(),
            "critical": {"b_critical": bc, crit_key: crit},
            "samples": curve_records(curve),
            "lambda_max": curve.lambda_max,
            "bound_checks": {
                "growth_bound": bound if math.isfinite(bound) else None,
                "all_below_bound": all(r.lam <= bound for r in unstable),
            },
            "verdicts": {
                "phi_residual": all(r.phi_residual <= cfg.tolerances["phi"] for r in unstable),
                "pencil_residual": all(r.pencil_residual <= cfg.tolerances["pencil"]
                                       for r in unstable),
                "sample_failures": sum(1 for r in curve.samples if r.error),
            },
        }, cfg.outputs["json"])
    lam_max = curve.lambda_max
    print(f"samples={len(curve.samples)}", file=out)
    print(f"unstable={len(unstable)}", file=out)
    print("lambda_max=" + ("" if lam_max is None else format_float(lam_max)), file=out)
    print(f"csv={csv_path}", file=out)
    print(f"svg={svg_path}", file=out)
    for r in curve.samples:
        if r.error:
            print(f"warning: xi={r.xi.mag:g}: {r.error}", file=sys.stderr)
    return 0


def _cmd_evolve(cfg: RunConfig, out) -> int:
    params, mag = cfg.params, cfg.mag
    space = cfg.hermite_space()
    k1, k2 = cfg.xi
    if k1 is None:
        raise ConfigError("evolve needs --xi")
    xi = Frequency(k1, k2)
    xi.require_nonzero()
    lam = None
    if cfg.init == "mode":
        res = solve_growth_rate(params, mag, xi, space)
        if not res.unstable:
            raise NoModeError(f"xi={xi.mag:g} is stable; use --init random")
        lam = res.lam
        init = eigenmode_initial_data(res.psi, lam)
        dt = cfg.dt or 1.0 / (200.0 * lam)
        t_end = cfg.t_end or 5.0 / lam
    else:
        rng = np.random.default_rng(cfg.seed)
        init = (rng.standard_normal(space.dof_count), rng.standard_normal(space.dof_count))
        dt = cfg.dt or 0.01
        t_end = cfg.t_end or 5.0
    traj = evolve_mode(params, mag, xi, space, init, dt, t_end)
    csv_path = cfg.outputs["csv"] or "trajectory.csv"
    svg_path = cfg.outputs["svg"] or "energy.svg"
    write_trajectory_csv(traj, csv_path)
    plot_energy(traj, svg_path, title=f"{mag.orientation.value} field, |B| = {mag.magnitude:g}, "
                                      f"|xi| = {xi.mag:g}")
    print(f"steps={len(traj.times) - 1}", file=out)
    if lam is not None:
        print(f"lambda={format_float(lam)}", file=out)
    print(f"fitted_exponent={format_float(fit_growth_exponent(traj))}", file=out)
    print(f"energy_balance_residual={energy_balance_residual(traj):.3e}", file=out)
    print(f"csv={csv_path}", file=out)
    print(f"svg={svg_path}", file=out)
    return 0


def _cmd_verify(cfg: RunConfig, out) -> int:
    from .acceptance import CRITERIA, run_criterion

    numbers = cfg.criteria or tuple(sorted(CRITERIA))
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        raise ConfigError(f"unknown criteria: {unknown}")
    failed = 0
    for n in numbers:
        result = run_criterion(n)
        failed += not result.passed
        print(result.line(), file=out, flush=True)
    print(f"{len(numbers) - failed}/{len(numbers)} criteria passed", file=out)
    return 1 if failed else 0


HANDLERS = {
    "critical": _cmd_critical,
    "dispersion": _cmd_dispersion,
    "evolve": _cmd_evolve,
    "verify": _cmd_verify,
}


def run_command(argv, stdout=None) -> int:
    out = sys.stdout if stdout is None else stdout
    parser = _build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    given = vars(ns)
    command = given.pop("command")
    try:
        values = {k: default for k, (_, default) in FIELDS.items()}
        if "config" in given:
            values.update(load_config_file(given.pop("config")))
        values.update(given)
        cfg = RunConfig.from_mapping(values)
        return HANDLERS[command](cfg, out)
    except (MHDRTError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
