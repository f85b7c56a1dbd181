"""Command-line front end.

Subcommands::

    adcslab simulate    one closed-loop run -> telemetry CSV (+ SVG, + summary)
    adcslab inertia     mass/CG/inertia report, optional chamber-corner sweep
    adcslab montecarlo  seeded batch over regolith placement / initial rates
    adcslab conops      full mode sequence with scheduled commands

Precedence everywhere: command-line flags > config file > per-mode preset
defaults.  The environment variable ``ADCSLAB_SEED`` supplies a seed only when
neither a flag nor the config does.  Exit codes: 0 converged/success, 1 usage
or config error, 2 ran but did not converge (or diverged).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import ConfigError, scenario_from_dict
from .control import Fidelity
from .harness import (
    STANDALONE_MODES,
    DivergenceError,
    Scenario,
    default_scenario,
    monte_carlo,
    run_scenario,
)
from .massmodel import (
    CatalogError,
    bundled_catalog,
    corner_envelope,
    load_catalog,
    mass_properties,
)
from .quatmath import RPM_TO_RADPS, Vec3, quat_from_euler
from .svgplot import write_plot

__all__ = ["main", "build_parser"]

_ALL_MODES = STANDALONE_MODES + ("conops",)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for
    ran-but-did-not-converge, so remap usage problems to exit 1."""

    def error(self, message: str):  # noqa: D401 - argparse override
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _vec3_flag(text: str, flag: str) -> Vec3:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{flag}: expected three comma-separated numbers, got {text!r}")
    try:
        return Vec3(float(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"{flag}: non-numeric value in {text!r}") from exc


def _add_scenario_flags(p: argparse.ArgumentParser, with_mode: bool) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON scenario config")
    if with_mode:
        p.add_argument("--mode", choices=_ALL_MODES, help="operating mode")
    p.add_argument("--dt", type=float, metavar="S", help="integrator step (s)")
    dur = p.add_mutually_exclusive_group()
    dur.add_argument("--duration-s", type=float, metavar="S", help="run length (s)")
    dur.add_argument("--duration-orbits", type=float, metavar="N",
                     help="run length (orbits)")
    p.add_argument("--fidelity", choices=[f.value for f in Fidelity],
                   help="actuator fidelity")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--omega0-rpm", metavar="X,Y,Z", help="initial body rates (RPM)")
    p.add_argument("--q0-euler-deg", metavar="R,P,Y",
                   help="initial attitude as 3-2-1 Euler angles (deg)")
    p.add_argument("--catalog", metavar="PATH", help="mass catalog JSON")
    p.add_argument("--regolith", choices=["stowed", "sampled"],
                   help="regolith placement policy")
    p.add_argument("--regolith-cm", metavar="X,Y,Z",
                   help="fix the regolith at this chamber position (cm)")
    p.add_argument("--spin-rpm", type=float, metavar="RPM", help="spin-mode target")
    for name in ("drag", "srp", "gravity-gradient"):
        p.add_argument(f"--{name}", action=argparse.BooleanOptionalAction,
                       default=None, help=f"{name.replace('-', ' ')} disturbance")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="CSV", default="telemetry.csv",
                   help="telemetry CSV path (default: %(default)s)")
    p.add_argument("--plot", metavar="SVG", help="write an SVG time-history plot")
    p.add_argument("--summary", metavar="JSON", help="write the run summary JSON")
    p.add_argument("--quiet", action="store_true", help="suppress the stdout summary")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adcslab",
                     description="Deterministic CubeSat attitude-control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[], help="run one scenario")
    _add_scenario_flags(p_sim, with_mode=True)
    _add_output_flags(p_sim)
    p_sim.set_defaults(func=_cmd_simulate, forced_mode=None)

    p_con = sub.add_parser("conops", help="run the full mode sequence")
    _add_scenario_flags(p_con, with_mode=False)
    _add_output_flags(p_con)
    p_con.set_defaults(func=_cmd_simulate, forced_mode="conops", mode=None)

    p_in = sub.add_parser("inertia", help="mass properties report")
    p_in.add_argument("--catalog", metavar="PATH", help="mass catalog JSON (default: bundled)")
    p_in.add_argument("--regolith-cm", metavar="X,Y,Z",
                      help="place the regolith before computing (cm)")
    p_in.add_argument("--sweep-corners", action="store_true",
                      help="report the 8-corner CG/inertia envelope")
    p_in.add_argument("--json", action="store_true", help="machine-readable output")
    p_in.set_defaults(func=_cmd_inertia)

    p_mc = sub.add_parser("montecarlo", help="seeded scenario batch")
    _add_scenario_flags(p_mc, with_mode=True)
    p_mc.add_argument("--runs", type=int, default=10, metavar="N",
                      help="number of runs (default: %(default)s)")
    p_mc.add_argument("--workers", type=int, default=1, metavar="K",
                      help="process-pool size (default: %(default)s)")
    p_mc.add_argument("--vary", default="regolith", metavar="WHAT",
                      help="comma list of regolith,omega (default: %(default)s)")
    p_mc.add_argument("--omega-range", metavar="LO,HI",
                      help="uniform initial-rate range in RPM (with --vary omega)")
    p_mc.add_argument("--out", metavar="CSV", default="montecarlo.csv",
                      help="per-run results CSV (default: %(default)s)")
    p_mc.add_argument("--summary", metavar="JSON", help="write the batch summary JSON")
    p_mc.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    p_mc.set_defaults(func=_cmd_montecarlo)

    return parser


# ---------------------------------------------------------------------------
# Scenario construction (flags > config > defaults)
# ---------------------------------------------------------------------------

def _base_scenario(args) -> Scenario:
    mode_flag = args.forced_mode if getattr(args, "forced_mode", None) else args.mode
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object at the top level")
        if mode_flag:
            mode_section = data.setdefault("mode", {})
            if not isinstance(mode_section, dict):
                raise ConfigError("mode: expected an object")
            if args.forced_mode and mode_section.get("mode", "conops") != "conops":
                raise ConfigError(
                    "the conops command needs a conops config (mode.mode is "
                    f"{mode_section.get('mode')!r})")
            mode_section["mode"] = mode_flag
        return scenario_from_dict(data, config_dir=path.parent)
    return default_scenario(mode_flag or "detumble")


def _apply_flag_overrides(s: Scenario, args) -> Scenario:
    updates: dict = {}
    if args.dt is not None:
        updates["dt_s"] = args.dt
    if args.duration_s is not None:
        updates["duration_s"] = args.duration_s
        updates["duration_orbits"] = None
    if args.duration_orbits is not None:
        updates["duration_orbits"] = args.duration_orbits
    if args.fidelity:
        updates["fidelity"] = Fidelity(args.fidelity)
    if args.omega0_rpm:
        w = _vec3_flag(args.omega0_rpm, "--omega0-rpm")
        updates["omega0_radps"] = Vec3(w[0] * RPM_TO_RADPS, w[1] * RPM_TO_RADPS,
                                       w[2] * RPM_TO_RADPS)
    if args.q0_euler_deg:
        e = _vec3_flag(args.q0_euler_deg, "--q0-euler-deg")
        updates["q0"] = quat_from_euler(e[0], e[1], e[2])
    if args.catalog:
        updates["catalog"] = load_catalog(args.catalog)
    if args.regolith_cm:
        updates["regolith_policy"] = "fixed"
        updates["regolith_fixed_cm"] = _vec3_flag(args.regolith_cm, "--regolith-cm")
    elif args.regolith:
        updates["regolith_policy"] = args.regolith
    if args.spin_rpm is not None:
        updates["spin_target_rpm"] = args.spin_rpm
    if args.drag is not None:
        updates["enable_drag"] = args.drag
    if args.srp is not None:
        updates["enable_srp"] = args.srp
    if args.gravity_gradient is not None:
        updates["enable_gravity_gradient"] = args.gravity_gradient

    if args.seed is not None:
        updates["seed"] = args.seed
    elif s.seed is None and "ADCSLAB_SEED" in os.environ:
        raw = os.environ["ADCSLAB_SEED"]
        try:
            updates["seed"] = int(raw)
        except ValueError as exc:
            raise ConfigError(f"ADCSLAB_SEED must be an integer, got {raw!r}") from exc

    try:
        return replace(s, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    scenario = _apply_flag_overrides(_base_scenario(args), args)
    try:
        telemetry, result = run_scenario(scenario)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    telemetry.write_csv(args.out)
    if args.plot:
        write_plot(telemetry, args.plot, title=scenario.name)
    payload = json.dumps(result.to_dict(), indent=2)
    if args.summary:
        Path(args.summary).write_text(payload + "\n", encoding="utf-8")
    if not args.quiet:
        print(payload)
    return 0 if result.converged else 2


def _cmd_inertia(args) -> int:
    catalog = load_catalog(args.catalog) if args.catalog else bundled_catalog()
    if args.regolith_cm:
        catalog = catalog.with_regolith_at(_vec3_flag(args.regolith_cm, "--regolith-cm"))
    props = mass_properties(catalog)
    report: dict = {
        "catalog": catalog.name,
        "components": len(catalog.all_components),
        "total_mass_kg": props.total_mass_kg,
        "cg_cm": list(props.cg_cm),
        "inertia_kgm2": props.inertia_kgm2.tolist(),
        "degenerate": props.degenerate,
    }
    if args.sweep_corners:
        env = corner_envelope(catalog)
        report["corner_envelope"] = {
            "cg_min_cm": list(env.cg_min_cm),
            "cg_max_cm": list(env.cg_max_cm),
            "j_min_kgm2": env.j_min_kgm2.tolist(),
            "j_max_kgm2": env.j_max_kgm2.tolist(),
            "corners": [
                {"position_cm": list(corner), "cg_cm": list(p.cg_cm),
                 "inertia_kgm2": p.inertia_kgm2.tolist()}
                for corner, p in env.corners
            ],
        }
    if args.json:
        print(json.dumps(report, indent=2))
        return 0
    print(f"catalog:     {report['catalog']} ({report['components']} components)")
    print(f"total mass:  {props.total_mass_kg:.6g} kg")
    print(f"cg (cm):     [{props.cg_cm[0]:.6g}, {props.cg_cm[1]:.6g}, {props.cg_cm[2]:.6g}]")
    print("inertia about CG (kg m^2):")
    for row in props.inertia_kgm2:
        print("    [" + ", ".join(f"{v: .6e}" for v in row) + "]")
    if props.degenerate:
        print("note: collinear catalog; the inertia tensor is singular "
              "(simulations apply the configured principal-moment floor)")
    if args.sweep_corners:
        env_r = report["corner_envelope"]
        print("corner sweep over the payload chamber:")
        print(f"  cg min (cm): {env_r['cg_min_cm']}")
        print(f"  cg max (cm): {env_r['cg_max_cm']}")
        print("  J elementwise min (kg m^2):")
        for row in env_r["j_min_kgm2"]:
            print("    [" + ", ".join(f"{v: .6e}" for v in row) + "]")
        print("  J elementwise max (kg m^2):")
        for row in env_r["j_max_kgm2"]:
            print("    [" + ", ".join(f"{v: .6e}" for v in row) + "]")
    return 0


_MC_COLUMNS = ("index", "name", "converged", "detumble_time_orbits",
               "spin_settle_time_s", "despin_time_s", "align_time_s",
               "final_speed_radps", "max_wheel_momentum_nms",
               "regolith_x_cm", "regolith_y_cm", "regolith_z_cm", "error")


def _mc_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _cmd_montecarlo(args) -> int:
    if args.runs < 1:
        raise ConfigError(f"--runs must be >= 1, got {args.runs}")
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    vary = tuple(v.strip() for v in args.vary.split(",") if v.strip())
    omega_range = None
    if args.omega_range:
        parts = args.omega_range.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--omega-range: expected LO,HI, got {args.omega_range!r}")
        try:
            omega_range = (float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"--omega-range: non-numeric bound in {args.omega_range!r}") from exc

    scenario = _apply_flag_overrides(_base_scenario(args), args)
    seed = scenario.seed if scenario.seed is not None else 0
    try:
        mc = monte_carlo(scenario, args.runs, seed, vary=vary,
                         omega_rpm_range=omega_range, workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_MC_COLUMNS)
        for i, r in enumerate(mc.results):
            reg = r.regolith_position_cm
            writer.writerow([
                str(i), r.scenario_name, str(r.converged).lower(),
                _mc_cell(r.detumble_time_orbits), _mc_cell(r.spin_settle_time_s),
                _mc_cell(r.despin_time_s), _mc_cell(r.align_time_s),
                _mc_cell(r.final_speed_radps), _mc_cell(r.max_wheel_momentum_nms),
                _mc_cell(None if reg is None else reg[0]),
                _mc_cell(None if reg is None else reg[1]),
                _mc_cell(None if reg is None else reg[2]),
                _mc_cell(r.error),
            ])

    payload = json.dumps(mc.summary, indent=2)
    if args.summary:
        Path(args.summary).write_text(payload + "\n", encoding="utf-8")
    if not args.quiet:
        print(payload)
    return 0 if mc.summary["converged"] == mc.summary["runs"] else 2


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CatalogError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
