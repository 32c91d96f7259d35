"""``dystro-front`` command-line interface.

Exit status is 0 on success, 2 for domain problems such as invalid input or
sub-threshold parameters, and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .equilibria import equilibrium_report, healthy_equilibrium
from .errors import DystroError, InvalidParameter
from .linear import dispersion, min_speed
from .model import DimensionlessParams, State
from .ode import DEFAULT_PERTURBATION, integrate
from .pde import Grid1D, InitialCondition, simulate
from .runio import speed_from_run, write_json, write_run, write_table
from .scan import Axis, ScanConfig, SimulationOptions, Task, measure_speed, run_scan

log = logging.getLogger("dystro_front")


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidParameter(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"{path} is not valid JSON: {exc}") from exc


def _config(args) -> dict:
    path = args.input or args.config
    if path is None:
        raise InvalidParameter("no input: pass a JSON file or --config")
    data = _load_json(path)
    if not isinstance(data, dict):
        raise InvalidParameter("configuration must be a JSON object")
    return data


def _params(data: dict) -> DimensionlessParams:
    """Accept either a bare parameter object or one nested under ``params``."""
    return DimensionlessParams.from_dict(data["params"] if "params" in data else data)


def _emit_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _sidecar(out) -> Path | None:
    return None if out is None else Path(out).with_suffix(".json")


def cmd_equilibria(args) -> None:
    report = equilibrium_report(_params(_config(args)))
    _emit_text(write_json(report.to_dict()), args.out)


def cmd_dispersion(args) -> None:
    res = dispersion(_params(_config(args)), n=args.n)
    _emit_text(write_table(("gamma", "s_plus"), zip(res.gamma_grid, res.s_plus)), args.out)
    meta = {"gamma_cutoff": res.gamma_cutoff, "gamma_star": res.gamma_star, "s_star": res.s_star}
    side = _sidecar(args.out)
    if side is not None:
        write_json(meta, side)
    else:
        sys.stderr.write(write_json(meta))


def cmd_speed(args) -> None:
    data = _config(args)
    p = _params(data)
    options = SimulationOptions.from_dict(data.get("simulation", {}))
    if args.L is not None or args.cells is not None:
        options = SimulationOptions(L=args.L or options.L, n=args.cells or options.n,
                                    cfl_safety=options.cfl_safety, n_snapshots=options.n_snapshots)
    if args.sweep is None:
        s_star, gamma_star = min_speed(p)
        out = {"s_star": s_star, "gamma_star": gamma_star}
        if args.with_simulation:
            _, trace = measure_speed(p, InitialCondition.gaussian(), options)
            out.update(s_numerical=trace.fitted_speed, r_squared=trace.r_squared)
        _emit_text(write_json(out), args.out)
        return
    cfg = ScanConfig(p, Task.SPEED_SWEEP, Axis.parse(args.sweep), with_simulation=args.with_simulation,
                     simulation=options)
    _, rows = run_scan(cfg, threads=args.threads)
    header = ("value", "s_star", "s_numerical") if args.with_simulation else ("value", "s_star")
    _emit_text(write_table(header, rows), args.out)


def cmd_simulate_ode(args) -> None:
    data = _config(args)
    p = _params(data)
    if "u0" in data:
        u0 = State(**{k: float(v) for k, v in data["u0"].items()})
        perturbation = None
    else:
        h0 = healthy_equilibrium(p)
        perturbation = float(data.get("perturbation", DEFAULT_PERTURBATION))
        u0 = State(h0.h, perturbation, 0.0, 0.0)
    t_end = float(data.get("t_end", 50.0))
    rtol = float(data.get("rtol", 1e-8))
    atol = float(data.get("atol", 1e-10))
    n_out = int(data.get("n_out", 400))
    traj = integrate(u0, p, t_end, rtol=rtol, atol=atol, n_out=n_out)
    rows = ([t, *row] for t, row in zip(traj.times, traj.values))
    _emit_text(write_table(("t", "h", "d", "m", "c"), rows), args.out)
    side = _sidecar(args.out)
    if side is not None:
        write_json({
            "version": __version__,
            "params": p.to_dict(),
            "u0": u0.to_dict(),
            "perturbation": perturbation,
            "t_end": t_end,
            "rtol": rtol,
            "atol": atol,
            "n_out": n_out,
            "invariant_violations": [list(v) for v in traj.invariant_violations],
        }, side)


def cmd_simulate_pde(args) -> None:
    data = _config(args)
    if args.out is None:
        raise InvalidParameter("simulate-pde needs --out <run dir>")
    p = _params(data)
    try:
        grid = Grid1D(float(data["grid"]["L"]), int(data["grid"]["n"]))
        ic = InitialCondition.from_dict(data.get("ic", {"kind": "LocalizedGaussian"}))
        t_end = float(data["t_end"])
    except (KeyError, TypeError) as exc:
        raise InvalidParameter(f"simulate-pde config needs grid.L, grid.n and t_end ({exc})") from exc
    cfl = float(data.get("cfl_safety", 0.4))
    n_snap = int(data.get("snapshots", 50))
    result = simulate(ic, grid, p, t_end, cfl_safety=cfl, n_snapshots=n_snap)
    write_run(args.out, result, p, grid, ic, t_end, extra={"seed": args.seed})
    log.info("wrote %d snapshots to %s", len(result), args.out)


def cmd_speed_from_run(args) -> None:
    trace = speed_from_run(args.run_dir, level=args.level)
    sys.stdout.write(write_json({"fitted_speed": trace.fitted_speed, "r_squared": trace.r_squared}))


def cmd_scan(args) -> None:
    cfg = ScanConfig.from_dict(_config(args))
    header, rows = run_scan(cfg, threads=args.threads)
    _emit_text(write_table(header, rows), args.out)


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON input file")
    parser.add_argument("--out", default=default, help="output file, or run directory for simulate-pde")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker processes for sweeps and scans")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                        help="seed recorded in run metadata; no command draws random numbers")
    parser.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dystro-front", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, takes_input=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if takes_input:
            sp.add_argument("input", nargs="?", help="JSON input file (alternative to --config)")
        sp.set_defaults(func=func)
        return sp

    add("equilibria", cmd_equilibria, "equilibrium report as JSON")
    sp = add("dispersion", cmd_dispersion, "speed branch s_plus(gamma) as CSV")
    sp.add_argument("--n", type=int, default=1000, help="number of gamma samples")
    sp = add("speed", cmd_speed, "minimal front speed, optionally swept over one parameter")
    sp.add_argument("--sweep", help="name=lo:hi:n")
    sp.add_argument("--with-simulation", action="store_true", help="add the PDE-measured speed")
    sp.add_argument("--L", type=float, help="domain length for simulated speeds")
    sp.add_argument("--cells", type=int, help="cell count for simulated speeds")
    add("simulate-ode", cmd_simulate_ode, "homogeneous trajectory as CSV")
    add("simulate-pde", cmd_simulate_pde, "PDE run written to a run directory")
    sp = add("speed-from-run", cmd_speed_from_run, "front trace and fitted speed of a run directory",
             takes_input=False)
    sp.add_argument("run_dir")
    sp.add_argument("--level", type=float, help="tracking level (default: half the plateau)")
    add("scan", cmd_scan, "regime map, speed sweep or dispersion study from a scan config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except DystroError as exc:
        sys.stderr.write(f"dystro-front: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
