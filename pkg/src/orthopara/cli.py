"""Command-line front end.

Every subcommand writes a table as CSV (6 significant digits, preceded by a
``# config:`` line) or a single JSON document (full precision).
"""

import argparse
import csv
import dataclasses
import io
import json
import sys

import numpy as np

from orthopara import alignment, density, hyperfine, pipeline, tank, thermo


class UsageError(Exception):
    pass


def fmt6(v):
    if isinstance(v, (bool, str)) or v is None:
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def render(config, header, rows, fmt, extra=None):
    """Format a table for output."""
    if fmt == "json":
        doc = {"config": config, "columns": header,
               "rows": [[_jsonable(v) for v in r] for r in rows]}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + " ".join(f"{k}={fmt6(v)}" for k, v in config.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt6(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def _floats(text, n=None, sep=","):
    try:
        vals = [float(t) for t in text.split(sep)]
    except ValueError:
        raise UsageError(f"expected numbers separated by {sep!r}, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} values, got {text!r}")
    return vals


def _temp_list(args):
    if args.temp_range is not None:
        lo, hi, steps = _floats(args.temp_range, 3, sep=":")
        if steps < 1 or steps != int(steps):
            raise UsageError("temperature range needs a positive integer step count")
        if not 0 < lo <= hi:
            raise UsageError("temperature range must satisfy 0 < LO <= HI")
        return list(np.linspace(lo, hi, int(steps))) if steps > 1 else [lo]
    if args.temp_kelvin is None:
        raise UsageError("one of --temp-kelvin or --temp-range is required")
    if not args.temp_kelvin > 0:
        raise UsageError("temperature must be positive")
    return [args.temp_kelvin]


def _rot_model(args):
    if not args.b_mev > 0:
        raise UsageError("--b-mev must be positive")
    if args.j_max < 5:
        raise UsageError("--j-max must be at least 5")
    return thermo.RotationalModel(b=args.b_mev, j_max=args.j_max)


def _filter_params(args):
    try:
        return alignment.FilterParams(args.vmin, args.a_slow, args.a_fast, args.width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# subcommands


def cmd_xi_sweep(args):
    if args.synthetic:
        try:
            kind, amp, r0 = args.synthetic.split(":")
            field = density.synthetic_field(kind, float(amp), float(r0))
        except ValueError as exc:
            raise UsageError(f"--synthetic expects KIND:A:R0 ({exc})") from None
        source = args.synthetic
    else:
        field = density.read_cube(args.density)
        source = args.density
    if args.z_steps < 2:
        raise UsageError("--z-steps must be at least 2")
    if not 0 <= args.z_min < args.z_max:
        raise UsageError("need 0 <= z-min < z-max")
    thetas = _floats(args.theta)
    if any(not 0 <= t <= 180 for t in thetas):
        raise UsageError("theta values must lie in [0, 180]")
    axis = args.axis if args.axis in ("x", "y", "z") else _floats(args.axis, 3)
    geom = density.ProbeGeometry(axis=axis, center=_floats(args.center, 3),
                                 bond_length=args.bond_length, phi=args.phi)
    params = hyperfine.HyperfineParams(args.lambda_c, args.sublevel)
    z = np.linspace(args.z_min, args.z_max, args.z_steps)
    curve = hyperfine.sweep(field, geom, params, z, thetas)
    config = {"source": source, "lambda_c": args.lambda_c, "bond_length": args.bond_length,
              "axis": args.axis, "phi": args.phi,
              "sublevel": "unpolarized" if args.sublevel is None else args.sublevel}
    extrema = {f"{t:g}": [list(e) for e in hyperfine.find_extrema(curve, t)]
               for t in curve.thetas}
    return render(config, curve.header(), list(curve.to_rows()), args.format,
                  extra={"extrema": extrema})


def cmd_alignment(args):
    if args.model:
        if args.et is None:
            raise UsageError("--model needs --et")
        if args.et < 0:
            raise UsageError("--et must be non-negative")
        params = _filter_params(args)
        a = alignment.dqf_alignment_model(args.et, params)
        config = {"vmin": params.v_min, "width": params.width,
                  "a_slow": params.a_slow, "a_fast": params.a_fast}
        return render(config, ["et_ev", "alignment", "rotation"],
                      [[args.et, a, alignment.classify(a).value]], args.format)
    if args.table is None or args.j is None or args.etot is None:
        raise UsageError("alignment needs --table, --j and --etot (or --model --et)")
    with open(args.table) as fh:
        table = alignment.AlignmentTable.from_csv(fh.read())
    a = alignment.quadrupole_alignment(table, args.j, args.etot)
    lo, hi = alignment.alignment_bounds(args.j)
    return render({"table": args.table}, ["j", "etot_ev", "alignment", "lower", "upper", "rotation"],
                  [[args.j, args.etot, a, lo, hi, alignment.classify(a).value]], args.format)


def cmd_equilibrium(args):
    model = _rot_model(args)
    rows = [[t, thermo.equilibrium_ortho_fraction(model, t)] for t in _temp_list(args)]
    return render({"b_mev": model.b, "j_max": model.j_max}, ["temp_k", "x_ortho"], rows,
                  args.format)


def cmd_heat_capacity(args):
    model = _rot_model(args)
    rows = [[t, thermo.rotational_heat_capacity(model, args.species, t)]
            for t in _temp_list(args)]
    config = {"species": args.species, "b_mev": model.b, "j_max": model.j_max}
    return render(config, ["temp_k", "c_rot_kb"], rows, args.format)


def cmd_tank(args):
    if not 0 <= args.x0 <= 1:
        raise UsageError("x0 must be in [0,1]")
    if not args.n0 > 0:
        raise UsageError("n0 must be positive")
    if not args.dt > 0:
        raise UsageError("dt must be positive")
    if args.stride < 1:
        raise UsageError("stride must be at least 1")
    try:
        params = tank.TankParams(order=args.order, rate=args.rate, latent=args.latent,
                                 conversion_heat=args.conversion_heat,
                                 heat_leak=args.heat_leak, catalyst_gamma=args.catalyst_gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = {"order": params.order, "latent": params.latent,
              "conversion_heat": params.conversion_heat, "heat_leak": params.heat_leak,
              "catalyst_gamma": params.catalyst_gamma, "x0": args.x0, "n0": args.n0,
              "dt": args.dt}
    if args.calibrate:
        if not args.at_hours > 0:
            raise UsageError("at-hours must be positive")
        k = tank.calibrate_rate(args.x0, args.target_boiloff, args.at_hours, params,
                                dt=args.dt, n0=args.n0)
        traj = tank.simulate(tank.TankState(args.n0, args.x0),
                             dataclasses.replace(params, rate=k),
                             args.at_hours, args.dt)
        return render(config, ["rate", "at_hours", "target_boiloff", "boiloff"],
                      [[k, args.at_hours, args.target_boiloff, tank.boiloff_fraction(traj)]],
                      args.format)
    if not args.hours > 0:
        raise UsageError("hours must be positive")
    config["rate"] = params.rate
    traj = tank.simulate(tank.TankState(args.n0, args.x0), params, args.hours, args.dt)
    keep = traj[::args.stride]
    if keep[-1] is not traj[-1]:
        keep.append(traj[-1])
    return render(config, ["t_h", "n_mol", "x_ortho"], [[s.t, s.n, s.x] for s in keep], args.format,
                  extra={"boiloff": tank.boiloff_fraction(traj)})


def cmd_pipeline(args):
    params = _filter_params(args)
    for name in ("steric_ratio", "base_rate", "dwell"):
        if not getattr(args, name) > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    with open(args.population) as fh:
        pop = pipeline.MoleculePopulation.from_csv(fh.read())
    report = pipeline.run_pipeline(pop, args.filter, params, args.steric_ratio,
                                   args.base_rate, args.dwell)
    config = {"filter": args.filter, "vmin": params.v_min, "width": params.width,
              "a_slow": params.a_slow, "a_fast": params.a_fast,
              "steric_ratio": args.steric_ratio, "base_rate": args.base_rate,
              "dwell": args.dwell}
    fields = list(report.__dataclass_fields__)
    return render(config, fields, [[getattr(report, f) for f in fields]], args.format)


# --------------------------------------------------------------------------
# parser


def _add_output_opts(p, suppress):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--format", choices=("csv", "json"),
                   default=default if suppress else "csv", help="output format")
    p.add_argument("--output", default=default, metavar="PATH",
                   help="write to PATH instead of standard output")


def _add_filter_opts(p):
    d = alignment.FilterParams()
    p.add_argument("--vmin", type=float, default=d.v_min, help="barrier V_min (eV)")
    p.add_argument("--width", type=float, default=d.width, help="crossover width (eV)")
    p.add_argument("--a-slow", type=float, default=d.a_slow)
    p.add_argument("--a-fast", type=float, default=d.a_fast)


def _add_rotor_opts(p):
    d = thermo.RotationalModel()
    p.add_argument("--b-mev", type=float, default=d.b, help="rotational constant (meV)")
    p.add_argument("--j-max", type=int, default=d.j_max)
    temps = p.add_mutually_exclusive_group()
    temps.add_argument("--temp-kelvin", type=float)
    temps.add_argument("--temp-range", metavar="LO:HI:STEPS")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orthopara",
        description="Ortho-para hydrogen conversion toolkit.",
    )
    _add_output_opts(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("xi-sweep", help="hyperfine matrix element over (Z, theta)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--density", metavar="FILE", help="cube file of net spin density")
    src.add_argument("--synthetic", metavar="KIND:A:R0",
                     help="analytic profile, e.g. exponential:1:0.5")
    p.add_argument("--z-min", type=float, default=0.2)
    p.add_argument("--z-max", type=float, default=3.0)
    p.add_argument("--z-steps", type=int, default=29)
    p.add_argument("--theta", default="10,70", metavar="LIST", help="angles in degrees")
    p.add_argument("--lambda-c", type=float, default=1.0)
    p.add_argument("--bond-length", type=float, default=0.74, help="H-H distance (Angstrom)")
    p.add_argument("--axis", default="z", help="x, y, z or comma-separated unit vector")
    p.add_argument("--center", default="0,0,0", help="ion position (Angstrom)")
    p.add_argument("--phi", type=float, default=0.0, help="azimuth (degrees)")
    p.add_argument("--sublevel", type=int, choices=(-1, 0, 1), default=None,
                   help="single ortho sublevel (default: unpolarized average)")
    p.set_defaults(func=cmd_xi_sweep)

    p = sub.add_parser("alignment", help="quadrupole alignment factor")
    p.add_argument("--table", metavar="FILE", help="CSV with header j,mj,etot_ev,d")
    p.add_argument("--j", type=int)
    p.add_argument("--etot", type=float)
    p.add_argument("--model", action="store_true", help="use the translational-energy model")
    p.add_argument("--et", type=float, help="final translational energy (eV)")
    _add_filter_opts(p)
    p.set_defaults(func=cmd_alignment)

    p = sub.add_parser("equilibrium", help="equilibrium ortho fraction")
    _add_rotor_opts(p)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("heat-capacity", help="rotational heat capacity")
    p.add_argument("--species", choices=thermo.SPECIES, default="normal")
    _add_rotor_opts(p)
    p.set_defaults(func=cmd_heat_capacity)

    dp = tank.TankParams()
    p = sub.add_parser("tank", help="liquid tank boil-off")
    p.add_argument("--x0", type=float, default=0.75, help="initial ortho fraction")
    p.add_argument("--n0", type=float, default=1.0, help="initial liquid (mol)")
    p.add_argument("--hours", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--order", type=int, choices=(1, 2), default=dp.order)
    p.add_argument("--rate", type=float, default=dp.rate)
    p.add_argument("--latent", type=float, default=dp.latent, help="kJ/mol")
    p.add_argument("--conversion-heat", type=float, default=dp.conversion_heat, help="kJ/mol")
    p.add_argument("--heat-leak", type=float, default=dp.heat_leak, help="kJ/h")
    p.add_argument("--catalyst-gamma", type=float, default=dp.catalyst_gamma)
    p.add_argument("--stride", type=int, default=1, help="emit every N-th state")
    p.add_argument("--calibrate", action="store_true", help="solve for the rate constant")
    p.add_argument("--target-boiloff", type=float, default=0.40)
    p.add_argument("--at-hours", type=float, default=100.0)
    p.set_defaults(func=cmd_tank)

    p = sub.add_parser("pipeline", help="filter + steric conversion stage")
    p.add_argument("--population", required=True, metavar="FILE",
                   help="CSV with header j,mj,et_ev,weight")
    p.add_argument("--filter", choices=pipeline.MODES, default="slow")
    p.add_argument("--steric-ratio", type=float, required=True)
    p.add_argument("--base-rate", type=float, required=True, help="1/h")
    p.add_argument("--dwell", type=float, required=True, help="h")
    _add_filter_opts(p)
    p.set_defaults(func=cmd_pipeline)

    for p in sub.choices.values():
        _add_output_opts(p, suppress=True)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        text = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"orthopara: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"orthopara: error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
