"""Command-line front end.

    emmetric verify    --scenario s.json [--out report.json]
    emmetric lax       --scenario s.json [--out path.csv]
    emmetric decouple  --scenario s.json [--out report.json] [--csv P.csv]
    emmetric construct --scenario s.json [--mode prop3|compose] [--out system.json]
    emmetric demo      n2|n3|sec5 [--out report.json]

Exit status: 0 when every check passes, 2 when a check fails, 1 on bad input.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .decouple import check_decoupling, compose_coupled, diagonalize_path
from .expr import DomainError
from .helmholtz import verify_all
from .lax import crossings, eigen_drift, solve_lax, spectrum, symmetry_error, trace_drift
from .paths import MatrixPath, evaluate_numeric
from .scenario import ScenarioError, load, matrix_from_json, system_from_json

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


class InputError(Exception):
    pass


def fit_grid(t0, t1, h):
    """Adjust h so it divides [t0, t1] into a whole number of steps."""
    steps = max(1, int(round((t1 - t0) / h)))
    return t0, t1, (t1 - t0) / steps


def _grid(sc):
    t0, t1, h = sc.window
    if sc.system is not None and sc.system.window is not None:
        t0, t1 = max(t0, sc.system.window[0]), min(t1, sc.system.window[1])
    return fit_grid(t0, t1, h)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _scenario(args):
    overrides = {k: getattr(args, k, None) for k in ("t0", "t1", "h", "seed", "samples")}
    overrides["tolerance"] = getattr(args, "tol", None)
    return load(args.scenario, overrides)


def _verify(sc):
    if sc.system is None or sc.candidate is None:
        raise InputError("verify needs a system and a candidate multiplier")
    grid = _grid(sc)
    return verify_all(sc.system, sc.candidate, grid, tol=sc.settings["tolerance"],
                      samples=sc.settings["samples"], seed=sc.settings["seed"])


def cmd_verify(args):
    sc = _scenario(args)
    report = _verify(sc)
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _lax_inputs(sc):
    spec = sc.data.get("lax", {})
    t0, t1, h = _grid(sc)
    if "gamma" in spec:
        gamma = matrix_from_json(spec["gamma"], sc.base_dir)
    elif sc.system is not None:
        system = sc.system
        gamma = lambda t: np.asarray(system.connection(t, [0.0] * system.n), float)
    else:
        raise InputError("lax needs 'lax.gamma' or a system")
    if "g0" in spec:
        g0 = evaluate_numeric(matrix_from_json(spec["g0"], sc.base_dir), t0)
    elif sc.candidate is not None:
        g0 = sc.candidate(t0)
    else:
        raise InputError("lax needs 'lax.g0' or a candidate")
    return gamma, g0, (t0, t1), h


def cmd_lax(args):
    sc = _scenario(args)
    gamma, g0, tspan, h = _lax_inputs(sc)
    path = solve_lax(gamma, g0, tspan, h)
    lam = spectrum(path)
    summary = {"version": __version__, "t0": tspan[0], "t1": tspan[1], "h": path.h,
               "steps": len(path) - 1, "eigenvalues_t0": lam[0].tolist(),
               "eigen_drift": eigen_drift(path), "trace_drift": trace_drift(path),
               "symmetry_error": symmetry_error(path), "crossings": crossings(path)}
    csv_text = path.to_csv()
    if args.out:
        _emit(csv_text, args.out)
        sys.stdout.write(_dump(summary))
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(_dump(summary))
    return EXIT_OK


def _decouple(sc, csv_out=None):
    if sc.system is None or sc.candidate is None:
        raise InputError("decouple needs a system and a candidate multiplier")
    t0, t1, h = _grid(sc)
    g = sc.candidate.g
    gpath = g if isinstance(g, MatrixPath) else MatrixPath.from_function(g, t0, t1, h)
    P, eigs, blocks = diagonalize_path(gpath)
    report = check_decoupling(sc.system, P, blocks, samples=sc.settings["samples"],
                              seed=sc.settings["seed"])
    result = {"version": __version__, "route": "orthogonal", **report.to_dict()}
    if sc.transform is not None:
        alt = check_decoupling(sc.system, sc.transform, sc.family.transform_blocks(),
                               orthogonal=False, samples=sc.settings["samples"],
                               seed=sc.settings["seed"])
        result["closed_form_transform"] = alt.to_dict()
        result["pass"] = bool(result["pass"] and alt.passed)
    if csv_out:
        _emit(P.to_csv(), csv_out)
    return result


def cmd_decouple(args):
    sc = _scenario(args)
    result = _decouple(sc, args.csv)
    _emit(_dump(result), args.out)
    return EXIT_OK if result["pass"] else EXIT_FAIL


def _construct(sc, mode):
    from .timeonly import construct_system

    spec = dict(sc.data.get("construct", {}))
    mode = mode or spec.get("mode")
    if mode == "prop3":
        for key in ("W", "S", "U"):
            if key not in spec:
                raise InputError(f"prop3 construction needs {key!r}")
        U = matrix_from_json(spec["U"], sc.base_dir, orthogonal=True)
        system, g = construct_system(str(spec["W"]), np.array(spec["S"], float), U)
    elif mode == "compose":
        for key in ("subsystems", "lambdas", "P"):
            if key not in spec:
                raise InputError(f"compose construction needs {key!r}")
        subs = [system_from_json(s) for s in spec["subsystems"]]
        P = matrix_from_json(spec["P"], sc.base_dir, orthogonal=True)
        system, g = compose_coupled(subs, spec["lambdas"], P)
    else:
        raise InputError(f"unknown construction mode {mode!r} (use prop3 or compose)")
    return system, g


def cmd_construct(args):
    sc = _scenario(args)
    system, g = _construct(sc, args.mode)
    sysd = system.to_dict()
    strings = g.g.to_strings() if not isinstance(g.g, MatrixPath) else None
    if sysd is None or strings is None:
        raise InputError("constructed system has no expression form (sampled inputs)")
    t0, t1, h = sc.window
    out = {"schema_version": 1, "system": sysd, "candidate": {"g": strings},
           "window": {"t0": t0, "t1": t1, "h": h}}
    _emit(_dump(out), args.out)
    return EXIT_OK


DEMOS = {
    "n2": {"system": {"family": "n2", "params": {"sigma": "0.6+0.2*sin(t)", "k": "1+0.3*t",
                                                  "m": "2-cos(t)", "A": 1.0, "B": 1.2, "C": 3.0}}},
    "n3": {"system": {"family": "n3", "params": {"a": "0.5*sin(t)", "c1": 1.0, "c2": 3.0,
                                                  "f": "x1*x2", "U_pot": "x1^2*x2 + x2^2",
                                                  "Z_pot": "x1^3"}}},
    "sec5": {"system": {"family": "sec5", "params": {"a": "1", "theta": "t"}}},
}


def demo_scenario(name):
    if name not in DEMOS:
        raise InputError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
    return {"schema_version": 1, **json.loads(json.dumps(DEMOS[name]))}


def cmd_demo(args):
    data = demo_scenario(args.name)
    overrides = {k: getattr(args, k, None) for k in ("t0", "t1", "h", "seed", "samples")}
    overrides["tolerance"] = args.tol
    sc = load(data, overrides)
    report = _verify(sc)
    dec = _decouple(sc)
    out = {"demo": args.name, "verify": report.to_dict(), "decouple": dec,
           "pass": bool(report.passed and dec["pass"])}
    _emit(_dump(out), args.out)
    return EXIT_OK if out["pass"] else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="emmetric", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--h", type=float, help="time grid step")
        p.add_argument("--t0", type=float, help="window start")
        p.add_argument("--t1", type=float, help="window end")
        p.add_argument("--tol", type=float, help="residual tolerance")
        p.add_argument("--seed", type=int, help="sample cloud seed")
        p.add_argument("--samples", type=int, help="sample cloud size")
        return p

    common(sub.add_parser("verify", help="check a multiplier candidate")).set_defaults(func=cmd_verify)
    common(sub.add_parser("lax", help="integrate the Lax flow")).set_defaults(func=cmd_lax)
    p = common(sub.add_parser("decouple", help="diagonalize and check decoupling"))
    p.add_argument("--csv", help="write the diagonalizing path as CSV")
    p.set_defaults(func=cmd_decouple)
    p = common(sub.add_parser("construct", help="build a system with a multiplier"))
    p.add_argument("--mode", choices=["prop3", "compose"])
    p.set_defaults(func=cmd_construct)
    p = common(sub.add_parser("demo", help="run a built-in example end to end"), scenario=False)
    p.add_argument("name", choices=sorted(DEMOS))
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, InputError, OSError, DomainError, ValueError, TypeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
