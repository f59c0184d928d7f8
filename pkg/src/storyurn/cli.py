"""Command-line entry point: ``storyurn <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import acceptance, reports, svg
from .dynamics import Policy, simulate
from .limit import analyze
from .model import PARAM_NAMES, InvalidParamsError, KnifeEdgeError, Region
from .montecarlo import EPS_ASSIGN, Z0, initial_at, path_dependence_report
from .statics import PREDICTIONS, sign_check, sweep, theta_shape

EXIT_OK, EXIT_FAIL, EXIT_KNIFE_EDGE = 0, 1, 2


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params(args):
    if not args.params:
        raise InvalidParamsError(["--params is required for this command"])
    return reports.load_params(args.params)


def _policy(spec: str, analysis):
    if spec == "optimal":
        return Policy.optimal(analysis.thresholds)
    if spec == "hybrid":
        return Policy.hybrid(analysis.thresholds)
    if spec.startswith("fixed:"):
        return Policy.fixed(Region(spec.split(":", 1)[1].upper()))
    raise ValueError(f"unknown policy {spec!r}; use optimal, hybrid or fixed:<N|I|M|S>")


def cmd_analyze(args) -> int:
    a = analyze(_params(args))
    out = _out_dir(args)
    reports.write_json(out / "analysis.json", a.to_dict())
    if args.svg:
        (out / "phase.svg").write_text(svg.phase_diagram(a))
    print("S_F = {" + ", ".join(f"{s.name}={s.location:.6f}" for s in a.stable_set) + "}")
    return EXIT_OK


def cmd_phase(args) -> int:
    out = _out_dir(args)
    if args.grid:
        (out / "configurations.svg").write_text(svg.configuration_grid())
    if args.params:
        a = analyze(_params(args))
        (out / "phase.svg").write_text(svg.phase_diagram(a))
    elif not args.grid:
        raise InvalidParamsError(["phase needs --params or --grid"])
    return EXIT_OK


def cmd_simulate(args) -> int:
    p = _params(args)
    a = analyze(p)
    policy = _policy(args.policy, a)
    tr = simulate(initial_at(args.y0, args.z0), policy, p, args.steps, args.seed)
    out = _out_dir(args)
    name = "trajectory.csv.gz" if args.gzip else "trajectory.csv"
    tr.to_csv(out / name, compress=args.gzip, comment=f"schema_version: {reports.SCHEMA_VERSION}")
    reports.write_json(out / "simulation.json", {
        "params": p.as_dict(), "policy": policy.to_dict(), "seed": args.seed, "n_steps": args.steps,
        "initial": {"T": tr.t[0], "F": tr.f[0]}, "final": {"T": tr.t[-1], "F": tr.f[-1], "y": tr.y[-1]},
    })
    print(f"y_final = {tr.y[-1]:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    p = _params(args)
    res = sweep(args.parameter, (args.lo, args.hi), args.points, p, log=args.log)
    out = _out_dir(args)
    reports.write_json(out / "sweep.json", reports.sweep_payload(res))
    reports.write_csv(out / "sweep.csv", reports.SWEEP_COLUMNS, reports.sweep_rows(res))
    reports.write_csv(out / "transitions.csv", reports.TRANSITION_COLUMNS, reports.transition_rows(res))
    for t in res.transitions:
        print(f"{args.parameter} in ({t.left:.6g}, {t.right:.6g}): {list(t.before)} -> {list(t.after)}")
    return EXIT_OK


def cmd_statics(args) -> int:
    p = _params(args)
    a = analyze(p)
    targets = args.targets or list(PREDICTIONS)
    params = args.parameters or list(PARAM_NAMES)
    rows = [sign_check(t, x, p, analysis=a).to_dict() for t in targets for x in params]
    payload = {"base": p.as_dict(), "sign_checks": rows}
    if args.theta_shape:
        r = theta_shape(args.theta_shape, p)
        payload["theta_shape"] = {"target": r.target, "shape": r.shape, "theta_switch": r.theta_switch}
    out = _out_dir(args)
    reports.write_json(out / "statics.json", payload)
    reports.write_csv(out / "statics.csv", reports.SIGN_COLUMNS, rows)
    failed = [r for r in rows if r["verdict"] == "fail"]
    print(f"{len(rows)} checks: {len(rows) - len(failed)} pass or not comparable, {len(failed)} fail")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_montecarlo(args) -> int:
    p = _params(args)
    rep = path_dependence_report(p, initial_at(args.y0, args.z0), args.runs, args.steps, args.seed,
                                 eps_assign=args.eps, threads=args.threads, require_multiple=False)
    out = _out_dir(args)
    reports.write_json(out / "montecarlo.json", rep.to_dict())
    reports.write_csv(out / "terminal.csv", reports.TERMINAL_COLUMNS, reports.terminal_rows(rep.distribution))
    d = rep.distribution
    for name, frac in sorted(d.fractions.items()):
        print(f"{name}: {frac:.4f}")
    print(f"unassigned: {d.unassigned_fraction:.4f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    filters = [f for item in (args.filter or []) for f in item.split(",") if f]
    results = acceptance.run(filters or None, threads=args.threads, echo=print)
    if args.out:
        out = _out_dir(args)
        reports.write_json(out / "verify.json", {"criteria": [r.to_dict() for r in results]})
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="parameter JSON file or inline JSON object")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=acceptance.SEED)
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="storyurn", description="Story sharing with endogenous attention.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="thresholds, steady states and their stability")
    p.add_argument("--svg", action="store_true", help="also write phase.svg")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("phase", parents=[common], help="phase diagram SVG")
    p.add_argument("--grid", action="store_true", help="write the 40-configuration grid")
    p.add_argument("--svg", action="store_true", help="accepted for symmetry; phase always writes SVG")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("simulate", parents=[common], help="one urn trajectory")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--policy", default="optimal", help="optimal, hybrid or fixed:<N|I|M|S>")
    p.add_argument("--y0", type=float, default=0.5)
    p.add_argument("--z0", type=float, default=Z0)
    p.add_argument("--gzip", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="analysis along a one-parameter grid")
    p.add_argument("--parameter", required=True, choices=PARAM_NAMES)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--log", action="store_true", help="geometric grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("statics", parents=[common], help="finite-difference sign checks at a base point")
    p.add_argument("--targets", nargs="*", choices=list(PREDICTIONS))
    p.add_argument("--parameters", nargs="*", choices=PARAM_NAMES)
    p.add_argument("--theta-shape", choices=["y_s_star", "y_i_star", "y_m_star"])
    p.set_defaults(func=cmd_statics)

    p = sub.add_parser("montecarlo", parents=[common], help="empirical distribution of limits")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--y0", type=float, default=0.5)
    p.add_argument("--z0", type=float, default=Z0)
    p.add_argument("--eps", type=float, default=EPS_ASSIGN)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance battery")
    p.add_argument("--filter", action="append", help="criterion key, substring or number; repeatable")
    p.set_defaults(func=cmd_verify, out=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KnifeEdgeError as exc:
        print(json.dumps({"error": "knife_edge", "landmarks": list(exc.landmarks), "message": str(exc)}),
              file=sys.stderr)
        return EXIT_KNIFE_EDGE
    except InvalidParamsError as exc:
        for v in exc.violations:
            print(f"invalid parameters: {v}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
