"""Command-line interface.

Settings are resolved in three layers: built-in defaults, then the JSON file
given with ``--config``, then individual flags. Exit codes: 0 success,
1 invalid configuration, 2 solver failure, 3 failed verification without
``--allow-unverified``.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import json
import sys
from pathlib import Path

from .auction import run_auction
from .errors import ConfigError, SolverError
from .scenario import (FIGURES, SWEEP_AXES, ScenarioConfig, ScenarioRunner, UnverifiedError,
                       run_scenario, sweep)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_UNVERIFIED = 0, 1, 2, 3


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _axis(text):
    name, sep, values = text.partition("=")
    if not sep or name not in SWEEP_AXES:
        raise argparse.ArgumentTypeError(f"expected AXIS=v1,v2,... with AXIS in {', '.join(SWEEP_AXES)}")
    return name, _floats(values)


class _Parser(argparse.ArgumentParser):
    """Usage errors count as invalid configuration."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON scenario file")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--grid", type=int, help="samples per phase")
    common.add_argument("--allow-unverified", action="store_true",
                        help="emit output even if a residual check fails")
    common.add_argument("--quad-mode", choices=["feedback", "matched", "printed"],
                        help="coefficient system (default feedback)")
    common.add_argument("--svg", action="store_true", help="also write SVG charts")
    common.add_argument("--x1-0", dest="x1_0", type=float, help="initial share of operator 1")
    common.add_argument("--T", dest="T_values", type=_floats, help="deployment times, comma-separated")
    common.add_argument("--gamma", dest="gamma_values", type=_floats, help="spite coefficients")
    common.add_argument("--eta", type=float, help="sensitivity to double-speed service")
    common.add_argument("--rho", type=float, help="discount rate")

    parser = _Parser(prog="specgame",
                     description="Spectrum duopoly pricing, revenues and auctions.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("phase", parents=[common], help="solve both phases and write trajectories")
    sub.add_parser("revenues", parents=[common], help="discounted revenues and revenue gain")
    sub.add_parser("auction", parents=[common], help="equilibrium bids and outcomes")
    fig = sub.add_parser("figure", parents=[common], help="reproduce one figure as CSV")
    fig.add_argument("name", choices=FIGURES)
    sw = sub.add_parser("sweep", parents=[common], help="cross-product parameter sweep")
    sw.add_argument("--axis", action="append", type=_axis, default=[],
                    help="AXIS=v1,v2,...; repeat for more axes")
    sw.add_argument("--workers", type=int, default=1)
    ver = sub.add_parser("verify", parents=[common], help="compare closed forms with the oracle")
    ver.add_argument("--dt", type=float, default=1e-4, help="oracle time step")
    return parser


def resolve_config(args) -> ScenarioConfig:
    config = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    return config.override(
        grid=args.grid, quad_constant_mode=args.quad_mode, x1_0=args.x1_0,
        T_values=tuple(args.T_values) if args.T_values else None,
        gamma_values=tuple(args.gamma_values) if args.gamma_values else None,
        eta=args.eta, rho=args.rho,
    )


def _emit(bundle, out):
    if out is None:
        for name, text in bundle.files.items():
            if name.endswith(".csv") or name.endswith(".json"):
                sys.stdout.write(f"## {name}\n{text}")
        return
    for path in bundle.write(out):
        print(path)


def _print_json(obj, out, name):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
        print(out / name)


def _cmd_verify(config, args) -> int:
    from .oracle import adjudicate, compare_finite, compare_infinite

    p, mode = config.params, config.mode
    rows = [compare_finite(p, config.x1_0, T, mode, args.dt) for T in config.T_values]
    rows.append(compare_infinite(p, mode, args.dt))
    adj = [adjudicate(p, T, args.dt) for T in config.T_values]
    print(f"{'T':>6} {'mode':>9} {'k err':>10} {'e err':>10} {'price err':>10} {'x1 err':>10}  status")
    for r in rows:
        T = "inf" if r.T is None else format(r.T, "g")
        print(f"{T:>6} {r.mode:>9} {r.k_err:10.3e} {r.e_err:10.3e} {r.price_err:10.3e} "
              f"{r.share_err:10.3e}  {r.status}")
    print("\ndeviation of k(t) from the step-extrapolated oracle:")
    for a in adj:
        parts = ", ".join(f"{m} {d:.3e} ({a.ratio(m):.3g}x)" for m, d in a.deviation.items())
        print(f"  T={a.T:g}: oracle error {a.oracle_error:.3e}; {parts}")
    report = {"comparisons": [r.to_dict() for r in rows], "adjudication": [a.to_dict() for a in adj],
              "quad_constant_mode": mode.value, "config_hash": config.hash()}
    passed = all(r.passed for r in rows)
    report["oracle"] = "PASS" if passed else "FAIL"
    if args.out is not None:
        _print_json(report, args.out, "verify.json")
    if not passed and not args.allow_unverified:
        print("verification FAILED", file=sys.stderr)
        return EXIT_UNVERIFIED
    return EXIT_OK


def run(args) -> int:
    config = resolve_config(args)
    if args.command == "verify":
        return _cmd_verify(config, args)
    if args.command == "sweep":
        axes = dict(args.axis) if args.axis else None
        text = sweep(config, axes, workers=args.workers)
        if args.out is None:
            sys.stdout.write(text)
        else:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "sweep.csv").write_text(text)
            print(args.out / "sweep.csv")
        if "# oracle=FAIL" in text and not args.allow_unverified:
            print("some trajectories failed the residual checks", file=sys.stderr)
            return EXIT_UNVERIFIED
        return EXIT_OK
    if args.command == "figure":
        bundle = run_scenario(config, args.allow_unverified, args.svg, outputs=(args.name,))
        _emit(bundle, args.out or Path("out"))
        return EXIT_OK
    if args.command == "phase":
        bundle = run_scenario(config, args.allow_unverified, args.svg, outputs=("trajectories",))
        _emit(bundle, args.out)
        return EXIT_OK
    runner = ScenarioRunner(config)
    p = config.params
    if args.command == "revenues":
        records = [runner.revenue_report(p, config.x1_0, T).to_dict() for T in config.T_values]
    else:
        records = []
        for g, T in itertools.product(config.gamma_values, config.T_values):
            inputs = runner.auction_inputs(p, config.auction_x1_0, T, g)
            rec = {"gamma": g, "T": T, "inputs": dataclasses.asdict(inputs)}
            rec.update(dataclasses.asdict(run_auction(inputs)))
            records.append(rec)
    if not runner.verified and not args.allow_unverified:
        raise UnverifiedError("trajectories failed the residual checks",
                              {"oracle": "FAIL", "residuals": runner.residual_log})
    _print_json(records, args.out, f"{args.command}.json")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnverifiedError as exc:
        if args.out is not None:
            _print_json(exc.report, args.out, "report.json")
        print(f"verification failed: {exc}; rerun with --allow-unverified to emit anyway",
              file=sys.stderr)
        return EXIT_UNVERIFIED
    except SolverError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
