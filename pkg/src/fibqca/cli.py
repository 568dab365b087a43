"""Command line front end.

Scenario subcommands take a JSON config file and/or key=value overrides;
the utility subcommands dump tables or run one-off evolutions.  Exit
codes: 0 success, 2 invalid configuration or arguments, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .harness import (
    PRESETS,
    SCENARIOS,
    ExperimentConfig,
    basis_rows,
    cycle_rows,
    evolve_command,
    preset_config,
    resolve_config,
    run_scenario,
    write_csv,
)
from .quasiparticle import loschmidt_analytic, loschmidt_gaussian


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ValueError(f"override {text!r} must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings stay strings
    return key, value


def _load_scenario_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        data.update(loaded)
    if data.get("scenario", args.scenario) != args.scenario:
        raise ValueError(
            f"config file names scenario {data['scenario']!r} but the "
            f"command is {args.scenario!r}"
        )
    data["scenario"] = args.scenario
    for override in args.overrides:
        key, value = _parse_override(override)
        data[key] = value
    return ExperimentConfig.from_mapping(data)


def _emit(rows, header, out):
    if out and out != "-":
        write_csv(out, header, rows)
    else:
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(str(v) for v in row) + "\n")


def _add_scenario_parsers(sub):
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--dry-run", action="store_true",
                       help="print the resolved parameter set and exit")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="config overrides")
        p.set_defaults(handler=_handle_scenario, scenario=name)


def _handle_scenario(args) -> int:
    cfg = resolve_config(_load_scenario_config(args))
    if args.dry_run:
        json.dump(cfg.resolved(), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0
    manifest = run_scenario(cfg)
    for name in manifest["outputs"]:
        print(f"wrote {cfg.output_dir}/{name}")
    return 0


def _handle_basis(args) -> int:
    _emit(basis_rows(args.n), ["index", "bits", "wall_count"], args.out)
    return 0


def _handle_cycles(args) -> int:
    _emit(cycle_rows(args.n), ["cycle_id", "length", "representative_bits"], args.out)
    return 0


def _handle_evolve(args) -> int:
    for path in evolve_command(args.n, args.epsilon, args.steps, args.initial,
                               args.measure, args.every, args.out):
        print(f"wrote {path}")
    return 0


def _handle_echo_analytic(args) -> int:
    z = np.linspace(0.0, args.z_max, args.points)
    exact = loschmidt_analytic(z, k=args.k)
    rows = [[z[i], exact[i], loschmidt_gaussian(z[i])] for i in range(z.size)]
    _emit_float = args.out and args.out != "-"
    if _emit_float:
        write_csv(args.out, ["z", "L_exact", "L_gaussian"], rows)
    else:
        sys.stdout.write("z,L_exact,L_gaussian\n")
        for row in rows:
            sys.stdout.write(",".join("%.17g" % v for v in row) + "\n")
    return 0


def _handle_preset(args) -> int:
    if args.list or not args.name:
        width = max(len(n) for n in PRESETS)
        for name in PRESETS:
            print(f"{name:<{width}}  {PRESETS[name]['description']}")
        return 0
    cfg = resolve_config(preset_config(args.name, output_dir=args.out_dir))
    if args.dry_run:
        json.dump(cfg.resolved(), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0
    manifest = run_scenario(cfg)
    for name in manifest["outputs"]:
        print(f"wrote {cfg.output_dir}/{name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibqca",
        description="Exact simulator of the constrained three-step automaton circuit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_scenario_parsers(sub)

    p = sub.add_parser("basis", help="dump the constrained basis as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=_handle_basis)

    p = sub.add_parser("cycles", help="dump the automaton orbit table as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=_handle_cycles)

    p = sub.add_parser("evolve", help="measured evolution of one initial state")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--initial", default="A")
    p.add_argument("--measure", default="tangle_profile,q")
    p.add_argument("--every", type=int, default=1)
    p.add_argument("--out", required=True, help="scalar CSV path")
    p.set_defaults(handler=_handle_evolve)

    p = sub.add_parser("echo-analytic", help="analytic echo table")
    p.add_argument("--z-max", type=float, default=0.3)
    p.add_argument("--points", type=int, default=151)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=_handle_echo_analytic)

    p = sub.add_parser("preset", help="run a named parameter preset")
    p.add_argument("name", nargs="?", help="preset name; omit with --list")
    p.add_argument("--list", action="store_true", help="list available presets")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--dry-run", action="store_true")
    p.set_defaults(handler=_handle_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 3
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
