"""Command-line entry point ``doublephase``.

Science parameters live only in the JSON config; the flags select the
subcommand, the config, the output root and the number of worker processes.
Exit codes: 0 all PASS, 1 numerical FAIL, 2 gap condition not satisfied,
3 usage or config error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .exponents import ExponentSet
from .functionals import energy_F
from .gaps import blowup_exponent, check_gap
from .grid import read_grid, write_grid
from .kernel import dump_profile, mollify
from .cylinder import Cylinder
from .scenarios import (
    OUT_ENV, ScenarioError, builtin_scenario, load_scenario, output_root, run, scenario_from_dict, suite,
)
from .verification import time_modulus

EXIT_USAGE = 3
EXIT_IO = 4
BUILTIN_PREFIX = "builtin:"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"{path}: not valid JSON ({err})") from None


def _scenario(arg):
    if arg is None:
        raise ScenarioError("this subcommand needs --config")
    if arg.startswith(BUILTIN_PREFIX):
        return builtin_scenario(arg[len(BUILTIN_PREFIX):])
    return load_scenario(arg)


def _cmd_check_gap(args) -> int:
    if args.config is None:
        raise ScenarioError("check-gap needs --config")
    cfg = _read_json(args.config)
    if "exponents" not in cfg or "regime" not in cfg:
        raise ScenarioError("check-gap: config needs 'exponents' and 'regime'")
    exps = ExponentSet.from_dict(cfg["exponents"])
    verdict = check_gap(cfg["regime"], exps)
    out = verdict.to_dict()
    out["blowup_exponent"] = blowup_exponent(cfg["regime"], exps)
    print(json.dumps(out))
    return 0 if verdict.satisfied else 2


def _cmd_mollify(args) -> int:
    if args.config is None:
        raise ScenarioError("mollify needs --config")
    base = Path(args.config).parent
    cfg = _read_json(args.config)
    if "field" not in cfg or "h" not in cfg:
        raise ScenarioError("mollify: config needs 'field' (GRIDFIELD path) and 'h'")
    src = Path(cfg["field"])
    src = src if src.is_absolute() else base / src
    w = read_grid(src)
    Q = Cylinder.from_dict(cfg["target"]) if "target" in cfg else None
    res = mollify(w, float(cfg["h"]), Q, strict_time=bool(cfg.get("strict_time", True)))
    root = output_root(args.out)
    root.mkdir(parents=True, exist_ok=True)
    dest = root / cfg.get("output", f"{src.stem}-mollified.grid")
    write_grid(dest, res)
    print(dest)
    return 0


def _cmd_energy(args) -> int:
    sc = _scenario(args.config)
    w, weight = sc.build_field(), sc.build_weight()
    out = {"scenario": sc.name,
           "Q": energy_F(w, weight, sc.exps, sc.target).to_dict(),
           "Qtilde": energy_F(w, weight, sc.exps).to_dict()}
    d = output_root(args.out) / sc.name
    d.mkdir(parents=True, exist_ok=True)
    (d / "energy.json").write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out))
    return 0


def _cmd_converge(args) -> int:
    sc = _scenario(args.config)
    code, report = run(sc, args.out)
    verdicts = " ".join(f"{k}={v}" for k, v in report.verdicts.items())
    notes = f" [{', '.join(report.annotations)}]" if report.annotations else ""
    print(f"{sc.name}: exit {code} {verdicts}{notes}")
    return code


def _cmd_suite(args) -> int:
    members = None
    if args.config is not None:
        cfg = _read_json(args.config)
        if not isinstance(cfg, dict) or not isinstance(cfg.get("scenarios"), list):
            raise ScenarioError("suite: config needs a 'scenarios' list")
        base = Path(args.config).parent
        members = []
        for item in cfg["scenarios"]:
            if isinstance(item, dict):
                members.append(scenario_from_dict(item, str(base)))
            elif item.startswith(BUILTIN_PREFIX):
                members.append(builtin_scenario(item[len(BUILTIN_PREFIX):]))
            else:
                members.append(load_scenario(base / item))
    res = suite(members, args.out, args.jobs)
    sys.stdout.write(res.table())
    return res.exit_code


def _cmd_modulus(args) -> int:
    sc = _scenario(args.config)
    deltas = sc.modulus_deltas
    if deltas is None:
        deltas = [0.0] + sorted(h * h for h in sc.h_values)
    table = time_modulus(sc.build_field(), sc.target, deltas)
    d = output_root(args.out) / sc.name
    d.mkdir(parents=True, exist_ok=True)
    (d / "modulus.csv").write_text(table.to_csv_text())
    sys.stdout.write(table.to_csv_text())
    return 0


def _cmd_profile(args) -> int:
    cfg = _read_json(args.config) if args.config else {}
    m = int(cfg.get("dimension", 1))
    root = output_root(args.out)
    root.mkdir(parents=True, exist_ok=True)
    dest = root / f"profile_{m}.csv"
    dump_profile(dest, m, int(cfg.get("points", 201)))
    print(dest)
    return 0


COMMANDS = {
    "check-gap": (_cmd_check_gap, "gap verdict and margin for an exponent set"),
    "mollify": (_cmd_mollify, "mollify a GRIDFIELD file"),
    "energy": (_cmd_energy, "energy breakdown of a scenario's field"),
    "converge": (_cmd_converge, "full convergence report of one scenario"),
    "suite": (_cmd_suite, "run the built-in scenario matrix (or a listed set)"),
    "modulus": (_cmd_modulus, "time-continuity modulus table of a scenario's field"),
    "profile": (_cmd_profile, "tabulate the one-dimensional kernel profile"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="doublephase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config path (or builtin:NAME for scenarios)")
        p.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./doublephase-out)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for the suite")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("DPHASE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command][0](args)
    except (ScenarioError, ValueError, KeyError, TypeError) as err:
        print(f"doublephase {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"doublephase {args.command}: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
