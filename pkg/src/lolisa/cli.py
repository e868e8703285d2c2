"""Command-line runner: ``lolisa run|check|fmt``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .check import TypeCheckError, check_program
from .env import GasTable, Out, load_gas_config
from .evaluator import DEFAULT_BUDGET, ExecResult, Trace, exec_program
from .memory import dump_state
from .parser import NameTable, ParseError, SurfaceProgram, parse
from .stdlib import STDLIB_SOURCE, build_stdlib

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2
EXIT_GAS = 3


@dataclass(frozen=True)
class RunConfig:
    budget: int = DEFAULT_BUDGET
    limit: int = 0
    table: Optional[GasTable] = None
    trace: int = 0
    dump: bool = False

    def __post_init__(self) -> None:
        if self.budget < 0 or self.limit < 0:
            raise ValueError("gas budget and limit must be natural numbers")


@dataclass
class Loaded:
    program: SurfaceProgram
    lib: SurfaceProgram
    bindings: dict
    natives: dict


def load(source: str, lib_source: Optional[str] = None) -> Loaded:
    """Parse the library and the program into one name table, then check both."""
    names = NameTable()
    if lib_source is None:
        image = build_stdlib(names)
        lib = SurfaceProgram(STDLIB_SOURCE, image.decls, names)
        bindings, natives = image.bindings, image.natives
    else:
        lib = parse(lib_source, names)
        image = build_stdlib(NameTable())
        bindings = {n: names.address(n) for n in ("msg", "block", "self")
                    if n in names.by_name}
        bindings.update({k: v for k, v in image.bindings.items() if k not in bindings})
        natives = image.natives
    program = parse(source, names)
    check_program(program.parsed, lib.parsed, natives)
    return Loaded(program, lib, bindings, natives)


def exit_code(result: ExecResult) -> int:
    if result.gas_exhausted:
        return EXIT_GAS
    if result.outcome.kind is Out.error:
        return EXIT_ERROR
    return EXIT_OK


def run_source(source: str, config: RunConfig = RunConfig(),
               lib_source: Optional[str] = None) -> tuple[int, ExecResult, Trace]:
    loaded = load(source, lib_source)
    result, trace = exec_program(loaded.program.parsed, loaded.lib.parsed,
                                 budget=config.budget, limit=config.limit, table=config.table,
                                 trace_dumps=config.trace > 1, bindings=loaded.bindings)
    return exit_code(result), result, trace


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _cmd_run(args: argparse.Namespace) -> int:
    table, budget, limit = None, DEFAULT_BUDGET, 0
    if args.gas_table:
        cfg = load_gas_config(args.gas_table)
        table = cfg.table
        budget = cfg.budget if cfg.budget is not None else budget
        limit = cfg.limit if cfg.limit is not None else limit
    if args.gas_budget is not None:
        budget = args.gas_budget
    if args.gas_limit is not None:
        limit = args.gas_limit
    config = RunConfig(budget, limit, table, args.trace, args.dump)
    lib = _read(args.lib) if args.lib else None
    code, result, trace = run_source(_read(args.file), config, lib)
    if config.trace:
        sys.stdout.write(trace.render())
    if config.dump:
        sys.stdout.write(dump_state(result.sigma))
    status = result.diag if result.diag else ""
    print(f"outcome: {result.outcome} gas: {result.env.gas}" + (f" ({status})" if status else ""),
          file=sys.stderr)
    return code


def _cmd_check(args: argparse.Namespace) -> int:
    load(_read(args.file), _read(args.lib) if args.lib else None)
    print("ok", file=sys.stderr)
    return EXIT_OK


def _cmd_fmt(args: argparse.Namespace) -> int:
    sys.stdout.write(parse(_read(args.file)).render())
    return EXIT_OK


def _natural(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("expected a natural number")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lolisa", description="Check and run Lolisa programs.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="check and execute a program")
    run.add_argument("file", help="program source ('-' for stdin)")
    run.add_argument("--lib", help="replace the standard library with this source")
    run.add_argument("--gas-budget", type=_natural, help=f"initial gas (default {DEFAULT_BUDGET})")
    run.add_argument("--gas-limit", type=_natural, help="gas floor at which execution stops")
    run.add_argument("--gas-table", help="file of gas.<Kind>=<cost> lines")
    run.add_argument("--trace", action="count", default=0,
                     help="print the statement trace; repeat to include memory dumps")
    run.add_argument("--dump", action="store_true", help="print the final memory dump")
    run.set_defaults(func=_cmd_run)

    check = sub.add_parser("check", help="parse and type-check a program")
    check.add_argument("file")
    check.add_argument("--lib", help="replace the standard library with this source")
    check.set_defaults(func=_cmd_check)

    fmt = sub.add_parser("fmt", help="print the canonical form of a program")
    fmt.add_argument("file")
    fmt.set_defaults(func=_cmd_fmt)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TypeCheckError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (OSError, ValueError) as exc:
        print(f"lolisa: {exc}", file=sys.stderr)
        return EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
