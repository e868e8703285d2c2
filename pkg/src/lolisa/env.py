"""Execution environments, statement outcomes and gas accounting."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

from .outcome import NONE, Some
from .types import LabelAddress


@dataclass(frozen=True)
class Env:
    inhers: tuple[LabelAddress, ...] = ()
    dom_super: Optional[LabelAddress] = None
    dom_current: Optional[LabelAddress] = None
    dom_level: int = 2
    gas: int = 0

    def __post_init__(self) -> None:
        if self.dom_level not in (0, 1, 2):
            raise ValueError(f"dom_level must be 0, 1 or 2, got {self.dom_level}")
        if self.gas < 0:
            raise ValueError("gas cannot be negative")


class Out(Enum):
    normal = "normal"
    stop = "stop"
    error = "error"
    exit = "exit"
    exit_with = "exit_with"
    continue_ = "continue"
    break_ = "break"


@dataclass(frozen=True)
class StatementOutcome:
    kind: Out
    value: object = None

    def __str__(self) -> str:
        return self.kind.value


NORMAL = StatementOutcome(Out.normal)
STOP = StatementOutcome(Out.stop)
ERROR = StatementOutcome(Out.error)
EXIT = StatementOutcome(Out.exit)


STATEMENT_KINDS = (
    "Var", "Struct", "Assignv", "Return", "Returns", "Throw", "Snil", "Fstop", "Contract",
    "Modifier", "Fun", "Funs", "FunCall", "LoopFor", "LoopWhile", "Seq", "If",
)

# Snil does nothing and Seq only sequences; neither is an executed step.
_FREE = ("Snil", "Seq")


@dataclass(frozen=True)
class GasTable:
    cost: Mapping[str, int] = field(
        default_factory=lambda: {k: 0 if k in _FREE else 1 for k in STATEMENT_KINDS})

    def __post_init__(self) -> None:
        if self.cost.get("Snil", 0) != 0:
            raise ValueError("Snil must be free")
        if any(v < 0 for v in self.cost.values()):
            raise ValueError("gas costs must be natural numbers")

    def of(self, kind: str) -> int:
        return self.cost.get(kind, 1)


@dataclass(frozen=True)
class GasConfig:
    table: GasTable = field(default_factory=GasTable)
    budget: Optional[int] = None
    limit: Optional[int] = None


def parse_gas_config(text: str) -> GasConfig:
    costs = dict(GasTable().cost)
    budget = limit = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key.startswith("gas.") or not val.isdigit():
            raise ValueError(f"line {lineno}: expected gas.<key>=<natural>, got {raw!r}")
        name = key[4:]
        if name == "budget":
            budget = int(val)
        elif name == "limit":
            limit = int(val)
        elif name in STATEMENT_KINDS:
            costs[name] = int(val)
        else:
            raise ValueError(f"line {lineno}: unknown statement kind {name!r}")
    return GasConfig(GasTable(costs), budget, limit)


def load_gas_config(path: str | Path) -> GasConfig:
    return parse_gas_config(Path(path).read_text())


def env_check(env: Env, fenv: Env) -> bool:
    if env.gas <= fenv.gas:
        return False
    same_domain = env.dom_current == fenv.dom_current
    return not (same_domain and env.dom_level != fenv.dom_level)


def set_gas(kind: str, env: Env, table: GasTable):
    """Deduct the cost of a statement kind; NONE when the gas runs out."""
    cost = table.of(kind)
    if cost > env.gas:
        return NONE
    return Some(replace(env, gas=env.gas - cost))


def set_env(env: Env, level: int, dom: Optional[LabelAddress]) -> Env:
    if level == env.dom_level and dom == env.dom_current:
        return env
    return replace(env, dom_level=level, dom_super=env.dom_current, dom_current=dom)


def init_env(program, limit: int, budget: int = 0) -> tuple[Env, Env]:
    """The running env (holding the budget) and the frame env (holding the limit)."""
    from .syntax import contract_decls

    inhers: list[LabelAddress] = []
    for contract in contract_decls(program):
        for parent in contract.inherits:
            if parent not in inhers:
                inhers.append(parent)
    fenv = Env(inhers=tuple(inhers), gas=limit)
    return replace(fenv, gas=budget), fenv
