from __future__ import annotations

from pathlib import Path

from lolisa.cli import load
from lolisa.env import Env, GasTable
from lolisa.evaluator import Machine, exec_program, initial_memory
from lolisa.memory import dump_state

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


def run(source: str, budget: int = 1_000_000, limit: int = 0, table: GasTable | None = None,
        lib_source: str | None = None):
    """Parse, check and execute; returns (result, trace, loaded)."""
    loaded = load(source, lib_source)
    result, trace = exec_program(loaded.program.parsed, loaded.lib.parsed, budget=budget,
                                 limit=limit, table=table, bindings=loaded.bindings)
    return result, trace, loaded


def initial(loaded):
    """The σ_init a run of ``loaded`` starts from."""
    return initial_memory(loaded.program.parsed, loaded.lib.parsed, loaded.bindings)


def machine(loaded, budget: int = 1_000_000):
    sigma = initial(loaded)
    fenv = Env()
    return Machine(sigma, fenv, bindings=loaded.bindings), sigma, Env(gas=budget)


def addr(loaded, name: str):
    return loaded.program.names.by_name[name]


def block_value(sigma, loaded, name: str):
    return sigma.get(addr(loaded, name)).value


def dumps_equal(a, b) -> bool:
    return dump_state(a) == dump_state(b)


def ico_source(now: int = 4, values: int = 50) -> str:
    text = fixture("ico.lol")
    text = text.replace("(Evar now Tuint) (Econst (Vuint 4))",
                        f"(Evar now Tuint) (Econst (Vuint {now}))")
    return text.replace("(Econst (Vuint 50))))) ;;", f"(Econst (Vuint {values}))))) ;;")
