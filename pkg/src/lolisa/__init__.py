"""Type checker and big-step interpreter for Lolisa over a label-addressed memory model."""

from .check import TypeCheckError, check_program
from .evaluator import ExecResult, Trace, exec_program
from .memory import dump_state
from .parser import NameTable, ParseError, parse
from .stdlib import build_stdlib

__all__ = [
    "ExecResult", "NameTable", "ParseError", "Trace", "TypeCheckError", "build_stdlib",
    "check_program", "dump_state", "exec_program", "parse",
]
__version__ = "0.1.0"
