from __future__ import annotations

import subprocess
import sys

import pytest

from lolisa.cli import main

from helpers import FIXTURES

LOOP = ("(Var public (Evar a Tint)) ;; "
        "(Loop_while (Econst (Vbool true)) (Assignv (Evar a Tint) (Econst (Vint 1))))")


@pytest.fixture
def program(tmp_path):
    def write(text: str, name: str = "p.lol"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_run_ok(program, capsys):
    assert main(["run", program("(Var public (Evar a Tint))")]) == 0
    assert "outcome: normal" in capsys.readouterr().err


def test_run_dump(program, capsys):
    assert main(["run", "--dump", program("(Var public (Evar a Tint))")]) == 0
    assert "m_0x" in capsys.readouterr().out


def test_throw_exits_zero(program, capsys):
    assert main(["run", program("Throw")]) == 0
    assert "outcome: stop" in capsys.readouterr().err


def test_runtime_error_exits_two(program, capsys):
    src = "(Var public (Evar a Tint)) ;; (Assignv (Evar a Tint) ((Evar a Tint) (+) (Evar a Tint)))"
    assert main(["run", program(src)]) == 2
    assert "uninitialized" in capsys.readouterr().err


def test_gas_exhaustion_exits_three(program, capsys):
    assert main(["run", "--gas-budget", "50", program(LOOP)]) == 3
    assert main(["run", "--gas-budget", "0", program("(Var public (Evar a Tint))")]) == 3


def test_gas_table_file(program, capsys):
    table = program("gas.Assignv=100\n", "gas.cfg")
    src = program("(Var public (Evar a Tint)) ;; (Assignv (Evar a Tint) (Econst (Vint 1)))")
    assert main(["run", "--gas-table", table, "--gas-budget", "50", src]) == 3
    assert main(["run", "--gas-table", table, src]) == 0


def test_trace_lists_statements(program, capsys):
    assert main(["run", "--trace", "--gas-budget", "10", program(LOOP)]) == 3
    out = capsys.readouterr().out
    assert "LoopWhile" in out and "m_init" not in out
    main(["run", "--trace", "--trace", "--gas-budget", "4", program(LOOP)])
    assert "m_init" in capsys.readouterr().out


def test_check_reports_the_rule(program, capsys):
    assert main(["check", program("(Var public (Evar b Tbool) (Econst (Vint 4)))")]) == 1
    assert "STT-ASSIGN" in capsys.readouterr().err
    assert main(["check", program("(Var public (Evar b Tbool))")]) == 0


def test_parse_errors_exit_one(program, capsys):
    assert main(["check", program("(Var public")]) == 1
    assert "1:1" in capsys.readouterr().err


def test_missing_file_exits_one(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.lol")]) == 1


def test_fmt_is_idempotent(program, capsys):
    assert main(["fmt", str(FIXTURES / "ico.lol")]) == 0
    first = capsys.readouterr().out
    assert main(["fmt", program(first)]) == 0
    assert capsys.readouterr().out == first


def test_ico_fixture_from_the_command_line():
    proc = subprocess.run([sys.executable, "-m", "lolisa.cli", "run", str(FIXTURES / "ico.lol")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "throw" in proc.stderr
