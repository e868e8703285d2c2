from __future__ import annotations

import pytest
from hypothesis import given, settings

from lolisa.check import TypeCheckError
from lolisa.env import Env, GasTable, Out
from lolisa.evaluator import Machine, _eval_bop, _eval_uop, exec_program
from lolisa.outcome import Fault
from lolisa.types import SIGNED, TINT, TUINT, IntSize, LabelAddress, TInt
from lolisa.syntax import flatten, seq
from lolisa.values import MBool, MInt

from helpers import block_value, dumps_equal, initial, run
from strategies import PROGRAM_PRELUDE, program_stmts


def ints(*decls: str) -> str:
    return " ;; ".join(f"(Var public (Evar {d} Tint))" for d in decls)


def value(result, loaded, name):
    return block_value(result.sigma, loaded, name)


# -- operators ------------------------------------------------------------------------


@pytest.mark.parametrize("op,a,b,want", [
    ("+", 2, 3, 5), ("-", 2, 3, -1), ("*", -4, 3, -12), ("/", -7, 2, -3), ("%", -7, 2, -1),
    ("&", 6, 3, 2), ("|", 6, 3, 7), ("^", 6, 3, 5), ("<<", 1, 4, 16), (">>", -16, 2, -4),
])
def test_int_arithmetic(op, a, b, want):
    assert _eval_bop(op, MInt(a, TINT), MInt(b, TINT)) == MInt(want, TINT)


@pytest.mark.parametrize("op,want", [("<", True), ("<=", True), (">", False), (">=", False),
                                     ("==", False), ("!=", True)])
def test_int_comparison(op, want):
    assert _eval_bop(op, MInt(1, TINT), MInt(2, TINT)) == MBool(want)


def test_division_by_zero_faults():
    with pytest.raises(Fault) as exc:
        _eval_bop("/", MInt(1, TINT), MInt(0, TINT))
    assert exc.value.tag


def test_overflow_faults():
    small = TInt(SIGNED, IntSize.I8)
    with pytest.raises(Fault):
        _eval_bop("+", MInt(127, small), MInt(1, small))
    with pytest.raises(Fault):
        _eval_bop("-", MInt(0, TUINT), MInt(1, TUINT))


def test_boolean_operators():
    t, f = MBool(True), MBool(False)
    assert _eval_bop("&&", t, f) == f and _eval_bop("||", t, f) == t
    assert _eval_uop("!", t) == f
    assert _eval_uop("-", MInt(3, TINT)) == MInt(-3, TINT)


def test_uninitialized_operand_faults():
    with pytest.raises(Fault):
        _eval_bop("+", MInt(None, TINT), MInt(1, TINT))


# -- statements -------------------------------------------------------------------------


def test_assignment_sequence():
    r, _, loaded = run(ints("a", "b") + " ;; (Assignv (Evar a Tint) (Econst (Vint 4))) ;; "
                       "(Assignv (Evar b Tint) ((Evar a Tint) (*) (Evar a Tint)))")
    assert r.outcome.kind is Out.normal
    assert value(r, loaded, "b") == MInt(16, TINT)


def test_if_branches():
    src = ints("a") + " ;; (If (Econst (Vbool {c})) (Assignv (Evar a Tint) (Econst (Vint 1))) " \
        "(Assignv (Evar a Tint) (Econst (Vint 2))))"
    for c, want in (("true", 1), ("false", 2)):
        r, _, loaded = run(src.format(c=c))
        assert value(r, loaded, "a") == MInt(want, TINT)


def test_while_loop_counts():
    src = ints("i", "s") + (
        " ;; (Assignv (Evar i Tint) (Econst (Vint 0))) ;; (Assignv (Evar s Tint) (Econst (Vint 0)))"
        " ;; (Loop_while ((Evar i Tint) (<) (Econst (Vint 5)))"
        "  ((Assign_op (+) (Evar s Tint) (Evar i Tint)) ;; (Incr (Evar i Tint))))")
    r, trace, loaded = run(src)
    assert r.outcome.kind is Out.normal
    assert value(r, loaded, "s") == MInt(10, TINT)
    # one entry for the statement plus one per re-test of the condition
    assert trace.count("LoopWhile") == 6


def test_for_loop():
    src = ints("i", "s") + (
        " ;; (Assignv (Evar s Tint) (Econst (Vint 1)))"
        " ;; (Loop_for (Assignv (Evar i Tint) (Econst (Vint 0))) ((Evar i Tint) (<) (Econst (Vint 4)))"
        "   (Incr (Evar i Tint)) (Assign_op (*) (Evar s Tint) (Econst (Vint 2))))")
    r, _, loaded = run(src)
    assert value(r, loaded, "s") == MInt(16, TINT)


def test_throw_restores_the_initial_state():
    r, _, loaded = run(ints("a") + " ;; (Assignv (Evar a Tint) (Econst (Vint 1))) ;; Throw")
    assert r.outcome.kind is Out.stop and r.thrown
    assert dumps_equal(r.sigma, initial(loaded))


def test_throw_skips_the_rest():
    r, _, loaded = run(ints("a") + " ;; Throw ;; (Assignv (Evar a Tint) (Econst (Vint 1)))")
    assert r.thrown and value(r, loaded, "a") == block_value(initial(loaded), loaded, "a")


def test_fstop_keeps_the_state():
    r, _, loaded = run(ints("a") + " ;; (Assignv (Evar a Tint) (Econst (Vint 3))) ;; Fstop ;; "
                       "(Assignv (Evar a Tint) (Econst (Vint 4)))")
    assert r.outcome.kind is Out.stop and not r.thrown
    assert value(r, loaded, "a") == MInt(3, TINT)


def test_runtime_error_is_reported():
    r, _, _ = run(ints("a", "b") + " ;; (Assignv (Evar a Tint) ((Evar b Tint) (+) (Econst (Vint 1))))")
    assert r.outcome.kind is Out.error and "uninitialized" in r.diag


def test_gas_exhaustion_stops():
    r, trace, _ = run(ints("a") + " ;; (Loop_while (Econst (Vbool true)) "
                        "(Assignv (Evar a Tint) (Econst (Vint 1))))", budget=50)
    assert r.gas_exhausted and r.outcome.kind is Out.stop
    assert abs(trace.count("LoopWhile") - 25) <= 1


def test_custom_gas_table():
    src = ints("a") + " ;; (Assignv (Evar a Tint) (Econst (Vint 1)))"
    ok, _, _ = run(src, budget=2)
    assert ok.outcome.kind is Out.normal
    short, _, _ = run(src, budget=2, table=GasTable({"Assignv": 5}))
    assert short.gas_exhausted


def test_gas_is_conserved_on_success():
    r, _, _ = run(ints("a") + " ;; (Assignv (Evar a Tint) (Econst (Vint 1)))", budget=10)
    assert r.env.gas == 8


# -- functions --------------------------------------------------------------------------


CALLS = """
(Contract C ()
  ((Var public (Evar total Tuint)) ;;
   (Var public (Evar out Tuint)) ;;
   (Fun public None None (Efun add Tuint) ((Epar n Tuint)) ()
     ((Assignv (Evar total Tuint) ((Evar total Tuint) (+) (Epar n Tuint))) ;;
      (Return (Evar total Tuint)) ;;
      (Assignv (Evar total Tuint) (Econst (Vuint 999))))) ;;
   (Funs public None None (Efun pair Tundef) ((Epar n Tuint)) () (Tuint Tbool)
     (Returns ((Epar n Tuint) (Econst (Vbool true))))))) ;;
(Assignv (Evar total Tuint) (Econst (Vuint 1))) ;;
(Fun_call (Efun add Tuint) ((Econst (Vuint 5)))) ;;
(Assignv (Evar out Tuint) (Efun add Tuint)) ;;
(Fun_call (Efun pair Tundef) ((Econst (Vuint 2))))
"""


def test_return_writes_the_slot_and_exits_the_body():
    r, _, loaded = run(CALLS)
    assert r.outcome.kind is Out.normal, r.diag
    assert value(r, loaded, "total") == MInt(6, TUINT)
    assert value(r, loaded, "out") == MInt(6, TUINT)


def test_returns_writes_a_tuple():
    r, _, loaded = run(CALLS)
    slot = r.sigma.get(loaded.program.names.by_name["pair"].succ()).value
    assert slot.values == (MInt(2, TUINT), MBool(True))


MODIFIED = """
(Contract C ()
  ((Var public (Evar hits Tuint)) ;;
   (Var public (Evar gate Tbool)) ;;
   (Modifier (Efun guard Tundef) () (If (Evar gate Tbool) Snil Throw)) ;;
   (Fun public None None (Efun f Tundef) () ((Emodifier (Efun guard Tundef)))
     (Incr (Evar hits Tuint))))) ;;
(Assignv (Evar hits Tuint) (Econst (Vuint 0))) ;;
(Assignv (Evar gate Tbool) (Econst (Vbool GATE))) ;;
(Fun_call (Efun f Tundef) ())
"""


def test_modifier_passes():
    r, _, loaded = run(MODIFIED.replace("GATE", "true"))
    assert r.outcome.kind is Out.normal, r.diag
    assert value(r, loaded, "hits") == MInt(1, TUINT)


def test_modifier_rejects_and_stops():
    r, _, loaded = run(MODIFIED.replace("GATE", "false"))
    assert r.outcome.kind is Out.stop
    assert value(r, loaded, "hits") == MInt(0, TUINT)


def test_calling_an_undeclared_function_is_rejected():
    with pytest.raises(TypeCheckError, match="EXPR-FUN"):
        run("(Contract C () (Fun public None None (Efun f Tundef) () () Snil)) ;; "
            "(Fun_call (Efun g Tundef) ())")


def test_machine_call_of_a_missing_body_stops():
    _, _, loaded = run("Snil")
    m = Machine(initial(loaded), Env(), bindings=loaded.bindings)
    r = m.call(initial(loaded), Env(gas=10), LabelAddress(0x40), [])
    assert r.outcome.kind is Out.stop


@settings(max_examples=60, deadline=None)
@given(program_stmts)
def test_gas_never_increases_along_a_trace(s):
    result, trace = exec_program(seq(*flatten(PROGRAM_PRELUDE), *flatten(s)), budget=200)
    gas = [t.gas for t in trace.entries] + [result.env.gas]
    assert all(a >= b for a, b in zip(gas, gas[1:]))
