from __future__ import annotations

import pytest
from hypothesis import given

from lolisa.check import TypeCheckError, check_program, is_well_typed
from lolisa.cli import load
from lolisa.parser import parse
from lolisa.syntax import SNIL, Seq, flatten, seq

from strategies import PROGRAM_PRELUDE, program_stmts

DECLS = "(Var public (Evar b Tbool)) ;; (Var public (Evar n Tint)) ;; (Var public (Evar u Tuint))"

# (ill-typed, well-typed twin, rule)
CORPUS = [
    ("(Assignv (Evar b Tbool) (Econst (Vint 4)))",
     "(Assignv (Evar b Tbool) (Econst (Vbool true)))", "STT-ASSIGN"),
    ("(Assignv (Evar n Tint) (Evar u Tuint))",
     "(Assignv (Evar n Tint) (Econst (Vint 1)))", "STT-ASSIGN"),
    ("(If (Evar n Tint) Snil Snil)", "(If (Evar b Tbool) Snil Snil)", "STT-IF"),
    ("(Loop_while (Econst (Vint 1)) Snil)", "(Loop_while (Evar b Tbool) Snil)", "STT-WHILE-LOOP"),
    ("(Assignv (Evar n Tint) ((Evar n Tint) (+) (Econst (Vbool true))))",
     "(Assignv (Evar n Tint) ((Evar n Tint) (+) (Econst (Vint 1))))", "EXPR-BOP"),
    ("(Assignv (Evar b Tbool) ((Evar b Tbool) (+) (Evar b Tbool)))",
     "(Assignv (Evar b Tbool) ((Evar b Tbool) (&&) (Evar b Tbool)))", "EXPR-BOP"),
    ("(Assignv (Evar b Tbool) (Euop (-) (Evar b Tbool)))",
     "(Assignv (Evar b Tbool) (Euop (!) (Evar b Tbool)))", "EXPR-UOP"),
    ("(Assignv (Evar missing Tint) (Econst (Vint 1)))",
     "(Assignv (Evar n Tint) (Econst (Vint 1)))", "EXPR-VAR"),
    ("(Return (Econst (Vint 1)))", "Snil", "STT-RE"),
    ("(If (Evar b Tbool) (Contract D () Snil) Snil)", "(Contract D () Snil)", "STT-IF"),
]


@pytest.mark.parametrize("bad,good,rule", CORPUS, ids=[c[2] + f"-{i}" for i, c in enumerate(CORPUS)])
def test_rejection_corpus(bad, good, rule):
    with pytest.raises(TypeCheckError) as exc:
        load(f"{DECLS} ;; {bad}")
    assert exc.value.rule == rule
    load(f"{DECLS} ;; {good}")


def test_left_nested_sequence_is_rejected():
    with pytest.raises(TypeCheckError) as exc:
        check_program(Seq(Seq(SNIL, SNIL), SNIL))
    assert exc.value.rule == "STT-SEQ"
    check_program(Seq(SNIL, Seq(SNIL, SNIL)))


def test_function_inside_a_branch_is_rejected():
    src = ("(Contract C () (If (Econst (Vbool true)) "
           "(Fun public None None (Efun f Tundef) () () Snil) Snil))")
    with pytest.raises(TypeCheckError) as exc:
        load(src)
    assert exc.value.rule == "STT-IF"
    load("(Contract C () (Fun public None None (Efun f Tundef) () () Snil))")


def test_modifier_as_an_argument_is_rejected():
    head = ("(Contract C () ((Modifier (Efun m Tundef) () Snil) ;; "
            "(Fun public None None (Efun f Tundef) ((Epar p Tint)) () Snil))) ;; ")
    with pytest.raises(TypeCheckError) as exc:
        load(head + "(Fun_call (Efun f Tundef) ((Emodifier (Efun m Tundef))))")
    assert exc.value.rule == "STT-FUNCALL"
    load(head + "(Fun_call (Efun f Tundef) ((Econst (Vint 1))))")


def test_wrong_argument_count():
    head = "(Contract C () (Fun public None None (Efun f Tundef) ((Epar p Tint)) () Snil)) ;; "
    with pytest.raises(TypeCheckError) as exc:
        load(head + "(Fun_call (Efun f Tundef) ())")
    assert exc.value.rule == "STT-FUNCALL"


def test_error_message_names_the_rule():
    with pytest.raises(TypeCheckError, match=r"^STT-ASSIGN: cannot assign Tint to Tbool"):
        load(f"{DECLS} ;; (Var public (Evar c Tbool) (Econst (Vint 4)))")


def test_is_well_typed_is_a_predicate():
    assert is_well_typed(parse("Snil").parsed)
    assert not is_well_typed(Seq(Seq(SNIL, SNIL), SNIL))


@given(program_stmts)
def test_generated_programs_are_well_typed(s):
    check_program(seq(*flatten(PROGRAM_PRELUDE), *flatten(s)))
