from __future__ import annotations

import pytest
from hypothesis import assume, given, settings

from lolisa.memory import Access
from lolisa.parser import (
    NameTable, ParseError, parse, parse_expr, parse_stmt, parse_type, parse_value, read,
)
from lolisa.syntax import (
    SNIL, THROW, Assignv, BinOp, Contract, Ebop, Econ, Econst, Evar, Fun, FunCall, If,
    LoopWhile, Seq, Var, render_expr, render_program, render_stmt, render_value,
)
from lolisa.types import (
    A_CALL, A_SEND, TADDRESS, TBOOL, TINT, TUINT, USER_BASE, ConstId, LabelAddress, TArray,
    render_type,
)
from lolisa.values import VBool, VInt

from strategies import exprs, stmts, types, values


# -- reader -----------------------------------------------------------------------


def test_reader_reports_positions():
    with pytest.raises(ParseError) as exc:
        read("(Assignv\n  (Evar a Tuint)")
    assert (exc.value.line, exc.value.col) == (1, 1)
    with pytest.raises(ParseError) as exc:
        read("Snil )")
    assert (exc.value.line, exc.value.col) == (1, 6)


def test_reader_skips_comments():
    assert len(read("# a comment\nSnil # trailing\n")) == 1


def test_unknown_constructor_position():
    with pytest.raises(ParseError) as exc:
        parse("Snil ;;\n  (Frobnicate 1)")
    assert (exc.value.line, exc.value.col) == (2, 3)


# -- names -------------------------------------------------------------------------


def test_fresh_names_get_even_addresses_in_order():
    src = parse("(Var public (Evar a Tuint)) ;; (Var public (Evar b Tuint)) ;; "
                "(Assignv (Evar a Tuint) (Evar b Tuint))")
    a, b = src.names.by_name["a"], src.names.by_name["b"]
    assert a == LabelAddress(USER_BASE) and b == LabelAddress(USER_BASE + 2)


def test_address_table_is_stable():
    text = "(Var public (Evar x Tint)) ;; (Var public (Evar y (Tmap Iaddress Tbool)))"
    assert parse(text).address_table == parse(text).address_table


def test_builtin_names():
    names = NameTable()
    assert names.address("send") == A_SEND
    assert names.address("transfer") == A_SEND
    assert names.address("call") == A_CALL
    assert names.name(A_SEND) == "_0xsend"


def test_explicit_tokens_reserve_their_address():
    names = NameTable()
    assert names.address("_0x00000020") == LabelAddress(0x20)
    assert names.address("fresh") == LabelAddress(0x22)


def test_duplicate_declaration_in_one_scope():
    with pytest.raises(ParseError, match="a already exists"):
        parse("(Var public (Evar a Tuint)) ;; (Var public (Evar a Tuint))")


def test_same_name_in_different_functions_is_allowed():
    parse("(Contract C () ("
          "(Fun public None None (Efun f Tundef) ((Epar p Tint)) () Snil) ;; "
          "(Fun public None None (Efun g Tundef) ((Epar p Tint)) () Snil)))")


def test_duplicate_parameter():
    with pytest.raises(ParseError, match="p already exists"):
        parse("(Contract C () (Fun public None None (Efun f Tundef) "
              "((Epar p Tint) (Epar p Tint)) () Snil))")


# -- forms ---------------------------------------------------------------------------


def test_assignv():
    names = NameTable()
    s = parse_stmt("(Assignv (Evar a Tuint) (Evar b Tuint))", names)
    assert s == Assignv(Evar(TUINT, names.address("a")), Evar(TUINT, names.address("b")))


def test_var_with_some_address():
    names = NameTable()
    s = parse_stmt("(Var public (Evar (Some index) Tuint))", names)
    assert s == Var(Access.public, Evar(TUINT, names.address("index")))


def test_seq_is_right_nested():
    s = parse("Snil ;; Throw ;; Snil").parsed
    assert s == Seq(SNIL, Seq(THROW, SNIL))


def test_explicit_left_nested_seq_survives_parsing():
    s = parse_stmt("(Seq (Snil ;; Snil) Throw)")
    assert s == Seq(Seq(SNIL, SNIL), THROW)


def test_infix_precedence():
    names = NameTable()
    e = parse_expr("((Evar a Tint) (+) (Evar b Tint) (*) (Evar c Tint) (<) (Evar d Tint))", names)
    a, b, c, d = (Evar(TINT, names.address(n)) for n in "abcd")
    assert e == Ebop(BinOp("<"), Ebop(BinOp("+"), a, Ebop(BinOp("*"), b, c)), d)


def test_infix_is_left_associative():
    names = NameTable()
    e = parse_expr("((Evar a Tint) (-) (Evar b Tint) (-) (Evar c Tint))", names)
    a, b, c = (Evar(TINT, names.address(n)) for n in "abc")
    assert e == Ebop(BinOp("-"), Ebop(BinOp("-"), a, b), c)


def test_typed_operator():
    assert parse_expr("(Ebop (+ Tint) (Econst (Vint 1)) (Econst (Vint 2)))").op == \
        BinOp("+", TINT)


def test_types():
    assert parse_type("(Tarray (Aconst_id 10) Tbool)") == TArray(ConstId(10), TBOOL)
    assert parse_type("Taddress") == TADDRESS
    with pytest.raises(ParseError, match="cannot be a mapping key"):
        parse_type("(Tmap Tstt Tint)")


def test_values():
    assert parse_value("(Vint -3)") == VInt(-3, TINT)
    assert parse_value("(Vbool true)") == VBool(True)
    with pytest.raises(ParseError):
        parse_value("(Vbyte B4 0x00)")


def test_requires_expands_to_a_guard():
    s = parse_stmt("(requires (Econst (Vbool true)))")
    assert s == If(Econst(VBool(True)), SNIL, THROW)


def test_requires_rejects_non_booleans():
    from lolisa.check import TypeCheckError

    with pytest.raises(TypeCheckError):
        parse_stmt("(requires (Econst (Vint 1)))")


def test_sugar_forms():
    names = NameTable()
    x = Evar(TINT, names.address("x"))
    one = Econst(VInt(1, TINT))
    assert parse_stmt("(Incr (Evar x Tint))", names) == Assignv(x, Ebop(BinOp("+"), x, one))
    assert parse_stmt("(Decr (Evar x Tint))", names) == Assignv(x, Ebop(BinOp("-"), x, one))
    assert parse_stmt("(Assign_op (*) (Evar x Tint) (Econst (Vint 1)))", names) == \
        Assignv(x, Ebop(BinOp("*"), x, one))
    body = Assignv(x, one)
    cond = Econst(VBool(False))
    assert parse_stmt("(Do_while (Assignv (Evar x Tint) (Econst (Vint 1))) "
                      "(Econst (Vbool false)))", names) == Seq(body, LoopWhile(cond, body))
    assert parse_stmt("(Var public (Evar y Tint) (Econst (Vint 1)))", names) == \
        Seq(Var(Access.public, Evar(TINT, names.address("y"))),
            Assignv(Evar(TINT, names.address("y")), one))


def test_new_and_assign_call():
    names = NameTable()
    s = parse_stmt("(New (Efun f Tint) ((Econst (Vint 1))))", names)
    assert isinstance(s, FunCall)
    s = parse_stmt("(Assign_call (Evar x Tint) (Efun f Tint) ())", names)
    assert isinstance(s, Seq) and isinstance(s.first, FunCall) and isinstance(s.rest, Assignv)


def test_contract_and_function():
    src = parse("(Contract C () (Fun public None payable (Efun f Tuint) () () "
                "(Return (Econst (Vuint 1)))))")
    c = src.parsed
    assert isinstance(c, Contract) and c.id == Econ(src.names.by_name["C"])
    assert isinstance(c.body, Fun) and c.body.pay == "payable"


@pytest.mark.parametrize("text", [
    "(Var public)", "(If (Econst (Vbool true)) Snil)", "(Evar x)", "(Vint 1 2)",
    "(Assignv (Evar 1x Tint) (Evar y Tint))", "((Var public (Evar x Tint)) Snil)",
])
def test_malformed_forms(text):
    with pytest.raises(ParseError):
        parse(text)


# -- round trips ---------------------------------------------------------------------


def _tok(a):
    return a.token


@given(types)
def test_type_round_trip(t):
    assert parse_type(render_type(t)) == t


@given(values)
def test_value_round_trip(v):
    assert parse_value(render_value(v)) == v


@given(exprs)
def test_expr_round_trip(e):
    assert parse_expr(render_expr(e)) == e


@settings(max_examples=300)
@given(stmts)
def test_stmt_round_trip(s):
    try:
        again = parse_stmt(render_stmt(s))
    except ParseError as exc:
        assume("already exists" not in exc.message)
        raise
    assert again == s


@settings(max_examples=200)
@given(stmts)
def test_program_round_trip(s):
    text = render_program(s)
    try:
        src = parse(text)
    except ParseError as exc:
        assume("already exists" not in exc.message)
        raise
    assert src.parsed == s
    assert render_program(src.parsed, _tok) == text


def test_named_round_trip_keeps_identifiers(tmp_path):
    text = ("(Contract Token () ((Var public (Evar supply Tuint)) ;; "
            "(Fun public None None (Efun mint Tundef) ((Epar n Tuint)) () "
            "(Assignv (Evar supply Tuint) ((Evar supply Tuint) (+) (Epar n Tuint))))))")
    src = parse(text)
    rendered = src.render()
    assert "supply" in rendered and "mint" in rendered
    assert parse(rendered).parsed == src.parsed
