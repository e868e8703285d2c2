"""Hypothesis strategies for types, values, expressions and statements."""

from __future__ import annotations

import math

from hypothesis import strategies as st

from lolisa.memory import Access
from lolisa.syntax import (
    BINOP_CATALOG, FSTOP, SNIL, THROW, Assignv, BinOp, Contract, Ebop, Econ, Econst, Efun,
    Emodifier, Epar, Estruct, Euop, Evar, Fun, FunCall, If, LoopFor, LoopWhile, Return, Seq,
    Struct, UnOp, Var, flatten, seq,
)
from lolisa.types import (
    SIGNED, TADDRESS, TBOOL, TFLOAT, TINT, TSTRING, TUINT, TUNDEF,
    UNSIGNED, ByteSize, ConstId, IntSize, LabelAddress, MapType, StrId, TArray,
    TBytes, TCid, TFid, TInt, TMap, TPid, TStruct, TVid, VarId,
)
from lolisa.values import (
    FArray, FieldArg, FMap, FStruct, MConstId, MStrId, MVarId, RefId, RefKind, VArray, VBool,
    VByte, VField, VFloat, VInt, VMap, VRef, VString, VStruct, VUndef,
)

addresses = st.builds(LabelAddress, st.integers(min_value=0x10, max_value=0x60))
opt_addresses = st.none() | addresses
names = st.from_regex(r"[a-z][a-zA-Z0-9_]{0,6}", fullmatch=True)

int_types = st.builds(TInt, st.sampled_from([SIGNED, UNSIGNED]), st.sampled_from(list(IntSize)))
scalar_types = st.sampled_from([TINT, TUINT, TBOOL, TSTRING, TFLOAT, TADDRESS]) | int_types | \
    st.builds(TBytes, st.sampled_from(list(ByteSize)))
ref_types = st.one_of(*(st.builds(c, opt_addresses) for c in (TVid, TPid, TFid, TCid)))
indices = st.builds(ConstId, st.integers(min_value=0, max_value=9)) | \
    st.builds(VarId, addresses) | st.builds(StrId, addresses, st.lists(names, min_size=1,
                                                                         max_size=3).map(tuple))


def _types(inner):
    return st.builds(TArray, indices, inner) | \
        st.builds(lambda k, v: TMap(MapType(k), v), scalar_types, inner)


types = st.recursive(scalar_types | ref_types | st.builds(TStruct, addresses), _types,
                     max_leaves=4)


@st.composite
def int_values(draw):
    ty = draw(int_types | st.sampled_from([TINT, TUINT]))
    lo, hi = ty.bounds
    return VInt(draw(st.integers(min_value=lo, max_value=hi)), ty)


@st.composite
def byte_values(draw):
    size = draw(st.sampled_from(list(ByteSize)))
    return VByte(draw(st.binary(min_size=size.value, max_size=size.value)), size)


floats = st.floats(allow_nan=False).filter(lambda f: not math.isnan(f))

normal_values = st.one_of(
    st.just(VUndef()), int_values(), st.builds(VBool, st.booleans()), byte_values(),
    st.builds(VString, st.text(max_size=8)), st.builds(VFloat, floats),
    st.builds(lambda a: VRef(RefId(RefKind.Vfid, a)), addresses),
)

keys = st.builds(MConstId, normal_values) | st.builds(MVarId, addresses) | \
    st.builds(MStrId, addresses, st.lists(names, min_size=1, max_size=2).map(tuple))

container_values = st.one_of(
    st.builds(VStruct, addresses, addresses),
    st.builds(VArray, indices, scalar_types, addresses),
    st.builds(VMap, addresses, keys, st.just(MapType(TINT)), scalar_types),
    st.builds(VField, scalar_types,
              st.builds(FStruct, addresses, addresses) | st.builds(FArray, addresses, indices)
              | st.builds(FMap, addresses, keys, st.none() | normal_values),
              st.lists(names, min_size=1, max_size=3).map(tuple),
              st.none() | st.lists(normal_values.map(FieldArg), max_size=2).map(tuple)),
)

values = normal_values | container_values

leaf_exprs = st.one_of(
    st.builds(Econst, values),
    st.builds(Evar, types, opt_addresses),
    st.builds(Epar, types, opt_addresses),
    st.builds(Efun, types, opt_addresses),
    st.builds(Econ, opt_addresses),
)


def _exprs(inner):
    ops = st.builds(BinOp, st.sampled_from(sorted(BINOP_CATALOG)), st.none() | scalar_types)
    uops = st.builds(UnOp, st.sampled_from(["-", "~", "!"])) | \
        st.builds(UnOp, st.just("cast"), int_types)
    return st.one_of(
        st.builds(Ebop, ops, inner, inner),
        st.builds(Euop, uops, inner),
        st.builds(Estruct, addresses, st.lists(inner, max_size=3).map(tuple)),
        st.builds(Emodifier, st.builds(Efun, st.just(TUNDEF), addresses),
                  st.lists(normal_values.map(FieldArg), max_size=2).map(tuple)),
    )


exprs = st.recursive(leaf_exprs, _exprs, max_leaves=6)


def _stmts(inner):
    return st.one_of(
        st.builds(Seq, inner, inner),
        st.builds(If, exprs, inner, inner),
        st.builds(LoopWhile, exprs, inner),
        st.builds(LoopFor, inner, exprs, inner, inner),
    )


simple_stmts = st.one_of(
    st.sampled_from([SNIL, THROW, FSTOP]),
    st.builds(Assignv, exprs, exprs),
    st.builds(Return, exprs),
    st.builds(FunCall, exprs, st.lists(exprs, max_size=2).map(tuple)),
    st.builds(Var, st.none() | st.sampled_from(list(Access)), exprs),
)

stmts = st.recursive(simple_stmts, _stmts, max_leaves=6)


# -- well-typed closed programs over one int and one bool variable -----------------

X = LabelAddress(0x10)
P = LabelAddress(0x12)
VX = Evar(TINT, X)
VP = Evar(TBOOL, P)


def _int_exprs(inner):
    return st.builds(lambda op, a, b: Ebop(BinOp(op), a, b), st.sampled_from("+-*"), inner, inner)


small_ints = st.integers(min_value=-5, max_value=5).map(lambda n: Econst(VInt(n, TINT)))
int_exprs = st.recursive(small_ints | st.just(VX), _int_exprs, max_leaves=4)
bool_exprs = st.one_of(
    st.builds(lambda b: Econst(VBool(b)), st.booleans()),
    st.just(VP),
    st.builds(lambda op, a, b: Ebop(BinOp(op), a, b), st.sampled_from(["<", "==", "!="]),
              int_exprs, int_exprs),
)


def _program_stmts(inner):
    return st.one_of(
        st.builds(If, bool_exprs, inner, inner),
        st.builds(lambda a, b: seq(*flatten(a), b), inner, inner),
    )


program_stmts = st.recursive(
    st.one_of(st.just(SNIL), st.builds(Assignv, st.just(VX), int_exprs),
              st.builds(Assignv, st.just(VP), bool_exprs)),
    _program_stmts, max_leaves=8)

PROGRAM_PRELUDE = seq(Var(None, VX), Var(None, VP), Assignv(VX, Econst(VInt(0, TINT))),
                      Assignv(VP, Econst(VBool(False))))


def fun_decl(addr: LabelAddress, body) -> Fun:
    return Fun(Access.public, None, None, Efun(TUNDEF, addr), (), (), body)


def contract(addr: LabelAddress, body, parents=()) -> Contract:
    return Contract(Econ(addr), tuple(parents), body)


def struct(tag: LabelAddress, mems) -> Struct:
    return Struct(tag, tuple(mems))

