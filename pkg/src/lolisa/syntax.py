"""Expression and statement trees, the operator catalog, sugar expansion and
the pretty-printer for the parenthesized surface syntax."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Union

from .memory import Access
from .types import (
    A_ADDRESS, TINT, ArrayIndex, LabelAddress, LolisaType, MapType, TBool, TBytes, TFloat,
    TInt, TString, TStruct, TUINT, final_type, render_index, render_map_type,
    render_path, render_type,
)
from .values import (
    FArray, FieldArg, FieldHead, FMap, FStruct, MapKey, MArrayId, MConstId, MMapId, MStrId,
    MVarId, Value, VArray, VBool, VByte, VField, VFloat, VInt, VMap, VRef, VString, VStruct,
    VUndef, carried_type,
)

# -- operators ---------------------------------------------------------------


def type_class(t: LolisaType) -> Optional[str]:
    match t:
        case TInt():
            return "int"
        case TFloat():
            return "float"
        case TBool():
            return "bool"
        case TString():
            return "string"
        case TBytes():
            return "bytes"
        case TStruct(tag=tag) if tag == A_ADDRESS:
            return "address"
    return None


# symbol -> (operand classes, result mode); "same" keeps the operand type.
BINOP_CATALOG: dict[str, tuple[frozenset[str], str]] = {
    "+": (frozenset({"int", "float"}), "same"),
    "-": (frozenset({"int", "float"}), "same"),
    "*": (frozenset({"int", "float"}), "same"),
    "/": (frozenset({"int", "float"}), "same"),
    "%": (frozenset({"int"}), "same"),
    "<<": (frozenset({"int"}), "same"),
    ">>": (frozenset({"int"}), "same"),
    "&": (frozenset({"int", "bytes"}), "same"),
    "|": (frozenset({"int", "bytes"}), "same"),
    "^": (frozenset({"int", "bytes"}), "same"),
    "<": (frozenset({"int", "float"}), "bool"),
    "<=": (frozenset({"int", "float"}), "bool"),
    ">": (frozenset({"int", "float"}), "bool"),
    ">=": (frozenset({"int", "float"}), "bool"),
    "==": (frozenset({"int", "float", "bool", "string", "bytes", "address"}), "bool"),
    "!=": (frozenset({"int", "float", "bool", "string", "bytes", "address"}), "bool"),
    "&&": (frozenset({"bool"}), "bool"),
    "||": (frozenset({"bool"}), "bool"),
}

UNOP_CATALOG: dict[str, frozenset[str]] = {
    "-": frozenset({"int", "float"}),
    "~": frozenset({"int", "bytes"}),
    "!": frozenset({"bool"}),
    "cast": frozenset({"int", "bytes"}),
}


def binop_result(symbol: str, in_ty: LolisaType) -> Optional[LolisaType]:
    entry = BINOP_CATALOG.get(symbol)
    if entry is None or type_class(in_ty) not in entry[0]:
        return None
    return in_ty if entry[1] == "same" else TBool()


def unop_result(symbol: str, in_ty: LolisaType,
                target: Optional[LolisaType] = None) -> Optional[LolisaType]:
    classes = UNOP_CATALOG.get(symbol)
    if classes is None or type_class(in_ty) not in classes:
        return None
    if symbol == "cast":
        return target if target is not None and type_class(target) in classes else None
    return in_ty


@dataclass(frozen=True)
class BinOp:
    symbol: str
    in_ty: Optional[LolisaType] = None

    @property
    def out_ty(self) -> Optional[LolisaType]:
        return None if self.in_ty is None else binop_result(self.symbol, self.in_ty)


@dataclass(frozen=True)
class UnOp:
    symbol: str
    target: Optional[LolisaType] = None


# -- expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class Econst:
    value: Value


@dataclass(frozen=True)
class Estruct:
    tag: LabelAddress
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Efun:
    ty: LolisaType
    addr: Optional[LabelAddress]


@dataclass(frozen=True)
class Emodifier:
    fun: "Expr"
    args: tuple[FieldArg, ...] = ()


@dataclass(frozen=True)
class Ebop:
    op: BinOp
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Euop:
    op: UnOp
    operand: "Expr"


@dataclass(frozen=True)
class Evar:
    ty: LolisaType
    addr: Optional[LabelAddress]


@dataclass(frozen=True)
class Epar:
    ty: LolisaType
    addr: Optional[LabelAddress]


@dataclass(frozen=True)
class Econ:
    addr: Optional[LabelAddress]


Expr = Union[Econst, Estruct, Emodifier, Ebop, Euop, Evar, Epar, Efun, Econ]


# -- statements ------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    acc: Optional[Access]
    decl: Expr


@dataclass(frozen=True)
class Struct:
    tag: LabelAddress
    mems: tuple[tuple[LolisaType, str], ...]


@dataclass(frozen=True)
class Assignv:
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Returns:
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class Throw:
    pass


@dataclass(frozen=True)
class Snil:
    pass


@dataclass(frozen=True)
class Fstop:
    pass


@dataclass(frozen=True)
class Contract:
    id: Expr
    inherits: tuple[LabelAddress, ...]
    body: "Statement"


@dataclass(frozen=True)
class Modifier:
    id: Expr
    pars: tuple[Expr, ...]
    body: "Statement"


@dataclass(frozen=True)
class Fun:
    acc: Optional[Access]
    flag: Optional[str]
    pay: Optional[str]
    id: Expr
    pars: tuple[Expr, ...]
    modis: tuple[Expr, ...]
    body: "Statement"


@dataclass(frozen=True)
class Funs:
    acc: Optional[Access]
    flag: Optional[str]
    pay: Optional[str]
    id: Expr
    pars: tuple[Expr, ...]
    modis: tuple[Expr, ...]
    rets: tuple[LolisaType, ...]
    body: "Statement"


@dataclass(frozen=True)
class FunCall:
    id: Expr
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class LoopFor:
    init: "Statement"
    cond: Expr
    step: "Statement"
    body: "Statement"


@dataclass(frozen=True)
class LoopWhile:
    cond: Expr
    body: "Statement"


@dataclass(frozen=True)
class Seq:
    first: "Statement"
    rest: "Statement"


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Statement"
    els: "Statement"


Statement = Union[Var, Struct, Assignv, Return, Returns, Throw, Snil, Fstop, Contract, Modifier,
                  Fun, Funs, FunCall, LoopFor, LoopWhile, Seq, If]

THROW = Throw()
SNIL = Snil()
FSTOP = Fstop()

FunctionDecl = (Fun, Funs, Modifier)


def seq(*stmts: Statement) -> Statement:
    """Right-nested sequence; the empty sequence is Snil."""
    if not stmts:
        return SNIL
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def flatten(s: Statement) -> list[Statement]:
    out = []
    while isinstance(s, Seq) and not isinstance(s.first, Seq):
        out.append(s.first)
        s = s.rest
    out.append(s)
    return out


def kind(s: Statement) -> str:
    return type(s).__name__


def walk(s: Statement) -> Iterator[Statement]:
    """Every statement in ``s``, pre-order, including nested bodies."""
    yield s
    match s:
        case Seq(first=a, rest=b):
            yield from walk(a)
            yield from walk(b)
        case If(then=a, els=b):
            yield from walk(a)
            yield from walk(b)
        case LoopFor(init=i, step=st, body=b):
            yield from walk(i)
            yield from walk(st)
            yield from walk(b)
        case LoopWhile(body=b) | Contract(body=b) | Modifier(body=b) | Fun(body=b) | Funs(body=b):
            yield from walk(b)


def contract_decls(program: Statement) -> list[Contract]:
    return [s for s in walk(program) if isinstance(s, Contract)]


def static_type(e: Expr) -> Optional[LolisaType]:
    """The final type an expression carries syntactically, when evident."""
    match e:
        case Evar(ty=ty) | Epar(ty=ty) | Efun(ty=ty):
            return final_type(ty)
        case Econst(value=v):
            return final_type(carried_type(v))
    return None


# -- sugar -------------------------------------------------------------------


@dataclass(frozen=True)
class Incr:
    target: Expr
    symbol: str = "+"


@dataclass(frozen=True)
class CompoundAssign:
    symbol: str
    target: Expr
    expr: Expr


@dataclass(frozen=True)
class DoWhile:
    body: Statement
    cond: Expr


@dataclass(frozen=True)
class New:
    constructor: Expr
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class AssignCall:
    target: Expr
    fun: Expr
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class VarInit:
    acc: Optional[Access]
    decl: Expr
    init: Expr


Sugar = Union[Incr, CompoundAssign, DoWhile, New, AssignCall, VarInit]


def desugar(node: Sugar) -> Statement:
    match node:
        case Incr(target=x, symbol=sym):
            ty = static_type(x)
            one = Econst(VInt(1, ty if isinstance(ty, TInt) else TINT))
            return Assignv(x, Ebop(BinOp(sym), x, one))
        case CompoundAssign(symbol=sym, target=x, expr=e):
            return Assignv(x, Ebop(BinOp(sym), x, e))
        case DoWhile(body=b, cond=c):
            return Seq(b, LoopWhile(c, b))
        case New(constructor=ctor, args=args):
            return FunCall(ctor, args)
        case AssignCall(target=v, fun=f, args=args):
            return Seq(FunCall(f, args), Assignv(v, f))
        case VarInit(acc=acc, decl=d, init=e):
            return Seq(Var(acc, d), Assignv(d, e))
    raise TypeError(f"not a sugar node: {node!r}")


# -- pretty-printer ------------------------------------------------------------

Namer = Callable[[LabelAddress], str]


def _tok(a: LabelAddress) -> str:
    return a.token


@dataclass
class Printer:
    name: Namer = field(default=_tok)

    def ty(self, t: LolisaType) -> str:
        return render_type(t, self.name)

    def mty(self, m: MapType) -> str:
        return render_map_type(m, self.name)

    def index(self, i: ArrayIndex) -> str:
        return render_index(i, self.name)

    def key(self, k: MapKey) -> str:
        n = self.name
        match k:
            case MConstId(value=v):
                return f"(Mconst_id {self.value(v)})"
            case MVarId(addr=a):
                return f"(Mvar_id {n(a)})"
            case MStrId(addr=a, mems=mems):
                return f"(Mstr_id {n(a)} {render_path(mems)})"
            case MArrayId(addr=a, index=i):
                return f"(Marray_id {n(a)} {self.index(i)})"
            case MMapId(name=a, inner=inner):
                return f"(Mmap_id {n(a)} {self.key(inner)})"
        raise TypeError(k)

    def head(self, h: FieldHead) -> str:
        n = self.name
        match h:
            case FStruct(tag=tag, inst=inst):
                return f"(Fstruct {n(tag)} {n(inst)})"
            case FMap(name=a, key=k, oval=oval):
                ov = "None" if oval is None else f"(Some {self.value(oval)})"
                return f"(Fmap {n(a)} {self.key(k)} {ov})"
            case FArray(name=a, index=i):
                return f"(Farray {n(a)} {self.index(i)})"
        raise TypeError(h)

    def value(self, v: Value) -> str:
        n = self.name
        match v:
            case VUndef():
                return "Vundef"
            case VInt(n=k, ty=ty):
                if ty == TINT:
                    return f"(Vint {k})"
                if ty == TUINT:
                    return f"(Vuint {k})"
                return f"(Vint (INT {ty.size.name} {ty.sign.value} {k}))"
            case VBool(b=b):
                return f"(Vbool {str(b).lower()})"
            case VByte(data=data, size=size):
                return f"(Vbyte {size.name} 0x{data.hex()})"
            case VString(s=s):
                return f"(Vstring {json.dumps(s)})"
            case VFloat(f=f):
                return f"(Vfloat {float(f)!r})"
            case VStruct(tag=tag, inst=inst):
                return f"(Vstruct {n(tag)} {n(inst)})"
            case VRef(ref=ref):
                return f"(Vref {ref.kind.value} {n(ref.addr)})"
            case VArray(index=i, elem=elem, name=a, snd=snd):
                tail = "" if snd is None else " " + self.value(snd)
                return f"(Varray {self.index(i)} {self.ty(elem)} {n(a)}{tail})"
            case VMap(name=a, key=k, key_ty=kt, ty=ty, snd=snd):
                tail = "None" if snd is None else f"(Some {self.value(snd)})"
                return f"(Vmap {n(a)} {self.key(k)} {self.mty(kt)} {self.ty(ty)} {tail})"
            case VField(ty=ty, head=h, mems=mems, opars=opars):
                ops = "None" if opars is None else \
                    "(Some (" + " ".join(self.value(a.value) for a in opars) + "))"
                return f"(Vfield {self.ty(ty)} {self.head(h)} {render_path(mems)} {ops})"
        raise TypeError(v)

    def expr(self, e: Expr) -> str:
        n = self.name
        match e:
            case Econst(value=v):
                return f"(Econst {self.value(v)})"
            case Estruct(tag=tag, args=args):
                return f"(Estruct {n(tag)} (" + " ".join(self.expr(a) for a in args) + "))"
            case Emodifier(fun=f, args=args):
                return f"(Emodifier {self.expr(f)} (" + \
                    " ".join(self.value(a.value) for a in args) + "))"
            case Ebop(op=op, left=l, right=r):
                sym = op.symbol if op.in_ty is None else f"{op.symbol} {self.ty(op.in_ty)}"
                return f"(Ebop ({sym}) {self.expr(l)} {self.expr(r)})"
            case Euop(op=op, operand=x):
                sym = op.symbol if op.target is None else f"{op.symbol} {self.ty(op.target)}"
                return f"(Euop ({sym}) {self.expr(x)})"
            case Evar(ty=ty, addr=a):
                return f"(Evar {self._opt(a)} {self.ty(ty)})"
            case Epar(ty=ty, addr=a):
                return f"(Epar {self._opt(a)} {self.ty(ty)})"
            case Efun(ty=ty, addr=a):
                return f"(Efun {self._opt(a)} {self.ty(ty)})"
            case Econ(addr=a):
                return f"(Econ {self._opt(a)})"
        raise TypeError(e)

    def _opt(self, a: Optional[LabelAddress]) -> str:
        return "None" if a is None else self.name(a)

    def _exprs(self, es) -> str:
        return "(" + " ".join(self.expr(e) for e in es) + ")"

    def stmt(self, s: Statement, top: bool = False) -> str:
        n = self.name
        match s:
            case Seq(first=first, rest=rest) if isinstance(first, Seq):
                return f"(Seq {self.stmt(first)} {self.stmt(rest)})"
            case Seq():
                parts = [self.stmt(x) for x in flatten(s)]
                if top:
                    return " ;;\n".join(parts)
                return "(" + " ;; ".join(parts) + ")"
            case Var(acc=acc, decl=d):
                return f"(Var {_acc(acc)} {self.expr(d)})"
            case Struct(tag=tag, mems=mems):
                ms = " ".join(f"({self.ty(t)} {m})" for t, m in mems)
                return f"(Struct {n(tag)} ({ms}))"
            case Assignv(lhs=l, rhs=r):
                return f"(Assignv {self.expr(l)} {self.expr(r)})"
            case Return(expr=e):
                return f"(Return {self.expr(e)})"
            case Returns(exprs=es):
                return f"(Returns {self._exprs(es)})"
            case Throw():
                return "Throw"
            case Snil():
                return "Snil"
            case Fstop():
                return "Fstop"
            case Contract(id=cid, inherits=inh, body=b):
                hs = " ".join(n(h) for h in inh)
                return f"(Contract {self.expr(cid)} ({hs}) {self.stmt(b)})"
            case Modifier(id=fid, pars=pars, body=b):
                return f"(Modifier {self.expr(fid)} {self._exprs(pars)} {self.stmt(b)})"
            case Fun(acc=acc, flag=fl, pay=pay, id=fid, pars=pars, modis=modis, body=b):
                return (f"(Fun {_acc(acc)} {fl or 'None'} {pay or 'None'} {self.expr(fid)} "
                        f"{self._exprs(pars)} {self._exprs(modis)} {self.stmt(b)})")
            case Funs(acc=acc, flag=fl, pay=pay, id=fid, pars=pars, modis=modis, rets=rets,
                      body=b):
                rs = " ".join(self.ty(t) for t in rets)
                return (f"(Funs {_acc(acc)} {fl or 'None'} {pay or 'None'} {self.expr(fid)} "
                        f"{self._exprs(pars)} {self._exprs(modis)} ({rs}) {self.stmt(b)})")
            case FunCall(id=fid, args=args):
                return f"(Fun_call {self.expr(fid)} {self._exprs(args)})"
            case LoopFor(init=i, cond=c, step=st, body=b):
                return (f"(Loop_for {self.stmt(i)} {self.expr(c)} {self.stmt(st)} "
                        f"{self.stmt(b)})")
            case LoopWhile(cond=c, body=b):
                return f"(Loop_while {self.expr(c)} {self.stmt(b)})"
            case If(cond=c, then=a, els=b):
                return f"(If {self.expr(c)} {self.stmt(a)} {self.stmt(b)})"
        raise TypeError(s)


def _acc(acc: Optional[Access]) -> str:
    return "None" if acc is None else acc.value


def render_stmt(s: Statement, name: Namer = _tok) -> str:
    return Printer(name).stmt(s)


def render_program(s: Statement, name: Namer = _tok) -> str:
    return Printer(name).stmt(s, top=True) + "\n"


def render_expr(e: Expr, name: Namer = _tok) -> str:
    return Printer(name).expr(e)


def render_value(v: Value, name: Namer = _tok) -> str:
    return Printer(name).value(v)

