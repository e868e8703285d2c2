"""Static typing: the checking pass that stands in for type-indexed syntax.

Every rejection raises :class:`TypeCheckError` carrying the name of the typing
rule that failed (``EXPR-*`` for expressions, ``STT-*`` for statements).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from .syntax import (
    Assignv, BinOp, Contract, Ebop, Econ, Econst, Efun, Emodifier, Epar, Estruct, Euop, Evar,
    Expr, Fstop, Fun, FunCall, Funs, If, LoopFor, LoopWhile, Modifier, Return, Returns, Seq,
    Snil, Statement, Struct, Throw, Var, binop_result, unop_result,
)
from .types import (
    TMODI, TUNDEF, ArrayId, ArrayIndex, ConstId, LabelAddress, LolisaType, MapId,
    StrId, TArray, TBool, TCid, TFid, TInt, TMap, TPid, TStruct, TUndef, TVid, VarId,
    final_type, well_formed_type,
)
from .values import (
    FArray, FMap, FStruct, MapKey, MArrayId, MConstId, MMapId, MStrId, MVarId, Value, VArray,
    VField, VInt, VMap, VStruct, carried_type, is_normal_value,
)


class TypeCheckError(Exception):
    def __init__(self, rule: str, message: str) -> None:
        super().__init__(f"{rule}: {message}")
        self.rule = rule
        self.message = message


@dataclass(frozen=True)
class FunSig:
    kind: str  # "Fun", "Funs" or "Modifier"
    ret: LolisaType
    rets: tuple[LolisaType, ...]
    params: tuple[LolisaType, ...]
    owner: Optional[LabelAddress]


@dataclass
class CheckContext:
    """Declarations visible to the checker (typing, function and struct contexts)."""

    vars: dict[LabelAddress, LolisaType] = field(default_factory=dict)
    pars: dict[LabelAddress, LolisaType] = field(default_factory=dict)
    funs: dict[LabelAddress, FunSig] = field(default_factory=dict)
    structs: dict[LabelAddress, tuple[tuple[LolisaType, str], ...]] = field(default_factory=dict)
    contracts: dict[LabelAddress, tuple[LabelAddress, ...]] = field(default_factory=dict)
    library: bool = False

    def declare(self, program: Statement, owner: Optional[LabelAddress] = None) -> None:
        _collect(self, program, owner)


def _collect(ctx: CheckContext, s: Statement, owner: Optional[LabelAddress]) -> None:
    match s:
        case Seq(first=a, rest=b):
            _collect(ctx, a, owner)
            _collect(ctx, b, owner)
        case If(then=a, els=b):
            _collect(ctx, a, owner)
            _collect(ctx, b, owner)
        case LoopFor(init=i, step=st, body=b):
            for x in (i, st, b):
                _collect(ctx, x, owner)
        case LoopWhile(body=b):
            _collect(ctx, b, owner)
        case Var(decl=Evar(ty=ty, addr=a)) if a is not None:
            prev = ctx.vars.get(a)
            if prev is not None and prev != ty:
                raise TypeCheckError("STT-VAR", f"{a.token} already exists with type {prev}")
            ctx.vars[a] = ty
        case Struct(tag=tag, mems=mems):
            ctx.structs[tag] = mems
        case Contract(id=Econ(addr=a), inherits=inh, body=b) if a is not None:
            ctx.contracts[a] = tuple(inh)
            _collect(ctx, b, a)
        case Fun(id=Efun(ty=ty, addr=a), pars=pars, body=b) if a is not None:
            ctx.funs[a] = FunSig("Fun", ty, (ty,), _par_types(ctx, pars), owner)
            _collect(ctx, b, owner)
        case Funs(id=Efun(ty=ty, addr=a), pars=pars, rets=rets, body=b) if a is not None:
            ctx.funs[a] = FunSig("Funs", ty, tuple(rets), _par_types(ctx, pars), owner)
            _collect(ctx, b, owner)
        case Modifier(id=Efun(addr=a), pars=pars, body=b) if a is not None:
            ctx.funs[a] = FunSig("Modifier", TUNDEF, (TUNDEF,), _par_types(ctx, pars), owner)
            _collect(ctx, b, owner)


def _par_types(ctx: CheckContext, pars) -> tuple[LolisaType, ...]:
    out = []
    for p in pars:
        if isinstance(p, Epar) and p.addr is not None:
            prev = ctx.pars.get(p.addr)
            if prev is not None and prev != p.ty:
                raise TypeCheckError("STT-FUN", f"parameter {p.addr.token} redeclared as {p.ty}")
            ctx.pars[p.addr] = p.ty
            out.append(p.ty)
    return tuple(out)


# -- expressions ---------------------------------------------------------------


def check_expr(ctx: CheckContext, e: Expr) -> tuple[LolisaType, LolisaType]:
    """The (current, final) type pair of a well-typed expression."""
    match e:
        case Econst(value=v):
            t = final_type(check_value(ctx, v))
            return t, t
        case Evar(ty=ty, addr=a):
            if a is not None:
                declared = ctx.vars.get(a)
                if declared is None:
                    raise TypeCheckError("EXPR-VAR", f"variable {a.token} is not declared")
                if declared != ty:
                    raise TypeCheckError("EXPR-VAR",
                                         f"variable {a.token} is declared {declared}, used as {ty}")
            return TVid(a), ty
        case Epar(ty=ty, addr=a):
            if a is not None:
                declared = ctx.pars.get(a)
                if declared is None:
                    raise TypeCheckError("EXPR-PAR", f"parameter {a.token} is not declared")
                if declared != ty:
                    raise TypeCheckError("EXPR-PAR",
                                         f"parameter {a.token} is declared {declared}, used as {ty}")
            return TPid(a), ty
        case Efun(ty=ty, addr=a):
            if a is not None:
                sig = ctx.funs.get(a)
                if sig is None:
                    raise TypeCheckError("EXPR-FUN", f"function {a.token} is not declared")
                if sig.ret != ty:
                    raise TypeCheckError("EXPR-FUN",
                                         f"function {a.token} returns {sig.ret}, used as {ty}")
            return TFid(a), ty
        case Econ(addr=a):
            if a is not None and a not in ctx.contracts:
                raise TypeCheckError("EXPR-CON", f"contract {a.token} is not declared")
            return TCid(a), TCid(a)
        case Estruct(tag=tag, args=args):
            mems = ctx.structs.get(tag)
            if mems is None:
                raise TypeCheckError("EXPR-STR", f"struct {tag.token} is not declared")
            if len(args) != len(mems):
                raise TypeCheckError("EXPR-STR",
                                     f"struct {tag.token} has {len(mems)} members, got {len(args)}")
            for arg, (mty, name) in zip(args, mems):
                _, t1 = check_expr(ctx, arg)
                if final_type(t1) != final_type(mty):
                    raise TypeCheckError("EXPR-STR", f"member {name} expects {mty}, got {t1}")
            return TStruct(tag), TStruct(tag)
        case Emodifier(fun=f):
            if not isinstance(f, Efun) or f.addr is None:
                raise TypeCheckError("EXPR-MODI", "a modifier must be named by a function id")
            sig = ctx.funs.get(f.addr)
            if sig is None or sig.kind != "Modifier":
                raise TypeCheckError("EXPR-MODI", f"{f.addr.token} is not a declared modifier")
            return TMODI, TMODI
        case Ebop(op=op, left=l, right=r):
            tl = final_type(check_expr(ctx, l)[1])
            tr = final_type(check_expr(ctx, r)[1])
            in_ty = op.in_ty if op.in_ty is not None else tl
            if tl != in_ty or tr != in_ty:
                raise TypeCheckError("EXPR-BOP",
                                     f"({op.symbol}) over {in_ty} cannot take {tl} and {tr}")
            out = binop_result(op.symbol, in_ty)
            if out is None:
                raise TypeCheckError("EXPR-BOP", f"({op.symbol}) is not defined on {in_ty}")
            return out, out
        case Euop(op=op, operand=x):
            t = final_type(check_expr(ctx, x)[1])
            out = unop_result(op.symbol, t, op.target)
            if out is None:
                raise TypeCheckError("EXPR-UOP", f"({op.symbol}) is not defined on {t}")
            return out, out
    raise TypeCheckError("EXPR-TYPE", f"not an expression: {e!r}")


def binop_type(op: BinOp, left: LolisaType) -> Optional[LolisaType]:
    return binop_result(op.symbol, op.in_ty or left)


def check_value(ctx: CheckContext, v: Value) -> LolisaType:
    """Validate a literal value and return its carried type."""
    match v:
        case VInt(n=n, ty=ty):
            if not ty.fits(n):
                raise TypeCheckError("EXPR-CONS", f"{n} does not fit {ty}")
        case VStruct(tag=tag, inst=inst):
            if tag not in ctx.structs:
                raise TypeCheckError("EXPR-CONS", f"struct {tag.token} is not declared")
            declared = ctx.vars.get(inst)
            if declared is not None and declared != TStruct(tag):
                raise TypeCheckError("EXPR-CONS", f"{inst.token} is not a {tag.token} struct")
        case VArray():
            _check_array_value(ctx, v)
        case VMap():
            _check_map_value(ctx, v)
        case VField():
            _check_field(ctx, v)
        case _ if not is_normal_value(v):
            raise TypeCheckError("EXPR-CONS", f"unsupported value {v!r}")
    return carried_type(v)


def _check_index(ctx: CheckContext, index: ArrayIndex) -> None:
    match index:
        case ConstId(n=n):
            if n < 0:
                raise TypeCheckError("EXPR-CONS", "array index must be a natural number")
        case VarId(addr=a):
            t = ctx.vars.get(a, ctx.pars.get(a))
            if t is None or not isinstance(final_type(t), TInt):
                raise TypeCheckError("EXPR-CONS", f"index variable {a.token} is not an integer")
        case StrId(addr=a, mems=mems):
            t = ctx.vars.get(a)
            if not isinstance(t, TStruct):
                raise TypeCheckError("EXPR-CONS", f"{a.token} is not a struct variable")
            if not isinstance(_walk_members(ctx, t.tag, mems), TInt):
                raise TypeCheckError("EXPR-CONS", "struct index member is not an integer")
        case MapId(addr=a, inner=inner) | ArrayId(addr=a, inner=inner):
            t = ctx.vars.get(a)
            want = TMap if isinstance(index, MapId) else TArray
            if not isinstance(t, want) or not isinstance(final_type(t), TInt):
                raise TypeCheckError("EXPR-CONS", f"{a.token} cannot provide an integer index")
            _check_index(ctx, inner)


def _check_array_value(ctx: CheckContext, v: VArray) -> None:
    declared = ctx.vars.get(v.name, ctx.pars.get(v.name))
    if declared is not None:
        if not isinstance(declared, TArray) or declared.elem != v.elem:
            raise TypeCheckError("EXPR-CONS", f"{v.name.token} is not an array of {v.elem}")
    _check_index(ctx, v.index)
    cur = v
    while cur.snd is not None:
        if not isinstance(cur.elem, TArray) or cur.snd.elem != cur.elem.elem:
            raise TypeCheckError("EXPR-CONS", "next array dimension does not match element type")
        _check_index(ctx, cur.snd.index)
        cur = cur.snd


def _check_map_value(ctx: CheckContext, v: VMap, declared: Optional[LolisaType] = None) -> None:
    if declared is None:
        declared = ctx.vars.get(v.name, ctx.pars.get(v.name))
    if declared is not None:
        if not isinstance(declared, TMap) or declared.key != v.key_ty or declared.value != v.ty:
            raise TypeCheckError("EXPR-CONS",
                                 f"{v.name.token} is not a mapping {v.key_ty} => {v.ty}")
    _check_key(ctx, v.key, v.key_ty.embed())
    if v.snd is not None:
        if not isinstance(v.ty, TMap):
            raise TypeCheckError("EXPR-CONS", "a second mapping dimension needs a mapping value")
        _check_map_value(ctx, v.snd, v.ty)


def _check_key(ctx: CheckContext, key: MapKey, key_ty: LolisaType) -> None:
    match key:
        case MConstId(value=val):
            if not is_normal_value(val):
                raise TypeCheckError("EXPR-CONS", "constant mapping keys must be normal values")
            t = check_value(ctx, val)
            if type(final_type(t)) is not type(key_ty):
                raise TypeCheckError("EXPR-CONS", f"key {t} does not match {key_ty}")
        case MVarId(addr=a):
            t = ctx.vars.get(a, ctx.pars.get(a))
            if t is None:
                raise TypeCheckError("EXPR-CONS", f"key variable {a.token} is not declared")
            if type(final_type(t)) is not type(key_ty):
                raise TypeCheckError("EXPR-CONS", f"key {t} does not match {key_ty}")
        case MStrId(addr=a, mems=mems):
            t = ctx.vars.get(a)
            if not isinstance(t, TStruct):
                raise TypeCheckError("EXPR-CONS", f"{a.token} is not a struct variable")
            mt = _walk_members(ctx, t.tag, mems)
            if mt != key_ty:
                raise TypeCheckError("EXPR-CONS", f"key member has type {mt}, expected {key_ty}")
        case MArrayId(addr=a, index=i):
            _check_index(ctx, i)
        case MMapId(inner=inner):
            _check_key(ctx, inner, key_ty)


def _walk_members(ctx: CheckContext, tag: LabelAddress, mems: tuple[str, ...]) -> LolisaType:
    """Type of a member path; only the last member may be a function."""
    if not mems:
        raise TypeCheckError("EXPR-CONS", "empty member path")
    t: LolisaType = TStruct(tag)
    for i, name in enumerate(mems):
        if not isinstance(t, TStruct):
            raise TypeCheckError("EXPR-CONS", f"cannot select {name} from {t}")
        layout = ctx.structs.get(t.tag)
        if layout is None:
            raise TypeCheckError("EXPR-CONS", f"struct {t.tag.token} is not declared")
        found = [mt for mt, n in layout if n == name]
        if not found:
            raise TypeCheckError("EXPR-CONS", f"struct {t.tag.token} has no member {name}")
        t = found[0]
        if isinstance(t, TFid) and i < len(mems) - 1:
            raise TypeCheckError("EXPR-CONS", f"member {name} is a function in the middle of a path")
    return t


def _check_field(ctx: CheckContext, v: VField) -> None:
    match v.head:
        case FStruct(tag=tag, inst=inst):
            declared = ctx.vars.get(inst, ctx.pars.get(inst))
            if declared is not None and declared != TStruct(tag):
                raise TypeCheckError("EXPR-CONS", f"{inst.token} is not a {tag.token} struct")
        case FMap(name=name, key=key):
            mt = ctx.vars.get(name)
            if not isinstance(mt, TMap) or not isinstance(final_type(mt), TStruct):
                raise TypeCheckError("EXPR-CONS", f"{name.token} is not a mapping to structs")
            tag = final_type(mt).tag
            _check_key(ctx, key, mt.key.embed())
        case FArray(name=name, index=index):
            at = ctx.vars.get(name)
            if not isinstance(at, TArray) or not isinstance(final_type(at), TStruct):
                raise TypeCheckError("EXPR-CONS", f"{name.token} is not an array of structs")
            tag = final_type(at).tag
            _check_index(ctx, index)
    if isinstance(v.head, FStruct):
        tag = v.head.tag
    t = _walk_members(ctx, tag, v.mems)
    if final_type(t) != final_type(v.ty):
        raise TypeCheckError("EXPR-CONS", f"field has type {t}, annotated {v.ty}")
    if v.opars is not None and not isinstance(t, TFid):
        raise TypeCheckError("EXPR-CONS", "only function members take arguments")


# -- statements ------------------------------------------------------------------


@dataclass(frozen=True)
class Nesting:
    """Where a statement sits: top level, a contract body, or a body/block."""

    level: str = "top"  # "top" | "contract" | "body"
    rule: str = "STT-SEQ"
    rets: Optional[tuple[LolisaType, ...]] = None
    fun_kind: Optional[str] = None
    contract: Optional[LabelAddress] = None


TOP = Nesting()


def check_stmt(ctx: CheckContext, s: Statement, nest: Nesting = TOP) -> None:
    match s:
        case Seq(first=a, rest=b):
            if isinstance(a, Seq):
                raise TypeCheckError("STT-SEQ", "the first statement of a sequence cannot be a sequence")
            check_stmt(ctx, a, nest)
            check_stmt(ctx, b, nest)
        case Var(decl=d):
            if not isinstance(d, Evar) or d.addr is None:
                raise TypeCheckError("STT-VAR", "a declaration needs a named variable")
            if isinstance(d.ty, TUndef) or isinstance(final_type(d.ty), TUndef):
                raise TypeCheckError("STT-VAR", "variables cannot have type Tundef")
            if not well_formed_type(None, ctx.structs, frozenset(ctx.structs), d.ty):
                raise TypeCheckError("STT-VAR", f"type {d.ty} is not well formed")
            check_expr(ctx, d)
        case Struct(tag=tag, mems=mems):
            names = [n for _, n in mems]
            if not mems:
                raise TypeCheckError("STT-STR", "a struct needs at least one member")
            if len(set(names)) != len(names):
                raise TypeCheckError("STT-STR", "struct member names must be distinct")
            if any(isinstance(t, TUndef) for t, _ in mems):
                raise TypeCheckError("STT-STR", "struct members cannot have type Tundef")
            if tag.reserved and not ctx.library:
                raise TypeCheckError("STT-STR", f"{tag.token} is a reserved struct")
        case Assignv(lhs=l, rhs=r):
            if not _is_lvalue(l):
                raise TypeCheckError("STT-ASSIGN", "the left side is not assignable")
            _, tl = check_expr(ctx, l)
            _, tr = check_expr(ctx, r)
            if isinstance(tr, TFid) and isinstance(r, Econst):
                return  # calling a function member; result checked at run time
            if final_type(tl) != final_type(tr):
                raise TypeCheckError("STT-ASSIGN", f"cannot assign {tr} to {tl}")
        case Return(expr=e):
            if nest.fun_kind != "Fun" or nest.rets is None:
                raise TypeCheckError("STT-RE", "return outside a single-result function")
            _, t = check_expr(ctx, e)
            want = nest.rets[0]
            if not isinstance(want, TUndef) and final_type(t) != final_type(want):
                raise TypeCheckError("STT-RE", f"returning {t} from a function of type {want}")
        case Returns(exprs=es):
            if nest.fun_kind != "Funs" or nest.rets is None:
                raise TypeCheckError("STT-RES", "returns outside a multi-result function")
            if len(es) != len(nest.rets):
                raise TypeCheckError("STT-RES", f"expected {len(nest.rets)} results, got {len(es)}")
            for e, want in zip(es, nest.rets):
                _, t = check_expr(ctx, e)
                if final_type(t) != final_type(want):
                    raise TypeCheckError("STT-RES", f"result {t} does not match {want}")
        case Throw() | Snil() | Fstop():
            pass
        case Contract(id=cid, inherits=inh, body=b):
            if nest.level != "top":
                raise TypeCheckError(nest.rule if nest.level == "body" else "STT-CON",
                                     "contracts cannot be declared here")
            if not isinstance(cid, Econ) or cid.addr is None:
                raise TypeCheckError("STT-CON", "a contract needs a name")
            for parent in inh:
                if parent not in ctx.contracts:
                    raise TypeCheckError("STT-CON", f"unknown parent contract {parent.token}")
            _check_members_distinct(b)
            check_stmt(ctx, b, Nesting("contract", "STT-CON", contract=cid.addr))
        case Fun() | Funs() | Modifier():
            _check_function(ctx, s, nest)
        case FunCall(id=fid, args=args):
            callee_ok = (isinstance(fid, Efun) and fid.addr is not None) or (
                isinstance(fid, Econst) and isinstance(fid.value, VField)
                and isinstance(final_type(fid.value.ty), TFid))
            if not callee_ok:
                raise TypeCheckError("STT-FUNCALL", "the callee must be a function")
            check_expr(ctx, fid)
            sig = ctx.funs.get(fid.addr) if isinstance(fid, Efun) else None
            # natives take a bundled receiver, so only user functions are counted
            if sig is not None and not fid.addr.reserved and len(args) != len(sig.params):
                raise TypeCheckError(
                    "STT-FUNCALL", f"{fid.addr.token} takes {len(sig.params)} arguments, "
                    f"got {len(args)}")
            for a in args:
                if isinstance(a, Emodifier):
                    raise TypeCheckError("STT-FUNCALL", "modifiers cannot be call arguments")
                check_expr(ctx, a)
        case LoopFor(init=i, cond=c, step=st, body=b):
            inner = _block(nest, "STT-FOR-LOOP")
            check_stmt(ctx, i, inner)
            _require_bool(ctx, c, "STT-FOR-LOOP")
            check_stmt(ctx, st, inner)
            check_stmt(ctx, b, inner)
        case LoopWhile(cond=c, body=b):
            _require_bool(ctx, c, "STT-WHILE-LOOP")
            check_stmt(ctx, b, _block(nest, "STT-WHILE-LOOP"))
        case If(cond=c, then=a, els=b):
            _require_bool(ctx, c, "STT-IF")
            inner = _block(nest, "STT-IF")
            check_stmt(ctx, a, inner)
            check_stmt(ctx, b, inner)
        case _:
            raise TypeCheckError("STT-SEQ", f"not a statement: {s!r}")


def _block(nest: Nesting, rule: str) -> Nesting:
    return replace(nest, level="body", rule=rule)


def _require_bool(ctx: CheckContext, c: Expr, rule: str) -> None:
    _, t = check_expr(ctx, c)
    if not isinstance(final_type(t), TBool):
        raise TypeCheckError(rule, f"condition has type {t}, expected Tbool")


def _is_lvalue(e: Expr) -> bool:
    if isinstance(e, (Evar, Epar)):
        return True
    return isinstance(e, Econst) and isinstance(e.value, (VArray, VMap))


def _check_function(ctx: CheckContext, s, nest: Nesting) -> None:
    rule = {"Fun": "STT-FUN", "Funs": "STT-FUNS", "Modifier": "STT-MODI"}[type(s).__name__]
    if nest.level == "body":
        raise TypeCheckError(nest.rule, "functions cannot be declared inside a body")
    if nest.level == "top" and not ctx.library:
        raise TypeCheckError(rule, "functions must be declared inside a contract")
    fid = s.id
    if not isinstance(fid, Efun) or fid.addr is None:
        raise TypeCheckError(rule, "every function needs a binding identifier")
    for p in s.pars:
        if not isinstance(p, Epar) or p.addr is None:
            raise TypeCheckError(rule, "parameters must be named Epar expressions")
        check_expr(ctx, p)
    rets: tuple[LolisaType, ...] = (TUNDEF,)
    if isinstance(s, (Fun, Funs)):
        for m in s.modis:
            if not isinstance(m, Emodifier):
                raise TypeCheckError(rule, "only modifiers can guard a function")
            check_expr(ctx, m)
        rets = (fid.ty,) if isinstance(s, Fun) else tuple(s.rets)
        if isinstance(s, Funs) and not rets:
            raise TypeCheckError(rule, "a multi-result function needs result types")
    check_stmt(ctx, s.body, Nesting("body", rule, rets, type(s).__name__, nest.contract))


def _check_members_distinct(body: Statement) -> None:
    seen: set[LabelAddress] = set()
    for s in _members(body):
        a = s.decl.addr if isinstance(s, Var) else s.id.addr
        if a is None:
            continue
        if a in seen:
            raise TypeCheckError("STT-CON", f"member {a.token} is declared twice")
        seen.add(a)


def _members(body: Statement) -> Iterable[Statement]:
    while True:
        first, rest = (body.first, body.rest) if isinstance(body, Seq) else (body, None)
        if isinstance(first, (Var, Fun, Funs, Modifier)):
            yield first
        if rest is None:
            return
        body = rest


def build_context(program: Statement, lib: Optional[Statement] = None,
                  natives: Optional[Mapping[LabelAddress, FunSig]] = None) -> CheckContext:
    ctx = CheckContext(funs=dict(natives or {}))
    if lib is not None:
        ctx.declare(lib)
    ctx.declare(program)
    return ctx


def check_program(program: Statement, lib: Optional[Statement] = None,
                  natives: Optional[Mapping[LabelAddress, FunSig]] = None) -> CheckContext:
    """Check ``lib`` (with library privileges) and then ``program``."""
    ctx = build_context(program, lib, natives)
    if lib is not None:
        check_stmt(replace(ctx, library=True), lib)
    check_stmt(ctx, program)
    return ctx


def is_well_typed(program: Statement, lib: Optional[Statement] = None,
                  natives: Optional[Mapping[LabelAddress, FunSig]] = None) -> bool:
    try:
        check_program(program, lib, natives)
    except TypeCheckError:
        return False
    return True
