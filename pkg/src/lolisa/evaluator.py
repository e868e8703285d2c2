"""Big-step evaluation of expressions, statements and whole programs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

from .env import (
    ERROR, EXIT, NORMAL, STOP, Env, GasTable, Out, StatementOutcome, env_check, init_env,
    set_env, set_gas,
)
from .memory import (
    Access, Alloc, Block, BlockInfo, MemoryState, Scopes, _init_re, _init_var, _read_chck,
    _read_dir, _write_check, allocate, dump_state, write_block, write_dir,
)
from .modules import inherit_check
from .outcome import Fault, outcome
from .syntax import (
    Assignv, BinOp, Contract, Ebop, Econ, Econst, Efun, Emodifier, Epar, Estruct, Euop, Evar,
    Expr, Fstop, Fun, FunCall, Funs, If, LoopFor, LoopWhile, Modifier, Return, Returns, Seq,
    Snil, Statement, Struct, Throw, UnOp, Var, flatten, kind, walk,
)
from .types import (
    TUNDEF, LabelAddress, LolisaType, TBytes, TCid, TFid, TInt, TStruct, TUndef,
    final_type,
)
from .value_eval import (
    _eval_value, array_element, is_fun_pointer, map_chain, map_store, struct_layout,
)
from .values import (
    MBool, MByte, MCid, MemoryValue, MFloat, MInt, MStmt, MStr, MStrType, MString, MTypes,
    VArray, VField, VMap, corresponds,
)

# -- places ----------------------------------------------------------------------


@dataclass(frozen=True)
class AddrPlace:
    addr: LabelAddress


@dataclass(frozen=True)
class MapPlace:
    """A mapping slot that may not exist yet; assignment inserts it."""

    head: LabelAddress
    keys: tuple[MemoryValue, ...]
    tys: tuple[LolisaType, ...]


Place = AddrPlace | MapPlace


def _eval_expr_l(sigma: MemoryState, env, e: Expr) -> Place:
    match e:
        case Econst(value=VArray() as v):
            return AddrPlace(array_element(sigma, env, v))
        case Econst(value=VMap() as v):
            return MapPlace(*map_chain(sigma, env, v))
        case Econst():
            raise Fault("not-lvalue", "only array and mapping constants can be assigned")
        case Emodifier():
            raise Fault("modifier-expression", "a modifier is not an expression value")
        case Estruct() | Ebop() | Euop():
            raise Fault("not-lvalue", f"{type(e).__name__} cannot be assigned")
        case Evar(addr=a) | Epar(addr=a) | Efun(addr=a) | Econ(addr=a):
            if a is None:
                raise Fault("null-address", "identifier has no address")
            return AddrPlace(a)
    raise Fault("not-expression", repr(e))


eval_expr_l = outcome(_eval_expr_l)


def read_return(sigma: MemoryState, f: LabelAddress, ty: LolisaType = TUNDEF) -> MemoryValue:
    """The value a function left in its return slot."""
    block = sigma.get(f.succ())
    if block is None or not block.occupied:
        raise Fault("unoccupied", f"function {f.token} has not returned a value")
    mv = block.value
    if isinstance(mv, MTypes) and len(mv.values) == 1:
        mv = mv.values[0]
    if not isinstance(final_type(ty), TUndef) and not corresponds(final_type(ty), mv):
        raise Fault("type-mismatch", f"function {f.token} did not return a {ty}")
    return mv


def _eval_expr_r(sigma: MemoryState, env, e: Expr) -> MemoryValue:
    match e:
        case Econst(value=v):
            return _eval_value(sigma, env, v)
        case Estruct(tag=tag, args=args):
            layout = struct_layout(sigma, tag)
            if len(args) != len(layout.mems):
                raise Fault("arity", f"struct {tag.token} needs {len(layout.mems)} members")
            members = []
            for arg, (mty, name) in zip(args, layout.mems):
                mv = _eval_expr_r(sigma, env, arg)
                if not corresponds(mty, mv):
                    raise Fault("type-mismatch", f"member {name} expects {mty}")
                members.append(mv)
            return MStr(tag, tuple(members))
        case Evar(addr=a) | Epar(addr=a) | Econ(addr=a):
            if a is None:
                raise Fault("null-address", "identifier has no address")
            return _read_chck(sigma, env, a)
        case Efun(ty=ty, addr=a):
            if a is None:
                raise Fault("null-address", "function has no address")
            return read_return(sigma, a, ty)
        case Ebop(op=op, left=l, right=r):
            return _eval_bop(op, _eval_expr_r(sigma, env, l), _eval_expr_r(sigma, env, r))
        case Euop(op=op, operand=x):
            return _eval_uop(op, _eval_expr_r(sigma, env, x))
        case Emodifier():
            raise Fault("modifier-expression", "a modifier is not an expression value")
    raise Fault("not-expression", repr(e))


eval_expr_r = outcome(_eval_expr_r)


# -- operators -------------------------------------------------------------------


def _payload(mv: MemoryValue):
    match mv:
        case MInt(n=x) | MBool(b=x) | MFloat(f=x) | MString(s=x) | MByte(data=x):
            if x is None:
                raise Fault("uninitialized", "operand holds no value")
            return x
    return mv


def _checked(n: int, ty: TInt) -> MInt:
    if not ty.fits(n):
        raise Fault("overflow", f"{n} does not fit {ty}")
    return MInt(n, ty)


def _int_div(x: int, y: int) -> int:
    if y == 0:
        raise Fault("division-by-zero", "division by zero")
    q = abs(x) // abs(y)
    return q if (x >= 0) == (y >= 0) else -q


_INT_ARITH: dict[str, Callable[[int, int], int]] = {
    "+": lambda x, y: x + y,
    "-": lambda x, y: x - y,
    "*": lambda x, y: x * y,
    "/": _int_div,
    "%": lambda x, y: x - y * _int_div(x, y),
    "&": lambda x, y: x & y,
    "|": lambda x, y: x | y,
    "^": lambda x, y: x ^ y,
}

_COMPARE: dict[str, Callable] = {
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    ">": lambda x, y: x > y,
    ">=": lambda x, y: x >= y,
    "==": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
}


def _eval_bop(op: BinOp | str, a: MemoryValue, b: MemoryValue) -> MemoryValue:
    sym = op.symbol if isinstance(op, BinOp) else op
    if type(a) is not type(b):
        raise Fault("type-mix", f"({sym}) cannot mix {type(a).__name__} and {type(b).__name__}")
    x, y = _payload(a), _payload(b)
    if sym in ("==", "!="):
        if isinstance(a, MInt) and a.ty != b.ty:
            raise Fault("type-mix", f"({sym}) over {a.ty} and {b.ty}")
        if isinstance(a, MByte) and a.size != b.size:
            raise Fault("type-mix", "byte operands differ in size")
        if not isinstance(a, (MInt, MBool, MFloat, MString, MByte, MStr)):
            raise Fault("unsupported", f"({sym}) is not defined here")
        return MBool(_COMPARE[sym](x, y))
    match a:
        case MInt(ty=ty):
            if b.ty != ty:
                raise Fault("type-mix", f"({sym}) over {ty} and {b.ty}")
            if sym in _COMPARE:
                return MBool(_COMPARE[sym](x, y))
            if sym in _INT_ARITH:
                return _checked(_INT_ARITH[sym](x, y), ty)
            if sym in ("<<", ">>"):
                if y < 0:
                    raise Fault("negative-shift", f"shift by {y}")
                if sym == "<<" and y > ty.size.value:
                    return _checked(0 if x == 0 else 2 ** ty.size.value, ty)
                return _checked(x << y if sym == "<<" else x >> y, ty)
        case MFloat():
            if sym in _COMPARE:
                return MBool(_COMPARE[sym](x, y))
            if sym == "/" and y == 0:
                raise Fault("division-by-zero", "division by zero")
            if sym in ("+", "-", "*", "/"):
                return MFloat(_INT_ARITH[sym](x, y) if sym != "/" else x / y)
        case MBool():
            if sym == "&&":
                return MBool(x and y)
            if sym == "||":
                return MBool(x or y)
        case MByte(size=size):
            if b.size != size:
                raise Fault("type-mix", "byte operands differ in size")
            if sym in ("&", "|", "^"):
                f = _INT_ARITH[sym]
                return MByte(bytes(f(p, q) for p, q in zip(x, y)), size)
    raise Fault("unsupported", f"({sym}) is not defined on {type(a).__name__}")


def _eval_uop(op: UnOp | str, a: MemoryValue) -> MemoryValue:
    sym = op.symbol if isinstance(op, UnOp) else op
    target = op.target if isinstance(op, UnOp) else None
    x = _payload(a)
    match sym, a:
        case "-", MInt(ty=ty):
            return _checked(-x, ty)
        case "-", MFloat():
            return MFloat(-x)
        case "~", MInt(ty=ty):
            if ty.sign.value == "Signed":
                return MInt(~x, ty)
            return MInt((2 ** ty.size.value - 1) ^ x, ty)
        case "~", MByte(size=size):
            return MByte(bytes(0xFF ^ p for p in x), size)
        case "!", MBool():
            return MBool(not x)
        case "cast", _:
            return _cast(a, x, target)
    raise Fault("unsupported", f"({sym}) is not defined on {type(a).__name__}")


def _cast(a: MemoryValue, x, target: Optional[LolisaType]) -> MemoryValue:
    match target, a:
        case TInt(), MInt():
            return _checked(x, target)
        case TInt(), MByte():
            return _checked(int.from_bytes(x, "big"), target)
        case TBytes(size=size), MInt():
            if x < 0 or x >= 256 ** size.value:
                raise Fault("overflow", f"{x} does not fit {target}")
            return MByte(x.to_bytes(size.value, "big"), size)
        case TBytes(size=size), MByte():
            return MByte(x[:size.value].ljust(size.value, b"\0"), size)
    raise Fault("bad-cast", f"cannot cast {type(a).__name__} to {target}")


eval_bop = outcome(_eval_bop)
eval_uop = outcome(_eval_uop)


def is_true(mv: MemoryValue) -> bool:
    return isinstance(mv, MBool) and mv.b is True


def is_false(mv: MemoryValue) -> bool:
    return isinstance(mv, MBool) and mv.b is False


def coerce_int(mv: MemoryValue, ty: LolisaType) -> MemoryValue:
    """Call-time width adjustment for integer arguments."""
    if isinstance(mv, MInt) and isinstance(ty, TInt) and mv.ty != ty and mv.n is not None:
        return _checked(mv.n, ty)
    return mv


def _set_par(sigma: MemoryState, env, params: Sequence[Expr],
             inputs: Sequence[MemoryValue]) -> MemoryState:
    if len(inputs) > len(params):
        raise Fault("arity", f"{len(inputs)} arguments for {len(params)} parameters")
    for p, mv in zip(params, inputs):
        sigma = _write_check(sigma, env, p.addr, coerce_int(mv, p.ty))
    return sigma


set_par = outcome(_set_par)


# -- results and traces ------------------------------------------------------------


@dataclass(frozen=True)
class ExecResult:
    sigma: MemoryState
    env: Env
    outcome: StatementOutcome
    diag: Optional[str] = None
    thrown: bool = False
    gas_exhausted: bool = False

    def __post_init__(self) -> None:
        if self.outcome.kind is Out.error and not self.diag:
            raise ValueError("an error outcome needs a diagnostic")


@dataclass
class TraceEntry:
    kind: str
    gas: int
    outcome: str = "running"
    dump: Optional[str] = None


@dataclass
class Trace:
    entries: list[TraceEntry] = field(default_factory=list)
    dumps: bool = False

    def __len__(self) -> int:
        return len(self.entries)

    def count(self, kind_name: str, charged_only: bool = True) -> int:
        return sum(1 for t in self.entries
                   if t.kind == kind_name and not (charged_only and t.outcome == "gas"))

    def render(self) -> str:
        lines = []
        for i, t in enumerate(self.entries):
            lines.append(f"{i:6d} {t.kind:<10} gas={t.gas} {t.outcome}")
            if t.dump is not None:
                lines.append(t.dump.rstrip("\n"))
        return "\n".join(lines) + ("\n" if lines else "")


def _error(sigma, env, fault: Fault) -> ExecResult:
    return ExecResult(sigma, env, ERROR, str(fault))


NativeFn = Callable[["Machine", MemoryState, Env, Optional[object], list[MemoryValue]],
                    MemoryState]


# -- the machine -----------------------------------------------------------------


class Machine:
    """Statement evaluation against a fixed σ_init, fenv and gas table."""

    def __init__(self, sigma_init: MemoryState, fenv: Env, table: Optional[GasTable] = None,
                 trace: Optional[Trace] = None,
                 natives: Optional[Mapping[LabelAddress, NativeFn]] = None,
                 bindings: Optional[Mapping[str, LabelAddress]] = None) -> None:
        from .stdlib import NATIVES

        self.sigma_init = sigma_init
        self.fenv = fenv
        self.table = table or GasTable()
        self.trace = trace if trace is not None else Trace()
        self.natives = dict(NATIVES if natives is None else natives)
        self.bindings = dict(bindings or {})

    # gating ------------------------------------------------------------------

    def _gate(self, sigma: MemoryState, env: Env, kind_name: str):
        entry = TraceEntry(kind_name, env.gas,
                           dump=dump_state(sigma) if self.trace.dumps else None)
        self.trace.entries.append(entry)
        if not env_check(env, self.fenv):
            entry.outcome = "gas"
            if env.gas <= self.fenv.gas:
                return ExecResult(sigma, env, STOP, "gas limit reached", gas_exhausted=True), env
            entry.outcome = "scope"
            return ExecResult(sigma, env, STOP, "execution level check failed"), env
        charged = set_gas(kind_name, env, self.table)
        if charged.is_none:
            entry.outcome = "gas"
            return ExecResult(sigma, env, STOP, "out of gas", gas_exhausted=True), env
        entry.outcome = "run"
        return None, charged.value

    # statements --------------------------------------------------------------

    def run(self, sigma: MemoryState, env: Env, s: Statement) -> ExecResult:
        while isinstance(s, Seq):
            stop, env = self._gate(sigma, env, "Seq")
            if stop is not None:
                return stop
            r = self.run(sigma, env, s.first)
            if r.outcome.kind is not Out.normal:
                return r
            sigma, env, s = r.sigma, r.env, s.rest
        stop, env = self._gate(sigma, env, kind(s))
        if stop is not None:
            return stop
        try:
            return self._step(sigma, env, s)
        except Fault as fault:
            return _error(sigma, env, fault)

    def _step(self, sigma: MemoryState, env: Env, s: Statement) -> ExecResult:
        match s:
            case Var(acc=acc, decl=Evar(ty=ty, addr=a)):
                if a is None:
                    raise Fault("null-address", "a declaration needs an address")
                return ExecResult(_init_var(sigma, env, self.fenv, acc, ty, a), env, NORMAL)
            case Struct(tag=tag, mems=mems):
                info = BlockInfo(Alloc.occupy, Access.public, TStruct(tag))
                return ExecResult(write_block(sigma, tag, Block(MStrType(tag, mems), info)),
                                  env, NORMAL)
            case Assignv(lhs=l, rhs=r):
                return self._assign(sigma, env, l, r)
            case Return(expr=e):
                f = self._current_function(env)
                sigma = write_dir(sigma, f.succ(), _eval_expr_r(sigma, env, e))
                return ExecResult(sigma, set_env(env, 1, self.fenv.dom_current), EXIT)
            case Returns(exprs=es):
                f = self._current_function(env)
                values = tuple(_eval_expr_r(sigma, env, e) for e in es)
                slot = _read_dir(sigma, f.succ())
                types = slot.types if isinstance(slot, MTypes) and \
                    len(slot.types) == len(values) else tuple(TUNDEF for _ in values)
                sigma = write_dir(sigma, f.succ(), MTypes(types, values))
                return ExecResult(sigma, set_env(env, 1, self.fenv.dom_current), EXIT)
            case Throw():
                return ExecResult(self.sigma_init, env, STOP, "throw", thrown=True)
            case Snil():
                return ExecResult(sigma, env, NORMAL)
            case Fstop():
                return ExecResult(sigma, replace(self.fenv, gas=env.gas), STOP, "fstop")
            case Contract():
                return self._contract(sigma, env, s)
            case Fun() | Funs() | Modifier():
                return self._declare_function(sigma, env, s)
            case FunCall(id=callee, args=args):
                return self._funcall(sigma, env, callee, args)
            case If(cond=c, then=a, els=b):
                cond = _eval_expr_r(sigma, env, c)
                if is_true(cond):
                    return self.run(sigma, env, a)
                if is_false(cond):
                    return self.run(sigma, env, b)
                raise Fault("not-boolean", "condition holds no boolean")
            case LoopWhile(cond=c, body=b):
                return self._loop(sigma, env, "LoopWhile", c, b, None)
            case LoopFor(init=i, cond=c, step=st, body=b):
                r = self.run(sigma, env, i)
                if r.outcome.kind is not Out.normal:
                    return r
                return self._loop(r.sigma, r.env, "LoopFor", c, b, st)
        raise Fault("not-statement", repr(s))

    def _current_function(self, env: Env) -> LabelAddress:
        if env.dom_current is None or env.dom_level != 0:
            raise Fault("return-outside-function", "no function is executing")
        return env.dom_current

    def _loop(self, sigma, env, kind_name, cond, body, step) -> ExecResult:
        first = True
        while True:
            if not first:
                stop, env = self._gate(sigma, env, kind_name)
                if stop is not None:
                    return stop
            first = False
            try:
                c = _eval_expr_r(sigma, env, cond)
            except Fault as fault:
                return _error(sigma, env, fault)
            if is_false(c):
                return ExecResult(sigma, env, NORMAL)
            if not is_true(c):
                return ExecResult(sigma, env, ERROR, "not-boolean: loop condition holds no boolean")
            r = self.run(sigma, env, body)
            if r.outcome.kind is Out.break_:
                return replace(r, outcome=NORMAL)
            if r.outcome.kind not in (Out.normal, Out.continue_):
                return r
            sigma, env = r.sigma, r.env
            if step is not None:
                r = self.run(sigma, env, step)
                if r.outcome.kind is not Out.normal:
                    return r
                sigma, env = r.sigma, r.env

    def _contract(self, sigma: MemoryState, env: Env, s: Contract) -> ExecResult:
        cid = s.id.addr if isinstance(s.id, Econ) else None
        if cid is None:
            raise Fault("null-address", "a contract needs an address")
        if not inherit_check(sigma.scopes.inherits.get(cid, ()), s.inherits):
            raise Fault("inheritance", f"contract {cid.token} disagrees with its declaration")
        members = tuple(_member_address(m) for m in flatten(s.body)
                        if _member_address(m) is not None)
        info = BlockInfo(Alloc.occupy, Access.public, TCid(cid))
        sigma = write_block(sigma, cid, Block(MCid(cid, members, tuple(s.inherits)), info))
        r = self.run(sigma, set_env(env, 1, cid), s.body)
        if r.outcome.kind is Out.error or r.thrown or r.gas_exhausted:
            return r
        return ExecResult(r.sigma, replace(env, gas=r.env.gas), NORMAL)

    def _declare_function(self, sigma: MemoryState, env: Env, s) -> ExecResult:
        f = s.id.addr if isinstance(s.id, Efun) else None
        if f is None:
            raise Fault("null-address", "a function needs an address")
        acc = getattr(s, "acc", None) or Access.public
        info = BlockInfo(Alloc.occupy, acc, TFid(f))
        sigma = write_block(sigma, f, Block(MStmt(s), info, env.dom_current, env.dom_level))
        return ExecResult(sigma, env, NORMAL)

    # calls -------------------------------------------------------------------

    def _resolve_callee(self, sigma, env, callee: Expr):
        """(target, receiver locator, bundled arguments)."""
        match callee:
            case Efun(addr=a) if a is not None:
                return a, None, ()
            case Econst(value=VField() as v):
                mv = _eval_value(sigma, env, v)
                if not is_fun_pointer(mv):
                    raise Fault("not-function", "the called member is not a function")
                bundled = tuple(_eval_value(sigma, env, arg.value) for arg in mv.args or ())
                return mv.ref.addr, mv.dad, bundled
        raise Fault("not-function", "the callee is not a function")

    def _funcall(self, sigma, env, callee: Expr, args: Sequence[Expr]) -> ExecResult:
        target, receiver, bundled = self._resolve_callee(sigma, env, callee)
        inputs = list(bundled) + [_eval_expr_r(sigma, env, a) for a in args]
        return self.call(sigma, env, target, inputs, receiver)

    def call(self, sigma, env, target: LabelAddress, inputs: list[MemoryValue],
             receiver=None) -> ExecResult:
        native = self.natives.get(target)
        if native is not None:
            return ExecResult(native(self, sigma, env, receiver, inputs), env, NORMAL)
        try:
            decl = self._function_body(sigma, env, target)
        except Fault as fault:
            return ExecResult(sigma, env, STOP, str(fault))
        entry = sigma
        if isinstance(decl, (Fun, Funs)):
            for m in decl.modis:
                if not isinstance(m, Emodifier) or not isinstance(m.fun, Efun) or m.fun.addr is None:
                    raise Fault("not-modifier", "a guard must name a modifier")
                margs = [_eval_value(sigma, env, a.value) for a in m.args]
                r = self.invoke(sigma, env, m.fun.addr, margs)
                if r.thrown:
                    return ExecResult(entry, r.env, STOP, "modifier rejected the call")
                if r.outcome.kind is not Out.normal:
                    return r
                sigma, env = r.sigma, r.env
        return self.invoke(sigma, env, target, inputs, decl)

    def _function_body(self, sigma, env, f: LabelAddress):
        mv = _read_chck(sigma, env, f)
        if not isinstance(mv, MStmt) or not isinstance(mv.stmt, (Fun, Funs, Modifier)):
            raise Fault("not-function", f"{f.token} holds no function body")
        return mv.stmt

    def invoke(self, sigma, env, f: LabelAddress, inputs: list[MemoryValue],
               decl=None) -> ExecResult:
        """Bind parameters, prepare the return slot and run the body of ``f``."""
        if decl is None:
            try:
                decl = self._function_body(sigma, env, f)
            except Fault as fault:
                return ExecResult(sigma, env, STOP, str(fault))
        entry = sigma
        inner = set_env(env, 0, f)
        try:
            for p in decl.pars:
                sigma = _init_var(sigma, inner, self.fenv, None, p.ty, p.addr)
            sigma = _set_par(sigma, inner, decl.pars, inputs)
            rets = (decl.id.ty,) if isinstance(decl, Fun) else \
                tuple(decl.rets) if isinstance(decl, Funs) else (TUNDEF,)
            sigma = _init_re(sigma, f.succ(), rets)
        except Fault as fault:
            return _error(sigma, env, fault)
        r = self.run(sigma, inner, decl.body)
        back = replace(env, gas=r.env.gas)
        if r.thrown or r.gas_exhausted or r.outcome.kind is Out.error:
            return replace(r, env=back)
        if isinstance(decl, Modifier):
            return ExecResult(entry, back, NORMAL)
        return ExecResult(r.sigma, back, NORMAL)

    def _assign(self, sigma: MemoryState, env: Env, l: Expr, r: Expr) -> ExecResult:
        if isinstance(r, Econst) and isinstance(r.value, VField):
            mv = _eval_value(sigma, env, r.value)
            if is_fun_pointer(mv):
                bundled = [_eval_value(sigma, env, a.value) for a in mv.args or ()]
                res = self.call(sigma, env, mv.ref.addr, bundled, mv.dad)
                if res.outcome.kind is not Out.normal:
                    return res
                sigma, env = res.sigma, res.env
                mv = read_return(sigma, mv.ref.addr)
        else:
            mv = _eval_expr_r(sigma, env, r)
        place = _eval_expr_l(sigma, env, l)
        return ExecResult(store(sigma, env, place, mv), env, NORMAL)


def store(sigma: MemoryState, env, place: Place, mv: MemoryValue) -> MemoryState:
    match place:
        case AddrPlace(addr=a):
            return _write_check(sigma, env, a, mv)
        case MapPlace(head=h, keys=ks, tys=ts):
            return map_store(sigma, env, h, ks, ts, mv)
    raise Fault("not-lvalue", repr(place))


def _member_address(s: Statement) -> Optional[LabelAddress]:
    match s:
        case Var(decl=Evar(addr=a)):
            return a
        case Fun(id=Efun(addr=a)) | Funs(id=Efun(addr=a)) | Modifier(id=Efun(addr=a)):
            return a
    return None


# -- programs --------------------------------------------------------------------


def build_scopes(*programs: Optional[Statement]) -> Scopes:
    owner_of: dict[LabelAddress, LabelAddress] = {}
    inherits: dict[LabelAddress, tuple[LabelAddress, ...]] = {}
    for program in programs:
        if program is None:
            continue
        for c in walk(program):
            if isinstance(c, Contract) and isinstance(c.id, Econ) and c.id.addr is not None:
                inherits[c.id.addr] = tuple(c.inherits)
                for s in walk(c.body):
                    a = _member_address(s)
                    if isinstance(s, (Fun, Funs, Modifier)) and a is not None:
                        owner_of[a] = c.id.addr
    return Scopes(owner_of, inherits)


def _allocate_decls(sigma: MemoryState, program: Statement) -> MemoryState:
    for s in walk(program):
        match s:
            case Var(acc=acc, decl=Evar(ty=ty, addr=a)) if a is not None:
                sigma = allocate(sigma, a, ty, acc or Access.public)
            case Struct(tag=tag):
                sigma = allocate(sigma, tag, TStruct(tag))
            case Contract(id=Econ(addr=a)) if a is not None:
                sigma = allocate(sigma, a, TCid(a))
            case Fun(id=Efun(addr=a)) | Funs(id=Efun(addr=a)) | Modifier(id=Efun(addr=a)) \
                    if a is not None:
                sigma = allocate(sigma, a, TFid(a))
                sigma = allocate(sigma, a.succ(), TUNDEF)
                for p in s.pars:
                    if isinstance(p, Epar) and p.addr is not None:
                        sigma = allocate(sigma, p.addr, p.ty)
    return sigma


LIB_GAS = 10**9


def initial_memory(program: Optional[Statement], lib: Optional[Statement] = None,
                   bindings: Optional[Mapping[str, LabelAddress]] = None) -> MemoryState:
    """Allocate every declaration of ``lib`` then ``program`` and run ``lib``.

    Raises Fault when two declarations claim one address with different types.
    """
    sigma = MemoryState.empty().with_scopes(build_scopes(lib, program))
    for part in (lib, program):
        if part is not None:
            sigma = _allocate_decls(sigma, part)
    if lib is not None:
        fenv = Env()
        r = Machine(sigma, fenv, bindings=bindings).run(sigma, replace(fenv, gas=LIB_GAS), lib)
        if r.outcome.kind not in (Out.normal, Out.exit):
            raise Fault("library", r.diag or "the library did not initialize")
        sigma = r.sigma
    return sigma


DEFAULT_BUDGET = 1_000_000


def exec_program(program: Statement, lib: Optional[Statement] = None, *,
                 budget: int = DEFAULT_BUDGET, limit: int = 0,
                 table: Optional[GasTable] = None, trace_dumps: bool = False,
                 bindings: Optional[Mapping[str, LabelAddress]] = None,
                 ) -> tuple[ExecResult, Trace]:
    """Initialize memory, then run ``program`` under the given gas budget and limit."""
    trace = Trace(dumps=trace_dumps)
    env, fenv = init_env(program, limit, budget)
    try:
        sigma = initial_memory(program, lib, bindings)
    except Fault as fault:
        return _error(MemoryState.empty(), env, fault), trace
    machine = Machine(sigma, fenv, table, trace, bindings=bindings)
    return machine.run(sigma, env, program), trace
