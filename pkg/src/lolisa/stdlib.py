"""The standard library: reserved structs, the ``msg``/``block``/``self``
variables, native ``send``/``call`` and the ``requires`` guard."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .check import FunSig, TypeCheckError
from .memory import MemoryState, write_dir
from .outcome import Fault
from .syntax import (
    SNIL, THROW, Ebop, Econ, Econst, Efun, Emodifier, Epar, Estruct, Euop, Evar, Expr, If,
    Statement, binop_result, static_type, unop_result,
)
from .types import (
    A_CALL, A_SEND, A_SEND_RE, LabelAddress, LolisaType, TADDRESS, TBool, TCid,
    TMODI, TStruct, TUINT, TUNDEF, final_type,
)
from .values import Locator, MemoryValue, MInt, MSendRe, MStr
from .value_eval import locate, map_length, member, update_member

STDLIB_SOURCE = """\
(Struct _0xaddress ((Tint addr) (Tint balance) ((Tfid (Some _0xsend)) send) (Tint gas))) ;;
(Struct _0xmsg ((Taddress sender) (Tuint values))) ;;
(Struct _0xblock ((Tint number) (Tint timestamp))) ;;
(Var public (Evar msg (Tstruct _0xmsg))) ;;
(Var public (Evar block (Tstruct _0xblock))) ;;
(Var public (Evar self Taddress))
"""

NativeFn = Callable[..., MemoryState]

NATIVE_SIGNATURES: dict[LabelAddress, FunSig] = {
    A_SEND: FunSig("Fun", TUNDEF, (TUNDEF,), (TADDRESS, TUINT), None),
    A_CALL: FunSig("Fun", TUNDEF, (TUNDEF,), (), None),
}


@dataclass
class StdlibImage:
    decls: Statement
    bindings: dict[str, LabelAddress] = field(default_factory=dict)
    natives: dict[LabelAddress, FunSig] = field(default_factory=dict)


def build_stdlib(names=None) -> StdlibImage:
    """Parse the library into ``names`` (a parser NameTable, created if absent)."""
    from .parser import NameTable, parse

    names = names if names is not None else NameTable()
    decls = parse(STDLIB_SOURCE, names).parsed
    bindings = {n: names.address(n) for n in ("msg", "block", "self")}
    bindings.update(send=A_SEND, transfer=A_SEND, call=A_CALL)
    return StdlibImage(decls, bindings, dict(NATIVE_SIGNATURES))


# -- requires ---------------------------------------------------------------------


def expr_type(e: Expr) -> Optional[LolisaType]:
    """The final type an expression is written at, without consulting declarations."""
    match e:
        case Econst() | Evar() | Epar() | Efun():
            return static_type(e)
        case Ebop(op=op, left=l, right=r):
            t = op.in_ty or expr_type(l) or expr_type(r)
            return None if t is None else binop_result(op.symbol, final_type(t))
        case Euop(op=op, operand=x):
            t = expr_type(x)
            return None if t is None else unop_result(op.symbol, final_type(t), op.target)
        case Estruct(tag=tag):
            return TStruct(tag)
        case Emodifier():
            return TMODI
        case Econ(addr=a):
            return TCid(a)
    return None


def requires(e: Expr) -> Statement:
    """``require(e)``: continue when e holds, throw otherwise."""
    t = expr_type(e)
    if not isinstance(t, TBool):
        raise TypeCheckError("STT-IF", f"requires needs a Tbool condition, got {t}")
    return If(e, SNIL, THROW)


# -- natives ------------------------------------------------------------------------


def _amount(mv: MemoryValue) -> int:
    if not isinstance(mv, MInt) or mv.n is None:
        raise Fault("not-integer", "the amount to send must be an integer")
    if mv.n < 0:
        raise Fault("out-of-range", "the amount to send cannot be negative")
    return mv.n


def _debit(machine, sigma: MemoryState, amount: int) -> Optional[MemoryState]:
    """Take ``amount`` from the ``self`` balance; None when it does not cover it."""
    payer = machine.bindings.get("self")
    block = sigma.get(payer) if payer is not None else None
    if block is None or not isinstance(block.value, MStr):
        return None
    _, _, balance = member(sigma, block.value, "balance")
    if not isinstance(balance, MInt) or balance.n is None or balance.n < amount:
        return None
    paid = update_member(sigma, block.value, ("balance",), MInt(balance.n - amount, balance.ty))
    return write_dir(sigma, payer, paid)


def _record(sigma: MemoryState, addr: LabelAddress, entry) -> MemoryState:
    prev = sigma.get(addr)
    records = prev.value.records if prev is not None and isinstance(prev.value, MSendRe) else ()
    return write_dir(sigma, addr, MSendRe(records + (entry,)))


def native_send(machine, sigma: MemoryState, env, receiver: Optional[Locator],
                inputs: list[MemoryValue]) -> MemoryState:
    """``to.send(amount)`` or ``send(to, amount)``.

    Pays out of ``self``.  Appends ``(to, amount)`` to the send-result block on
    success and an empty record when the balance is short.
    """
    if receiver is not None:
        if len(inputs) != 1:
            raise Fault("arity", f"send takes one amount, got {len(inputs)} arguments")
        to, amount = locate(sigma, receiver), inputs[0]
    else:
        if len(inputs) != 2:
            raise Fault("arity", f"send takes a receiver and an amount, got {len(inputs)}")
        to, amount = inputs
    if not isinstance(to, MStr):
        raise Fault("not-struct", "send needs an address receiver")
    n = _amount(amount)
    paid = _debit(machine, sigma, n)
    if paid is None:
        return _record(sigma, A_SEND_RE, None)
    return _record(paid, A_SEND_RE, (to, amount))


def native_call(machine, sigma: MemoryState, env, receiver: Optional[Locator],
                inputs: list[MemoryValue]) -> MemoryState:
    """Low-level call: records its receiver and arguments; there is no callee code."""
    head = (locate(sigma, receiver),) if receiver is not None else ()
    return _record(sigma, A_CALL, head + tuple(inputs))


NATIVES: dict[LabelAddress, NativeFn] = {A_SEND: native_send, A_CALL: native_call}


def sent(sigma: MemoryState) -> tuple:
    """Records appended by ``send`` so far."""
    block = sigma.get(A_SEND_RE)
    return block.value.records if block is not None and isinstance(block.value, MSendRe) else ()


def length(sigma: MemoryState, head: LabelAddress) -> int:
    """Number of keys stored in the mapping at ``head``."""
    return map_length(sigma, head)

