"""Reader for the parenthesized surface syntax.

Identifiers are names; the loader hands out one label address per name in
first-occurrence order.  Names are placed on even addresses so that every
function's successor address stays free for its return slot.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .memory import Access
from .syntax import (
    BINOP_CATALOG, SNIL, THROW, FSTOP, AssignCall, Assignv, BinOp, CompoundAssign, Contract,
    DoWhile, Ebop, Econ, Econst, Efun, Emodifier, Epar, Estruct, Euop, Evar, Expr, Fun,
    FunCall, Funs, If, Incr, LoopFor, LoopWhile, Modifier, New, Return, Returns, Seq,
    Statement, Struct, UnOp, Var, VarInit, desugar, render_expr, render_program, render_value,
    seq,
)
from .types import (
    A_CALL, A_SEND, SIGNED, UNSIGNED, USER_BASE, ArrayId, ArrayIndex, ByteSize, ConstId,
    IntSize, LabelAddress, LolisaType, MapId, MapType, MapTypeError, StrId, TADDRESS, TArray,
    TBOOL, TBytes, TCid, TFid, TFLOAT, TINT, TInt, TMap, TMODI, TPid, TSTRING, TSTT, TStruct,
    TUINT, TUNDEF, TVid, VarId, parse_token,
)
from .values import (
    FArray, FieldArg, FMap, FStruct, MArrayId, MConstId, MMapId, MStrId, MVarId, RefId,
    RefKind, Value, VArray, VBool, VByte, VField, VFloat, VInt, VMap, VRef, VString, VStruct,
    VUndef,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# -- reader ------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class Str:
    value: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple["Node", ...]
    line: int
    col: int


Node = Union[Atom, Str, SList]

_TOKEN = re.compile(r'''
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<atom>[^\s()"]+)
''', re.VERBOSE)


def read(text: str) -> list[Node]:
    """Split source text into top-level S-expression nodes."""
    stack: list[tuple[list, int, int]] = [([], 1, 1)]
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind_, tok = m.lastgroup, m.group()
        if kind_ == "open":
            stack.append(([], line, col))
        elif kind_ == "close":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            items, l0, c0 = stack.pop()
            stack[-1][0].append(SList(tuple(items), l0, c0))
        elif kind_ == "str":
            try:
                stack[-1][0].append(Str(json.loads(tok), line, col))
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad string literal: {exc.msg}", line, col) from None
        elif kind_ == "atom":
            stack[-1][0].append(Atom(tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    if len(stack) > 1:
        _, l0, c0 = stack[-1]
        raise ParseError("unbalanced '(': missing ')'", l0, c0)
    return stack[0][0]


# -- names ---------------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")

BUILTIN_NAMES = {"send": A_SEND, "transfer": A_SEND, "call": A_CALL}


@dataclass
class NameTable:
    """Identifier to label-address map shared by a library and a program."""

    by_name: dict[str, LabelAddress] = field(default_factory=dict)
    by_addr: dict[LabelAddress, str] = field(default_factory=dict)
    next_free: int = USER_BASE

    def __post_init__(self) -> None:
        for n, a in BUILTIN_NAMES.items():
            self.by_name.setdefault(n, a)

    def address(self, name: str) -> LabelAddress:
        token = parse_token(name)
        if token is not None:
            self._reserve(token)
            return token
        found = self.by_name.get(name)
        if found is not None:
            return found
        addr = LabelAddress(self.next_free)
        self.next_free += 2
        self.by_name[name] = addr
        self.by_addr[addr] = name
        return addr

    def _reserve(self, addr: LabelAddress) -> None:
        if addr.value >= self.next_free:
            self.next_free = addr.value + 2 - (addr.value % 2)

    def name(self, addr: LabelAddress) -> str:
        return self.by_addr.get(addr, addr.token)


@dataclass
class SurfaceProgram:
    source: str
    parsed: Statement
    names: NameTable

    @property
    def address_table(self) -> dict[str, LabelAddress]:
        return dict(self.names.by_name)

    def render(self) -> str:
        return render_program(self.parsed, self.names.name)


# -- parser ---------------------------------------------------------------------------

_ACCESS = {"public": Access.public, "protected": Access.protected, "private": Access.private}

_BASE_TYPES = {
    "undef": TUNDEF, "int": TINT, "uint": TUINT, "bool": TBOOL, "string": TSTRING,
    "float": TFLOAT, "address": TADDRESS,
}

_PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "|": 5, "^": 6, "&": 7, "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}

_KEYWORDS = {"None", "Some", ";;", "~>"}


def _pos(node: Node) -> tuple[int, int]:
    return node.line, node.col


class Parser:
    def __init__(self, names: Optional[NameTable] = None) -> None:
        self.names = names if names is not None else NameTable()
        self.scopes: list[set[str]] = [set()]

    # helpers ------------------------------------------------------------------

    def fail(self, node: Node, message: str) -> ParseError:
        return ParseError(message, *_pos(node))

    def atom(self, node: Node, what: str = "atom") -> str:
        if not isinstance(node, Atom):
            raise self.fail(node, f"expected {what}")
        return node.text

    def items(self, node: Node, what: str = "list") -> tuple[Node, ...]:
        if not isinstance(node, SList):
            raise self.fail(node, f"expected {what}")
        return node.items

    def form(self, node: Node) -> tuple[str, tuple[Node, ...]]:
        """Head constructor name and arguments of ``(Ctor args...)``."""
        items = self.items(node, "a constructor form")
        if not items or not isinstance(items[0], Atom):
            raise self.fail(node, "expected a constructor name")
        return items[0].text, items[1:]

    def arity(self, node: Node, args: tuple, *counts: int) -> None:
        if len(args) not in counts:
            want = " or ".join(str(c) for c in counts)
            raise self.fail(node, f"expected {want} arguments, got {len(args)}")

    def ident(self, node: Node) -> LabelAddress:
        text = self.atom(node, "identifier")
        if text in _KEYWORDS or (parse_token(text) is None and not _IDENT.match(text)):
            raise self.fail(node, f"{text!r} is not an identifier")
        return self.names.address(text)

    def opt_ident(self, node: Node) -> Optional[LabelAddress]:
        if isinstance(node, Atom) and node.text == "None":
            return None
        if isinstance(node, SList):
            head, args = self.form(node)
            if head != "Some":
                raise self.fail(node, "expected None, (Some name) or a name")
            self.arity(node, args, 1)
            return self.ident(args[0])
        return self.ident(node)

    def natural(self, node: Node) -> int:
        text = self.atom(node, "number")
        try:
            n = int(text)
        except ValueError:
            raise self.fail(node, f"expected a number, got {text!r}") from None
        return n

    def declare(self, node: Node, addr: LabelAddress) -> None:
        name = self.names.name(addr)
        if name in self.scopes[-1]:
            raise self.fail(node, f"{name} already exists")
        self.scopes[-1].add(name)

    def path(self, node: Node) -> tuple[str, ...]:
        parts = [self.atom(x, "member name") for x in self.items(node, "member path")]
        names = parts[0::2]
        if not names or any(p != "~>" for p in parts[1::2]) or len(parts) % 2 == 0:
            raise self.fail(node, "member paths look like (a ~> b ~> c)")
        for n, x in zip(names, self.items(node)[0::2]):
            if not _IDENT.match(n):
                raise self.fail(x, f"{n!r} is not a member name")
        return tuple(names)

    # types --------------------------------------------------------------------

    def ty(self, node: Node, letter: str = "T") -> LolisaType:
        if isinstance(node, Atom):
            text = node.text
            if text in ("Tstt", "Tmodi"):
                return TSTT if text == "Tstt" else TMODI
            if text.startswith(letter) and text[1:] in _BASE_TYPES:
                return _BASE_TYPES[text[1:]]
            raise self.fail(node, f"unknown type {text!r}")
        head, args = self.form(node)
        if not head.startswith(letter):
            raise self.fail(node, f"unknown type constructor {head!r}")
        ctor = head[1:]
        match ctor:
            case "int":
                self.arity(node, args, 2)
                sign = {"Signed": SIGNED, "Unsigned": UNSIGNED}.get(self.atom(args[0]))
                size = IntSize.__members__.get(self.atom(args[1]))
                if sign is None or size is None:
                    raise self.fail(node, "integer types look like (Tint Signed I8)")
                return TInt(sign, size)
            case "bytes":
                self.arity(node, args, 1)
                return TBytes(self.byte_size(args[0]))
            case "struct":
                self.arity(node, args, 1)
                return TStruct(self.ident(args[0]))
            case "vid" | "pid" | "fid" | "cid":
                self.arity(node, args, 1)
                cls = {"vid": TVid, "pid": TPid, "fid": TFid, "cid": TCid}[ctor]
                return cls(self.opt_ident(args[0]))
            case "array":
                self.arity(node, args, 2)
                prefix = "i" if letter == "I" else ""
                return TArray(self.index(args[0], prefix), self.ty(args[1], letter))
            case "map" if letter == "T":
                self.arity(node, args, 2)
                return TMap(self.map_type(args[0]), self.ty(args[1]))
        raise self.fail(node, f"unknown type constructor {head!r}")

    def map_type(self, node: Node) -> MapType:
        try:
            return MapType(self.ty(node, "I"))
        except MapTypeError as exc:
            raise self.fail(node, str(exc)) from None

    def byte_size(self, node: Node) -> ByteSize:
        size = ByteSize.__members__.get(self.atom(node, "byte size"))
        if size is None:
            raise self.fail(node, "byte sizes are B4, B8, B16 or B32")
        return size

    def index(self, node: Node, prefix: str = "") -> ArrayIndex:
        head, args = self.form(node)
        if not head.startswith(prefix):
            raise self.fail(node, f"unknown index {head!r}")
        match head[len(prefix):]:
            case "Aconst_id":
                self.arity(node, args, 1)
                return ConstId(self.natural(args[0]))
            case "Avar_id":
                self.arity(node, args, 1)
                return VarId(self.ident(args[0]))
            case "Astr_id":
                self.arity(node, args, 2)
                return StrId(self.ident(args[0]), self.path(args[1]))
            case "Amap_id":
                self.arity(node, args, 2)
                return MapId(self.ident(args[0]), self.index(args[1]))
            case "Aarray_id":
                self.arity(node, args, 2)
                return ArrayId(self.ident(args[0]), self.index(args[1], prefix))
        raise self.fail(node, f"unknown index {head!r}")

    # values -------------------------------------------------------------------

    def value(self, node: Node) -> Value:
        if isinstance(node, Atom) and node.text == "Vundef":
            return VUndef()
        head, args = self.form(node)
        match head:
            case "Vint" | "Vuint":
                self.arity(node, args, 1)
                if isinstance(args[0], SList):
                    h, a = self.form(args[0])
                    if h != "INT" or len(a) != 3:
                        raise self.fail(args[0], "sized integers look like (INT I8 Signed 5)")
                    size = IntSize.__members__.get(self.atom(a[0]))
                    sign = {"Signed": SIGNED, "Unsigned": UNSIGNED}.get(self.atom(a[1]))
                    if size is None or sign is None:
                        raise self.fail(args[0], "sized integers look like (INT I8 Signed 5)")
                    return VInt(self.natural(a[2]), TInt(sign, size))
                return VInt(self.natural(args[0]), TINT if head == "Vint" else TUINT)
            case "Vbool":
                self.arity(node, args, 1)
                text = self.atom(args[0])
                if text not in ("true", "false"):
                    raise self.fail(args[0], "booleans are true or false")
                return VBool(text == "true")
            case "Vbyte":
                self.arity(node, args, 2)
                size = self.byte_size(args[0])
                text = self.atom(args[1])
                try:
                    data = bytes.fromhex(text[2:]) if text.startswith("0x") else None
                except ValueError:
                    data = None
                if data is None or len(data) != size.value:
                    raise self.fail(args[1], f"expected {size.value} bytes as 0x-prefixed hex")
                return VByte(data, size)
            case "Vstring":
                self.arity(node, args, 1)
                if not isinstance(args[0], Str):
                    raise self.fail(args[0], "expected a string literal")
                return VString(args[0].value)
            case "Vfloat":
                self.arity(node, args, 1)
                try:
                    return VFloat(float(self.atom(args[0])))
                except ValueError:
                    raise self.fail(args[0], "expected a float") from None
            case "Vstruct":
                self.arity(node, args, 2)
                return VStruct(self.ident(args[0]), self.ident(args[1]))
            case "Vref":
                self.arity(node, args, 2)
                kinds = {k.value: k for k in RefKind}
                k = kinds.get(self.atom(args[0]))
                if k is None:
                    raise self.fail(args[0], "reference kinds are vid, pid, fid or cid")
                return VRef(RefId(k, self.ident(args[1])))
            case "Varray":
                self.arity(node, args, 3, 4)
                snd = self.value(args[3]) if len(args) == 4 else None
                if snd is not None and not isinstance(snd, VArray):
                    raise self.fail(args[3], "the next dimension must be a Varray")
                return VArray(self.index(args[0]), self.ty(args[1]), self.ident(args[2]), snd)
            case "Vmap":
                self.arity(node, args, 5)
                snd = self.optional(args[4], self.value)
                if snd is not None and not isinstance(snd, VMap):
                    raise self.fail(args[4], "the next dimension must be a Vmap")
                return VMap(self.ident(args[0]), self.key(args[1]), self.map_type(args[2]),
                            self.ty(args[3]), snd)
            case "Vfield":
                self.arity(node, args, 4)
                opars = self.optional(args[3], lambda n: tuple(
                    FieldArg(self.value(x)) for x in self.items(n, "argument list")))
                return VField(self.ty(args[0]), self.head(args[1]), self.path(args[2]), opars)
        raise self.fail(node, f"unknown value constructor {head!r}")

    def optional(self, node: Node, inner):
        if isinstance(node, Atom) and node.text == "None":
            return None
        head, args = self.form(node)
        if head != "Some":
            raise self.fail(node, "expected None or (Some ...)")
        self.arity(node, args, 1)
        return inner(args[0])

    def key(self, node: Node):
        head, args = self.form(node)
        match head:
            case "Mconst_id":
                self.arity(node, args, 1)
                return MConstId(self.value(args[0]))
            case "Mvar_id":
                self.arity(node, args, 1)
                return MVarId(self.ident(args[0]))
            case "Mstr_id":
                self.arity(node, args, 2)
                return MStrId(self.ident(args[0]), self.path(args[1]))
            case "Marray_id":
                self.arity(node, args, 2)
                return MArrayId(self.ident(args[0]), self.index(args[1]))
            case "Mmap_id":
                self.arity(node, args, 2)
                return MMapId(self.ident(args[0]), self.key(args[1]))
        raise self.fail(node, f"unknown mapping key {head!r}")

    def head(self, node: Node):
        head, args = self.form(node)
        match head:
            case "Fstruct":
                self.arity(node, args, 2)
                return FStruct(self.ident(args[0]), self.ident(args[1]))
            case "Fmap":
                self.arity(node, args, 3)
                return FMap(self.ident(args[0]), self.key(args[1]),
                            self.optional(args[2], self.value))
            case "Farray":
                self.arity(node, args, 2)
                return FArray(self.ident(args[0]), self.index(args[1]))
        raise self.fail(node, f"unknown field head {head!r}")

    # expressions --------------------------------------------------------------

    def binop(self, node: Node) -> Optional[BinOp]:
        """``(+)`` or ``(+ Tint)``; None when ``node`` is not an operator."""
        if not isinstance(node, SList) or not node.items or len(node.items) > 2:
            return None
        sym = node.items[0]
        if not isinstance(sym, Atom) or sym.text not in BINOP_CATALOG:
            return None
        in_ty = self.ty(node.items[1]) if len(node.items) == 2 else None
        return BinOp(sym.text, in_ty)

    def unop(self, node: Node) -> UnOp:
        items = self.items(node, "operator")
        sym = self.atom(items[0], "operator") if items else ""
        if sym == "cast" and len(items) == 2:
            return UnOp("cast", self.ty(items[1]))
        if sym in ("-", "~", "!") and len(items) == 1:
            return UnOp(sym)
        raise self.fail(node, "unary operators are (-), (~), (!) or (cast type)")

    def expr(self, node: Node) -> Expr:
        items = self.items(node, "expression")
        if not items:
            raise self.fail(node, "empty expression")
        if not isinstance(items[0], Atom):
            if len(items) == 1:
                return self.expr(items[0])
            return self.infix(node, items)
        head, args = items[0].text, items[1:]
        match head:
            case "Econst":
                self.arity(node, args, 1)
                return Econst(self.value(args[0]))
            case "Estruct":
                self.arity(node, args, 2)
                return Estruct(self.ident(args[0]),
                               tuple(self.expr(x) for x in self.items(args[1], "members")))
            case "Emodifier":
                self.arity(node, args, 1, 2)
                vals = () if len(args) == 1 else tuple(
                    FieldArg(self.value(x)) for x in self.items(args[1], "argument list"))
                return Emodifier(self.expr(args[0]), vals)
            case "Ebop":
                self.arity(node, args, 3)
                op = self.binop(args[0])
                if op is None:
                    raise self.fail(args[0], "expected a binary operator such as (+)")
                return Ebop(op, self.expr(args[1]), self.expr(args[2]))
            case "Euop":
                self.arity(node, args, 2)
                return Euop(self.unop(args[0]), self.expr(args[1]))
            case "Evar" | "Epar" | "Efun":
                self.arity(node, args, 2)
                cls = {"Evar": Evar, "Epar": Epar, "Efun": Efun}[head]
                return cls(self.ty(args[1]), self.opt_ident(args[0]))
            case "Econ":
                self.arity(node, args, 1)
                return Econ(self.opt_ident(args[0]))
        raise self.fail(node, f"unknown expression constructor {head!r}")

    def infix(self, node: Node, items: tuple[Node, ...]) -> Expr:
        """``(e1 (op) e2 (op) e3 ...)`` with the usual precedence, left associative."""
        if len(items) % 2 == 0:
            raise self.fail(node, "infix expressions alternate operands and operators")
        operands = [self.expr(x) for x in items[0::2]]
        ops = []
        for x in items[1::2]:
            op = self.binop(x)
            if op is None:
                raise self.fail(x, "expected a binary operator such as (+)")
            ops.append(op)
        out = [operands[0]]
        pending: list[BinOp] = []
        for op, rhs in zip(ops, operands[1:]):
            while pending and _PRECEDENCE[pending[-1].symbol] >= _PRECEDENCE[op.symbol]:
                r = out.pop()
                out.append(Ebop(pending.pop(), out.pop(), r))
            pending.append(op)
            out.append(rhs)
        while pending:
            r = out.pop()
            out.append(Ebop(pending.pop(), out.pop(), r))
        return out[0]

    def exprs(self, node: Node) -> tuple[Expr, ...]:
        return tuple(self.expr(x) for x in self.items(node, "expression list"))

    # statements ---------------------------------------------------------------

    def access(self, node: Node) -> Optional[Access]:
        if isinstance(node, SList):
            return self.optional(node, self.access)
        text = self.atom(node, "access")
        if text == "None":
            return None
        if text not in _ACCESS:
            raise self.fail(node, "access is public, protected, private or None")
        return _ACCESS[text]

    def flag(self, node: Node) -> Optional[str]:
        text = self.atom(node, "flag")
        return None if text == "None" else text

    def stmt(self, node: Node) -> Statement:
        if isinstance(node, Atom):
            match node.text:
                case "Throw":
                    return THROW
                case "Snil":
                    return SNIL
                case "Fstop":
                    return FSTOP
            raise self.fail(node, f"unknown statement {node.text!r}")
        items = self.items(node, "statement")
        if not items:
            raise self.fail(node, "empty statement")
        if any(isinstance(x, Atom) and x.text == ";;" for x in items) or \
                not isinstance(items[0], Atom):
            return self.group(node, items)
        head, args = items[0].text, items[1:]
        if head in ("Throw", "Snil", "Fstop") and not args:
            return self.stmt(items[0])
        method = getattr(self, "s_" + head, None)
        if method is None:
            raise self.fail(node, f"unknown statement constructor {head!r}")
        return method(node, args)

    def group(self, node: Node, items: tuple[Node, ...]) -> Statement:
        parts: list[list[Node]] = [[]]
        for x in items:
            if isinstance(x, Atom) and x.text == ";;":
                parts.append([])
            else:
                parts[-1].append(x)
        if parts[-1] == [] and len(parts) > 1:
            parts.pop()
        stmts = []
        for p in parts:
            if len(p) != 1:
                raise self.fail(node, "statements in a group are separated by ;;")
            stmts.append(self.stmt(p[0]))
        return seq(*stmts)

    def s_Var(self, node, args):
        self.arity(node, args, 2, 3)
        acc = self.access(args[0])
        decl = self.expr(args[1])
        if isinstance(decl, Evar) and decl.addr is not None:
            self.declare(args[1], decl.addr)
        if len(args) == 3:
            return desugar(VarInit(acc, decl, self.expr(args[2])))
        return Var(acc, decl)

    def s_Struct(self, node, args):
        self.arity(node, args, 2)
        tag = self.ident(args[0])
        self.declare(args[0], tag)
        mems = []
        for m in self.items(args[1], "member list"):
            pair = self.items(m, "(type name)")
            if len(pair) != 2:
                raise self.fail(m, "struct members look like (type name)")
            name = self.atom(pair[1], "member name")
            if not _IDENT.match(name):
                raise self.fail(pair[1], f"{name!r} is not a member name")
            mems.append((self.ty(pair[0]), name))
        return Struct(tag, tuple(mems))

    def s_Assignv(self, node, args):
        self.arity(node, args, 2)
        return Assignv(self.expr(args[0]), self.expr(args[1]))

    def s_Return(self, node, args):
        self.arity(node, args, 1)
        return Return(self.expr(args[0]))

    def s_Returns(self, node, args):
        self.arity(node, args, 1)
        return Returns(self.exprs(args[0]))

    def s_Contract(self, node, args):
        self.arity(node, args, 3)
        cid = Econ(self.ident(args[0])) if isinstance(args[0], Atom) else self.expr(args[0])
        if isinstance(cid, Econ) and cid.addr is not None:
            self.declare(args[0], cid.addr)
        parents = tuple(self.ident(x) for x in self.items(args[1], "parent list"))
        self.scopes.append(set())
        try:
            body = self.stmt(args[2])
        finally:
            self.scopes.pop()
        return Contract(cid, parents, body)

    def _function(self, node, fid_node, pars_node, body_node):
        fid = self.expr(fid_node)
        if isinstance(fid, Efun) and fid.addr is not None:
            self.declare(fid_node, fid.addr)
        self.scopes.append(set())
        try:
            pars = self.exprs(pars_node)
            for p, pn in zip(pars, self.items(pars_node)):
                if isinstance(p, Epar) and p.addr is not None:
                    self.declare(pn, p.addr)
            body = self.stmt(body_node)
        finally:
            self.scopes.pop()
        return fid, pars, body

    def s_Modifier(self, node, args):
        self.arity(node, args, 3)
        fid, pars, body = self._function(node, args[0], args[1], args[2])
        return Modifier(fid, pars, body)

    def s_Fun(self, node, args):
        self.arity(node, args, 7)
        fid, pars, body = self._function(node, args[3], args[4], args[6])
        return Fun(self.access(args[0]), self.flag(args[1]), self.flag(args[2]), fid, pars,
                   self.exprs(args[5]), body)

    def s_Funs(self, node, args):
        self.arity(node, args, 8)
        fid, pars, body = self._function(node, args[3], args[4], args[7])
        rets = tuple(self.ty(x) for x in self.items(args[6], "result types"))
        return Funs(self.access(args[0]), self.flag(args[1]), self.flag(args[2]), fid, pars,
                    self.exprs(args[5]), rets, body)

    def s_Fun_call(self, node, args):
        self.arity(node, args, 1, 2)
        return FunCall(self.expr(args[0]), self.exprs(args[1]) if len(args) == 2 else ())

    def s_Loop_for(self, node, args):
        self.arity(node, args, 4)
        return LoopFor(self.stmt(args[0]), self.expr(args[1]), self.stmt(args[2]),
                       self.stmt(args[3]))

    def s_Loop_while(self, node, args):
        self.arity(node, args, 2)
        return LoopWhile(self.expr(args[0]), self.stmt(args[1]))

    def s_If(self, node, args):
        self.arity(node, args, 3)
        return If(self.expr(args[0]), self.stmt(args[1]), self.stmt(args[2]))

    def s_Seq(self, node, args):
        self.arity(node, args, 2)
        return Seq(self.stmt(args[0]), self.stmt(args[1]))

    # sugar

    def s_requires(self, node, args):
        from .stdlib import requires

        self.arity(node, args, 1)
        return requires(self.expr(args[0]))

    def s_Incr(self, node, args):
        self.arity(node, args, 1)
        return desugar(Incr(self.expr(args[0])))

    def s_Decr(self, node, args):
        self.arity(node, args, 1)
        return desugar(Incr(self.expr(args[0]), "-"))

    def s_Assign_op(self, node, args):
        self.arity(node, args, 3)
        op = self.binop(args[0])
        if op is None:
            raise self.fail(args[0], "expected a binary operator such as (+)")
        return desugar(CompoundAssign(op.symbol, self.expr(args[1]), self.expr(args[2])))

    def s_Do_while(self, node, args):
        self.arity(node, args, 2)
        return desugar(DoWhile(self.stmt(args[0]), self.expr(args[1])))

    def s_New(self, node, args):
        self.arity(node, args, 1, 2)
        return desugar(New(self.expr(args[0]), self.exprs(args[1]) if len(args) == 2 else ()))

    def s_Assign_call(self, node, args):
        self.arity(node, args, 2, 3)
        return desugar(AssignCall(self.expr(args[0]), self.expr(args[1]),
                                  self.exprs(args[2]) if len(args) == 3 else ()))

    # programs -----------------------------------------------------------------

    def program(self, nodes: list[Node]) -> Statement:
        if not nodes:
            return SNIL
        return self.group(SList(tuple(nodes), 1, 1), tuple(nodes))


def parse(source: str, names: Optional[NameTable] = None) -> SurfaceProgram:
    """Parse a whole program; top-level statements are separated by ``;;``."""
    p = Parser(names)
    return SurfaceProgram(source, p.program(read(source)), p.names)


def parse_one(source: str, kind_: str, names: Optional[NameTable] = None):
    """Parse a single statement, expression, value or type (for tests and tools)."""
    nodes = read(source)
    if len(nodes) != 1:
        raise ParseError(f"expected exactly one {kind_}", 1, 1)
    p = Parser(names)
    return {"stmt": p.stmt, "expr": p.expr, "value": p.value, "type": p.ty,
            "map_type": p.map_type}[kind_](nodes[0])


def parse_stmt(source: str, names: Optional[NameTable] = None) -> Statement:
    return parse_one(source, "stmt", names)


def parse_expr(source: str, names: Optional[NameTable] = None) -> Expr:
    return parse_one(source, "expr", names)


def parse_value(source: str, names: Optional[NameTable] = None) -> Value:
    return parse_one(source, "value", names)


def parse_type(source: str, names: Optional[NameTable] = None) -> LolisaType:
    return parse_one(source, "type", names)


def format_source(source: str) -> str:
    """Canonical rendering of a program, keeping its identifier names."""
    return parse(source).render()


def format_expr(e: Expr, names: Optional[NameTable] = None) -> str:
    return render_expr(e, names.name if names else (lambda a: a.token))


def format_value(v: Value, names: Optional[NameTable] = None) -> str:
    return render_value(v, names.name if names else (lambda a: a.token))
