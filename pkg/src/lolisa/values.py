"""Source-level values, field access heads, and the memory values stored in blocks."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Union

from .types import (
    TBOOL, TFLOAT, TSTRING, TUNDEF, ArrayIndex, ByteSize, LabelAddress, LolisaType,
    MapType, TArray, TBool, TBytes, TCid, TFid, TFloat, TInt, TMap, TModi, TPid,
    TStruct, TStt, TString, TUndef, TVid, render_path,
    render_type,
)


class RefKind(Enum):
    Vvid = "vid"
    Vpid = "pid"
    Vfid = "fid"
    Vcid = "cid"


@dataclass(frozen=True)
class RefId:
    kind: RefKind
    addr: LabelAddress


# -- mapping keys and field heads -------------------------------------------


@dataclass(frozen=True)
class MConstId:
    value: "Value"


@dataclass(frozen=True)
class MVarId:
    addr: LabelAddress


@dataclass(frozen=True)
class MStrId:
    addr: LabelAddress
    mems: tuple[str, ...]


@dataclass(frozen=True)
class MArrayId:
    addr: LabelAddress
    index: ArrayIndex


@dataclass(frozen=True)
class MMapId:
    name: LabelAddress
    inner: "MapKey"


MapKey = Union[MConstId, MVarId, MStrId, MArrayId, MMapId]


@dataclass(frozen=True)
class FStruct:
    tag: LabelAddress
    inst: LabelAddress


@dataclass(frozen=True)
class FMap:
    name: LabelAddress
    key: MapKey
    oval: Optional["Value"] = None


@dataclass(frozen=True)
class FArray:
    name: LabelAddress
    index: ArrayIndex


FieldHead = Union[FStruct, FMap, FArray]


# -- values ------------------------------------------------------------------


@dataclass(frozen=True)
class VUndef:
    pass


@dataclass(frozen=True)
class VInt:
    n: int
    ty: TInt

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise TypeError(f"Vint needs an integer, got {self.n!r}")
        if not isinstance(self.ty, TInt):
            raise TypeError("Vint must carry an integer type")


@dataclass(frozen=True)
class VBool:
    b: bool

    def __post_init__(self) -> None:
        if not isinstance(self.b, bool):
            raise TypeError(f"Vbool needs a boolean, got {self.b!r}")


@dataclass(frozen=True)
class VByte:
    data: bytes
    size: ByteSize

    def __post_init__(self) -> None:
        if len(self.data) != self.size.value:
            raise TypeError("Vbyte payload length must equal its byte size")


@dataclass(frozen=True)
class VString:
    s: str

    def __post_init__(self) -> None:
        if not isinstance(self.s, str):
            raise TypeError("Vstring needs a string")


@dataclass(frozen=True)
class VFloat:
    f: float

    def __post_init__(self) -> None:
        if isinstance(self.f, bool) or not isinstance(self.f, (int, float)):
            raise TypeError("Vfloat needs a number")


@dataclass(frozen=True)
class VStruct:
    tag: LabelAddress
    inst: LabelAddress


@dataclass(frozen=True)
class VRef:
    ref: RefId


@dataclass(frozen=True)
class VArray:
    index: ArrayIndex
    elem: LolisaType
    name: LabelAddress
    snd: Optional["VArray"] = None

    def __post_init__(self) -> None:
        if self.snd is not None and not isinstance(self.snd, VArray):
            raise TypeError("the next array dimension must be a Varray")


@dataclass(frozen=True)
class VMap:
    name: LabelAddress
    key: MapKey
    key_ty: MapType
    ty: LolisaType
    snd: Optional["VMap"] = None

    def __post_init__(self) -> None:
        if self.snd is not None and not isinstance(self.snd, VMap):
            raise TypeError("the next mapping dimension must be a Vmap")


@dataclass(frozen=True)
class VField:
    ty: LolisaType
    head: FieldHead
    mems: tuple[str, ...]
    opars: Optional[tuple["FieldArg", ...]] = None


Value = Union[VUndef, VInt, VBool, VByte, VString, VFloat, VStruct, VRef, VArray, VMap, VField]

NORMAL_VALUES = (VUndef, VInt, VBool, VByte, VString, VFloat, VRef)


@dataclass(frozen=True)
class FieldArg:
    """An argument carried without a type index; checked at call time."""

    value: Value


_REF_TYPES = {RefKind.Vvid: TVid, RefKind.Vpid: TPid, RefKind.Vfid: TFid, RefKind.Vcid: TCid}


def carried_type(v: Value) -> LolisaType:
    match v:
        case VUndef():
            return TUNDEF
        case VInt(ty=ty):
            return ty
        case VBool():
            return TBOOL
        case VByte(size=size):
            return TBytes(size)
        case VString():
            return TSTRING
        case VFloat():
            return TFLOAT
        case VStruct(tag=tag):
            return TStruct(tag)
        case VRef(ref=ref):
            return _REF_TYPES[ref.kind](ref.addr)
        case VArray(elem=elem, snd=snd):
            return elem if snd is None else carried_type(snd)
        case VMap(ty=ty, snd=snd):
            return ty if snd is None else carried_type(snd)
        case VField(ty=ty):
            return ty
    raise TypeError(v)


def is_normal_value(v: Value) -> bool:
    return isinstance(v, NORMAL_VALUES)


# -- memory values -----------------------------------------------------------


@dataclass(frozen=True)
class Locator:
    """Where a struct member lives: a block plus a member path inside it."""

    addr: LabelAddress
    path: tuple[str, ...] = ()


@dataclass(frozen=True)
class MUndef:
    pass


@dataclass(frozen=True)
class MInt:
    n: Optional[int]
    ty: TInt


@dataclass(frozen=True)
class MBool:
    b: Optional[bool]


@dataclass(frozen=True)
class MByte:
    data: Optional[bytes]
    size: ByteSize


@dataclass(frozen=True)
class MFloat:
    f: Optional[float]


@dataclass(frozen=True)
class MString:
    s: Optional[str]


@dataclass(frozen=True)
class MPtr:
    ref: RefId
    dad: Optional[Locator] = None
    args: Optional[tuple[FieldArg, ...]] = None


@dataclass(frozen=True)
class MStmt:
    stmt: Any


@dataclass(frozen=True)
class MStr:
    tag: LabelAddress
    members: tuple["MemoryValue", ...]


@dataclass(frozen=True)
class MStrType:
    tag: LabelAddress
    mems: tuple[tuple[LolisaType, str], ...]

    def member(self, name: str) -> Optional[tuple[int, LolisaType]]:
        for i, (ty, n) in enumerate(self.mems):
            if n == name:
                return i, ty
        return None


@dataclass(frozen=True)
class MCid:
    cid: LabelAddress
    members: tuple[LabelAddress, ...]
    inherits: tuple[LabelAddress, ...]


@dataclass(frozen=True)
class MBytes:
    data: bytes


@dataclass(frozen=True)
class MMap:
    """A mapping bucket; the head bucket lives at the mapping's own address.

    ``next`` links to the following bucket of the chain.  A bucket stored as a
    mapping *value* holds only ``init`` pointing at the inner mapping's head.
    """

    init: LabelAddress
    pair: Optional[tuple["MemoryValue", "MemoryValue"]] = None
    next: Optional[LabelAddress] = None


@dataclass(frozen=True)
class MArr:
    """Array descriptor stored at the array's base block."""

    start: LabelAddress
    length: int


@dataclass(frozen=True)
class MTypes:
    types: tuple[LolisaType, ...]
    values: tuple["MemoryValue", ...]

    def __post_init__(self) -> None:
        if len(self.types) != len(self.values):
            raise ValueError("Types needs one value per type")


@dataclass(frozen=True)
class MSendRe:
    records: tuple[Optional[tuple["MemoryValue", ...]], ...]


MemoryValue = Union[MUndef, MInt, MBool, MByte, MFloat, MString, MPtr, MStmt, MStr,
                    MStrType, MCid, MBytes, MMap, MArr, MTypes, MSendRe]


def is_map_memory_value(mv: MemoryValue) -> bool:
    """Keys of mappings may not be mappings or send records, at any depth."""
    match mv:
        case MMap() | MSendRe():
            return False
        case MStr(members=members):
            return all(is_map_memory_value(m) for m in members)
        case MTypes(values=values):
            return all(is_map_memory_value(m) for m in values)
    return True


def value_to_memory(v: Value) -> MemoryValue:
    """The value/memory correspondence for normal-form values."""
    match v:
        case VUndef():
            return MUndef()
        case VInt(n=n, ty=ty):
            return MInt(n, ty)
        case VBool(b=b):
            return MBool(b)
        case VByte(data=data, size=size):
            return MByte(data, size)
        case VString(s=s):
            return MString(s)
        case VFloat(f=f):
            return MFloat(float(f))
        case VRef(ref=ref):
            return MPtr(ref)
    raise ValueError(f"{type(v).__name__} is not a normal-form value")


_PTR_TYPES = {TVid: RefKind.Vvid, TPid: RefKind.Vpid, TFid: RefKind.Vfid, TCid: RefKind.Vcid}


def corresponds(t: LolisaType, mv: MemoryValue) -> bool:
    """Whether a memory value inhabits a type (constructor-level match)."""
    match t:
        case TUndef():
            return isinstance(mv, (MUndef, MTypes, MSendRe))
        case TInt():
            return isinstance(mv, MInt) and mv.ty == t
        case TBool():
            return isinstance(mv, MBool)
        case TString():
            return isinstance(mv, MString)
        case TFloat():
            return isinstance(mv, MFloat)
        case TBytes(size=size):
            return isinstance(mv, MByte) and mv.size == size
        case TStt() | TModi():
            return isinstance(mv, MStmt)
        case TStruct(tag=tag):
            return isinstance(mv, (MStr, MStrType)) and mv.tag == tag
        case TFid():
            return isinstance(mv, MStmt) or (isinstance(mv, MPtr) and mv.ref.kind is RefKind.Vfid)
        case TCid():
            return isinstance(mv, MCid) or (isinstance(mv, MPtr) and mv.ref.kind is RefKind.Vcid)
        case TVid() | TPid():
            return isinstance(mv, MPtr) and mv.ref.kind is _PTR_TYPES[type(t)]
        case TArray():
            return isinstance(mv, MArr)
        case TMap():
            return isinstance(mv, MMap)
    return False


def initial_scalar(t: LolisaType) -> Optional[MemoryValue]:
    """Initial payload of a scalar type, or None when memory is needed."""
    match t:
        case TInt():
            return MInt(None, t)
        case TBool():
            return MBool(None)
        case TString():
            return MString(None)
        case TFloat():
            return MFloat(None)
        case TBytes(size=size):
            return MByte(None, size)
        case TUndef():
            return MUndef()
        case TFid(addr=a) if a is not None:
            return MPtr(RefId(RefKind.Vfid, a))
        case TVid(addr=a) if a is not None:
            return MPtr(RefId(RefKind.Vvid, a))
        case TPid(addr=a) if a is not None:
            return MPtr(RefId(RefKind.Vpid, a))
        case TCid(addr=a) if a is not None:
            return MPtr(RefId(RefKind.Vcid, a))
        case TFid() | TVid() | TPid() | TCid() | TStt() | TModi():
            return MUndef()
    return None


# -- rendering ---------------------------------------------------------------


def _some(text: Optional[str]) -> str:
    return "None" if text is None else f"(Some {text})"


def render_mv(mv: MemoryValue, inner: bool = False) -> str:
    p = "i" if inner else ""
    match mv:
        case MUndef():
            return f"{p}Undef"
        case MInt(n=n, ty=ty):
            body = None if n is None else f"(INT {ty.size.name} {ty.sign.value} {n})"
            return f"{p}Int {_some(body)}"
        case MBool(b=b):
            return f"{p}Bool {_some(None if b is None else str(b).lower())}"
        case MByte(data=data, size=size):
            return f"{p}Byte {size.name} {_some(None if data is None else '0x' + data.hex())}"
        case MFloat(f=f):
            return f"{p}Float {_some(None if f is None else repr(f))}"
        case MString(s=s):
            return f"{p}String {_some(None if s is None else json.dumps(s))}"
        case MPtr(ref=ref, dad=dad, args=args):
            text = f"{p}Ptr ({ref.kind.value} {ref.addr.token})"
            if dad is not None:
                text += f" (dad {dad.addr.token} {render_path(dad.path)})"
            if args is not None:
                text += " [" + "; ".join(render_value(a.value) for a in args) + "]"
            return text
        case MStmt(stmt=stmt):
            from .syntax import render_stmt

            return f"{p}Stmt ({render_stmt(stmt)})"
        case MStr(tag=tag, members=members):
            return f"{p}Str {tag.token} [" + "; ".join(render_mv(m, True) for m in members) + "]"
        case MStrType(tag=tag, mems=mems):
            body = "str_nil"
            for ty, name in reversed(mems):
                body = f"(str_mem {render_type(ty)} (Nvar {name}) {body})"
            return f"{p}Str_type {tag.token} {body}"
        case MCid(cid=cid, members=members, inherits=inherits):
            ms = " ".join(m.token for m in members)
            hs = " ".join(h.token for h in inherits)
            return f"{p}Cid {cid.token} [{ms}] [{hs}]"
        case MBytes(data=data):
            return f"{p}Bytes 0x{data.hex()}"
        case MMap(init=init, pair=pair, next=nxt):
            body = "None" if pair is None else \
                f"(Some ({render_mv(pair[0], True)}, {render_mv(pair[1])}))"
            link = "" if nxt is None else f" -> {nxt.token}"
            return f"{p}Map {init.token} {body}{link}"
        case MArr(start=start, length=length):
            return f"{p}Array {start.token} {length}"
        case MTypes(types=types, values=values):
            ts = "; ".join(render_type(t) for t in types)
            vs = "; ".join(render_mv(v) for v in values)
            return f"{p}Types [{ts}] [{vs}]"
        case MSendRe(records=records):
            rs = []
            for r in records:
                rs.append("None" if r is None else
                          "Some [" + "; ".join(render_mv(x, True) for x in r) + "]")
            return f"{p}Send_re [" + "; ".join(rs) + "]"
    raise TypeError(mv)


def render_value(v: Value) -> str:
    from .syntax import render_value as _render

    return _render(v)

