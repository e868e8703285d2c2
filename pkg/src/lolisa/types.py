"""Type annotations: integer widths, label addresses, array indices and types."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union


class Signedness(Enum):
    Signed = "Signed"
    Unsigned = "Unsigned"


class IntSize(Enum):
    I8 = 8
    I16 = 16
    I32 = 32
    I64 = 64
    I128 = 128
    I256 = 256


class ByteSize(Enum):
    B4 = 4
    B8 = 8
    B16 = 16
    B32 = 32


SIGNED = Signedness.Signed
UNSIGNED = Signedness.Unsigned


# Special blocks sit below every user address.
SPECIAL_NAMES = ("init", "send", "send_re", "call", "msg", "address", "block")
USER_BASE = 0x10


@dataclass(frozen=True, order=True)
class LabelAddress:
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < 2**32:
            raise ValueError(f"address out of range: {self.value}")

    @property
    def reserved(self) -> bool:
        return self.value < USER_BASE

    def succ(self) -> LabelAddress:
        return LabelAddress(self.value + 1)

    @property
    def token(self) -> str:
        if self.value < len(SPECIAL_NAMES):
            return "_0x" + SPECIAL_NAMES[self.value]
        return f"_0x{self.value:08x}"

    def __repr__(self) -> str:
        return self.token


def special(name: str) -> LabelAddress:
    return LabelAddress(SPECIAL_NAMES.index(name))


A_INIT = special("init")
A_SEND = special("send")
A_SEND_RE = special("send_re")
A_CALL = special("call")
A_MSG = special("msg")
A_ADDRESS = special("address")
A_BLOCK = special("block")
SPECIAL_ADDRESSES = tuple(special(n) for n in SPECIAL_NAMES)


def parse_token(text: str) -> Optional[LabelAddress]:
    """Inverse of LabelAddress.token; None if text is not an address token."""
    if not text.startswith("_0x"):
        return None
    body = text[3:]
    if body in SPECIAL_NAMES:
        return special(body)
    try:
        return LabelAddress(int(body, 16))
    except ValueError:
        return None


# -- array indices -----------------------------------------------------------


@dataclass(frozen=True)
class ConstId:
    n: int


@dataclass(frozen=True)
class VarId:
    addr: LabelAddress


@dataclass(frozen=True)
class StrId:
    addr: LabelAddress
    mems: tuple[str, ...]


@dataclass(frozen=True)
class MapId:
    addr: LabelAddress
    inner: "ArrayIndex"


@dataclass(frozen=True)
class ArrayId:
    addr: LabelAddress
    inner: "ArrayIndex"


ArrayIndex = Union[ConstId, VarId, StrId, MapId, ArrayId]


def is_map_array_index(index: ArrayIndex) -> bool:
    """The mapping-safe index universe: no MapId anywhere."""
    match index:
        case MapId():
            return False
        case ArrayId(inner=inner):
            return is_map_array_index(inner)
        case _:
            return True


# -- types -------------------------------------------------------------------


class LolisaType:
    __slots__ = ()

    def __str__(self) -> str:
        return render_type(self)


@dataclass(frozen=True, repr=False)
class TUndef(LolisaType):
    pass


@dataclass(frozen=True, repr=False)
class TInt(LolisaType):
    sign: Signedness
    size: IntSize

    @property
    def bounds(self) -> tuple[int, int]:
        bits = self.size.value
        if self.sign is SIGNED:
            return -(2 ** (bits - 1)), 2 ** (bits - 1) - 1
        return 0, 2**bits - 1

    def fits(self, n: int) -> bool:
        lo, hi = self.bounds
        return lo <= n <= hi


@dataclass(frozen=True, repr=False)
class TBool(LolisaType):
    pass


@dataclass(frozen=True, repr=False)
class TString(LolisaType):
    pass


@dataclass(frozen=True, repr=False)
class TFloat(LolisaType):
    pass


@dataclass(frozen=True, repr=False)
class TBytes(LolisaType):
    size: ByteSize


@dataclass(frozen=True, repr=False)
class TStt(LolisaType):
    pass


@dataclass(frozen=True, repr=False)
class TModi(LolisaType):
    pass


@dataclass(frozen=True, repr=False)
class TStruct(LolisaType):
    tag: LabelAddress


@dataclass(frozen=True, repr=False)
class TVid(LolisaType):
    addr: Optional[LabelAddress]


@dataclass(frozen=True, repr=False)
class TPid(LolisaType):
    addr: Optional[LabelAddress]


@dataclass(frozen=True, repr=False)
class TFid(LolisaType):
    addr: Optional[LabelAddress]


@dataclass(frozen=True, repr=False)
class TCid(LolisaType):
    addr: Optional[LabelAddress]


@dataclass(frozen=True, repr=False)
class TArray(LolisaType):
    index: ArrayIndex
    elem: LolisaType


@dataclass(frozen=True, repr=False)
class TMap(LolisaType):
    key: "MapType"
    value: LolisaType


for _cls in (TUndef, TInt, TBool, TString, TFloat, TBytes, TStt, TModi, TStruct,
             TVid, TPid, TFid, TCid, TArray, TMap):
    _cls.__repr__ = LolisaType.__str__  # type: ignore[method-assign]

TUNDEF = TUndef()
TBOOL = TBool()
TSTRING = TString()
TFLOAT = TFloat()
TSTT = TStt()
TMODI = TModi()
TINT = TInt(SIGNED, IntSize.I64)
TUINT = TInt(UNSIGNED, IntSize.I64)
TADDRESS = TStruct(A_ADDRESS)


class MapTypeError(ValueError):
    pass


@dataclass(frozen=True)
class MapType:
    """A mapping key type: a LolisaType with no mapping, statement or
    modifier constructor and only mapping-safe array indices."""

    inner: LolisaType

    def __post_init__(self) -> None:
        _check_map_type(self.inner)

    def embed(self) -> LolisaType:
        return self.inner

    def __str__(self) -> str:
        return render_map_type(self)

    __repr__ = __str__


def _check_map_type(t: LolisaType) -> None:
    match t:
        case TMap() | TStt() | TModi():
            raise MapTypeError(f"{render_type(t)} cannot be a mapping key type")
        case TArray(index=index, elem=elem):
            if not is_map_array_index(index):
                raise MapTypeError("mapping key arrays cannot be indexed by a mapping")
            _check_map_type(elem)


# Dynamic arrays are mappings keyed by signed 64-bit integers.
DYNAMIC_ARRAY_KEY = MapType(TINT)


def dynamic_array(elem: LolisaType) -> TMap:
    return TMap(DYNAMIC_ARRAY_KEY, elem)


def is_normal_form(t: LolisaType) -> bool:
    return not isinstance(t, (TArray, TMap))


def final_type(t: LolisaType) -> LolisaType:
    while True:
        match t:
            case TArray(elem=elem):
                t = elem
            case TMap(value=value):
                t = value
            case _:
                return t


def well_formed_type(sigma, struct_ctx, theta, t: LolisaType, env=None) -> bool:
    """Normal forms are always well formed; arrays need a positive size and a
    well-formed, defined element type; mappings need both sides well formed.

    ``struct_ctx`` and ``theta`` (assumed struct tags) are accepted so callers
    can thread them, but normal forms need no lookup so enlarging ``theta``
    can never invalidate a type.
    """
    match t:
        case TArray(index=index, elem=elem):
            if elem == TUNDEF or not well_formed_type(sigma, struct_ctx, theta, elem, env):
                return False
            size = _index_size(sigma, env, index)
            return size is not None and size > 0
        case TMap(key=key, value=value):
            return well_formed_type(sigma, struct_ctx, theta, key.embed(), env) and \
                well_formed_type(sigma, struct_ctx, theta, value, env)
        case _:
            return True


def _index_size(sigma, env, index: ArrayIndex) -> Optional[int]:
    if isinstance(index, ConstId):
        return index.n
    if sigma is None:
        return 1  # size unknown until run time; assume positive
    result = eval_array_index(sigma, env, index)
    return result.value if result.is_some else None


def eval_array_index(sigma, env, index: ArrayIndex):
    """Resolve an index to a natural number, reading memory for non-constants."""
    from .value_eval import array_index_value

    return array_index_value(sigma, env, index)


# -- rendering ---------------------------------------------------------------

Namer = Callable[[LabelAddress], str]


def _tok(a: LabelAddress) -> str:
    return a.token


def render_opt(a: Optional[LabelAddress], name: Namer = _tok) -> str:
    return "None" if a is None else f"(Some {name(a)})"


def render_index(index: ArrayIndex, name: Namer = _tok, prefix: str = "") -> str:
    match index:
        case ConstId(n=n):
            return f"({prefix}Aconst_id {n})"
        case VarId(addr=a):
            return f"({prefix}Avar_id {name(a)})"
        case StrId(addr=a, mems=mems):
            return f"({prefix}Astr_id {name(a)} {render_path(mems)})"
        case MapId(addr=a, inner=inner):
            return f"({prefix}Amap_id {name(a)} {render_index(inner, name, prefix)})"
        case ArrayId(addr=a, inner=inner):
            return f"({prefix}Aarray_id {name(a)} {render_index(inner, name, prefix)})"
    raise TypeError(index)


def render_path(mems: tuple[str, ...]) -> str:
    return "(" + " ~> ".join(mems) + ")"


def _int_name(t: TInt, letter: str) -> str:
    if t.size is IntSize.I64:
        return f"{letter}int" if t.sign is SIGNED else f"{letter}uint"
    return f"({letter}int {t.sign.value} {t.size.name})"


def render_type(t: LolisaType, name: Namer = _tok, letter: str = "T") -> str:
    match t:
        case TUndef():
            return f"{letter}undef"
        case TInt():
            return _int_name(t, letter)
        case TBool():
            return f"{letter}bool"
        case TString():
            return f"{letter}string"
        case TFloat():
            return f"{letter}float"
        case TBytes(size=size):
            return f"({letter}bytes {size.name})"
        case TStt():
            return "Tstt"
        case TModi():
            return "Tmodi"
        case TStruct(tag=tag):
            if tag == A_ADDRESS:
                return f"{letter}address"
            return f"({letter}struct {name(tag)})"
        case TVid(addr=a):
            return f"({letter}vid {render_opt(a, name)})"
        case TPid(addr=a):
            return f"({letter}pid {render_opt(a, name)})"
        case TFid(addr=a):
            return f"({letter}fid {render_opt(a, name)})"
        case TCid(addr=a):
            return f"({letter}cid {render_opt(a, name)})"
        case TArray(index=index, elem=elem):
            prefix = "i" if letter == "I" else ""
            return f"({letter}array {render_index(index, name, prefix)} {render_type(elem, name, letter)})"
        case TMap(key=key, value=value):
            return f"(Tmap {render_map_type(key, name)} {render_type(value, name)})"
    raise TypeError(t)


def render_map_type(m: MapType, name: Namer = _tok) -> str:
    return render_type(m.inner, name, "I")
