"""The formal memory space: label-addressed blocks with access metadata."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from .outcome import Fault, outcome
from .types import (
    SPECIAL_ADDRESSES, SPECIAL_NAMES, TUNDEF, USER_BASE, LabelAddress, LolisaType,
    TArray, TMap, TStruct, TUndef, eval_array_index,
)
from .values import (
    MArr, MemoryValue, MInt, MMap, MStr, MStrType, MTypes, MUndef, corresponds, initial_scalar,
    render_mv,
)


class Access(Enum):
    public = "public"
    protected = "protected"
    private = "private"


class Alloc(Enum):
    occupy = "occupy"
    unoccupy = "unoccupy"


@dataclass(frozen=True)
class BlockInfo:
    alloc: Alloc
    access: Access
    ty: LolisaType


@dataclass(frozen=True)
class Block:
    value: MemoryValue
    info: BlockInfo
    owner: Optional[LabelAddress] = None
    level: int = 2

    @property
    def occupied(self) -> bool:
        return self.info.alloc is Alloc.occupy


@dataclass(frozen=True)
class Scopes:
    """Static nesting facts used by access checks."""

    owner_of: Mapping[LabelAddress, LabelAddress] = field(default_factory=dict)
    inherits: Mapping[LabelAddress, tuple[LabelAddress, ...]] = field(default_factory=dict)

    def contract_of(self, scope: Optional[LabelAddress]) -> Optional[LabelAddress]:
        if scope is None:
            return None
        return self.owner_of.get(scope, scope)

    def ancestors(self, contract: Optional[LabelAddress]) -> list[LabelAddress]:
        out: list[LabelAddress] = []
        todo = list(self.inherits.get(contract, ())) if contract is not None else []
        while todo:
            c = todo.pop(0)
            if c not in out:
                out.append(c)
                todo.extend(self.inherits.get(c, ()))
        return out


class MemoryState:
    """Persistent memory: every update returns a new state."""

    __slots__ = ("_blocks", "throw_flag", "next_free", "scopes")

    def __init__(self, blocks: Mapping[LabelAddress, Block], throw_flag: bool = False,
                 next_free: int = USER_BASE, scopes: Optional[Scopes] = None) -> None:
        self._blocks = MappingProxyType(dict(blocks))
        self.throw_flag = throw_flag
        self.next_free = next_free
        self.scopes = scopes or Scopes()

    @classmethod
    def empty(cls) -> MemoryState:
        blocks = {a: Block(MUndef(), BlockInfo(Alloc.unoccupy, Access.public, TUNDEF))
                  for a in SPECIAL_ADDRESSES}
        return cls(blocks)

    def get(self, addr: LabelAddress) -> Optional[Block]:
        return self._blocks.get(addr)

    def __contains__(self, addr: LabelAddress) -> bool:
        return addr in self._blocks

    def addresses(self) -> list[LabelAddress]:
        return sorted(self._blocks)

    def with_block(self, addr: LabelAddress, block: Block) -> MemoryState:
        blocks = dict(self._blocks)
        blocks[addr] = block
        next_free = max(self.next_free, addr.value + 1)
        return MemoryState(blocks, self.throw_flag, next_free, self.scopes)

    def with_scopes(self, scopes: Scopes) -> MemoryState:
        return MemoryState(self._blocks, self.throw_flag, self.next_free, scopes)

    def fresh(self, count: int) -> tuple[MemoryState, list[LabelAddress]]:
        """Reserve ``count`` consecutive unused addresses."""
        start = self.next_free
        addrs = [LabelAddress(start + i) for i in range(count)]
        return MemoryState(self._blocks, self.throw_flag, start + count, self.scopes), addrs

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MemoryState):
            return NotImplemented
        return dict(self._blocks) == dict(other._blocks) and self.throw_flag == other.throw_flag

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._blocks.items())))

    def __repr__(self) -> str:
        return f"MemoryState({len(self._blocks)} blocks)"


# -- access ------------------------------------------------------------------


def access_permitted(sigma: MemoryState, env, block: Block) -> bool:
    """Public: anyone.  Private: the owning scope (or functions of the owning
    contract).  Protected: additionally sub-contracts of the owner."""
    if block.info.access is Access.public or block.owner is None:
        return True
    current = getattr(env, "dom_current", None)
    contract = sigma.scopes.contract_of(current)
    if block.owner == current or block.owner == contract:
        return True
    if block.info.access is Access.protected:
        return block.owner in sigma.scopes.ancestors(contract)
    return False


# -- raw operations (raise Fault) ---------------------------------------------


def _block(sigma: MemoryState, addr: LabelAddress) -> Block:
    block = sigma.get(addr)
    if block is None:
        raise Fault("unallocated", f"no block at {addr.token}")
    return block


def _read_chck(sigma: MemoryState, env, addr: LabelAddress,
               ty: Optional[LolisaType] = None) -> MemoryValue:
    block = _block(sigma, addr)
    if not block.occupied:
        raise Fault("unoccupied", f"block {addr.token} holds no value")
    if not access_permitted(sigma, env, block):
        raise Fault("access", f"{block.info.access.value} block {addr.token} is not visible here")
    expected = block.info.ty if ty is None else ty
    if not corresponds(expected, block.value):
        raise Fault("type-mismatch", f"block {addr.token} does not hold a {expected}")
    return block.value


def _read_dir(sigma: MemoryState, addr: LabelAddress) -> MemoryValue:
    return _block(sigma, addr).value


def write_dir(sigma: MemoryState, addr: LabelAddress, value: MemoryValue) -> MemoryState:
    """Unchecked write; the block becomes occupied.  Absent blocks are created."""
    block = sigma.get(addr)
    if block is None:
        block = Block(value, BlockInfo(Alloc.occupy, Access.public, TUNDEF))
    return sigma.with_block(addr, Block(value, replace(block.info, alloc=Alloc.occupy),
                                        block.owner, block.level))


def write_block(sigma: MemoryState, addr: LabelAddress, block: Block) -> MemoryState:
    return sigma.with_block(addr, block)


def _write_check(sigma: MemoryState, env, addr: LabelAddress, value: MemoryValue) -> MemoryState:
    block = _block(sigma, addr)
    if addr.reserved:
        raise Fault("access", f"special block {addr.token} is read-only for programs")
    if not access_permitted(sigma, env, block):
        raise Fault("access", f"{block.info.access.value} block {addr.token} is not writable here")
    if not corresponds(block.info.ty, value):
        raise Fault("type-mismatch", f"cannot store {render_mv(value)} in a {block.info.ty} block")
    if isinstance(value, MInt) and value.n is not None and not value.ty.fits(value.n):
        raise Fault("overflow", f"{value.n} does not fit {value.ty}")
    return write_dir(sigma, addr, value)


def _address_offset(sigma: MemoryState, op: str, offset: int,
                    base: LabelAddress) -> LabelAddress:
    desc = _read_dir(sigma, base)
    if not isinstance(desc, MArr):
        raise Fault("not-array", f"{base.token} is not an array")
    if op == "+":
        pos = offset
    elif op == "-":
        pos = -offset
    else:
        raise Fault("bad-offset-op", op)
    if not 0 <= pos < desc.length:
        raise Fault("out-of-range", f"index {pos} outside array {base.token} of length {desc.length}")
    return LabelAddress(desc.start.value + pos)


def make_initial(sigma: MemoryState, env, ty: LolisaType, access: Access,
                 owner: Optional[LabelAddress], level: int,
                 head: Optional[LabelAddress] = None) -> tuple[MemoryState, MemoryValue]:
    """Initial payload for ``ty``; arrays allocate their element blocks."""
    scalar = initial_scalar(ty)
    if scalar is not None:
        return sigma, scalar
    match ty:
        case TArray(index=index, elem=elem):
            size = eval_array_index(sigma, env, index)
            if size.is_error:
                raise Fault(size.tag, size.detail)
            n = size.value
            if n <= 0:
                raise Fault("array-size", f"array size must be positive, got {n}")
            sigma, addrs = sigma.fresh(n)
            for a in addrs:
                sigma, mv = make_initial(sigma, env, elem, access, owner, level)
                sigma = write_block(sigma, a, Block(mv, BlockInfo(Alloc.occupy, access, elem),
                                                    owner, level))
            return sigma, MArr(addrs[0], n)
        case TMap():
            if head is None:
                sigma, (head,) = sigma.fresh(1)
                empty = MMap(head)
                sigma = write_block(sigma, head, Block(empty, BlockInfo(Alloc.occupy, access, ty),
                                                       owner, level))
            return sigma, MMap(head)
        case TStruct(tag=tag):
            layout = sigma.get(tag)
            if layout is None or not isinstance(layout.value, MStrType):
                raise Fault("unknown-struct", f"no struct layout at {tag.token}")
            members = []
            for mty, _name in layout.value.mems:
                sigma, mv = make_initial(sigma, env, mty, access, owner, level)
                members.append(mv)
            return sigma, MStr(tag, tuple(members))
    raise Fault("no-initial-value", f"type {ty} has no initial value")


def _init_var(sigma: MemoryState, env, fenv, oacc: Optional[Access], ty: LolisaType,
              addr: LabelAddress) -> MemoryState:
    block = _block(sigma, addr)
    owner = getattr(env, "dom_current", None)
    level = getattr(env, "dom_level", 2)
    if block.occupied and block.owner != owner and block.level >= 1:
        raise Fault("collision", f"{addr.token} is already bound in another scope")
    access = oacc or Access.public
    sigma, mv = make_initial(sigma, env, ty, access, owner, level, head=addr)
    return write_block(sigma, addr, Block(mv, BlockInfo(Alloc.occupy, access, ty), owner, level))


def _init_re(sigma: MemoryState, ret: LabelAddress, types: Iterable[LolisaType]) -> MemoryState:
    types = tuple(types)
    values = tuple(initial_scalar(t) or MUndef() for t in types)
    return write_dir(sigma, ret, MTypes(types, values))


read_chck = outcome(_read_chck)
read_dir = outcome(_read_dir)
write_check = outcome(_write_check)
address_offset = outcome(_address_offset)
init_var = outcome(_init_var)
init_re = outcome(_init_re)


def allocate(sigma: MemoryState, addr: LabelAddress, ty: LolisaType,
             access: Access = Access.public, owner: Optional[LabelAddress] = None,
             level: int = 2) -> MemoryState:
    """Reserve an unoccupied block; re-allocating with another type collides."""
    existing = sigma.get(addr)
    if existing is not None:
        if existing.info.ty != ty and not isinstance(ty, TUndef) \
                and not isinstance(existing.info.ty, TUndef):
            raise Fault("collision", f"{addr.token} already exists")
        return sigma
    return write_block(sigma, addr, Block(MUndef(),
                                          BlockInfo(Alloc.unoccupy, access, ty), owner, level))


def init_mem(program, lib=None) -> MemoryState:
    """Allocate every declared identifier of ``lib`` then ``program`` and run
    the library declarations.  The result is the initial snapshot."""
    from .evaluator import initial_memory

    return initial_memory(program, lib)


# -- dump --------------------------------------------------------------------


def _field_name(addr: LabelAddress) -> str:
    if addr.reserved and addr.value < len(SPECIAL_NAMES):
        return "m_" + SPECIAL_NAMES[addr.value]
    return f"m_0x{addr.value:08x}"


def render_block(block: Block) -> str:
    if not block.occupied:
        return "initData"
    owner = "None" if block.owner is None else block.owner.token
    return (f"{render_mv(block.value)} {owner} {block.level} "
            f"{block.info.access.value} {block.info.alloc.value}")


def dump_state(sigma: MemoryState) -> str:
    lines = []
    for addr in SPECIAL_ADDRESSES:
        block = sigma.get(addr)
        lines.append(f"{_field_name(addr)} := {'initData' if block is None else render_block(block)};")
    lines.append(f"m_throw := {str(sigma.throw_flag).lower()};")
    for addr in sigma.addresses():
        if addr.reserved:
            continue
        lines.append(f"{_field_name(addr)} := {render_block(sigma.get(addr))};")
    return "\n".join(lines) + "\n"
