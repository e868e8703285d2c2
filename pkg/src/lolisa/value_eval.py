"""Value evaluation: array indices, mapping keys, mapping buckets and member paths.

Nothing here changes memory except the explicit mapping-store helpers used by
assignment.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .memory import (
    Alloc, Block, BlockInfo, MemoryState, _address_offset, _read_chck, _read_dir,
    access_permitted, make_initial, write_block, write_dir,
)
from .outcome import Fault, outcome
from .types import (
    ArrayId, ArrayIndex, ConstId, LabelAddress, LolisaType, MapId, StrId, TArray, TInt, TMap,
    TStruct, VarId, final_type,
)
from .values import (
    FArray, FMap, FStruct, Locator, MapKey, MArr, MArrayId, MConstId, MemoryValue, MInt, MMap,
    MMapId, MPtr, MStr, MStrId, MStrType, MVarId, RefKind, Value, VArray, VField, VMap, VStruct,
    corresponds, is_normal_value, value_to_memory,
)


# -- struct layouts and member paths ------------------------------------------


def struct_layout(sigma: MemoryState, tag: LabelAddress) -> MStrType:
    block = sigma.get(tag)
    if block is None or not isinstance(block.value, MStrType):
        raise Fault("unknown-struct", f"no struct layout at {tag.token}")
    return block.value


def member(sigma: MemoryState, mv: MemoryValue, name: str) -> tuple[int, LolisaType, MemoryValue]:
    if not isinstance(mv, MStr):
        raise Fault("not-struct", f"cannot select {name} from a non-struct value")
    found = struct_layout(sigma, mv.tag).member(name)
    if found is None:
        raise Fault("unknown-member", f"struct {mv.tag.token} has no member {name}")
    i, ty = found
    return i, ty, mv.members[i]


def _mems_find(sigma: MemoryState, path: tuple[str, ...], a_init: LabelAddress,
               value: MemoryValue) -> tuple[Locator, MemoryValue]:
    """Walk ``path`` from the struct ``value`` stored at ``a_init``.

    Returns the locator of the penultimate member (the receiver of a function
    member) and the final member's value.
    """
    if not path:
        raise Fault("bad-path", "empty member path")
    cur = value
    for k, name in enumerate(path):
        _, ty, nxt = member(sigma, cur, name)
        if isinstance(nxt, MPtr) and nxt.ref.kind is RefKind.Vfid and k < len(path) - 1:
            raise Fault("bad-path", f"member {name} is a function in the middle of a path")
        cur = nxt
    return Locator(a_init, path[:-1]), cur


def locate(sigma: MemoryState, loc: Locator) -> MemoryValue:
    """The value a locator designates."""
    cur = _read_dir(sigma, loc.addr)
    for name in loc.path:
        cur = member(sigma, cur, name)[2]
    return cur


def update_member(sigma: MemoryState, value: MemoryValue, path: tuple[str, ...],
                  new: MemoryValue) -> MemoryValue:
    if not path:
        return new
    i, _, old = member(sigma, value, path[0])
    members = list(value.members)
    members[i] = update_member(sigma, old, path[1:], new)
    return replace(value, members=tuple(members))


# -- array indices ------------------------------------------------------------


def _natural(mv: MemoryValue, what: str) -> int:
    if not isinstance(mv, MInt):
        raise Fault("not-integer", f"{what} is not an integer")
    if mv.n is None:
        raise Fault("uninitialized", f"{what} holds no value")
    if mv.n < 0:
        raise Fault("negative-index", f"{what} is negative ({mv.n})")
    return mv.n


def _array_index_value(sigma: MemoryState, env, index: ArrayIndex) -> int:
    match index:
        case ConstId(n=n):
            if n < 0:
                raise Fault("negative-index", f"index {n} is negative")
            return n
        case VarId(addr=a):
            return _natural(_read_chck(sigma, env, a), f"index variable {a.token}")
        case StrId(addr=a, mems=mems):
            _, mv = _mems_find(sigma, mems, a, _read_chck(sigma, env, a))
            return _natural(mv, f"index member of {a.token}")
        case MapId(addr=a, inner=inner):
            head = _map_head(sigma, env, a)
            key_ty = _map_type(sigma, a).key.embed()
            key = coerce_key(MInt(_array_index_value(sigma, env, inner), _int_ty(key_ty)), key_ty)
            return _natural(_map_lookup(sigma, head, key), f"mapping {a.token}")
        case ArrayId(addr=a, inner=inner):
            _read_chck(sigma, env, a)
            elem = _address_offset(sigma, "+", _array_index_value(sigma, env, inner), a)
            return _natural(_read_chck(sigma, env, elem), f"array {a.token}")
    raise Fault("bad-index", repr(index))


def _int_ty(t: LolisaType) -> TInt:
    if not isinstance(t, TInt):
        raise Fault("key-type", f"an integer index cannot key a {t} mapping")
    return t


array_index_value = outcome(_array_index_value)


# -- mapping buckets -------------------------------------------------------------
#
# A mapping handle is an MMap whose ``init`` names the chain head.  The head
# block is a sentinel (pair None) whose ``next`` links the first bucket; every
# bucket is a fresh block carrying one (key, value) pair.


def _map_type(sigma: MemoryState, addr: LabelAddress) -> TMap:
    block = sigma.get(addr)
    if block is None or not isinstance(block.info.ty, TMap):
        raise Fault("not-mapping", f"{addr.token} is not a mapping")
    return block.info.ty


def _map_head(sigma: MemoryState, env, addr: LabelAddress) -> LabelAddress:
    handle = _read_chck(sigma, env, addr)
    if not isinstance(handle, MMap):
        raise Fault("not-mapping", f"{addr.token} does not hold a mapping")
    return handle.init


def coerce_key(mv: MemoryValue, key_ty: LolisaType) -> MemoryValue:
    """Integer keys are compared at the mapping's key width."""
    if isinstance(mv, MInt) and isinstance(key_ty, TInt) and mv.ty != key_ty:
        if mv.n is not None and not key_ty.fits(mv.n):
            raise Fault("key-type", f"key {mv.n} does not fit {key_ty}")
        return MInt(mv.n, key_ty)
    if not corresponds(final_type(key_ty), mv) and not isinstance(key_ty, TArray):
        raise Fault("key-type", f"key does not match {key_ty}")
    return mv


def buckets(sigma: MemoryState, head: LabelAddress):
    """(address, bucket) pairs along the chain, in chain order."""
    sentinel = _read_dir(sigma, head)
    if not isinstance(sentinel, MMap):
        raise Fault("not-mapping", f"{head.token} is not a mapping head")
    nxt = sentinel.next
    while nxt is not None:
        bucket = _read_dir(sigma, nxt)
        if not isinstance(bucket, MMap):
            raise Fault("not-mapping", f"broken bucket chain at {nxt.token}")
        yield nxt, bucket
        nxt = bucket.next


def _map_addr(sigma: MemoryState, head: LabelAddress, key: MemoryValue) -> LabelAddress:
    for addr, bucket in buckets(sigma, head):
        if bucket.pair is not None and bucket.pair[0] == key:
            return addr
    raise Fault("missing-key", f"key not present in mapping {head.token}")


def _map_get(mv: MemoryValue) -> MemoryValue:
    if not isinstance(mv, MMap) or mv.pair is None:
        raise Fault("not-bucket", "not a mapping bucket")
    return mv.pair[1]


def _map_lookup(sigma: MemoryState, head: LabelAddress, key: MemoryValue) -> MemoryValue:
    return _map_get(_read_dir(sigma, _map_addr(sigma, head, key)))


map_addr = outcome(_map_addr)
map_get = outcome(_map_get)


def map_length(sigma: MemoryState, head: LabelAddress) -> int:
    return sum(1 for _ in buckets(sigma, head))


def map_store(sigma: MemoryState, env, head: LabelAddress, keys: tuple[MemoryValue, ...],
              tys: tuple[LolisaType, ...], value: MemoryValue) -> MemoryState:
    """Insert or overwrite along a key chain, creating inner mappings as needed.

    ``tys[i]`` is the value type stored under ``keys[i]``.
    """
    head_block = sigma.get(head)
    if head_block is None:
        raise Fault("unallocated", f"no mapping head at {head.token}")
    if not access_permitted(sigma, env, head_block):
        raise Fault("access", f"mapping {head.token} is not writable here")
    key, ty = keys[0], tys[0]
    try:
        addr: Optional[LabelAddress] = _map_addr(sigma, head, key)
    except Fault:
        addr = None
    if len(keys) > 1:
        if addr is None:
            sigma, inner = make_initial(sigma, env, ty, head_block.info.access,
                                        head_block.owner, head_block.level)
            sigma = _insert(sigma, head, head_block, key, inner)
        else:
            inner = _map_get(_read_dir(sigma, addr))
        if not isinstance(inner, MMap):
            raise Fault("not-mapping", "next mapping dimension holds no mapping")
        return map_store(sigma, env, inner.init, keys[1:], tys[1:], value)
    if not corresponds(ty, value):
        raise Fault("type-mismatch", f"cannot store this value in a {ty} mapping")
    if isinstance(value, MInt) and value.n is not None and not value.ty.fits(value.n):
        raise Fault("overflow", f"{value.n} does not fit {value.ty}")
    if addr is None:
        return _insert(sigma, head, head_block, key, value)
    bucket = _read_dir(sigma, addr)
    return write_dir(sigma, addr, replace(bucket, pair=(key, value)))


def _insert(sigma: MemoryState, head: LabelAddress, head_block: Block, key: MemoryValue,
            value: MemoryValue) -> MemoryState:
    """Append a bucket at the end of the chain so iteration follows insertion order."""
    sigma, (fresh,) = sigma.fresh(1)
    last = head
    for addr, _ in buckets(sigma, head):
        last = addr
    info = BlockInfo(Alloc.occupy, head_block.info.access, head_block.info.ty)
    sigma = write_block(sigma, fresh, Block(MMap(head, (key, value)), info,
                                            head_block.owner, head_block.level))
    tail = _read_dir(sigma, last)
    return write_dir(sigma, last, replace(tail, next=fresh))


# -- keys ----------------------------------------------------------------------


def _key_value(sigma: MemoryState, env, key: MapKey, key_ty: LolisaType) -> MemoryValue:
    match key:
        case MConstId(value=v):
            if not is_normal_value(v):
                raise Fault("key-type", "constant keys must be normal values")
            mv = value_to_memory(v)
        case MVarId(addr=a):
            mv = _read_chck(sigma, env, a)
        case MStrId(addr=a, mems=mems):
            _, mv = _mems_find(sigma, mems, a, _read_chck(sigma, env, a))
        case MArrayId(addr=a, index=i):
            _read_chck(sigma, env, a)
            mv = _read_chck(sigma, env, _address_offset(sigma, "+", _array_index_value(sigma, env, i), a))
        case MMapId(name=a, inner=inner):
            head = _map_head(sigma, env, a)
            inner_ty = _map_type(sigma, a).key.embed()
            mv = _map_lookup(sigma, head, _key_value(sigma, env, inner, inner_ty))
        case _:
            raise Fault("bad-key", repr(key))
    return coerce_key(mv, key_ty)


key_value = outcome(_key_value)


def map_chain(sigma: MemoryState, env, v: VMap) -> tuple[LabelAddress, tuple[MemoryValue, ...],
                                                         tuple[LolisaType, ...]]:
    """Head address, evaluated keys, and stored value type per dimension."""
    head = _map_head(sigma, env, v.name)
    keys, tys = [], []
    cur: Optional[VMap] = v
    while cur is not None:
        keys.append(_key_value(sigma, env, cur.key, cur.key_ty.embed()))
        tys.append(cur.ty)
        cur = cur.snd
    return head, tuple(keys), tuple(tys)


# -- values ----------------------------------------------------------------------


def _eval_map(sigma: MemoryState, env, v: VMap) -> tuple[LabelAddress, MemoryValue]:
    head, keys, tys = map_chain(sigma, env, v)
    for depth, key in enumerate(keys):
        addr = _map_addr(sigma, head, key)
        mv = _map_get(_read_dir(sigma, addr))
        if depth < len(keys) - 1:
            if not isinstance(mv, MMap):
                raise Fault("not-mapping", "next mapping dimension holds no mapping")
            head = mv.init
    if not corresponds(tys[-1], mv):
        raise Fault("type-mismatch", f"mapping value does not match {tys[-1]}")
    return addr, mv


def array_element(sigma: MemoryState, env, v: VArray) -> LabelAddress:
    """Address of the element a (possibly multi-dimensional) Varray designates."""
    desc = _read_chck(sigma, env, v.name)
    if not isinstance(desc, MArr):
        raise Fault("not-array", f"{v.name.token} does not hold an array")
    base = v.name
    cur: Optional[VArray] = v
    while cur is not None:
        offset = _array_index_value(sigma, env, cur.index)
        addr = _address_offset(sigma, "+", offset, base)
        if cur.snd is not None:
            if not isinstance(_read_chck(sigma, env, addr), MArr):
                raise Fault("not-array", "next array dimension holds no array")
            base = addr
        cur = cur.snd
    return addr


def _field_root(sigma: MemoryState, env, head) -> tuple[LabelAddress, MemoryValue]:
    match head:
        case FStruct(inst=inst):
            return inst, _read_chck(sigma, env, inst)
        case FMap(name=name, key=key):
            ty = _map_type(sigma, name)
            return _eval_map(sigma, env, VMap(name, key, ty.key, ty.value))
        case FArray(name=name, index=index):
            block = sigma.get(name)
            elem = block.info.ty.elem if block is not None and isinstance(block.info.ty, TArray) \
                else None
            addr = array_element(sigma, env, VArray(index, elem, name))
            return addr, _read_chck(sigma, env, addr)
    raise Fault("bad-field", repr(head))


def _eval_field(sigma: MemoryState, env, v: VField) -> MemoryValue:
    a_init, root = _field_root(sigma, env, v.head)
    dad, mv = _mems_find(sigma, v.mems, a_init, root)
    if isinstance(mv, MPtr) and mv.ref.kind is RefKind.Vfid:
        return MPtr(mv.ref, dad, v.opars)
    if not corresponds(final_type(v.ty), mv):
        raise Fault("type-mismatch", f"member does not hold a {v.ty}")
    return mv


def _eval_value(sigma: MemoryState, env, v: Value) -> MemoryValue:
    if is_normal_value(v):
        return value_to_memory(v)
    match v:
        case VStruct(tag=tag, inst=inst):
            return _read_chck(sigma, env, inst, TStruct(tag))
        case VArray():
            return _read_chck(sigma, env, array_element(sigma, env, v))
        case VMap():
            return _eval_map(sigma, env, v)[1]
        case VField():
            return _eval_field(sigma, env, v)
    raise Fault("bad-value", repr(v))


eval_value = outcome(_eval_value)
mems_find = outcome(_mems_find)


def is_fun_pointer(mv: MemoryValue) -> bool:
    return isinstance(mv, MPtr) and mv.ref.kind is RefKind.Vfid

