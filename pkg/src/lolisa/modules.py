"""Contract and function modules: subtyping and member-access resolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .outcome import Error, Some
from .syntax import (
    Contract, Econ, Efun, Epar, Evar, Fun, Funs, Modifier, Statement, Var, flatten, walk,
)


@dataclass
class ModuleInfo:
    kind: str  # "contract" or "function"
    members: dict[str, object] = field(default_factory=dict)
    inherits: tuple[str, ...] = ()
    owner: Optional[str] = None


@dataclass
class ModuleContext:
    modules: dict[str, ModuleInfo] = field(default_factory=dict)
    imports: list[str] = field(default_factory=list)

    def add_contract(self, name: str, inherits: Iterable[str] = (),
                     members: Optional[dict[str, object]] = None) -> None:
        self.modules[name] = ModuleInfo("contract", dict(members or {}), tuple(inherits))

    def add_function(self, name: str, owner: str,
                     members: Optional[dict[str, object]] = None, binding: object = None) -> None:
        if self.modules.get(owner, ModuleInfo("function")).kind != "contract":
            raise ValueError(f"function {name} needs an owning contract, got {owner!r}")
        self.modules[name] = ModuleInfo("function", dict(members or {}), (), owner)
        self.modules[owner].members.setdefault(name, binding if binding is not None else name)

    @property
    def contracts(self) -> dict[str, ModuleInfo]:
        return {k: m for k, m in self.modules.items() if m.kind == "contract"}

    @property
    def functions(self) -> dict[str, str]:
        return {k: m.owner for k, m in self.modules.items() if m.kind == "function"}

    def ancestors(self, contract: str) -> list[str]:
        """Proper ancestors, breadth first in declared order."""
        out: list[str] = []
        todo = list(self.modules[contract].inherits) if contract in self.modules else []
        while todo:
            c = todo.pop(0)
            if c not in out and c in self.modules:
                out.append(c)
                todo.extend(self.modules[c].inherits)
        return out


def subtype(ctx: ModuleContext, a: str, b: str) -> bool:
    """a <: b: reflexive, transitive, along inheritance and function-in-contract edges."""
    if a not in ctx.modules or b not in ctx.modules:
        return False
    seen, todo = set(), [a]
    while todo:
        m = todo.pop()
        if m == b:
            return True
        if m in seen:
            continue
        seen.add(m)
        info = ctx.modules[m]
        todo.extend(info.inherits)
        if info.owner is not None:
            todo.append(info.owner)
    return False


class Qualifier(Enum):
    none = "none"
    this = "this"
    explicit = "explicit"


@dataclass(frozen=True)
class Qual:
    kind: Qualifier = Qualifier.none
    module: Optional[str] = None


NONE_QUAL = Qual()
THIS = Qual(Qualifier.this)


def explicit(module: str) -> Qual:
    return Qual(Qualifier.explicit, module)


def resolve_call(ctx: ModuleContext, current: str, ident: str, qual: Qual = NONE_QUAL):
    """Resolve ``ident`` seen from module ``current``.

    Unqualified names prefer the current module, then the most recently
    imported module that has them.  ``this`` searches the owning contract and
    then its ancestors.  An explicit module must exist and declare the name.
    """
    if current not in ctx.modules:
        return Error("invalid-module", f"{current} is not a declared module")
    match qual.kind:
        case Qualifier.none:
            here = ctx.modules[current].members
            if ident in here:
                return Some(here[ident])
            for m in reversed(ctx.imports):
                info = ctx.modules.get(m)
                if info is not None and ident in info.members:
                    return Some(info.members[ident])
            return Error("unresolved", f"{ident} is not visible from {current}")
        case Qualifier.explicit:
            info = ctx.modules.get(qual.module)
            if info is None:
                return Error("invalid-module", f"{qual.module} is not a declared module")
            if ident in info.members:
                return Some(info.members[ident])
            return Error("unresolved", f"{qual.module} has no member {ident}")
        case Qualifier.this:
            info = ctx.modules[current]
            if info.kind != "function":
                return Error("this-outside-function", "this is only meaningful inside a function")
            for c in [info.owner, *ctx.ancestors(info.owner)]:
                if ident in ctx.modules[c].members:
                    return Some(ctx.modules[c].members[ident])
            return Error("unresolved", f"{ident} is not a member of {info.owner}")
    return Error("invalid-module", f"unknown qualifier {qual!r}")


def inherit_check(ctx_inherits: Iterable, declared: Iterable) -> bool:
    """Declared parents agree with the module context, ignoring order."""
    return set(ctx_inherits) == set(declared)


def from_program(program: Statement, name=lambda a: a.token) -> ModuleContext:
    """Module context of a parsed program; identifiers are rendered with ``name``."""
    ctx = ModuleContext()
    for c in walk(program):
        if not isinstance(c, Contract) or not isinstance(c.id, Econ) or c.id.addr is None:
            continue
        cname = name(c.id.addr)
        ctx.add_contract(cname, [name(p) for p in c.inherits])
        for s in flatten(c.body):
            if isinstance(s, Var) and isinstance(s.decl, Evar) and s.decl.addr is not None:
                ctx.modules[cname].members.setdefault(name(s.decl.addr), s.decl.addr)
        for s in flatten(c.body):
            if isinstance(s, (Fun, Funs, Modifier)) and isinstance(s.id, Efun) \
                    and s.id.addr is not None:
                locals_ = {name(p.addr): p.addr for p in s.pars
                           if isinstance(p, Epar) and p.addr is not None}
                for t in walk(s.body):
                    if isinstance(t, Var) and isinstance(t.decl, Evar) and t.decl.addr is not None:
                        locals_[name(t.decl.addr)] = t.decl.addr
                ctx.add_function(name(s.id.addr), cname, locals_, s.id.addr)
    ctx.imports = list(ctx.contracts)
    return ctx
