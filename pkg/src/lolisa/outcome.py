"""Three-way result values: Some, None-like absence, and tagged Error."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Any, Callable, Generic, TypeVar, Union

T = TypeVar("T")


@dataclass(frozen=True)
class Some(Generic[T]):
    value: T

    is_error = False
    is_some = True
    is_none = False


@dataclass(frozen=True)
class Nothing:
    is_error = False
    is_some = False
    is_none = True


NONE = Nothing()


@dataclass(frozen=True)
class Error:
    tag: str
    detail: str = ""

    is_error = True
    is_some = False
    is_none = False

    def __post_init__(self) -> None:
        if not self.tag:
            raise ValueError("Error requires a diagnostic tag")

    def __str__(self) -> str:
        return f"{self.tag}: {self.detail}" if self.detail else self.tag


Outcome = Union[Some[T], Nothing, Error]


class Fault(Exception):
    """Raised internally; converted to an Error outcome at API boundaries."""

    def __init__(self, tag: str, detail: str = "") -> None:
        super().__init__(f"{tag}: {detail}" if detail else tag)
        self.tag = tag
        self.detail = detail

    def to_error(self) -> Error:
        return Error(self.tag, self.detail)


def outcome(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Wrap a raising function so that it returns Some(result) or Error."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return Some(fn(*args, **kwargs))
        except Fault as exc:
            return exc.to_error()

    wrapper.raw = fn  # type: ignore[attr-defined]
    return wrapper


def unwrap(result: Any) -> Any:
    if isinstance(result, Some):
        return result.value
    if isinstance(result, Error):
        raise Fault(result.tag, result.detail)
    raise Fault("absent", "expected a value, found None")
