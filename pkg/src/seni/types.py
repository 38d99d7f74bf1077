"""Semantic types."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class SemType:
    """One of int | bool | string | list | record | system | func, plus the null literal type.

    ``nullable`` marks positions that may hold ``null``; a nullable int is a
    different type from int for arithmetic.
    """

    kind: str
    name: Optional[str] = None
    elem: Optional["SemType"] = None
    params: tuple["SemType", ...] = ()
    ret: Optional["SemType"] = None
    nullable: bool = False

    def __str__(self) -> str:
        if self.kind == "list":
            base = f"[{self.elem}]"
        elif self.kind in ("record", "system"):
            base = str(self.name)
        elif self.kind == "func":
            base = " -> ".join(str(t) for t in (*self.params, self.ret))
        else:
            base = self.kind
        return base + ("?" if self.nullable and self.kind != "null" else "")

    def with_null(self, nullable: bool = True) -> "SemType":
        return replace(self, nullable=nullable)

    @property
    def arity(self) -> int:
        return len(self.params)


INT = SemType("int")
BOOL = SemType("bool")
STR = SemType("string")
NULL = SemType("null", nullable=True)


def list_of(elem: SemType) -> SemType:
    return SemType("list", elem=elem)


def record_type(name: str) -> SemType:
    return SemType("record", name=name)


def system_type(name: str) -> SemType:
    return SemType("system", name=name)


def func_type(params: list[SemType], ret: SemType) -> SemType:
    return SemType("func", params=tuple(params), ret=ret)


def same_base(a: SemType, b: SemType) -> bool:
    return a.with_null(False) == b.with_null(False)


def assignable(src: SemType, dst: SemType) -> bool:
    if src.kind == "null":
        return dst.nullable
    if not same_base(src, dst):
        return False
    return dst.nullable or not src.nullable


def comparable(a: SemType, b: SemType) -> bool:
    """Operands of ``=`` / ``/=``: null only against nullable types."""
    if a.kind == "null" or b.kind == "null":
        return a.nullable and b.nullable
    return same_base(a, b)


def join(a: SemType, b: SemType) -> Optional[SemType]:
    """Common type of two ``if`` branches, or None."""
    if a.kind == "null" and b.kind == "null":
        return NULL
    if a.kind == "null":
        return b.with_null()
    if b.kind == "null":
        return a.with_null()
    if same_base(a, b):
        return a.with_null(a.nullable or b.nullable)
    return None
