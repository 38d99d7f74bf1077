"""Syntax tree for Seni programs.

Nodes are frozen dataclasses. Spans never take part in equality, so two
parses of the same text at different offsets compare equal.

Expression nodes come in two flavours: the surface forms the parser
produces (``Name``, ``At``, ``Field``, ``Call``...) and the resolved forms
the type checker rewrites them into (``Local``, ``StateRead``, ``PropRef``,
``FuncCall``...). The interpreter only understands resolved forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from seni.errors import Span


def _span():
    return field(default=None, compare=False, repr=False)


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class TypeExpr:
    """``int``, ``bool``, ``string``, a record/system name, or ``[T]``."""

    name: Optional[str] = None
    elem: Optional["TypeExpr"] = None
    span: Optional[Span] = _span()

    def __str__(self) -> str:
        return f"[{self.elem}]" if self.elem is not None else str(self.name)


# -- expressions (surface) ---------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class StrLit:
    value: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NullLit:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Name:
    ident: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class At:
    """The ``@`` reference to the state-variable set."""

    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Field:
    target: "Expr"
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Index:
    target: "Expr"
    index: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cast:
    to: TypeExpr
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "!" | "-" | "always"
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / mod = /= < <= > >= & | =>
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordLit:
    fields: tuple[tuple[str, "Expr"], ...]
    type_name: Optional[str] = None  # filled by the type checker
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class InstanceCtor:
    """``p::Philosopher`` - a template for creating a sub-system instance."""

    label: str
    system: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Fold:
    """``fold(&, xs.P)`` / ``fold(|, xs.P)`` over an instance collection."""

    op: str
    collection: str
    prop: str
    span: Optional[Span] = _span()


# -- expressions (resolved) --------------------------------------------------

@dataclass(frozen=True)
class Local:
    ident: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class StateRead:
    path: tuple[str, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PropRef:
    ident: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FuncCall:
    func: str
    args: tuple["Expr", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Replicate:
    count: "Expr"
    template: InstanceCtor
    span: Optional[Span] = _span()


Expr = Union[IntLit, BoolLit, StrLit, NullLit, Name, At, Field, Index, Call, Cast, Unary,
             Binary, If, RecordLit, InstanceCtor, Fold, Local, StateRead, PropRef, FuncCall,
             Replicate]


# -- specification expressions ----------------------------------------------

@dataclass(frozen=True)
class SpecAtom:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SpecSeq:
    first: "SpecExpr"
    second: "SpecExpr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SpecChoice:
    left: "SpecExpr"
    right: "SpecExpr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SpecAlways:
    body: "SpecExpr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SpecPar:
    left: "SpecExpr"
    right: "SpecExpr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SpecFold:
    """``fold(||, xs)``: parallel composition of every instance's Main."""

    collection: str
    span: Optional[Span] = _span()


SpecExpr = Union[SpecAtom, SpecSeq, SpecChoice, SpecAlways, SpecPar, SpecFold]


# -- declarations ------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    """``@.a.b: expr`` (state write) or ``name: expr`` (instance/local binding)."""

    target: tuple[str, ...]
    value: Expr
    to_state: bool = True
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordField:
    name: str
    type: TypeExpr
    default: Optional[Expr] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordDecl:
    name: str
    fields: tuple[RecordField, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class StateVarDecl:
    name: str
    type: TypeExpr
    default: Optional[Expr] = None
    span: Optional[Span] = _span()

    @property
    def nullable(self) -> bool:
        return isinstance(self.default, NullLit)


@dataclass(frozen=True)
class InstanceVarDecl:
    name: str
    type: TypeExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ActionDecl:
    name: str
    body: tuple[Assign, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Param:
    name: str
    type: TypeExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class InitDecl:
    params: tuple[Param, ...]
    body: tuple[Assign, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SpecDecl:
    name: str
    body: SpecExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PropDecl:
    name: str
    body: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PropertyDecl:
    name: str
    body: Expr
    static: bool = True
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FuncDecl:
    """``func f(a, b) :: int -> string -> int { x: e; result }``.

    ``params`` is empty when names are omitted; the checker then binds the
    body's free names positionally in order of first appearance.
    """

    name: str
    params: tuple[str, ...]
    signature: tuple[TypeExpr, ...]
    body: tuple[Assign, ...]
    result: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SystemAst:
    name: str
    refines: Optional[str] = None
    records: tuple[RecordDecl, ...] = ()
    state_vars: tuple[StateVarDecl, ...] = ()
    instance_vars: tuple[InstanceVarDecl, ...] = ()
    actions: tuple[ActionDecl, ...] = ()
    init: Optional[InitDecl] = None
    specs: tuple[SpecDecl, ...] = ()
    props: tuple[PropDecl, ...] = ()
    static_props: tuple[PropertyDecl, ...] = ()
    funcs: tuple[FuncDecl, ...] = ()
    span: Optional[Span] = _span()

    @property
    def executable(self) -> bool:
        return any(s.name == "Main" for s in self.specs)


@dataclass(frozen=True)
class ImportDecl:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ProgramAst:
    imports: tuple[ImportDecl, ...] = ()
    systems: tuple[SystemAst, ...] = ()
    file: Optional[str] = field(default=None, compare=False)

    @property
    def import_names(self) -> list[str]:
        return [i.name for i in self.imports]

    def system(self, name: str) -> SystemAst:
        for s in self.systems:
            if s.name == name:
                return s
        raise KeyError(name)
