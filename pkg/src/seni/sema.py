"""Import resolution, refinement merging and type checking.

The public pipeline is :func:`load_program` (file on disk) or
:func:`check_source` (in-memory text); both return a :class:`Program` of
checked :class:`SystemDef` values or raise :class:`~seni.errors.Diagnostics`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from seni import ast as A
from seni import types as T
from seni.errors import (
    CyclicImport,
    Diagnostics,
    DuplicateDeclaration,
    IncompatibleRedeclaration,
    MissingImport,
    NonPureMutation,
    SemaError,
    SeniError,
    SeniTypeError,
    Span,
    UnresolvedName,
)
from seni.parser import parse_source


@dataclass(frozen=True)
class StateVarInfo:
    decl: A.StateVarDecl
    origin: str
    type: Optional[T.SemType] = None


@dataclass
class SystemDef:
    """A system after refinement merging; typecheck fills the type tables and
    rewrites every expression into resolved form."""

    name: str
    parent: Optional[str] = None
    records: dict[str, A.RecordDecl] = field(default_factory=dict)
    state_vars: dict[str, StateVarInfo] = field(default_factory=dict)
    instance_vars: dict[str, A.InstanceVarDecl] = field(default_factory=dict)
    actions: dict[str, A.ActionDecl] = field(default_factory=dict)
    init: Optional[A.InitDecl] = None
    specs: dict[str, A.SpecDecl] = field(default_factory=dict)
    props: dict[str, A.PropDecl] = field(default_factory=dict)
    static_props: dict[str, A.PropertyDecl] = field(default_factory=dict)
    funcs: dict[str, A.FuncDecl] = field(default_factory=dict)
    new_actions: frozenset[str] = frozenset()
    record_types: dict[str, dict[str, T.SemType]] = field(default_factory=dict)
    func_sigs: dict[str, T.SemType] = field(default_factory=dict)
    instance_types: dict[str, str] = field(default_factory=dict)

    @property
    def executable(self) -> bool:
        return "Main" in self.specs

    def var_type(self, name: str) -> T.SemType:
        return self.state_vars[name].type

    def path_type(self, path: tuple[str, ...]) -> T.SemType:
        ty = self.state_vars[path[0]].type
        for name in path[1:]:
            ty = self.record_types[ty.name][name]
        return ty

    def ancestors(self, systems: dict[str, "SystemDef"]) -> list[str]:
        out, cur = [], self.parent
        while cur is not None:
            out.append(cur)
            cur = systems[cur].parent
        return out


@dataclass
class Program:
    """Checked systems plus the names defined by the entry file."""

    systems: dict[str, SystemDef]
    entry_systems: list[str]
    file: Optional[str] = None

    def default_entry(self) -> str:
        runnable = [n for n in self.entry_systems if self.systems[n].executable]
        if len(runnable) == 1:
            return runnable[0]
        if not runnable:
            raise SemaError("no system with a Main spec in the entry file; use --system")
        raise SemaError("several systems with a Main spec (" + ", ".join(runnable) +
                        "); use --system")

    def __getitem__(self, name: str) -> SystemDef:
        return self.systems[name]


# -- imports -----------------------------------------------------------------

@dataclass
class LinkedProgram:
    systems: dict[str, A.SystemAst]
    entry_systems: list[str]
    file: Optional[str] = None


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def resolve_imports(program: A.ProgramAst, search_paths: Iterable[str],
                    reader: Callable[[str], str] = _read) -> LinkedProgram:
    """Load every transitively imported system from ``<name>.seni`` files."""
    paths = list(search_paths)
    linked: dict[str, A.SystemAst] = {}

    def find(name: str) -> Optional[str]:
        for d in paths:
            cand = os.path.join(d, name + ".seni")
            if os.path.isfile(cand):
                return cand
        return None

    def module_name(prog: A.ProgramAst) -> str:
        stem = os.path.splitext(os.path.basename(prog.file))[0] if prog.file else None
        names = [s.name for s in prog.systems]
        if stem in names or not names:
            return stem or "<input>"
        return names[0]

    def add(prog: A.ProgramAst, stack: list[tuple[str, frozenset[str]]]):
        for s in prog.systems:
            if s.name in linked and linked[s.name] is not s:
                raise DuplicateDeclaration(f"system '{s.name}' is defined more than once",
                                           s.span)
            linked[s.name] = s
        for imp in prog.imports:
            for k, (_, defined) in enumerate(stack):
                if imp.name in defined:
                    cycle = [m for m, _ in stack[k:]] + [imp.name]
                    raise CyclicImport(cycle, imp.span)
            if imp.name in linked:
                continue
            path = find(imp.name)
            if path is None:
                raise MissingImport(f"cannot find '{imp.name}.seni' for import", imp.span)
            sub = parse_source(reader(path), path)
            if imp.name not in {s.name for s in sub.systems}:
                raise MissingImport(f"'{path}' does not define system '{imp.name}'", imp.span)
            add(sub, stack + [(imp.name, frozenset(s.name for s in sub.systems))])

    entry = [s.name for s in program.systems]
    add(program, [(module_name(program), frozenset(entry))])
    return LinkedProgram(linked, entry, program.file)


# -- refinement ----------------------------------------------------------------

def base_def(ast: A.SystemAst) -> SystemDef:
    _check_duplicates(ast)
    return SystemDef(
        name=ast.name,
        records={r.name: r for r in ast.records},
        state_vars={v.name: StateVarInfo(v, ast.name) for v in ast.state_vars},
        instance_vars={v.name: v for v in ast.instance_vars},
        actions={a.name: a for a in ast.actions},
        init=ast.init,
        specs={s.name: s for s in ast.specs},
        props={p.name: p for p in ast.props},
        static_props={p.name: p for p in ast.static_props},
        funcs={f.name: f for f in ast.funcs},
        new_actions=frozenset(a.name for a in ast.actions),
    )


def _check_duplicates(ast: A.SystemAst) -> None:
    groups = [("record", ast.records), ("action", ast.actions), ("spec", ast.specs),
              ("prop", ast.props), ("property", ast.static_props), ("func", ast.funcs),
              ("variable", ast.state_vars + ast.instance_vars)]
    for what, decls in groups:
        seen = set()
        for d in decls:
            if d.name in seen:
                raise DuplicateDeclaration(f"duplicate {what} '{d.name}'", d.span)
            seen.add(d.name)


def merge_refinement(child: A.SystemAst, parent: SystemDef) -> SystemDef:
    """Merge ``child`` (which ``refines`` parent) over the parent's definition.

    Records, state variables, funcs and init are inherited unless redeclared;
    every other member kind is shadowed by name.
    """
    _check_duplicates(child)
    state_vars = dict(parent.state_vars)
    for v in child.state_vars:
        old = state_vars.get(v.name)
        if old is not None:
            if old.decl.type != v.type or old.decl.nullable != v.nullable:
                raise IncompatibleRedeclaration(
                    f"state variable '{v.name}' redeclared as {v.type}"
                    f"{'?' if v.nullable else ''}, inherited as {old.decl.type}"
                    f"{'?' if old.decl.nullable else ''}", v.span)
            state_vars[v.name] = replace(old, decl=v, origin=child.name)
        else:
            state_vars[v.name] = StateVarInfo(v, child.name)

    def over(base: dict, decls) -> dict:
        out = dict(base)
        for d in decls:
            out[d.name] = d
        return out

    return SystemDef(
        name=child.name,
        parent=parent.name,
        records=over(parent.records, child.records),
        state_vars=state_vars,
        instance_vars=over(parent.instance_vars, child.instance_vars),
        actions=over(parent.actions, child.actions),
        init=child.init if child.init is not None else parent.init,
        specs=over(parent.specs, child.specs),
        props=over(parent.props, child.props),
        static_props=over(parent.static_props, child.static_props),
        funcs=over(parent.funcs, child.funcs),
        new_actions=frozenset(a.name for a in child.actions if a.name not in parent.actions),
        record_types=dict(parent.record_types),
        func_sigs=dict(parent.func_sigs),
        instance_types=dict(parent.instance_types),
    )


def build_defs(linked: LinkedProgram) -> dict[str, SystemDef]:
    """Merge every linked system along its refinement chain (parents first)."""
    defs: dict[str, SystemDef] = {}

    def build(name: str, chain: tuple[str, ...]) -> SystemDef:
        if name in defs:
            return defs[name]
        ast = linked.systems[name]
        if ast.refines is None:
            d = base_def(ast)
        else:
            if ast.refines in chain or ast.refines == name:
                raise SemaError("cyclic refinement: " + " -> ".join(chain + (name, ast.refines)),
                                ast.span)
            if ast.refines not in linked.systems:
                raise UnresolvedName(f"refined system '{ast.refines}' is not defined or imported",
                                     ast.span)
            d = merge_refinement(ast, build(ast.refines, chain + (name,)))
        defs[name] = d
        return d

    for name in linked.systems:
        build(name, ())
    return defs


# -- type checking ---------------------------------------------------------------

@dataclass
class Ctx:
    system: SystemDef
    systems: dict[str, SystemDef]
    locals: dict[str, T.SemType] = field(default_factory=dict)
    state: bool = True  # may read state variables
    props: bool = False  # may reference props
    in_func: bool = False


class _Checker:
    def __init__(self, sd: SystemDef, systems: dict[str, SystemDef]):
        self.sd = sd
        self.systems = systems
        self.errors: list[SeniError] = []

    # -- types -------------------------------------------------------------

    def resolve_type(self, te: A.TypeExpr, allow_system: bool = False) -> T.SemType:
        if te.elem is not None:
            return T.list_of(self.resolve_type(te.elem, allow_system))
        if te.name in ("int", "bool", "string"):
            return {"int": T.INT, "bool": T.BOOL, "string": T.STR}[te.name]
        if te.name in self.sd.records:
            return T.record_type(te.name)
        if allow_system and te.name in self.systems:
            return T.system_type(te.name)
        raise UnresolvedName(f"unknown type '{te.name}'", te.span)

    # -- expressions -------------------------------------------------------

    def fail(self, msg, span, expected=None, found=None):
        raise SeniTypeError(msg, span, expected, found)

    def expect(self, expr, ctx, ty: T.SemType):
        res, got = self.expr(expr, ctx, ty)
        if not T.assignable(got, ty):
            self.fail(f"type mismatch: expected {ty}, found {got}", expr.span, ty, got)
        return res

    def state_path(self, path: tuple[str, ...], span) -> T.SemType:
        if path[0] not in self.sd.state_vars:
            raise UnresolvedName(f"unknown state variable '{path[0]}'", span)
        ty = self.sd.state_vars[path[0]].type
        for name in path[1:]:
            if ty.kind != "record" or name not in self.sd.record_types.get(ty.name, {}):
                raise UnresolvedName(f"'{ty}' has no field '{name}'", span)
            ty = self.sd.record_types[ty.name][name]
        return ty

    def expr(self, e, ctx: Ctx, expected: Optional[T.SemType] = None):
        """Return (resolved expression, type)."""
        if isinstance(e, A.IntLit):
            return e, T.INT
        if isinstance(e, A.BoolLit):
            return e, T.BOOL
        if isinstance(e, A.StrLit):
            return e, T.STR
        if isinstance(e, A.NullLit):
            return e, T.NULL
        if isinstance(e, (A.Name, A.Local, A.PropRef)):
            return self.name(e, ctx)
        if isinstance(e, A.StateRead):
            if not ctx.state:
                self.no_state(e, ctx)
            return e, self.state_path(e.path, e.span)
        if isinstance(e, A.At):
            if not ctx.state:
                self.no_state(e, ctx)
            self.fail("'@' must be followed by a state variable, as in '@.x'", e.span)
        if isinstance(e, A.Field):
            return self.field(e, ctx)
        if isinstance(e, A.Index):
            target, tt = self.expr(e.target, ctx)
            if tt.kind != "list":
                self.fail(f"cannot index a value of type {tt}", e.span)
            idx = self.expect(e.index, ctx, T.INT)
            return A.Index(target, idx, e.span), tt.elem
        if isinstance(e, (A.Call, A.FuncCall)):
            return self.call(e, ctx)
        if isinstance(e, A.Replicate):
            return self.call(A.Call("replicate", (e.count, e.template), e.span), ctx)
        if isinstance(e, A.Cast):
            return self.cast(e, ctx)
        if isinstance(e, A.Unary):
            if e.op == "!":
                return A.Unary("!", self.expect(e.operand, ctx, T.BOOL), e.span), T.BOOL
            if e.op == "-":
                return A.Unary("-", self.expect(e.operand, ctx, T.INT), e.span), T.INT
            self.fail("'always' is only allowed at the top of a property", e.span)
        if isinstance(e, A.Binary):
            return self.binary(e, ctx)
        if isinstance(e, A.If):
            cond = self.expect(e.cond, ctx, T.BOOL)
            then, t1 = self.expr(e.then, ctx, expected)
            orelse, t2 = self.expr(e.orelse, ctx, expected)
            ty = T.join(t1, t2)
            if ty is None:
                self.fail(f"'if' branches have different types {t1} and {t2}", e.span)
            return A.If(cond, then, orelse, e.span), ty
        if isinstance(e, A.RecordLit):
            return self.record_lit(e, ctx, expected)
        if isinstance(e, A.InstanceCtor):
            self.fail("an instance template can only be passed to replicate", e.span)
        if isinstance(e, A.Fold):
            return self.fold(e, ctx)
        raise AssertionError(f"unhandled expression {e!r}")

    def no_state(self, e, ctx):
        if ctx.in_func:
            self.fail("a pure function cannot read state variables", e.span)
        self.fail("state variables cannot be used here", e.span)

    def name(self, e, ctx: Ctx):
        ident = e.ident
        if not isinstance(e, A.PropRef) and ident in ctx.locals:
            return A.Local(ident, e.span), ctx.locals[ident]
        if isinstance(e, A.Local):
            raise UnresolvedName(f"unknown name '{ident}'", e.span)
        if not isinstance(e, A.PropRef) and ctx.state and ident in self.sd.state_vars:
            return A.StateRead((ident,), e.span), self.sd.state_vars[ident].type
        if ctx.props and ident in self.sd.props:
            return A.PropRef(ident, e.span), T.BOOL
        if ident in self.sd.instance_vars:
            self.fail(f"instance collection '{ident}' cannot be used as a value", e.span)
        if isinstance(e, A.PropRef):
            raise UnresolvedName(f"unknown prop '{ident}'", e.span)
        if ctx.in_func and ident in self.sd.state_vars:
            self.no_state(e, ctx)
        raise UnresolvedName(f"unknown name '{ident}'", e.span)

    def field(self, e: A.Field, ctx: Ctx):
        names = []
        root = e
        while isinstance(root, A.Field):
            names.append(root.name)
            root = root.target
        names.reverse()
        if isinstance(root, A.At):
            if not ctx.state:
                self.no_state(root, ctx)
            path = tuple(names)
            return A.StateRead(path, e.span), self.state_path(path, e.span)
        if isinstance(root, A.Name) and root.ident not in ctx.locals:
            if ctx.state and root.ident in self.sd.state_vars:
                path = (root.ident, *names)
                return A.StateRead(path, e.span), self.state_path(path, e.span)
            if root.ident in self.sd.instance_vars:
                self.fail(f"use fold(&, {root.ident}.{names[0]}) to combine props over a "
                          "collection", e.span)
        target, tt = self.expr(e.target, ctx)
        if isinstance(target, A.StateRead):
            path = target.path + (e.name,)
            return A.StateRead(path, e.span), self.state_path(path, e.span)
        if tt.kind != "record":
            self.fail(f"type {tt} has no fields", e.span)
        ftypes = self.sd.record_types[tt.name]
        if e.name not in ftypes:
            raise UnresolvedName(f"'{tt}' has no field '{e.name}'", e.span)
        return A.Field(target, e.name, e.span), ftypes[e.name]

    def call(self, e, ctx: Ctx):
        if e.func == "replicate" and e.func not in self.sd.funcs:
            if len(e.args) != 2:
                self.fail("replicate takes a count and an instance template", e.span)
            count = self.expect(e.args[0], ctx, T.INT)
            tmpl = e.args[1]
            if not isinstance(tmpl, A.InstanceCtor):
                self.fail("second argument of replicate must look like 'p::System'", tmpl.span)
            if tmpl.system not in self.systems:
                raise UnresolvedName(f"unknown system '{tmpl.system}'", tmpl.span)
            return A.Replicate(count, tmpl, e.span), T.list_of(T.system_type(tmpl.system))
        if e.func not in self.sd.funcs:
            raise UnresolvedName(f"unknown function '{e.func}'", e.span)
        sig = self.sd.func_sigs.get(e.func)
        if sig is None:
            self.fail(f"function '{e.func}' has an invalid signature", e.span)
        if len(e.args) != sig.arity:
            self.fail(f"'{e.func}' expects {sig.arity} argument(s), got {len(e.args)}", e.span)
        args = tuple(self.expect(a, ctx, p) for a, p in zip(e.args, sig.params))
        return A.FuncCall(e.func, args, e.span), sig.ret

    def cast(self, e: A.Cast, ctx: Ctx):
        to = self.resolve_type(e.to)
        operand, ot = self.expr(e.operand, ctx)
        ok = {"int": ("int", "string"), "string": ("int", "string", "bool"),
              "bool": ("bool", "string")}
        if to.kind not in ok or ot.kind not in ok[to.kind] or ot.nullable:
            self.fail(f"cannot cast {ot} to {to}", e.span, to, ot)
        return A.Cast(e.to, operand, e.span), to

    def binary(self, e: A.Binary, ctx: Ctx):
        op = e.op
        if op in ("&", "|", "=>"):
            left = self.expect(e.left, ctx, T.BOOL)
            right = self.expect(e.right, ctx, T.BOOL)
            return A.Binary(op, left, right, e.span), T.BOOL
        if op in ("+", "-", "*", "/", "mod", "<", "<=", ">", ">="):
            left, lt = self.expr(e.left, ctx)
            right, rt = self.expr(e.right, ctx)
            for side, ty in ((e.left, lt), (e.right, rt)):
                if ty.nullable and ty.kind == "int":
                    self.fail(f"operator '{op}' needs int, found nullable {ty}", side.span,
                              T.INT, ty)
                if ty != T.INT:
                    self.fail(f"operator '{op}' needs int, found {ty}", side.span, T.INT, ty)
            return A.Binary(op, left, right, e.span), (T.BOOL if op in ("<", "<=", ">", ">=") else T.INT)
        # = and /=
        left, lt = self.expr(e.left, ctx)
        right, rt = self.expr(e.right, ctx, lt)
        if not T.comparable(lt, rt):
            if lt.kind == "null" or rt.kind == "null":
                other = rt if lt.kind == "null" else lt
                self.fail(f"'{op} null' needs a nullable operand, found {other}", e.span)
            self.fail(f"cannot compare {lt} with {rt}", e.span, lt, rt)
        return A.Binary(op, left, right, e.span), T.BOOL

    def record_lit(self, e: A.RecordLit, ctx: Ctx, expected):
        if expected is None or expected.kind != "record":
            self.fail("cannot infer the record type of this literal", e.span)
        ftypes = self.sd.record_types[expected.name]
        given = [n for n, _ in e.fields]
        if sorted(given) != sorted(ftypes) or len(set(given)) != len(given):
            self.fail(f"record literal must set exactly the fields of {expected.name} "
                      f"({', '.join(ftypes)})", e.span)
        fields = tuple((n, self.expect(v, ctx, ftypes[n])) for n, v in e.fields)
        return A.RecordLit(fields, expected.name, e.span), T.record_type(expected.name)

    def fold(self, e: A.Fold, ctx: Ctx):
        if not ctx.props:
            self.fail("fold over props is only allowed in props and properties", e.span)
        if e.collection not in self.sd.instance_types:
            raise UnresolvedName(f"unknown instance collection '{e.collection}'", e.span)
        elem = self.systems[self.sd.instance_types[e.collection]]
        if e.prop not in elem.props:
            raise UnresolvedName(f"system '{elem.name}' has no prop '{e.prop}'", e.span)
        return e, T.BOOL

    # -- declarations ------------------------------------------------------

    def guarded(self, fn, *args):
        try:
            return fn(*args)
        except SeniError as err:
            self.errors.append(err)
            return None

    def check(self) -> SystemDef:
        sd = self.sd
        for rec in sd.records.values():
            sd.record_types[rec.name] = {}
        for rec in sd.records.values():
            self.guarded(self.check_record, rec)
        for name, fn in sd.funcs.items():
            self.guarded(self.check_sig, fn)
        for name, info in list(sd.state_vars.items()):
            self.guarded(self.check_state_var, info)
        for name, iv in sd.instance_vars.items():
            self.guarded(self.check_instance_var, iv)
        if any(v.type is None for v in sd.state_vars.values()):
            return sd  # later checks would only cascade
        for name, fn in list(sd.funcs.items()):
            res = self.guarded(self.check_func, fn)
            if res is not None:
                sd.funcs[name] = res
        for name, act in list(sd.actions.items()):
            res = self.guarded(self.check_action, act)
            if res is not None:
                sd.actions[name] = res
        if sd.init is not None:
            res = self.guarded(self.check_init, sd.init)
            if res is not None:
                sd.init = res
        for name, spec in sd.specs.items():
            self.guarded(self.check_spec, spec.body)
        for name, prop in list(sd.props.items()):
            res = self.guarded(self.check_prop, prop)
            if res is not None:
                sd.props[name] = res
        self.guarded(self.check_prop_cycles)
        for name, prop in list(sd.static_props.items()):
            res = self.guarded(self.check_property, prop)
            if res is not None:
                sd.static_props[name] = res
        return sd

    def check_record(self, rec: A.RecordDecl):
        ftypes = {}
        for f in rec.fields:
            ty = self.resolve_type(f.type)
            if isinstance(f.default, A.NullLit):
                ty = ty.with_null()
            ftypes[f.name] = ty
        self.sd.record_types[rec.name] = ftypes
        ctx = Ctx(self.sd, self.systems, state=False)
        for f in rec.fields:
            if f.default is not None and not isinstance(f.default, A.NullLit):
                self.expect(f.default, ctx, ftypes[f.name])

    def check_sig(self, fn: A.FuncDecl):
        types = [self.resolve_type(t) for t in fn.signature]
        if len(types) < 2:
            self.fail(f"function '{fn.name}' needs at least one parameter type", fn.span)
        self.sd.func_sigs[fn.name] = T.func_type(types[:-1], types[-1])

    def check_state_var(self, info: StateVarInfo):
        decl = info.decl
        ty = self.resolve_type(decl.type)
        if decl.nullable:
            ty = ty.with_null()
        self.sd.state_vars[decl.name] = replace(info, type=ty)
        if decl.default is not None and not decl.nullable:
            self.expect(decl.default, Ctx(self.sd, self.systems, state=False), ty)

    def check_instance_var(self, iv: A.InstanceVarDecl):
        ty = self.resolve_type(iv.type, allow_system=True)
        if ty.kind != "list" or ty.elem.kind != "system":
            self.fail(f"'{iv.name}' must be a collection of systems like [System] or be "
                      "declared with 'state'", iv.span)
        self.sd.instance_types[iv.name] = ty.elem.name

    def check_assign(self, stmt: A.Assign, ctx: Ctx, what: str) -> A.Assign:
        if not stmt.to_state:
            self.fail(f"{what} may only assign state variables (write '@.{stmt.target[0]}')",
                      stmt.span)
        ty = self.state_path(stmt.target, stmt.span)
        return A.Assign(stmt.target, self.expect(stmt.value, ctx, ty), True, stmt.span)

    def check_action(self, act: A.ActionDecl) -> A.ActionDecl:
        ctx = Ctx(self.sd, self.systems)
        body = tuple(self.check_assign(s, ctx, "an action") for s in act.body)
        return A.ActionDecl(act.name, body, act.span)

    def check_init(self, init: A.InitDecl) -> A.InitDecl:
        ctx = Ctx(self.sd, self.systems)
        for p in init.params:
            ctx.locals[p.name] = self.resolve_type(p.type)
        body = []
        for s in init.body:
            if s.to_state:
                body.append(self.check_assign(s, ctx, "init"))
                continue
            name = s.target[0]
            if name not in self.sd.instance_types:
                if name in self.sd.state_vars:
                    self.fail(f"assign state variables with '@.{name}'", s.span)
                raise UnresolvedName(f"unknown instance collection '{name}'", s.span)
            want = T.list_of(T.system_type(self.sd.instance_types[name]))
            body.append(A.Assign(s.target, self.expect(s.value, ctx, want), False, s.span))
        return A.InitDecl(init.params, tuple(body), init.span)

    def check_spec(self, spec: A.SpecExpr):
        if isinstance(spec, A.SpecAtom):
            if not (spec.name in self.sd.specs or spec.name in self.sd.actions
                    or spec.name in self.sd.instance_types):
                raise UnresolvedName(f"'{spec.name}' is not an action, spec or instance "
                                     "collection", spec.span)
        elif isinstance(spec, A.SpecFold):
            if spec.collection not in self.sd.instance_types:
                raise UnresolvedName(f"unknown instance collection '{spec.collection}'",
                                     spec.span)
        elif isinstance(spec, A.SpecAlways):
            self.check_spec(spec.body)
        elif isinstance(spec, A.SpecSeq):
            self.check_spec(spec.first)
            self.check_spec(spec.second)
        else:
            self.check_spec(spec.left)
            self.check_spec(spec.right)

    def check_prop(self, prop: A.PropDecl) -> A.PropDecl:
        ctx = Ctx(self.sd, self.systems, props=True)
        return A.PropDecl(prop.name, self.expect(prop.body, ctx, T.BOOL), prop.span)

    def check_prop_cycles(self):
        deps = {n: _prop_refs(p.body) for n, p in self.sd.props.items()}
        state: dict[str, int] = {}

        def visit(n, stack):
            if state.get(n) == 2:
                return
            if state.get(n) == 1:
                cyc = stack[stack.index(n):] + [n]
                raise SemaError("cyclic prop definition: " + " -> ".join(cyc),
                                self.sd.props[n].span)
            state[n] = 1
            for m in deps.get(n, ()):
                if m in deps:
                    visit(m, stack + [n])
            state[n] = 2

        for n in deps:
            visit(n, [])

    def check_property(self, prop: A.PropertyDecl) -> A.PropertyDecl:
        ctx = Ctx(self.sd, self.systems, props=True)
        body = prop.body
        spec = None
        if isinstance(body, A.Binary) and body.op == "=>" and isinstance(body.left, A.Name) \
                and body.left.ident in self.sd.specs:
            spec, body = body.left, body.right
        if isinstance(body, A.Unary) and body.op == "always":
            inner = A.Unary("always", self.expect(body.operand, ctx, T.BOOL), body.span)
        else:
            inner = self.expect(body, ctx, T.BOOL)
        if spec is not None:
            inner = A.Binary("=>", spec, inner, prop.body.span)
        return A.PropertyDecl(prop.name, inner, prop.static, prop.span)

    def check_func(self, fn: A.FuncDecl) -> A.FuncDecl:
        sig = self.sd.func_sigs[fn.name]
        params = fn.params
        if not params:
            params = _infer_params(fn, set(self.sd.funcs))
            if len(params) != sig.arity:
                self.fail(f"cannot infer parameter names of '{fn.name}': the body uses "
                          f"{len(params)} free name(s) for {sig.arity} parameter(s); "
                          f"write '{fn.name}(a, b, ...)'", fn.span)
        elif len(params) != sig.arity:
            self.fail(f"'{fn.name}' names {len(params)} parameter(s) but its type has "
                      f"{sig.arity}", fn.span)
        ctx = Ctx(self.sd, self.systems, dict(zip(params, sig.params)), state=False,
                  in_func=True)
        body = []
        for s in fn.body:
            if s.to_state:
                raise NonPureMutation(f"pure function '{fn.name}' cannot modify state variable "
                                      f"'{'.'.join(s.target)}'", s.span)
            value, ty = self.expr(s.value, ctx)
            if ty.kind == "null":
                self.fail("cannot infer the type of a null binding", s.span)
            ctx.locals[s.target[0]] = ty
            body.append(A.Assign(s.target, value, False, s.span))
        result = self.expect(fn.result, ctx, sig.ret)
        return A.FuncDecl(fn.name, tuple(params), fn.signature, tuple(body), result, fn.span)


def _prop_refs(e) -> set[str]:
    out: set[str] = set()

    def walk(x):
        if isinstance(x, A.PropRef):
            out.add(x.ident)
        for v in getattr(x, "__dataclass_fields__", {}):
            child = getattr(x, v)
            if isinstance(child, tuple):
                for c in child:
                    walk(c[1] if isinstance(c, tuple) else c)
            elif hasattr(child, "__dataclass_fields__") and not isinstance(child, Span):
                walk(child)

    walk(e)
    return out


def _infer_params(fn: A.FuncDecl, funcs: set[str]) -> tuple[str, ...]:
    """Free names of a func body in order of first appearance."""
    bound: set[str] = set()
    order: list[str] = []

    def walk(x):
        if isinstance(x, A.Name):
            if x.ident not in bound and x.ident not in order:
                order.append(x.ident)
            return
        if isinstance(x, A.Field):
            walk(x.target)
            return
        if isinstance(x, A.RecordLit):
            for _, v in x.fields:
                walk(v)
            return
        for name in getattr(x, "__dataclass_fields__", {}):
            if name == "span":
                continue
            child = getattr(x, name)
            if isinstance(child, tuple):
                for c in child:
                    walk(c)
            elif hasattr(child, "__dataclass_fields__"):
                walk(child)

    for s in fn.body:
        walk(s.value)
        bound.add(s.target[0])
    walk(fn.result)
    return tuple(order)


def typecheck(defs: dict[str, SystemDef]) -> dict[str, SystemDef]:
    """Check every system; raise Diagnostics (deduplicated, source order) on errors."""
    out: dict[str, SystemDef] = {}
    errors: list[SeniError] = []
    seen = set()
    fresh = {n: replace(d, records=dict(d.records), state_vars=dict(d.state_vars),
                        actions=dict(d.actions), props=dict(d.props), funcs=dict(d.funcs),
                        static_props=dict(d.static_props), record_types={}, func_sigs={},
                        instance_types={})
             for n, d in defs.items()}
    for name, sd in fresh.items():
        checker = _Checker(sd, fresh)
        out[name] = checker.check()
        for err in checker.errors:
            key = (err.message, err.span)
            if key not in seen:
                seen.add(key)
                errors.append(err)
    if errors:
        raise Diagnostics(errors)
    return out


# -- pipeline ---------------------------------------------------------------------

def check_program(program: A.ProgramAst, search_paths: Iterable[str] = (),
                  reader: Callable[[str], str] = _read) -> Program:
    try:
        linked = resolve_imports(program, search_paths, reader)
        defs = build_defs(linked)
    except Diagnostics:
        raise
    except SeniError as err:
        raise Diagnostics([err]) from err
    return Program(typecheck(defs), linked.entry_systems, program.file)


def check_source(source: str, file: Optional[str] = None,
                 search_paths: Iterable[str] = ()) -> Program:
    try:
        program = parse_source(source, file)
    except SeniError as err:
        raise Diagnostics([err]) from err
    return check_program(program, search_paths)


def load_program(path: str, search_paths: Optional[Iterable[str]] = None) -> Program:
    """Parse and check ``path``; imports are searched in ``search_paths`` then the file's
    own directory. IO errors propagate as OSError."""
    source = _read(path)
    dirs = list(search_paths or [])
    own = os.path.dirname(os.path.abspath(path))
    if own not in [os.path.abspath(d) for d in dirs]:
        dirs.append(own)
    return check_source(source, path, dirs)
