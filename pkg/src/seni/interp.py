"""Expression and pure-function evaluation.

Values map onto Python objects: int, bool, str, ``None`` for null,
:class:`Record` for records, tuples for lists and :class:`InstanceTemplate`
for ``p::System`` constructors. All of them are immutable and hashable, so
state vectors can be hashed directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

from seni import ast as A
from seni.errors import DivisionByZero, EvalFault, NegativeCount

DEFAULT_RECURSION_LIMIT = 10_000


@dataclass(frozen=True)
class Record:
    type_name: str
    fields: tuple[tuple[str, Any], ...]

    def get(self, name: str) -> Any:
        for k, v in self.fields:
            if k == name:
                return v
        raise KeyError(name)

    def set(self, name: str, value: Any) -> "Record":
        return Record(self.type_name, tuple((k, value if k == name else v)
                                            for k, v in self.fields))

    def as_dict(self) -> dict[str, Any]:
        return dict(self.fields)


@dataclass(frozen=True)
class InstanceTemplate:
    label: str
    system: str
    args: tuple[str, ...] = ()


def format_value(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, Record):
        return "{" + ", ".join(f"{k}: {format_value(x)}" for k, x in v.fields) + "}"
    if isinstance(v, tuple):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, InstanceTemplate):
        return f"{v.label}::{v.system}"
    return str(v)


def to_json(v: Any) -> Any:
    if isinstance(v, Record):
        return {k: to_json(x) for k, x in v.fields}
    if isinstance(v, tuple):
        return [to_json(x) for x in v]
    if isinstance(v, InstanceTemplate):
        return format_value(v)
    return v


def values_equal(a: Any, b: Any) -> bool:
    """Structural equality; bools never equal ints."""
    if type(a) is not type(b):
        return False
    if isinstance(a, tuple):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, Record):
        return a.type_name == b.type_name and len(a.fields) == len(b.fields) and all(
            k1 == k2 and values_equal(x, y) for (k1, x), (k2, y) in zip(a.fields, b.fields))
    return a == b


class Scope:
    """What an expression can see besides local bindings: the owning system's
    funcs and props, its state-variable prefix, and its instance collections.

    The core module builds one per elaborated instance; a bare ``Scope(sd)``
    works for evaluating expressions of a standalone system.
    """

    def __init__(self, system, prefix: str = "",
                 collections: Optional[dict[str, list["Scope"]]] = None,
                 recursion_limit: int = DEFAULT_RECURSION_LIMIT):
        self.system = system
        self.prefix = prefix
        self.collections = collections if collections is not None else {}
        self.recursion_limit = recursion_limit

    @property
    def path(self) -> str:
        return self.prefix[:-1] if self.prefix.endswith(".") else self.prefix

    def qualify(self, name: str) -> str:
        return self.prefix + name


@dataclass(frozen=True)
class Env:
    """Evaluation environment: local bindings plus a read-only view of a state.

    ``state`` is any mapping from qualified variable name to value (usually a
    StateVector). When ``labels`` is given, prop references are answered from
    that set of qualified prop names instead of by evaluating prop bodies.
    There is deliberately no way to write through an Env.
    """

    bindings: Mapping[str, Any] = field(default_factory=dict)
    state: Optional[Mapping[str, Any]] = None
    scope: Optional[Scope] = None
    labels: Optional[frozenset[str]] = None
    depth: int = 0

    def with_scope(self, scope: Scope) -> "Env":
        return Env({}, self.state, scope, self.labels, self.depth)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _arith(op: str, a: int, b: int, span) -> Any:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op in ("/", "mod"):
        if b == 0:
            raise DivisionByZero("division by zero", span)
        q = _trunc_div(a, b)
        return q if op == "/" else a - b * q
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def read_path(state: Mapping[str, Any], prefix: str, path: tuple[str, ...]) -> Any:
    v = state[prefix + path[0]]
    for name in path[1:]:
        if v is None:
            return None
        v = v.get(name)
    return v


_COMPILED: dict[int, tuple[A.Expr, Callable[[Env], Any]]] = {}


def eval_expr(e: A.Expr, env: Env) -> Any:
    """Evaluate a resolved expression."""
    return compile_expr(e)(env)


def compile_expr(e: A.Expr) -> Callable[[Env], Any]:
    """Closure evaluating ``e``; cached per expression node."""
    hit = _COMPILED.get(id(e))
    if hit is not None and hit[0] is e:
        return hit[1]
    fn = _compile(e)
    _COMPILED[id(e)] = (e, fn)
    return fn


def _compile(e: A.Expr) -> Callable[[Env], Any]:
    t = type(e)
    if t is A.IntLit or t is A.BoolLit or t is A.StrLit:
        value = e.value
        return lambda env: value
    if t is A.NullLit:
        return lambda env: None
    if t is A.Local:
        ident = e.ident
        return lambda env: env.bindings[ident]
    if t is A.StateRead:
        path = e.path
        head, rest = path[0], path[1:]
        if not rest:
            return lambda env: env.state[(env.scope.prefix if env.scope else "") + head]
        return lambda env: read_path(env.state, env.scope.prefix if env.scope else "", path)
    if t is A.Binary:
        return _compile_binary(e)
    if t is A.Unary:
        operand = compile_expr(e.operand)
        if e.op == "!":
            return lambda env: not operand(env)
        return lambda env: -operand(env)
    if t is A.PropRef:
        ident = e.ident
        return lambda env: eval_prop(ident, env)
    if t is A.Fold:
        return lambda env: eval_fold(e, env)
    if t is A.FuncCall:
        name = e.func
        args = [compile_expr(a) for a in e.args]

        def call(env: Env) -> Any:
            func = env.scope.system.funcs[name]
            return eval_func(func, [a(env) for a in args], env.scope, env.depth + 1)

        return call
    if t is A.If:
        cond, then, orelse = compile_expr(e.cond), compile_expr(e.then), compile_expr(e.orelse)
        return lambda env: then(env) if cond(env) else orelse(env)
    if t is A.RecordLit:
        type_name = e.type_name
        fields = [(n, compile_expr(v)) for n, v in e.fields]
        return lambda env: Record(type_name, tuple((n, f(env)) for n, f in fields))
    if t is A.Field:
        target, name = compile_expr(e.target), e.name

        def field_of(env: Env) -> Any:
            v = target(env)
            return None if v is None else v.get(name)

        return field_of
    if t is A.Index:
        target, index = compile_expr(e.target), compile_expr(e.index)

        def index_of(env: Env) -> Any:
            seq, idx = target(env), index(env)
            if not 0 <= idx < len(seq):
                raise EvalFault(f"index {idx} out of range for a list of length {len(seq)}",
                                e.span)
            return seq[idx]

        return index_of
    if t is A.Cast:
        operand = compile_expr(e.operand)
        return lambda env: _cast(e, operand(env))
    if t is A.Replicate:
        count = compile_expr(e.count)
        template = InstanceTemplate(e.template.label, e.template.system)
        return lambda env: builtin_replicate(count(env), template, e.span)
    if t is A.InstanceCtor:
        template = InstanceTemplate(e.label, e.system)
        return lambda env: template

    def unresolved(env: Env) -> Any:
        raise EvalFault(f"cannot evaluate unresolved expression {t.__name__}", e.span)

    return unresolved


def _compile_binary(e: A.Binary) -> Callable[[Env], Any]:
    op = e.op
    left, right = compile_expr(e.left), compile_expr(e.right)
    if op == "&":
        return lambda env: left(env) and right(env)
    if op == "|":
        return lambda env: left(env) or right(env)
    if op == "=>":
        return lambda env: (not left(env)) or right(env)
    if op == "=":
        return lambda env: values_equal(left(env), right(env))
    if op == "/=":
        return lambda env: not values_equal(left(env), right(env))
    if op == "+":
        return lambda env: left(env) + right(env)
    if op == "-":
        return lambda env: left(env) - right(env)
    if op == "*":
        return lambda env: left(env) * right(env)
    span = e.span
    return lambda env: _arith(op, left(env), right(env), span)


def _cast(e: A.Cast, v: Any) -> Any:
    to = e.to.name
    if to == "int":
        if isinstance(v, str):
            try:
                return int(v.strip())
            except ValueError:
                raise EvalFault(f"cannot convert {format_value(v)} to int", e.span) from None
        return v
    if to == "string":
        return v if isinstance(v, str) else format_value(v)
    if isinstance(v, str):
        if v not in ("true", "false"):
            raise EvalFault(f"cannot convert {format_value(v)} to bool", e.span)
        return v == "true"
    return v


def eval_prop(name: str, env: Env) -> bool:
    scope = env.scope
    if env.labels is not None:
        return scope.qualify(name) in env.labels
    prop = scope.system.props[name]
    return bool(compile_expr(prop.body)(Env({}, env.state, scope, None, env.depth)))


def eval_fold(e: A.Fold, env: Env) -> bool:
    members = env.scope.collections.get(e.collection, [])
    results = (eval_prop(e.prop, env.with_scope(sub)) for sub in members)
    return all(results) if e.op == "&" else any(results)


def eval_func(func: A.FuncDecl, args, scope: Optional[Scope] = None, depth: int = 0) -> Any:
    """Apply a checked pure function. The body sees only its arguments and
    local bindings, never a state."""
    limit = scope.recursion_limit if scope is not None else DEFAULT_RECURSION_LIMIT
    if depth > limit:
        raise EvalFault(f"recursion depth limit ({limit}) exceeded in '{func.name}'", func.span)
    if len(args) != len(func.params):
        raise EvalFault(f"'{func.name}' expects {len(func.params)} argument(s), got {len(args)}",
                        func.span)
    bindings = dict(zip(func.params, args))
    env = Env(bindings, None, scope, None, depth)
    for stmt in func.body:
        bindings[stmt.target[0]] = eval_expr(stmt.value, env)
    try:
        return eval_expr(func.result, env)
    except RecursionError:
        raise EvalFault(f"recursion too deep in '{func.name}'", func.span) from None


def builtin_replicate(n: int, template: InstanceTemplate, span=None) -> tuple:
    """``replicate(n, p::S)``: n templates, instance i initialised with args ["i"]."""
    if n < 0:
        raise NegativeCount(f"replicate count must be non-negative, got {n}", span)
    return tuple(InstanceTemplate(template.label, template.system, (str(i),)) for i in range(n))


def default_value(ty, record_defaults: Callable[[str], Record]) -> Any:
    """Value of a state variable with no initializer."""
    if ty.nullable:
        return None
    if ty.kind == "int":
        return 0
    if ty.kind == "bool":
        return False
    if ty.kind == "string":
        return ""
    if ty.kind == "list":
        return ()
    if ty.kind == "record":
        return record_defaults(ty.name)
    raise EvalFault(f"no default value for type {ty}")
