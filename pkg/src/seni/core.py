"""Elaboration of checked systems into executable transition-system instances.

A :class:`SystemInstance` bundles the initial :class:`StateVector`, every
qualified :class:`ActionInstance`, the prop predicates, and the main process
term built from the entry spec. Process terms (``Act``, ``Seq``, ``Choice``,
``Always``, ``Par``, ``SpecBlock``, ``DONE``) are immutable and hashable so the
explorer can use them as part of a configuration key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, Union

from seni import ast as A
from seni.errors import ElaborationError, EvalFault, NoMainSpec, UnboundedRecursion
from seni.interp import (
    Env,
    InstanceTemplate,
    Record,
    Scope,
    default_value,
    eval_expr,
    eval_prop,
    format_value,
)
from seni.sema import Program, SystemDef

MAX_INSTANCE_DEPTH = 32


# -- state vectors ---------------------------------------------------------------

class StateVector(Mapping[str, Any]):
    """Immutable evaluation of every state variable, keyed by qualified path.

    Vectors of one elaborated system share a key layout; equality and hashing
    are by value.
    """

    __slots__ = ("keys_", "values", "_index", "_hash")

    def __init__(self, keys: tuple[str, ...], values: tuple, index: Optional[dict] = None):
        self.keys_ = keys
        self.values = values
        self._index = index if index is not None else {k: i for i, k in enumerate(keys)}
        self._hash = None

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Any]) -> "StateVector":
        return cls(tuple(mapping), tuple(mapping.values()))

    def __getitem__(self, key: str) -> Any:
        return self.values[self._index[key]]

    def __iter__(self) -> Iterator[str]:
        return iter(self.keys_)

    def __len__(self) -> int:
        return len(self.keys_)

    def __contains__(self, key) -> bool:
        return key in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.values == other.values and self.keys_ == other.keys_

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.values)
        return self._hash

    def __repr__(self) -> str:
        return "StateVector(" + ", ".join(f"{k}={format_value(v)}" for k, v in self.items()) + ")"

    def updated(self, writes: Sequence[tuple[str, tuple[str, ...], Any]]) -> "StateVector":
        """New vector with each (variable, field path, value) write applied in order."""
        vals = list(self.values)
        for key, fields, value in writes:
            i = self._index[key]
            vals[i] = _write_field(vals[i], fields, value) if fields else value
        return StateVector(self.keys_, tuple(vals), self._index)

    def diff(self, other: "StateVector") -> list[tuple[str, Any, Any]]:
        """(key, old, new) for every variable whose value differs in ``other``."""
        return [(k, a, b) for k, a, b in zip(self.keys_, self.values, other.values) if a != b
                or type(a) is not type(b)]

    def render(self) -> str:
        return ", ".join(f"{k} = {format_value(v)}" for k, v in self.items())


def _write_field(value: Any, fields: tuple[str, ...], new: Any) -> Any:
    if not isinstance(value, Record):
        raise EvalFault(f"cannot assign field '{fields[0]}' of {format_value(value)}")
    if len(fields) == 1:
        return value.set(fields[0], new)
    return value.set(fields[0], _write_field(value.get(fields[0]), fields[1:], new))


# -- actions ----------------------------------------------------------------------

@dataclass(frozen=True)
class ActionInstance:
    """A named atomic action of one instance; identity is the qualified name."""

    name: str
    assignments: tuple[tuple[tuple[str, ...], A.Expr], ...] = field(default=(), compare=False,
                                                                     repr=False)
    scope: Optional[Scope] = field(default=None, compare=False, repr=False)

    @property
    def local_name(self) -> str:
        return self.name.rsplit(".", 1)[-1]


def apply_action(pre: StateVector, act: ActionInstance) -> StateVector:
    """Evaluate every right-hand side against ``pre``, then apply all writes."""
    prefix = act.scope.prefix if act.scope is not None else ""
    env = Env({}, pre, act.scope)
    try:
        writes = [(prefix + path[0], path[1:], eval_expr(expr, env))
                  for path, expr in act.assignments]
        return pre.updated(writes)
    except EvalFault as fault:
        fault.action = act.name
        fault.message = f"in action '{act.name}': {fault.message}"
        fault.args = (fault.message,)
        raise


# -- process terms -------------------------------------------------------------------

class _Term:
    """Base of process terms; hashes are cached since terms are deeply shared."""

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + tuple(self.__dict__[f] for f in self._fields))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True, repr=False)
class Done(_Term):
    _fields = ()
    __hash__ = _Term.__hash__
    def __repr__(self) -> str:
        return "Done"


DONE = Done()


@dataclass(frozen=True)
class Act(_Term):
    _fields = ('action',)
    __hash__ = _Term.__hash__
    action: ActionInstance

    def __repr__(self) -> str:
        return f"Act({self.action.name})"


@dataclass(frozen=True)
class Seq(_Term):
    _fields = ('first', 'second')
    __hash__ = _Term.__hash__
    first: "Proc"
    second: "Proc"


@dataclass(frozen=True)
class Choice(_Term):
    _fields = ('left', 'right')
    __hash__ = _Term.__hash__
    left: "Proc"
    right: "Proc"


@dataclass(frozen=True)
class Always(_Term):
    _fields = ('body',)
    __hash__ = _Term.__hash__
    body: "Proc"


@dataclass(frozen=True)
class Par(_Term):
    _fields = ('parts',)
    __hash__ = _Term.__hash__
    parts: tuple["Proc", ...]


@dataclass(frozen=True)
class SpecBlock(_Term):
    """Marks the extent of an inlined spec so the step that completes it is known."""

    _fields = ('name', 'body')
    __hash__ = _Term.__hash__
    name: str
    body: "Proc"


Proc = Union[Done, Act, Seq, Choice, Always, Par, SpecBlock]


def seq(first: Proc, second: Proc) -> Proc:
    if first is DONE:
        return second
    if second is DONE:
        return first
    return Seq(first, second)


def choice(left: Proc, right: Proc) -> Proc:
    if left is DONE and right is DONE:
        return DONE
    return Choice(left, right)


def par(parts: Sequence[Proc]) -> Proc:
    flat: list[Proc] = []
    for p in parts:
        if type(p) is Par:
            flat.extend(p.parts)
        elif p is not DONE:
            flat.append(p)
    if not flat:
        return DONE
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(flat))


def can_terminate(p: Proc) -> bool:
    t = type(p)
    if t is Done:
        return True
    if t is Seq:
        return can_terminate(p.first) and can_terminate(p.second)
    if t is Choice:
        return can_terminate(p.left) or can_terminate(p.right)
    if t is Par:
        return all(can_terminate(x) for x in p.parts)
    if t is SpecBlock:
        return can_terminate(p.body)
    return False


Step = tuple[ActionInstance, Proc, tuple[str, ...]]


def proc_steps(p: Proc) -> list[Step]:
    """Small-step moves of a process term: (action, continuation, completed spec names).

    Order is deterministic: components left to right, choice branches left to right.
    """
    t = type(p)
    if t is Act:
        return [(p.action, DONE, ())]
    if t is Seq:
        second = p.second
        out = [(a, seq(c, second), done) for a, c, done in proc_steps(p.first)]
        if can_terminate(p.first):
            out.extend(proc_steps(second))
        return out
    if t is Choice:
        return proc_steps(p.left) + proc_steps(p.right)
    if t is Always:
        return [(a, seq(c, p), done) for a, c, done in proc_steps(p.body)]
    if t is Par:
        out = []
        parts = p.parts
        for i, part in enumerate(parts):
            for a, c, done in proc_steps(part):
                out.append((a, par(parts[:i] + (c,) + parts[i + 1:]), done))
        return out
    if t is SpecBlock:
        name = p.name
        return [(a, DONE, done + (name,)) if c is DONE else (a, SpecBlock(name, c), done)
                for a, c, done in proc_steps(p.body)]
    return []


def format_proc(p: Proc) -> str:
    t = type(p)
    if t is Done:
        return "Done"
    if t is Act:
        return p.action.name
    if t is Seq:
        return f"({format_proc(p.first)} . {format_proc(p.second)})"
    if t is Choice:
        return f"({format_proc(p.left)} | {format_proc(p.right)})"
    if t is Always:
        return f"always {format_proc(p.body)}"
    if t is Par:
        return "(" + " || ".join(format_proc(x) for x in p.parts) + ")"
    return f"[{p.name}: {format_proc(p.body)}]"


# -- instances ---------------------------------------------------------------------------

@dataclass
class SystemInstance:
    """An elaborated system: initial state, actions, props and main process."""

    path: str
    system: SystemDef
    initial_state: StateVector
    actions: dict[str, ActionInstance]
    main: Proc
    props: dict[str, Callable[[Mapping[str, Any]], bool]]
    scope: Scope
    scopes: list[Scope]
    spec: str = "Main"

    @property
    def prop_names(self) -> list[str]:
        return list(self.props)

    def label(self, state: Mapping[str, Any]) -> frozenset[str]:
        return frozenset(n for n, pred in self.props.items() if pred(state))

    def root_keys(self) -> list[str]:
        """State keys owned by the root instance (not by sub-instances)."""
        return [self.scope.prefix + n for n in self.system.state_vars]


def _prop_predicate(scope: Scope, name: str) -> Callable[[Mapping[str, Any]], bool]:
    def predicate(state: Mapping[str, Any]) -> bool:
        return bool(eval_prop(name, Env({}, state, scope)))

    predicate.__name__ = f"prop_{scope.qualify(name)}"
    return predicate


class _Elaborator:
    def __init__(self, systems: dict[str, SystemDef]):
        self.systems = systems
        self.values: dict[str, Any] = {}
        self.scopes: list[Scope] = []
        self.actions: dict[str, ActionInstance] = {}
        self.props: dict[str, Callable] = {}

    def record_defaults(self, sd: SystemDef) -> Callable[[str], Record]:
        def make(name: str) -> Record:
            rec = sd.records[name]
            ftypes = sd.record_types[name]
            fields = []
            for f in rec.fields:
                if f.default is not None:
                    fields.append((f.name, eval_expr(f.default, Env())))
                else:
                    fields.append((f.name, default_value(ftypes[f.name], make)))
            return Record(name, tuple(fields))

        return make

    def instantiate(self, sd: SystemDef, path: str, args: Sequence[str], depth: int) -> Scope:
        if depth > MAX_INSTANCE_DEPTH:
            raise ElaborationError(f"instance nesting deeper than {MAX_INSTANCE_DEPTH} at '{path}'")
        prefix = path + "." if path else ""
        collections: dict[str, list[Scope]] = {}
        scope = Scope(sd, prefix, collections)
        self.scopes.append(scope)
        defaults = self.record_defaults(sd)
        for name, info in sd.state_vars.items():
            decl = info.decl
            if decl.default is not None and not decl.nullable:
                value = eval_expr(decl.default, Env({}, None, scope))
            else:
                value = default_value(info.type, defaults)
            self.values[prefix + name] = value

        templates: dict[str, tuple] = {}
        if sd.init is not None:
            bindings: dict[str, Any] = {}
            params = sd.init.params
            if params:
                bindings[params[0].name] = tuple(args)
                for extra in params[1:]:
                    raise ElaborationError(f"init of '{sd.name}' may take only one parameter "
                                           "(the argument list)", extra.span)
            env = Env(bindings, self.values, scope)
            writes = []
            for stmt in sd.init.body:
                try:
                    value = eval_expr(stmt.value, env)
                except EvalFault as fault:
                    fault.message = (f"in init of '{path or sd.name}' with arguments "
                                     f"{list(args)}: {fault.message}")
                    fault.args = (fault.message,)
                    raise
                if stmt.to_state:
                    writes.append((stmt.target, value))
                else:
                    templates[stmt.target[0]] = value
            for target, value in writes:
                key = prefix + target[0]
                if len(target) == 1:
                    self.values[key] = value
                else:
                    self.values[key] = _write_field(self.values[key], target[1:], value)

        for aname, act in sd.actions.items():
            q = prefix + aname
            self.actions[q] = ActionInstance(
                q, tuple((s.target, s.value) for s in act.body), scope)
        for pname in sd.props:
            self.props[prefix + pname] = _prop_predicate(scope, pname)

        for cname in sd.instance_vars:
            subs = []
            for i, tmpl in enumerate(templates.get(cname, ())):
                assert isinstance(tmpl, InstanceTemplate)
                sub_sd = self.systems[tmpl.system]
                subs.append(self.instantiate(sub_sd, f"{prefix}{cname}[{i}]", tmpl.args,
                                             depth + 1))
            collections[cname] = subs
        return scope

    # -- spec elaboration ----------------------------------------------------

    def main_of(self, scope: Scope, spec: str = "Main") -> Proc:
        sd = scope.system
        if spec not in sd.specs:
            where = f" (instance '{scope.path}')" if scope.path else ""
            if spec == "Main":
                raise NoMainSpec(f"system '{sd.name}'{where} has no Main spec")
            raise ElaborationError(f"system '{sd.name}' has no spec '{spec}'")
        q = scope.qualify(spec)
        return self.build(scope, sd.specs[spec].body, (q,), frozenset(), root_of=q)

    def build(self, scope: Scope, e: A.SpecExpr, stack: tuple[str, ...],
              loops: frozenset[str], root_of: Optional[str] = None) -> Proc:
        sd = scope.system
        if isinstance(e, A.SpecAtom):
            name = e.name
            if name in sd.specs:
                q = scope.qualify(name)
                if q in stack:
                    if q in loops:
                        return DONE
                    raise UnboundedRecursion(
                        "spec '" + name + "' refers to itself outside the tail of its 'always' "
                        "loop: " + " -> ".join(stack[stack.index(q):] + (q,)), e.span)
                body = self.build(scope, sd.specs[name].body, stack + (q,), loops, root_of=q)
                return SpecBlock(q, body) if body is not DONE else DONE
            if name in sd.actions:
                return Act(self.actions[scope.qualify(name)])
            return self.collection(scope, name)
        if isinstance(e, A.SpecFold):
            return self.collection(scope, e.collection)
        if isinstance(e, A.SpecSeq):
            return seq(self.build(scope, e.first, stack, frozenset()),
                       self.build(scope, e.second, stack, loops))
        if isinstance(e, A.SpecChoice):
            return choice(self.build(scope, e.left, stack, loops),
                          self.build(scope, e.right, stack, loops))
        if isinstance(e, A.SpecPar):
            return par([self.build(scope, e.left, stack, frozenset()),
                        self.build(scope, e.right, stack, frozenset())])
        if isinstance(e, A.SpecAlways):
            inner = frozenset({root_of}) if root_of else frozenset()
            body = self.build(scope, e.body, stack, inner)
            if body is DONE:
                raise ElaborationError("'always' body performs no action", e.span)
            return Always(body)
        raise AssertionError(e)

    def collection(self, scope: Scope, name: str) -> Proc:
        return par([self.main_of(sub) for sub in scope.collections.get(name, [])])


def elaborate(program: Union[Program, dict[str, SystemDef]], entry: str,
              args: Sequence[str] = (), spec: str = "Main") -> SystemInstance:
    """Instantiate ``entry`` with init arguments ``args`` and build the process for ``spec``."""
    systems = program.systems if isinstance(program, Program) else program
    if entry not in systems:
        raise ElaborationError(f"unknown system '{entry}'")
    sd = systems[entry]
    if spec not in sd.specs and spec == "Main":
        raise NoMainSpec(f"system '{entry}' has no Main spec and cannot be run")
    el = _Elaborator(systems)
    root = el.instantiate(sd, "", list(args), 0)
    main = el.main_of(root, spec)
    state = StateVector.from_dict(el.values)
    return SystemInstance("", sd, state, el.actions, main, el.props, root, el.scopes, spec)
