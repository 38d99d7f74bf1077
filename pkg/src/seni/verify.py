"""Invariant checking, satisfiability over reachable states, and deadlock detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, Union

from seni import ast as A
from seni.core import StateVector, SystemInstance, elaborate, proc_steps, apply_action
from seni.errors import SeniError, UnresolvedProp
from seni.explorer import DEFAULT_MAX_STATES, Configuration, Lts, Trace, build_lts
from seni.interp import Env, eval_expr
from seni.parser import parse_expression
from seni.sema import Program

Holder = Callable[[frozenset, StateVector], bool]


@dataclass(frozen=True)
class Formula:
    """A propositional formula over qualified prop names.

    ``holds(labels, state)`` answers prop atoms from ``labels``; any direct
    state reads in a declared property body are evaluated against ``state``.
    """

    text: str
    holds: Holder = field(compare=False, repr=False)


TRUE = Formula("true", lambda labels, state: True)


def negate(f: Formula) -> Formula:
    return Formula(f"!({f.text})", lambda labels, state: not f.holds(labels, state))


def formula_from_expr(e: A.Expr, inst: SystemInstance, text: str = "") -> Formula:
    """Wrap a checked expression of the instance's root system."""
    scope = inst.scope

    def holds(labels: frozenset, state: StateVector) -> bool:
        return bool(eval_expr(e, Env({}, state, scope, labels)))

    return Formula(text or _expr_text(e), holds)


def _expr_text(e: A.Expr) -> str:
    if isinstance(e, A.PropRef):
        return e.ident
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Unary):
        return f"!({_expr_text(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({_expr_text(e.left)} {e.op} {_expr_text(e.right)})"
    if isinstance(e, A.Fold):
        return f"fold({e.op}, {e.collection}.{e.prop})"
    return type(e).__name__


def parse_formula(text: str, inst: SystemInstance) -> Formula:
    """Parse a command-line formula: prop names (bare for the root instance or
    qualified like ``philosophers[0].Waiting``), ``true``/``false``,
    ``! & | =>``, parentheses and ``fold(&|, collection.prop)``."""
    try:
        expr = parse_expression(text)
    except SeniError as err:
        raise UnresolvedProp(f"cannot parse formula: {err.message}", err.span) from err
    return Formula(text, _resolve(expr, inst))


def _qualified_name(e: A.Expr) -> Optional[str]:
    if isinstance(e, A.Name):
        return e.ident
    if isinstance(e, A.Field):
        base = _qualified_name(e.target)
        return None if base is None else f"{base}.{e.name}"
    if isinstance(e, A.Index) and isinstance(e.index, A.IntLit):
        base = _qualified_name(e.target)
        return None if base is None else f"{base}[{e.index.value}]"
    return None


def _resolve(e: A.Expr, inst: SystemInstance) -> Holder:
    if isinstance(e, A.BoolLit):
        value = e.value
        return lambda labels, state: value
    if isinstance(e, A.Unary) and e.op == "!":
        inner = _resolve(e.operand, inst)
        return lambda labels, state: not inner(labels, state)
    if isinstance(e, A.Binary) and e.op in ("&", "|", "=>"):
        left, right = _resolve(e.left, inst), _resolve(e.right, inst)
        if e.op == "&":
            return lambda labels, state: left(labels, state) and right(labels, state)
        if e.op == "|":
            return lambda labels, state: left(labels, state) or right(labels, state)
        return lambda labels, state: (not left(labels, state)) or right(labels, state)
    if isinstance(e, A.Fold) and e.op in ("&", "|"):
        members = inst.scope.collections.get(e.collection)
        if members is None:
            raise UnresolvedProp(f"unknown instance collection '{e.collection}'", e.span)
        names = [sub.qualify(e.prop) for sub in members]
        for name in names:
            if name not in inst.props:
                raise UnresolvedProp(f"unknown prop '{name}'", e.span)
        combine = all if e.op == "&" else any
        return lambda labels, state: combine(n in labels for n in names)
    name = _qualified_name(e)
    if name is None:
        raise UnresolvedProp("formulas may only combine prop names with ! & | =>", e.span)
    if name not in inst.props:
        raise UnresolvedProp(f"unknown prop '{name}'", e.span)
    return lambda labels, state: name in labels


# -- properties and verdicts -------------------------------------------------------------

@dataclass(frozen=True)
class PropertyDef:
    """``spec => always φ`` (``always`` true) or a bare φ checked at the initial node."""

    name: str
    spec: str
    formula: Formula
    always: bool = True

    @classmethod
    def from_decl(cls, decl: A.PropertyDecl, inst: SystemInstance) -> "PropertyDef":
        body = decl.body
        spec = "Main"
        if isinstance(body, A.Binary) and body.op == "=>" and isinstance(body.left, A.Name) \
                and body.left.ident in inst.system.specs:
            spec, body = body.left.ident, body.right
        always = isinstance(body, A.Unary) and body.op == "always"
        if always:
            body = body.operand
        return cls(decl.name, spec, formula_from_expr(body, inst), always)


def property_defs(inst: SystemInstance) -> list[PropertyDef]:
    """Declared properties of the root system, in declaration order."""
    return [PropertyDef.from_decl(d, inst) for d in inst.system.static_props.values()]


@dataclass(frozen=True)
class Holds:
    name: str
    status = "HOLDS"


@dataclass(frozen=True)
class Violated:
    name: str
    trace: Trace = field(compare=False)
    node: int = 0
    status = "VIOLATED"


@dataclass(frozen=True)
class Inconclusive:
    name: str
    bound: int
    status = "INCONCLUSIVE"


Verdict = Union[Holds, Violated, Inconclusive]


def check_property(prop: PropertyDef, lts: Lts) -> Verdict:
    """Check ``prop`` over ``lts`` (which must be built from ``prop.spec``).

    Nodes are scanned in index order, which is BFS order, so the first
    violating node also has the shortest counterexample.
    """
    holds = prop.formula.holds
    nodes = range(lts.num_nodes) if prop.always else range(1)
    for i in nodes:
        if not holds(lts.labels[i], lts.configs[i].state):
            return Violated(prop.name, lts.trace_to(i), i)
    if prop.always and lts.truncated:
        return Inconclusive(prop.name, lts.bound)
    return Holds(prop.name)


def always(formula: Formula, name: str = "", spec: str = "Main") -> PropertyDef:
    return PropertyDef(name or f"always {formula.text}", spec, formula, True)


@dataclass
class Report:
    """Verdicts of every declared property plus the LTS built for each spec."""

    results: list[tuple[PropertyDef, Verdict]]
    ltss: dict[str, Lts]

    @property
    def exit_code(self) -> int:
        verdicts = [v for _, v in self.results]
        if any(isinstance(v, Violated) for v in verdicts):
            return 1
        if any(isinstance(v, Inconclusive) for v in verdicts):
            return 4
        return 0


def verify_program(program: Program, entry: str, args: Sequence[str] = (),
                   max_states: int = DEFAULT_MAX_STATES) -> Report:
    """Check every declared property of ``entry``; one LTS per referenced spec."""
    specs = program[entry].specs
    first = "Main" if "Main" in specs or not specs else next(iter(specs))
    instances = {first: elaborate(program, entry, args, spec=first)}
    ltss: dict[str, Lts] = {}
    results = []
    for prop in property_defs(instances[first]):
        if prop.spec not in ltss:
            if prop.spec not in instances:
                instances[prop.spec] = elaborate(program, entry, args, spec=prop.spec)
            ltss[prop.spec] = build_lts(instances[prop.spec], max_states)
        results.append((prop, check_property(prop, ltss[prop.spec])))
    return Report(results, ltss)


# -- satisfiability and deadlocks -----------------------------------------------------------

@dataclass(frozen=True)
class Model:
    node: int
    state: StateVector


def find_satisfying_state(formula: Formula, lts: Lts) -> Optional[Model]:
    """Least node (BFS order) whose labels satisfy ``formula``."""
    for i in range(lts.num_nodes):
        if formula.holds(lts.labels[i], lts.configs[i].state):
            return Model(i, lts.configs[i].state)
    return None


def detect_deadlock(lts: Lts) -> list[int]:
    """Fully expanded nodes without outgoing edges."""
    return [i for i in range(lts.num_nodes) if lts.expanded[i] and not lts.out[i]]


def replay_trace(inst: SystemInstance, trace: Trace) -> bool:
    """Re-execute ``trace`` from the initial configuration.

    True when every action is enabled in turn and every intermediate state
    equals the recorded one. Control is tracked as a set because one action
    name may lead to several continuations.
    """
    if not trace.states or trace.states[0] != inst.initial_state:
        return False
    current = {Configuration(inst.main, inst.initial_state)}
    for i, name in enumerate(trace.actions):
        target = trace.states[i + 1]
        nxt = set()
        for config in current:
            for act, cont, _ in proc_steps(config.control):
                if act.name == name:
                    post = apply_action(config.state, act)
                    if post == target:
                        nxt.add(Configuration(cont, post))
        if not nxt:
            return False
        current = nxt
    return True


# -- rendering ---------------------------------------------------------------------------

def render_verdict(v: Verdict) -> str:
    if isinstance(v, Violated):
        body = "\n".join("  " + line for line in v.trace.render().splitlines())
        return f"{v.name}: VIOLATED ({len(v.trace)} steps)\n{body}"
    if isinstance(v, Inconclusive):
        return f"{v.name}: INCONCLUSIVE (bound={v.bound})"
    return f"{v.name}: HOLDS"


def verdict_json(v: Verdict) -> dict[str, Any]:
    out: dict[str, Any] = {"name": v.name, "status": v.status}
    if isinstance(v, Violated):
        out["node"] = v.node
        out["trace"] = v.trace.to_json()
    elif isinstance(v, Inconclusive):
        out["bound"] = v.bound
    return out
