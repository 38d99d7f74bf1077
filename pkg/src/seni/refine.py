"""Weak simulation between an abstract system and a refinement of it.

Refined actions reachable from a refined spec that shadows an abstract action
are internal steps of that abstract action; the step that completes the spec
is the observable one. Actions kept under their abstract name are observable
as themselves. Internal steps are matched by the abstract side standing still.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Union

from seni import ast as A
from seni.errors import AmbiguousMapping, TruncatedInput, UnmappedAction
from seni.explorer import Lts, Trace
from seni.sema import SystemDef


@dataclass(frozen=True)
class ActionMap:
    """Refined (local) action name to abstract action name."""

    mapping: Mapping[str, str]
    unmapped: tuple[str, ...] = ()

    @classmethod
    def identity(cls, names: Iterable[str]) -> "ActionMap":
        return cls({n: n for n in names})

    @classmethod
    def of_lts(cls, lts: Lts) -> "ActionMap":
        return cls.identity(sorted(lts.action_names()))

    def __getitem__(self, name: str) -> str:
        return self.mapping[name]

    def lookup(self, qualified: str) -> Optional[str]:
        """Map a possibly instance-qualified action name, keeping its prefix."""
        if qualified in self.mapping:
            return self.mapping[qualified]
        prefix, _, local = qualified.rpartition(".")
        if prefix and local in self.mapping:
            return f"{prefix}.{self.mapping[local]}"
        return None

    def then(self, other: "ActionMap") -> "ActionMap":
        """Compose: apply self, then ``other``."""
        return ActionMap({k: other.mapping[v] for k, v in self.mapping.items()
                          if v in other.mapping})


def _spec_atoms(sd: SystemDef, e: A.SpecExpr) -> list[str]:
    if isinstance(e, A.SpecAtom):
        return [e.name]
    if isinstance(e, A.SpecSeq):
        return _spec_atoms(sd, e.first) + _spec_atoms(sd, e.second)
    if isinstance(e, (A.SpecChoice, A.SpecPar)):
        return _spec_atoms(sd, e.left) + _spec_atoms(sd, e.right)
    if isinstance(e, A.SpecAlways):
        return _spec_atoms(sd, e.body)
    return []


def _reachable_actions(sd: SystemDef, spec: str) -> list[str]:
    """Actions reachable from ``spec`` through nested spec references."""
    seen_specs = {spec}
    stack = [spec]
    actions: list[str] = []
    while stack:
        for atom in _spec_atoms(sd, sd.specs[stack.pop()].body):
            if atom in sd.specs:
                if atom not in seen_specs:
                    seen_specs.add(atom)
                    stack.append(atom)
            elif atom in sd.actions and atom not in actions:
                actions.append(atom)
    return actions


def derive_action_map(abstract: SystemDef, refined: SystemDef) -> ActionMap:
    """Map refined actions onto the abstract actions they implement.

    Abstract actions shadowed by an abstract spec of the same name are not
    observable and are ignored. A refined spec named after an observable
    abstract action maps every action reachable from it to that action.
    """
    observable = [a for a in abstract.actions if a not in abstract.specs]
    mapping: dict[str, str] = {}
    owner: dict[str, str] = {}
    for name in observable:
        if name not in refined.specs:
            continue
        for act in _reachable_actions(refined, name):
            if act in owner and owner[act] != name:
                raise AmbiguousMapping(
                    f"action '{act}' is part of both spec '{owner[act]}' and spec '{name}'",
                    refined.actions[act].span)
            owner[act] = name
            mapping[act] = name
    for name in observable:
        if name in refined.actions and name not in refined.specs and name not in mapping:
            mapping[name] = name
    unmapped = tuple(a for a in refined.actions if a not in mapping)
    return ActionMap(mapping, unmapped)


@dataclass(frozen=True)
class Simulated:
    size: int
    status = "SIMULATED"


@dataclass(frozen=True)
class NotSimulated:
    refined_node: int
    candidates: frozenset[int]
    action: Optional[str]
    trace: Trace = field(compare=False)
    status = "NOT SIMULATED"


SimulationResult = Union[Simulated, NotSimulated]


def _shared_keys(abstract: Lts, refined: Lts) -> list[str]:
    refined_keys = set(refined.configs[0].state.keys_)
    return [k for k in abstract.configs[0].state.keys_ if k in refined_keys]


def check_simulation(abstract: Lts, refined: Lts, amap: Optional[ActionMap] = None,
                     strict: bool = True) -> SimulationResult:
    """Decide whether ``abstract`` weakly simulates ``refined``.

    Computes the greatest relation R over (refined node, abstract node) pairs
    reachable from the initial pair, such that every internal refined step
    stays related to the same abstract node and every observable refined step
    is matched by an abstract step with the same action into a related pair.
    In strict mode the state variables of the abstract system must also agree
    at the initial pair and after every observable match.
    """
    if abstract.truncated or refined.truncated:
        which = "abstract" if abstract.truncated else "refined"
        raise TruncatedInput(f"the {which} transition system was truncated; "
                             "simulation needs complete inputs")
    if amap is None:
        amap = ActionMap.of_lts(refined)

    keys = _shared_keys(abstract, refined) if strict else []
    a_proj = [tuple(c.state[k] for k in keys) for c in abstract.configs]
    r_proj = [tuple(c.state[k] for k in keys) for c in refined.configs]

    # Classify refined edges: observable abstract action, or None for internal.
    observable: list[Optional[str]] = []
    for e in refined.edges:
        m = amap.lookup(e.action)
        if m is None:
            raise UnmappedAction(f"refined action '{e.action}' has no abstract counterpart")
        observable.append(m if m == e.action or m in e.completes else None)

    a_succ: list[dict[str, list[int]]] = []
    for node in range(abstract.num_nodes):
        by_action: dict[str, list[int]] = {}
        for e in abstract.successors(node):
            by_action.setdefault(e.action, []).append(e.dst)
        a_succ.append(by_action)

    def matches(edge_index: int, a: int) -> list[int]:
        e = refined.edges[edge_index]
        if observable[edge_index] is None:
            return [a]
        return [d for d in a_succ[a].get(observable[edge_index], [])
                if r_proj[e.dst] == a_proj[d]]

    if r_proj[0] != a_proj[0]:
        return NotSimulated(0, frozenset({0}), None, _trace(refined, [0], []))

    # Pair graph reachable from (0, 0). Each (pair, refined edge) obligation
    # counts its candidate pairs that are still alive.
    start = (0, 0)
    pairs = {start}
    order = [start]
    alive_count: dict[tuple[tuple[int, int], int], int] = {}
    waiting_on: dict[tuple[int, int], list[tuple[tuple[int, int], int]]] = {}
    dead: dict[tuple[int, int], tuple[int, int]] = {}
    queue: list[tuple[int, int]] = []
    i = 0
    while i < len(order):
        pair = order[i]
        i += 1
        r, a = pair
        for ei in refined.out[r]:
            cands = matches(ei, a)
            alive_count[(pair, ei)] = len(cands)
            if not cands and pair not in dead:
                dead[pair] = (len(dead), ei)
                queue.append(pair)
            for d in cands:
                succ = (refined.edges[ei].dst, d)
                waiting_on.setdefault(succ, []).append((pair, ei))
                if succ not in pairs:
                    pairs.add(succ)
                    order.append(succ)

    while queue:
        gone = queue.pop()
        for pair, ei in waiting_on.get(gone, ()):
            alive_count[(pair, ei)] -= 1
            if alive_count[(pair, ei)] == 0 and pair not in dead:
                dead[pair] = (len(dead), ei)
                queue.append(pair)

    if start not in dead:
        return Simulated(len(pairs) - len(dead))
    return _explain(abstract, refined, dead, observable, matches)


def _explain(abstract: Lts, refined: Lts, dead, observable, matches) -> NotSimulated:
    """Follow removal reasons from the initial pair down to a step the
    abstract side cannot match at all."""
    nodes = [0]
    actions: list[str] = []
    r, a = 0, 0
    while True:
        _, ei = dead[(r, a)]
        e = refined.edges[ei]
        nodes.append(e.dst)
        actions.append(e.action)
        cands = matches(ei, a)
        if not cands:
            every = frozenset(x.dst for x in abstract.successors(a)
                              if x.action == observable[ei])
            return NotSimulated(e.src, every, observable[ei], _trace(refined, nodes, actions))
        # Every candidate died earlier; chase the one removed first.
        a = min(cands, key=lambda d: dead[(e.dst, d)][0])
        r = e.dst


def _trace(refined: Lts, nodes: list[int], actions: list[str]) -> Trace:
    return Trace([refined.configs[n].state for n in nodes], actions, nodes)


def render_result(result: SimulationResult) -> str:
    if isinstance(result, Simulated):
        return f"SIMULATED (|R|={result.size})"
    if result.action is None:
        head = "NOT SIMULATED: initial states disagree"
    else:
        cands = ", ".join(str(c) for c in sorted(result.candidates)) or "none"
        head = (f"NOT SIMULATED: offending action {result.action} at refined node "
                f"{result.refined_node} (abstract candidates: {cands})")
    body = "\n".join("  " + line for line in result.trace.render().splitlines())
    return f"{head}\n{body}"


def result_json(result: SimulationResult) -> dict[str, Any]:
    if isinstance(result, Simulated):
        return {"name": "refinement", "status": result.status, "size": result.size}
    return {
        "name": "refinement",
        "status": result.status,
        "refined_node": result.refined_node,
        "candidates": sorted(result.candidates),
        "action": result.action,
        "trace": result.trace.to_json(),
    }
