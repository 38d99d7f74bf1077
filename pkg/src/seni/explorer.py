"""Breadth-first construction of the labelled transition system of an instance."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from seni.core import (
    DONE,
    ActionInstance,
    Proc,
    StateVector,
    SystemInstance,
    apply_action,
    proc_steps,
)
from seni.errors import EvalFault
from seni.interp import format_value, to_json

DEFAULT_MAX_STATES = 1_000_000


@dataclass(frozen=True)
class Configuration:
    """A node of the LTS: the remaining process and the current state vector."""

    control: Proc
    state: StateVector

    @property
    def finished(self) -> bool:
        return self.control is DONE


@dataclass(frozen=True)
class Edge:
    src: int
    action: str
    dst: int
    completes: tuple[str, ...] = ()


@dataclass
class Trace:
    """A path from the initial node: ``states[i] --actions[i]--> states[i+1]``.

    A trace attached to a runtime fault ends with the failing action, which
    has no post state.
    """

    states: list[StateVector]
    actions: list[str]
    nodes: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)

    def step_changes(self, i: int) -> list[tuple[str, Any]]:
        """(variable, new value) pairs changed by step ``i``."""
        if i + 1 >= len(self.states):
            return []
        return [(k, new) for k, _, new in self.states[i].diff(self.states[i + 1])]

    def render(self) -> str:
        """The initial state, then one ``action -> changes`` line per step."""
        if not self.states:
            return "(empty trace)"
        lines = [f"initial: {self.states[0].render()}"]
        for i, action in enumerate(self.actions):
            if i + 1 >= len(self.states):
                lines.append(f"{action} -> (fails)")
                continue
            changes = ", ".join(f"{k} = {format_value(v)}" for k, v in self.step_changes(i))
            lines.append(f"{action} -> {changes or '(no change)'}")
        return "\n".join(lines)

    def to_json(self) -> dict[str, Any]:
        return {
            "initial": {k: to_json(v) for k, v in self.states[0].items()} if self.states else {},
            "steps": [{"action": a, "changes": {k: to_json(v) for k, v in self.step_changes(i)}}
                      for i, a in enumerate(self.actions)],
        }


@dataclass
class Lts:
    """Explored transition system. Node 0 is the initial configuration."""

    instance: SystemInstance
    configs: list[Configuration]
    edges: list[Edge]
    labels: list[frozenset[str]]
    out: list[list[int]]
    parents: list[Optional[int]]
    depth: list[int]
    expanded: list[bool]
    truncated: bool
    bound: int

    initial: int = 0

    @property
    def num_nodes(self) -> int:
        return len(self.configs)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def prop_names(self) -> list[str]:
        return self.instance.prop_names

    def distinct_states(self) -> int:
        return len({c.state for c in self.configs})

    def successors(self, node: int) -> list[Edge]:
        return [self.edges[i] for i in self.out[node]]

    def action_names(self) -> set[str]:
        return {e.action for e in self.edges}

    def trace_to(self, node: int) -> Trace:
        """BFS-shortest path from the initial node to ``node``."""
        edges: list[Edge] = []
        while self.parents[node] is not None:
            edge = self.edges[self.parents[node]]
            edges.append(edge)
            node = edge.src
        edges.reverse()
        nodes = [self.initial] + [e.dst for e in edges]
        return Trace([self.configs[n].state for n in nodes], [e.action for e in edges], nodes)

    def stats(self) -> dict[str, Any]:
        return {
            "nodes": self.num_nodes,
            "edges": self.num_edges,
            "distinct_states": self.distinct_states(),
            "truncated": self.truncated,
            "max_states": self.bound,
        }


def enabled_steps(config: Configuration) -> list[tuple[ActionInstance, Configuration]]:
    """Every (action, successor) pair of a configuration, in deterministic order."""
    return [(act, Configuration(cont, apply_action(config.state, act)))
            for act, cont, _ in proc_steps(config.control)]


def build_lts(inst: SystemInstance, max_states: int = DEFAULT_MAX_STATES) -> Lts:
    """Explore breadth-first from the initial configuration.

    At most ``max_states`` nodes are kept. ``truncated`` is set exactly when
    some successor had to be dropped; nodes that lost a successor are left
    marked as not fully expanded.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    start = Configuration(inst.main, inst.initial_state)
    index: dict[Configuration, int] = {start: 0}
    configs = [start]
    parents: list[Optional[int]] = [None]
    depth = [0]
    edges: list[Edge] = []
    out: list[list[int]] = [[]]
    expanded: list[bool] = []
    truncated = False
    step_cache: dict[Proc, list] = {}

    node = -1
    while node + 1 < len(configs):
        node += 1
        config = configs[node]
        steps = step_cache.get(config.control)
        if steps is None:
            steps = proc_steps(config.control)
            step_cache[config.control] = steps
        complete = True
        for act, cont, completes in steps:
            try:
                post = apply_action(config.state, act)
            except EvalFault as fault:
                partial = _partial_lts(inst, configs, edges, out, parents, depth,
                                       expanded, max_states)
                trace = partial.trace_to(node)
                trace.actions.append(act.name)
                fault.trace = trace
                raise
            succ = Configuration(cont, post)
            dst = index.get(succ)
            if dst is None:
                if len(configs) >= max_states:
                    truncated = True
                    complete = False
                    continue
                dst = len(configs)
                index[succ] = dst
                configs.append(succ)
                parents.append(len(edges))
                depth.append(depth[node] + 1)
                out.append([])
            out[node].append(len(edges))
            edges.append(Edge(node, act.name, dst, completes))
        expanded.append(complete)

    labels = _label_all(inst, configs)
    return Lts(inst, configs, edges, labels, out, parents, depth, expanded, truncated, max_states)


def _label_all(inst: SystemInstance, configs: list[Configuration]) -> list[frozenset[str]]:
    cache: dict[StateVector, frozenset[str]] = {}
    labels = []
    for c in configs:
        lab = cache.get(c.state)
        if lab is None:
            lab = inst.label(c.state)
            cache[c.state] = lab
        labels.append(lab)
    return labels


def _partial_lts(inst, configs, edges, out, parents, depth, expanded, bound) -> Lts:
    return Lts(inst, configs, edges, [frozenset()] * len(configs), out, parents, depth,
               expanded + [False] * (len(configs) - len(expanded)), True, bound)


def random_walk(inst: SystemInstance, steps: int, seed: int = 0) -> Trace:
    """Follow uniformly chosen enabled steps for at most ``steps`` moves."""
    rng = random.Random(seed)
    config = Configuration(inst.main, inst.initial_state)
    states = [config.state]
    actions: list[str] = []
    for _ in range(steps):
        options = proc_steps(config.control)
        if not options:
            break
        act, cont, _ = options[rng.randrange(len(options))]
        try:
            post = apply_action(config.state, act)
        except EvalFault as fault:
            fault.trace = Trace(states, actions + [act.name])
            raise
        config = Configuration(cont, post)
        states.append(post)
        actions.append(act.name)
    return Trace(states, actions)


# -- export ----------------------------------------------------------------------------

def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(lts: Lts) -> str:
    lines = ["digraph LTS {"]
    for i, lab in enumerate(lts.labels):
        shape = "doublecircle" if i == lts.initial else "circle"
        props = ",".join(sorted(lab))
        lines.append(f'  {i} [shape={shape}, label="{i}\\n{_dot_escape(props)}"];')
    for e in lts.edges:
        lines.append(f'  {e.src} -> {e.dst} [label="{_dot_escape(e.action)}"];')
    lines.append("}")
    if lts.truncated:
        lines.append(f"// truncated at {lts.bound}")
    return "\n".join(lines) + "\n"


def export_text(lts: Lts) -> str:
    """Line-oriented form: ``init``, one ``node`` line per node, one ``edge`` line per edge."""
    lines = [f"init {lts.initial}"]
    for i, lab in enumerate(lts.labels):
        lines.append(f"node {i} {','.join(sorted(lab))}".rstrip())
    for e in lts.edges:
        lines.append(f"edge {e.src} {e.action} {e.dst}")
    if lts.truncated:
        lines.append(f"truncated {lts.bound}")
    return "\n".join(lines) + "\n"


def export_json(lts: Lts) -> dict[str, Any]:
    return {
        "initial": lts.initial,
        "nodes": [{"id": i, "props": sorted(lab)} for i, lab in enumerate(lts.labels)],
        "edges": [{"src": e.src, "action": e.action, "dst": e.dst} for e in lts.edges],
        "truncated": lts.truncated,
    }


def iter_reachable_states(lts: Lts) -> Iterable[StateVector]:
    seen = set()
    for c in lts.configs:
        if c.state not in seen:
            seen.add(c.state)
            yield c.state

