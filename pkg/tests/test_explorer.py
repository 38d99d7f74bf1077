from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings

from seni.core import elaborate
from seni.explorer import (
    build_lts,
    export_dot,
    export_json,
    export_text,
    iter_reachable_states,
    random_walk,
)
from seni.sema import check_source

from conftest import corpus_lts, source_lts
from randsys import systems

COUNTER = """
system C {
    state int x;
    action Inc { @.x: (@.x + 1) mod 4; }
    spec Main { always (Inc) }
    prop Zero { @.x = 0 }
}
"""


def test_abstract_philosopher_counts(abstract_lts):
    assert (abstract_lts.num_nodes, abstract_lts.num_edges) == (2, 2)
    assert not abstract_lts.truncated
    assert all(abstract_lts.expanded)


def test_refined_philosopher_counts(refined_lts):
    assert (refined_lts.num_nodes, refined_lts.num_edges) == (6, 8)
    assert refined_lts.distinct_states() == 6


def test_table_counts(table_lts):
    assert table_lts.num_nodes == 5832
    assert table_lts.num_edges == 46656
    assert not table_lts.truncated


def test_counter_is_a_cycle():
    lts = source_lts(COUNTER)
    assert [(e.src, e.action, e.dst) for e in lts.edges] == [
        (0, "Inc", 1), (1, "Inc", 2), (2, "Inc", 3), (3, "Inc", 0)]
    assert [sorted(l) for l in lts.labels] == [["Zero"], [], [], []]
    assert lts.depth == [0, 1, 2, 3]


@pytest.mark.parametrize("bound", [1, 2, 3])
def test_truncation_flags(bound):
    lts = source_lts(COUNTER, max_states=bound)
    assert lts.num_nodes == bound and lts.truncated
    # Only the last node lost its successor.
    assert lts.expanded == [True] * (bound - 1) + [False]


def test_bound_equal_to_size_is_not_truncated():
    lts = source_lts(COUNTER, max_states=4)
    assert not lts.truncated and all(lts.expanded)


def test_invalid_bound():
    program = check_source(COUNTER)
    with pytest.raises(ValueError):
        build_lts(elaborate(program, "C"), 0)


def test_trace_to_is_bfs_shortest(table_lts):
    for node in random.Random(3).sample(range(table_lts.num_nodes), 50):
        trace = table_lts.trace_to(node)
        assert len(trace) == table_lts.depth[node]
        assert trace.nodes[-1] == node
        assert trace.states[-1] == table_lts.configs[node].state


def test_parent_edges_point_back(table_lts):
    for node in range(1, table_lts.num_nodes):
        edge = table_lts.edges[table_lts.parents[node]]
        assert edge.dst == node
        assert table_lts.depth[edge.src] + 1 == table_lts.depth[node]


def test_exploration_is_deterministic():
    a = corpus_lts("refined-philosopher", "Philosopher.seni")
    b = corpus_lts("refined-philosopher", "Philosopher.seni")
    assert export_text(a) == export_text(b)


def test_dot_export(abstract_lts):
    dot = export_dot(abstract_lts)
    assert dot.startswith("digraph LTS {\n")
    assert '0 [shape=doublecircle' in dot
    assert '0 -> 1 [label="PickFork"];' in dot
    assert "truncated" not in dot


def test_dot_marks_truncation():
    assert export_dot(source_lts(COUNTER, max_states=2)).rstrip().endswith("// truncated at 2")


def test_text_export():
    assert export_text(source_lts(COUNTER)) == (
        "init 0\nnode 0 Zero\nnode 1\nnode 2\nnode 3\n"
        "edge 0 Inc 1\nedge 1 Inc 2\nedge 2 Inc 3\nedge 3 Inc 0\n")


def test_json_export_round_trips(refined_lts):
    doc = json.loads(json.dumps(export_json(refined_lts)))
    assert len(doc["nodes"]) == 6 and len(doc["edges"]) == 8
    assert doc["initial"] == 0 and doc["truncated"] is False


def test_reachable_states_are_distinct(refined_lts):
    states = list(iter_reachable_states(refined_lts))
    assert len(states) == len(set(states)) == 6


def test_random_walk_is_seeded(abstract_lts):
    inst = abstract_lts.instance
    a = random_walk(inst, 6, seed=5)
    b = random_walk(inst, 6, seed=5)
    assert a.render() == b.render()
    assert a.actions == ["PickFork", "ReturnFork"] * 3


def test_random_walk_stops_at_termination():
    lts = source_lts("system S { state int x; action A { @.x: 1; } spec Main { A } }")
    walk = random_walk(lts.instance, 5)
    assert walk.actions == ["A"]


def test_zero_step_walk():
    walk = random_walk(source_lts(COUNTER).instance, 0)
    assert walk.actions == [] and walk.render().startswith("initial: x = 0")


@settings(max_examples=40)
@given(systems())
def test_random_systems_edges_are_consistent(gen):
    lts = source_lts(gen.source, "Top", args=("1",), max_states=20_000)
    seen = set()
    for i, c in enumerate(lts.configs):
        assert c not in seen
        seen.add(c)
    for e in lts.edges:
        assert e.src < lts.num_nodes and e.dst < lts.num_nodes
        assert e.dst in {x.dst for x in lts.successors(e.src)}


@pytest.mark.parametrize("seed", range(5))
def test_seeded_walks_follow_lts_edges(table_lts, seed):
    walk = random_walk(table_lts.instance, 25, seed)
    node = 0
    for action, state in zip(walk.actions, walk.states[1:]):
        nxt = [e.dst for e in table_lts.successors(node)
               if e.action == action and table_lts.configs[e.dst].state == state]
        assert nxt
        node = nxt[0]


def test_bound_one_gives_single_truncated_node(abstract_lts):
    lts = build_lts(abstract_lts.instance, 1)
    assert lts.num_nodes == 1 and lts.num_edges == 0 and lts.truncated


@pytest.mark.parametrize("bound", [6, 7, 100])
def test_bounds_above_size_give_identical_lts(refined_lts, bound):
    assert export_text(build_lts(refined_lts.instance, bound)) == export_text(refined_lts)
