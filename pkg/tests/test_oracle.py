"""The explorer against an independent brute-force enumeration."""

from __future__ import annotations

from collections import Counter

import oracle


def _phil_state(state, prefix=""):
    h = state[prefix + "h"]
    return (state[prefix + "isThinking"], h.get("leftHand"), h.get("rightHand"))


def test_abstract_philosopher_matches_oracle(abstract_lts):
    ref = oracle.abstract_philosopher()
    assert (abstract_lts.num_nodes, abstract_lts.num_edges) == (ref.nodes, ref.edges) == (2, 2)


def test_refined_philosopher_matches_oracle(refined_lts):
    ref = oracle.refined_philosopher()
    assert (refined_lts.num_nodes, refined_lts.num_edges) == (ref.nodes, ref.edges) == (6, 8)
    ours = Counter(_phil_state(c.state) for c in refined_lts.configs)
    assert ours == Counter(ref.node_states)


def test_refined_waiting_labels_match_oracle(refined_lts):
    for labels, config in zip(refined_lts.labels, refined_lts.configs):
        assert ("Waiting" in labels) == oracle.waiting(_phil_state(config.state))


def test_refined_edge_multiset_matches_oracle(refined_lts):
    ref = oracle.refined_philosopher()
    assert Counter(e.action for e in refined_lts.edges) == Counter(a for _, a, _ in ref.edge_list)


def test_table_matches_oracle(table_lts):
    ref = oracle.table()
    assert table_lts.num_nodes == ref.configurations == 5832
    waiting = [i for i, lab in enumerate(table_lts.labels) if "AllWaiting" in lab]
    assert len(waiting) == ref.all_waiting_count
    assert table_lts.depth[waiting[0]] == ref.first_all_waiting_depth == 3
