import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canmsg.errors import WindowTooSmall
from canmsg.msg_graph import (
    MessageSequenceGraph,
    compute_msg,
    edge_vectors,
    encode_pids,
    graph_from_pids,
    to_dot,
    window_counts,
)
from canmsg.can_log import windowize

from .conftest import frames_from_pids


def test_alternating():
    g = graph_from_pids(list("ABAB"))
    assert dict(g.edges) == {("A", "B"): 2, ("B", "A"): 1}
    assert g.total == 3


def test_self_loop():
    assert dict(graph_from_pids(list("AAA")).edges) == {("A", "A"): 2}


def test_minimal_window():
    assert dict(graph_from_pids(["A", "B"]).edges) == {("A", "B"): 1}


def test_single_message_rejected():
    with pytest.raises(WindowTooSmall):
        graph_from_pids(["A"])


def test_counts_must_be_positive():
    with pytest.raises(ValueError):
        MessageSequenceGraph({("A", "B"): 0})


def test_nodes_cover_edges():
    g = MessageSequenceGraph({("A", "B"): 1}, nodes=frozenset({"C"}))
    assert g.nodes == {"A", "B", "C"}


def test_edges_are_read_only():
    g = graph_from_pids(list("AB"))
    with pytest.raises(TypeError):
        g.edges[("A", "B")] = 5


def test_edge_vectors_union():
    g1 = MessageSequenceGraph({("A", "B"): 3})
    g2 = MessageSequenceGraph({("A", "B"): 1, ("B", "A"): 2})
    x, y, keys = edge_vectors(g1, g2)
    assert keys == [("A", "B"), ("B", "A")]
    assert x.tolist() == [3, 0] and y.tolist() == [1, 2]


def test_edge_vectors_identity():
    g = graph_from_pids(list("ABCAB"))
    x, y, _ = edge_vectors(g, g)
    assert np.array_equal(x, y)


pid_lists = st.lists(st.sampled_from(["1A0", "2B0", "3C0", "7DF", "100"]), min_size=2, max_size=200)


@given(pid_lists)
def test_conservation(pids):
    g = graph_from_pids(pids)
    assert g.total == len(pids) - 1
    assert all(c >= 1 for c in g.edges.values())
    assert all(a in g.nodes and b in g.nodes for a, b in g.edges)


@given(pid_lists)
def test_reversal_flips_every_edge(pids):
    fwd = graph_from_pids(pids)
    rev = graph_from_pids(pids[::-1])
    assert dict(rev.edges) == {(b, a): c for (a, b), c in fwd.edges.items()}


def test_payload_and_timestamps_do_not_matter():
    pids = ["1", "2", "1", "3", "3", "2"]
    a = frames_from_pids(pids, step_us=10)
    b = frames_from_pids(pids, t0_us=99, step_us=777)
    b = [type(f)(f.timestamp_us, f.bus, f.pid, b"\xff" * 8) for f in b]
    assert compute_msg(a).edges == compute_msg(b).edges


def test_compute_msg_keeps_window_index():
    w = windowize(frames_from_pids(list("ABCABCABCA")), 5)
    graphs = [compute_msg(win) for win in w.windows]
    assert [g.window_index for g in graphs] == [0, 1]


def test_dot_export():
    dot = to_dot(graph_from_pids(list("ABA")), "g0")
    assert dot.startswith("digraph g0 {")
    assert '"A" -> "B" [label="1"];' in dot and '"B" -> "A" [label="1"];' in dot
    assert dot.rstrip().endswith("}")


def test_encode_pids_sorted_vocab():
    codes, vocab = encode_pids(["B", "A", "C", "A"])
    assert vocab == ["A", "B", "C"] and codes.tolist() == [1, 0, 2, 0]


@pytest.mark.parametrize("window, stride", [(10, None), (7, 3), (2, 1), (50, 50)])
def test_bulk_counts_match_graphs(window, stride):
    rnd = random.Random(window)
    pids = [rnd.choice("ABCDEFG") for _ in range(503)]
    wc = window_counts(pids, window, stride)
    step = stride or window
    for w in range(wc.n_windows):
        s = w * step
        assert dict(wc.graph(w).edges) == dict(graph_from_pids(pids[s : s + window]).edges)
