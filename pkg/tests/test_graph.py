import itertools
import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kappa3.errors import BadGraph, BadVertex, EmptyGraph, TooSmall
from kappa3.graph import (
    EDGE,
    INTERNAL,
    Graph,
    SteinerTree,
    TerminalSet,
    TreePacking,
    bfs_distances,
    complete_graph,
    cycle_graph,
    edge_connectivity,
    induced_edge_count,
    is_connected,
    min_degree,
    path_graph,
    validate_packing,
    vertex_connectivity,
)
from kappa3.random_models import sample_gnp


def small_graphs():
    return st.integers(2, 7).flatmap(
        lambda n: st.lists(st.sampled_from(list(itertools.combinations(range(n), 2))), unique=True).map(
            lambda es: Graph(n, es)
        )
    )


def test_graph_rejects_loops_duplicates_and_range():
    with pytest.raises(BadGraph):
        Graph(3, [(1, 1)])
    with pytest.raises(BadGraph):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(BadVertex):
        Graph(3, [(0, 3)])


def test_graph_is_canonical_and_symmetric():
    g = Graph(4, [(3, 1), (2, 0), (1, 0)])
    assert g.edges == ((0, 1), (0, 2), (1, 3))
    for u in range(g.n):
        for v in g.neighbors(u):
            assert u in g.neighbors(v)
    assert g.m <= g.max_edges == 6


def test_min_degree_examples():
    assert min_degree(complete_graph(4)) == 3
    assert min_degree(path_graph(4)) == 1
    assert min_degree(cycle_graph(5)) == 2
    with pytest.raises(EmptyGraph):
        min_degree(Graph(0))


def test_induced_edge_count_examples():
    assert induced_edge_count(complete_graph(4), {0, 1, 2}) == 3
    assert induced_edge_count(cycle_graph(5), set()) == 0
    assert induced_edge_count(cycle_graph(6), {0, 2, 4}) == 0
    with pytest.raises(BadVertex):
        induced_edge_count(cycle_graph(4), {7})


def test_bfs_distances_examples():
    assert bfs_distances(cycle_graph(6), 0) == [0, 1, 2, 3, 2, 1]
    d = bfs_distances(Graph(4, [(0, 1), (2, 3)]), 0)
    assert d[:2] == [0, 1] and math.isinf(d[2]) and math.isinf(d[3])
    assert bfs_distances(complete_graph(4), 2) == [1, 1, 0, 1]
    with pytest.raises(BadVertex):
        bfs_distances(complete_graph(4), 4)


def test_vertex_connectivity_examples(two_triangles):
    assert vertex_connectivity(complete_graph(4)) == 3
    assert vertex_connectivity(cycle_graph(5)) == 2
    assert vertex_connectivity(two_triangles) == 1
    assert vertex_connectivity(Graph(4, [(0, 1), (2, 3)])) == 0
    with pytest.raises(TooSmall):
        vertex_connectivity(Graph(1))


def test_edge_connectivity_examples():
    assert edge_connectivity(complete_graph(4)) == 3
    assert edge_connectivity(path_graph(3)) == 1
    assert edge_connectivity(cycle_graph(5)) == 2
    assert edge_connectivity(Graph(4, [(0, 1), (2, 3)])) == 0


def _cut_vertex_connectivity(g):
    # smallest vertex set whose removal disconnects g (n-1 for complete graphs)
    n = g.n
    for size in range(n - 1):
        for cut in itertools.combinations(range(n), size):
            rest = [v for v in range(n) if v not in cut]
            h = nx.Graph()
            h.add_nodes_from(rest)
            h.add_edges_from(e for e in g.edges if e[0] in rest and e[1] in rest)
            if len(rest) >= 2 and not nx.is_connected(h):
                return size
    return n - 1


def _cut_edge_connectivity(g):
    for size in range(g.m + 1):
        for cut in itertools.combinations(g.edges, size):
            h = nx.Graph()
            h.add_nodes_from(range(g.n))
            h.add_edges_from(e for e in g.edges if e not in cut)
            if not nx.is_connected(h):
                return size
    return g.m


@settings(max_examples=80, deadline=None)
@given(small_graphs())
def test_connectivity_matches_cut_enumeration(g):
    assert vertex_connectivity(g) == _cut_vertex_connectivity(g)
    assert edge_connectivity(g) == _cut_edge_connectivity(g)


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_kappa_lambda_delta_chain(g):
    assert vertex_connectivity(g) <= edge_connectivity(g) <= min_degree(g)


def test_connectivity_on_larger_random_graphs_matches_networkx():
    for seed in range(4):
        g = sample_gnp(120, 0.06, seed)
        h = nx.Graph(list(g.edges))
        h.add_nodes_from(range(g.n))
        assert vertex_connectivity(g) == nx.node_connectivity(h)
        assert edge_connectivity(g) == nx.edge_connectivity(h)


@settings(max_examples=50, deadline=None)
@given(small_graphs(), st.data())
def test_bfs_adjacent_vertices_differ_by_at_most_one(g, data):
    root = data.draw(st.integers(0, g.n - 1))
    d = bfs_distances(g, root)
    for u, v in g.edges:
        if not math.isinf(d[u]):
            assert abs(d[u] - d[v]) <= 1


def test_is_connected():
    assert is_connected(cycle_graph(5))
    assert not is_connected(Graph(3, [(0, 1)]))


K4_S = TerminalSet((0, 1, 2))
PATH = SteinerTree.from_edges([(0, 1), (1, 2)])
STAR = SteinerTree.from_edges([(3, 0), (3, 1), (3, 2)])


def test_validate_packing_examples():
    g = complete_graph(4)
    assert validate_packing(g, TreePacking(K4_S, [PATH, STAR], INTERNAL)) == []
    assert validate_packing(g, TreePacking(K4_S, [PATH, STAR], EDGE)) == []
    kinds = {v.kind for v in validate_packing(g, TreePacking(K4_S, [PATH, PATH], INTERNAL))}
    assert "shared_edge" in kinds


def test_validate_packing_violation_kinds():
    g = cycle_graph(6)
    s = TerminalSet((0, 2, 4))
    missing = SteinerTree.from_edges([(0, 2), (2, 4)])
    assert "missing_edge" in {v.kind for v in validate_packing(g, TreePacking(s, [missing]))}
    short = SteinerTree.from_edges([(0, 1), (1, 2)])
    assert "not_spanning" in {v.kind for v in validate_packing(g, TreePacking(s, [short]))}
    cyc = SteinerTree.from_edges(cycle_graph(6).edges)
    assert "cycle" in {v.kind for v in validate_packing(g, TreePacking(s, [cyc]))}
    k5 = complete_graph(5)
    s5 = TerminalSet((0, 1, 2))
    a = SteinerTree.from_edges([(0, 3), (3, 1), (3, 2)])
    b = SteinerTree.from_edges([(0, 4), (4, 3), (1, 4), (2, 4)])
    kinds = {v.kind for v in validate_packing(k5, TreePacking(s5, [a, SteinerTree.from_edges([(0, 4), (4, 1), (4, 2)])]))}
    assert kinds == set()
    kinds = {v.kind for v in validate_packing(k5, TreePacking(s5, [a, b]))}
    assert "shared_internal_vertex" in kinds or "cycle" in kinds
    assert validate_packing(k5, TreePacking(s5, [a], "bogus"))[0].kind == "bad_mode"


def test_valid_packing_is_bounded_by_terminal_degree():
    g = complete_graph(4)
    p = TreePacking(K4_S, [PATH, STAR], INTERNAL)
    assert validate_packing(g, p) == []
    assert len(p) <= min(g.degree(t) for t in K4_S)


def test_terminal_set_rules():
    with pytest.raises(BadVertex):
        TerminalSet((0, 0, 1))
    with pytest.raises(BadVertex):
        TerminalSet.coerce((0, 1, 9), complete_graph(4))
