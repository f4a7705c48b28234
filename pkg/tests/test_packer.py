import random

import pytest

from kappa3.errors import OutOfDomain, PackerFailure
from kappa3.graph import Graph, complete_graph, path_graph, star_graph, validate_packing
from kappa3.packer import (
    PackerConfig,
    Transcript,
    assemble_trees,
    classify_vertices,
    grow_ary_tree,
    grow_terminal_tree,
    pack,
    packer_lower_bound,
    pair_vice_trees,
    reduce_small_terminals,
)
from kappa3.random_models import sample_gnp, threshold_p
from kappa3.steiner import kappa_S_exact


def cfg(d=2, tau=0.0, duv=1, dw=1, k=1):
    return PackerConfig(arity=d, tau=tau, depth_uv=duv, depth_w=dw, k=k)


def test_classify_examples():
    large, small = classify_vertices(complete_graph(4), 3)
    assert large == frozenset(range(4)) and not small
    large, small = classify_vertices(star_graph(5), 2)
    assert large == {0} and small == {1, 2, 3, 4, 5}
    assert classify_vertices(path_graph(4), 0)[0] == frozenset(range(4))


def test_grow_ary_tree_shape_on_k9():
    t = grow_ary_tree(complete_graph(9), 0, cfg(duv=2))
    assert len(t.vertices) == 7
    assert len(t.children(t.root)) == 2
    assert all(len(t.children(c)) == 2 for c in t.children(t.root))
    assert len(t.leaves) == 4


def test_grow_too_deep_fails():
    with pytest.raises(PackerFailure) as exc:
        grow_ary_tree(complete_graph(6), 0, cfg(duv=2))
    assert exc.value.stage == "growth"
    with pytest.raises(PackerFailure):
        grow_terminal_tree(complete_graph(6), 0, cfg(dw=2))


def test_grow_respects_forbidden_and_transcript():
    tr = Transcript()
    t = grow_terminal_tree(complete_graph(12), 0, cfg(dw=2), forbidden={1, 2, 3}, transcript=tr)
    assert not t.vertices & {1, 2, 3}
    assert len(t.vertices) == 7
    assert tr.entries and all(e["tree"] >= 0 and e["earlier"] >= 0 for e in tr.entries)


def test_pairing_on_k12():
    g = complete_graph(12)
    c = cfg(duv=1)
    tu = grow_ary_tree(g, 0, c, forbidden={1})
    tv = grow_ary_tree(g, 1, c, forbidden=tu.vertices)
    pairs = pair_vice_trees(g, tu, tv)
    assert len(pairs) == 2
    assert len({p.u_child for p in pairs}) == 2 and len({p.v_child for p in pairs}) == 2
    for p in pairs:
        assert g.has_edge(p.y, p.z)


def test_pairing_without_leaf_edges_is_empty():
    # two disjoint stars hanging from u and v, no edges between their leaves
    g = Graph(6, [(0, 1), (0, 2), (3, 4), (3, 5), (0, 3)])
    c = cfg(duv=1)
    tu = grow_ary_tree(g, 0, c, forbidden={3})
    tv = grow_ary_tree(g, 3, c, forbidden=tu.vertices)
    assert pair_vice_trees(g, tu, tv) == []


def test_assemble_k0_and_k15():
    g = complete_graph(15)
    c = cfg(k=2)
    tu = grow_ary_tree(g, 0, c, forbidden={1, 2})
    tv = grow_ary_tree(g, 1, c, forbidden=tu.vertices | {2})
    pairs = pair_vice_trees(g, tu, tv)
    tw = grow_terminal_tree(g, 2, c, forbidden=tu.vertices | tv.vertices)
    assert len(assemble_trees(g, 0, 1, 2, pairs, tw, 0, tu, tv)) == 0
    p = assemble_trees(g, 0, 1, 2, pairs, tw, 2, tu, tv)
    assert len(p) == 2 and validate_packing(g, p) == []


def test_pack_k15_and_k20():
    p = pack(complete_graph(15), (0, 1, 2), cfg(k=2))
    assert len(p) >= 2 and validate_packing(complete_graph(15), p) == []
    p = pack(complete_graph(20), (3, 7, 11), cfg(k=2))
    assert len(p) >= 2 and validate_packing(complete_graph(20), p) == []


def test_pack_disconnected_fails_at_growth():
    g = Graph(9, [(0, 3), (0, 4), (1, 5), (1, 6), (2, 7), (2, 8)])
    with pytest.raises(PackerFailure) as exc:
        pack(g, (0, 1, 2), cfg())
    assert exc.value.stage in ("growth", "pairing")


def test_reduce_large_terminals_on_k20():
    proxies = reduce_small_terminals(complete_graph(20), (0, 1, 2), 5, 3)
    assert len(proxies) == 3
    flat = [x for t in proxies for x in t]
    assert len(set(flat)) == 9 and not set(flat) & {0, 1, 2}


def test_reduce_fact1_failure():
    with pytest.raises(PackerFailure) as exc:
        reduce_small_terminals(path_graph(5), (0, 2, 4), 3, 1)
    assert exc.value.stage == "reduction" and exc.value.detail["fact"] == 1


def test_reduce_not_enough_large_neighbours():
    g = complete_graph(6)
    with pytest.raises(PackerFailure):
        reduce_small_terminals(g, (0, 1, 2), 1, 2)


def test_small_terminal_via_proxies():
    # terminal 20 hangs off two vertices of K20
    edges = [(a, b) for a in range(20) for b in range(a + 1, 20)] + [(20, 5), (20, 6)]
    g = Graph(21, edges)
    p = pack(g, (0, 1, 20), cfg(tau=3, k=2))
    assert len(p) == 2 and validate_packing(g, p) == []


def test_pack_is_deterministic():
    g = sample_gnp(400, 3 * threshold_p(400, 1), 11)
    c = PackerConfig.desk_defaults()
    assert packer_lower_bound(g, (0, 1, 2), c) == packer_lower_bound(g, (0, 1, 2), c)


def test_pack_never_beats_exact():
    rng = random.Random(3)
    checked = 0
    for _ in range(60):
        g = sample_gnp(12, rng.uniform(0.5, 1.0), rng.getrandbits(32))
        s = tuple(rng.sample(range(12), 3))
        try:
            p = pack(g, s, cfg(d=2, tau=0.0))
        except PackerFailure:
            continue
        checked += 1
        assert validate_packing(g, p) == []
        assert len(p) <= kappa_S_exact(g, s)
    assert checked > 0


def test_config_roundtrip_and_defaults():
    c = PackerConfig.desk_defaults(k=2)
    assert PackerConfig.from_json(c.dumps()).to_json() == c.to_json()
    assert c.paths_cap == 25
    big = PackerConfig.paper_defaults(10**6)
    assert big.arity == 1 and big.tau == pytest.approx(0.138155, abs=1e-5)
    with pytest.raises(OutOfDomain):
        PackerConfig.paper_defaults(10)
    with pytest.raises(ValueError):
        PackerConfig(0, 1, 1, 1)
