"""Acceptance criteria 1-8, one test each, at the agreed tolerances.

Numbers worth reading are printed with capture disabled so they show up in
``pytest -v`` output.
"""

import itertools
import json
import random
import time

import networkx as nx

from kappa3.audit import EXHAUSTIVE, audit_dense_subsets, run_audit, validate_report
from kappa3.cli import main
from kappa3.errors import PackerFailure
from kappa3.graph import (
    EDGE,
    INTERNAL,
    complete_graph,
    cycle_graph,
    edge_connectivity,
    min_degree,
    validate_packing,
    vertex_connectivity,
)
from kappa3.lab import SweepSpec, chain_check, estimate_transition, fit_window, run_sweep, wilson
from kappa3.oracle import MAX_EDGES, oracle_enumerate
from kappa3.packer import PackerConfig, pack
from kappa3.random_models import ModelSpec, sample_gnp, threshold_p
from kappa3.steiner import kappa3_exact, kappa_S_exact, lambda3_exact, lambda_S_exact


def report(capsys, text):
    with capsys.disabled():
        print("\n    " + text)


def test_c1_oracle_equivalence(capsys):
    rng = random.Random(101)
    start = time.perf_counter()
    done = resampled = 0
    while done < 500:
        n = rng.randint(3, 7)
        p = (0.3, 0.5, 0.8)[done % 3]
        g = sample_gnp(n, p, rng.getrandbits(63))
        if g.m > MAX_EDGES:
            resampled += 1
            continue
        s = tuple(rng.sample(range(n), 3))
        assert kappa_S_exact(g, s) == oracle_enumerate(g, s, INTERNAL), (g.edges, s)
        assert lambda_S_exact(g, s) == oracle_enumerate(g, s, EDGE), (g.edges, s)
        done += 1
    elapsed = time.perf_counter() - start
    report(capsys, f"500 graphs agree with the oracle in {elapsed:.1f}s ({resampled} resampled over the edge cap)")
    assert elapsed <= 300


def test_c2_closed_forms():
    for n in (4, 5):
        g = complete_graph(n)
        assert oracle_enumerate(g, (0, 1, 2), INTERNAL) == n - 2
    for n in range(4, 9):
        assert kappa3_exact(complete_graph(n)).value == n - 2
        assert kappa3_exact(cycle_graph(n)).value == 1


def test_c3_inequality_chain(capsys):
    rng = random.Random(303)
    ps = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    violations = []
    start = time.perf_counter()
    for i in range(200):
        n = rng.randint(4, 12)
        g = sample_gnp(n, ps[i % len(ps)], rng.getrandbits(63))
        k3 = kappa3_exact(g).value
        l3 = lambda3_exact(g).value
        kap, lam, delta = vertex_connectivity(g), edge_connectivity(g), min_degree(g)
        if not (k3 <= kap and l3 <= lam and k3 <= l3 <= delta and kap <= lam <= delta):
            violations.append((g.edges, k3, l3, kap, lam, delta))
    report(capsys, f"chain checked on 200 graphs in {time.perf_counter() - start:.1f}s, {len(violations)} violations")
    assert violations == []


def test_c4_sharp_threshold_shape(capsys):
    start = time.perf_counter()
    cs = tuple(round(0.5 + 0.05 * i, 2) for i in range(31))
    curve = run_sweep(SweepSpec((500, 1000, 2000), 1, cs, 200, 2024))
    elapsed = time.perf_counter() - start
    pts = dict(curve.frequency("connected", 2000))
    fitted = fit_window(curve)
    raw = estimate_transition(curve)
    report(capsys, f"n=2000: connected at c=0.5 {pts[0.5]:.3f}, at c=2.0 {pts[2.0]:.3f}; {elapsed:.0f}s")
    for f, r in zip(fitted, raw):
        report(capsys, f"n={f.n}: fitted window {f.width:.4f} (c*={f.c_star:.3f}), interpolated {r.width:.4f}")
    assert pts[0.5] <= 0.05
    assert pts[2.0] >= 0.98
    widths = [f.width for f in fitted]
    assert widths[0] > widths[1] > widths[2]
    assert elapsed <= 600


def test_c5_corollary_face(capsys):
    curve = run_sweep(SweepSpec((1000,), 1, (1.0,), 200, 55, ("kappa", "lambda")))
    (cell,) = curve.cells
    hits = cell.frequencies["kappa_eq_lambda_eq_delta"]["count"]
    lo, hi = wilson(hits, 200)
    report(capsys, f"n=1000, p=threshold_p: kappa=lambda=delta in {hits}/200 = {hits / 200:.3f}, Wilson 95% [{lo:.3f}, {hi:.3f}]")
    assert hits / 200 >= 0.8

    bad = []
    for trial in range(50):
        r = chain_check(sample_gnp(12, 0.5, 5000 + trial))
        assert r.kappa3_mode == "exact"
        if not r.chain_ok:
            bad.append(trial)
    assert bad == []


def test_c6_packer_soundness(capsys):
    rng = random.Random(606)
    cfg = PackerConfig(arity=2, tau=0.0, depth_uv=1, depth_w=1)
    successes = failures = 0
    for _ in range(100):
        n = rng.randint(8, 12)
        g = sample_gnp(n, rng.choice((0.5, 0.7, 0.9, 1.0)), rng.getrandbits(63))
        s = tuple(rng.sample(range(n), 3))
        try:
            p = pack(g, s, cfg)
        except PackerFailure:
            failures += 1
            continue
        successes += 1
        assert validate_packing(g, p) == []
        assert len(p) <= kappa_S_exact(g, s)
    report(capsys, f"packer: {successes} successes, {failures} failures, every success valid and <= kappa(S)")
    assert successes > 0


def test_c7_sweep_determinism(tmp_path):
    outs = []
    for i, jobs in enumerate(("1", "1", "2")):
        f = tmp_path / f"s{i}.csv"
        argv = ["sweep", "--n", "300", "600", "--c-list", "0.6,1,1.4", "--trials", "20", "--seed", "77",
                "--properties", "connected,kappa,lambda", "--jobs", jobs, "--csv", str(f)]
        assert main(argv) == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert len(outs[0].splitlines()) == 1 + 2 * 3 * 20


def _independent_max_excess(g, max_size):
    h = nx.Graph(list(g.edges))
    h.add_nodes_from(range(g.n))
    best = None
    for size in range(1, max_size + 1):
        for sub in itertools.combinations(range(g.n), size):
            x = h.subgraph(sub).number_of_edges() - size
            best = x if best is None else max(best, x)
    return best


def test_c8_audit_plumbing():
    rng = random.Random(808)
    for _ in range(50):
        n = rng.randint(4, 12)
        g = sample_gnp(n, rng.uniform(0.1, 0.8), rng.getrandbits(63))
        res = audit_dense_subsets(g, 1.0, 2, 2.5)
        assert res.method == EXHAUSTIVE
        assert res.excess == _independent_max_excess(g, res.max_size)
    rep = run_audit(ModelSpec("gnp", 300, threshold_p(300, 1), 12), trials=3)
    validate_report(rep.to_json())
    validate_report(json.loads(rep.dumps()))
