"""Quick built-in checks: oracle equivalence, inequality chain, determinism."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .graph import (
    EDGE,
    INTERNAL,
    Graph,
    complete_graph,
    cycle_graph,
    edge_connectivity,
    min_degree,
    validate_packing,
    vertex_connectivity,
)
from .edgelist import format_edgelist
from .lab import SweepSpec, run_sweep
from .oracle import MAX_EDGES, oracle_enumerate
from .random_models import sample_gnm, sample_gnp
from .steiner import kappa3_exact, lambda3_exact, max_packing

Oracle = Callable[[Graph, tuple, str], int]
SELFTEST_SEED = 20240601


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "cases": self.cases, "failures": self.failures[:10]}


@dataclass
class SelftestSummary:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def _oracle_suite(oracle: Oracle, rng: random.Random, count: int) -> CheckResult:
    res = CheckResult("oracle_equivalence", True, 0)
    while res.cases < count:
        n = rng.randint(3, 7)
        g = sample_gnp(n, rng.choice((0.3, 0.5, 0.8)), rng.getrandbits(63))
        if g.m > MAX_EDGES:
            continue
        s = tuple(rng.sample(range(n), 3))
        res.cases += 1
        for mode in (INTERNAL, EDGE):
            p = max_packing(g, s, mode)
            want = oracle(g, s, mode)
            if len(p) != want or validate_packing(g, p):
                res.passed = False
                res.failures.append(f"{mode} S={s} edges={list(g.edges)}: search {len(p)}, oracle {want}")
    return res


def _chain_suite(rng: random.Random, count: int) -> CheckResult:
    res = CheckResult("inequality_chain", True, 0)
    fixed = [complete_graph(n) for n in (4, 5, 6)] + [cycle_graph(n) for n in (4, 5, 6)]
    for n, g in [(g.n, g) for g in fixed]:
        k3 = kappa3_exact(g).value
        want = n - 2 if g.m == n * (n - 1) // 2 else 1
        res.cases += 1
        if k3 != want:
            res.passed = False
            res.failures.append(f"closed form n={n} m={g.m}: kappa3 {k3}, expected {want}")
    for _ in range(count):
        n = rng.randint(4, 9)
        g = sample_gnp(n, rng.uniform(0.2, 0.9), rng.getrandbits(63))
        k3 = kappa3_exact(g).value
        l3 = lambda3_exact(g).value
        kap, lam, delta = vertex_connectivity(g), edge_connectivity(g), min_degree(g)
        res.cases += 1
        if not (k3 <= min(kap, l3) and l3 <= min(lam, delta) and kap <= lam <= delta):
            res.passed = False
            res.failures.append(f"edges={list(g.edges)}: k3={k3} l3={l3} k={kap} l={lam} d={delta}")
    return res


def _determinism_suite() -> CheckResult:
    res = CheckResult("determinism", True, 0)
    pairs = [
        (format_edgelist(sample_gnp(60, 0.1, 7)), format_edgelist(sample_gnp(60, 0.1, 7))),
        (format_edgelist(sample_gnm(60, 150, 7)), format_edgelist(sample_gnm(60, 150, 7))),
    ]
    spec = SweepSpec((40,), 1, (0.8, 1.5), 5, 11, ("connected", "kappa", "lambda"))
    pairs.append((run_sweep(spec).to_csv(), run_sweep(spec).to_csv()))
    for i, (a, b) in enumerate(pairs):
        res.cases += 1
        if a != b:
            res.passed = False
            res.failures.append(f"case {i}: outputs differ")
    return res


def run_selftest(oracle: Oracle = oracle_enumerate, seed: int = SELFTEST_SEED, size: int = 60) -> SelftestSummary:
    """Run all suites; ``oracle`` is injectable so a corrupted one can be tested."""
    rng = random.Random(seed)
    return SelftestSummary(
        [
            _oracle_suite(oracle, rng, size),
            _chain_suite(rng, max(5, size // 4)),
            _determinism_suite(),
        ]
    )
