"""Monte Carlo sweeps of p = c * threshold_p(n, k).

Each trial samples G(n, p) with a seed derived from (master seed, n, k, c,
trial) and measures the requested properties. Results are ordered by
(n, c, trial) whatever the number of worker processes, so the CSV output is
byte-identical across runs and ``jobs`` settings.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import binomtest

from .errors import InfeasibleSpec, NoCrossing
from .graph import Graph, edge_connectivity, is_connected, min_degree, vertex_connectivity
from .packer import PackerConfig, packer_lower_bound
from .random_models import derive_seed, sample_gnp, threshold_p
from .steiner import DEFAULT_MAX_N, kappa3_exact, lambda3_exact

PROPERTIES = (
    "connected",
    "min_degree",
    "kappa",
    "lambda",
    "kappa3_lower_by_packer",
    "kappa3_exact",
    "chain_check",
)
CSV_COLUMNS = (
    "n", "k", "c", "p", "trial", "seed", "m", "connected", "delta", "kappa", "lambda",
    "kappa3_mode", "kappa3_value", "lambda3_value", "chain_ok",
)
EXACT, BOUND, SKIP = "exact", "bound", "skip"


@dataclass(frozen=True)
class SweepSpec:
    n_values: tuple[int, ...]
    k: int
    c_values: tuple[float, ...]
    trials: int
    master_seed: int
    properties: tuple[str, ...] = ("connected",)
    packer: PackerConfig | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        object.__setattr__(self, "properties", tuple(self.properties))

    def validate(self) -> None:
        """Reject infeasible combinations before any work is done."""
        if not self.n_values or not self.c_values:
            raise InfeasibleSpec("need at least one n and one c")
        if self.trials < 1:
            raise InfeasibleSpec("trials must be >= 1")
        if self.k < 1:
            raise InfeasibleSpec("k must be >= 1")
        if any(c <= 0 or math.isnan(c) for c in self.c_values):
            raise InfeasibleSpec("every c must be > 0")
        unknown = set(self.properties) - set(PROPERTIES)
        if unknown:
            raise InfeasibleSpec(f"unknown properties: {sorted(unknown)}")
        for n in self.n_values:
            if n < 16:
                raise InfeasibleSpec(f"threshold_p needs n >= 16, got n={n}")
            if "kappa3_exact" in self.properties and n > DEFAULT_MAX_N:
                raise InfeasibleSpec(f"kappa3_exact is only available for n <= {DEFAULT_MAX_N}, got n={n}")
        if not 0 <= self.master_seed < 2**64:
            raise InfeasibleSpec("master seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        d = asdict(self)
        d["packer"] = None if self.packer is None else self.packer.to_json()
        d["n_values"] = list(self.n_values)
        d["c_values"] = list(self.c_values)
        d["properties"] = list(self.properties)
        return d


def _c_bits(c: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", c))[0]


def trial_seed(master: int, n: int, k: int, c: float, trial: int) -> int:
    return derive_seed(master, n, k, _c_bits(c), trial)


@dataclass
class ChainRecord:
    delta: int
    lam: int
    kappa: int
    kappa3_mode: str
    kappa3: int | None
    lambda3: int | None
    chain_ok: bool
    # kappa = lambda = delta: Ivchenko's a.s. statement, not a theorem at finite n
    kld_equal: bool
    # delta - 1 <= kappa3 <= lambda3 <= delta, Corollary 1's sandwich
    sandwich: bool | None


def _lowest_degree_triple(g: Graph) -> tuple[int, int, int]:
    degs = g.degrees
    return tuple(sorted(range(g.n), key=lambda v: (degs[v], v))[:3])  # type: ignore[return-value]


def chain_check(
    g: Graph,
    exact_max_n: int = DEFAULT_MAX_N,
    packer: PackerConfig | None = None,
    with_packer: bool = True,
) -> ChainRecord:
    """delta, lambda, kappa and the generalized values, with the provable chain.

    ``chain_ok`` covers only inequalities that hold for every graph:
    kappa <= lambda <= delta, kappa3 <= min(kappa, lambda3) and
    lambda3 <= min(lambda, delta). For n above ``exact_max_n`` kappa3 is the
    packer's size on the three lowest-degree vertices (mode "bound"), a
    certified lower bound for kappa(S) of that triple, and the check is that
    it does not exceed delta of those vertices.
    """
    if g.n < 3:
        raise ValueError("chain check needs n >= 3")
    delta = min_degree(g)
    exact = g.n <= exact_max_n
    if not is_connected(g):
        # the paper sets every connectivity of a disconnected graph to 0
        z = 0 if exact else None
        sandwich = delta - 1 <= 0 <= delta if exact else None
        return ChainRecord(delta, 0, 0, EXACT if exact else SKIP, z, z, True, delta == 0, sandwich)
    kappa = vertex_connectivity(g)
    lam = delta if kappa == delta else edge_connectivity(g)
    ok = kappa <= lam <= delta
    if exact:
        k3 = kappa3_exact(g, max_n=exact_max_n).value
        l3 = lambda3_exact(g, max_n=exact_max_n).value
        ok = ok and k3 <= min(kappa, l3) and l3 <= min(lam, delta)
        sandwich = delta - 1 <= k3 <= l3 <= delta
        return ChainRecord(delta, lam, kappa, EXACT, k3, l3, ok, kappa == lam == delta, sandwich)
    if not with_packer:
        return ChainRecord(delta, lam, kappa, SKIP, None, None, ok, kappa == lam == delta, None)
    triple = _lowest_degree_triple(g)
    degs = g.degrees
    cap = min(degs[t] for t in triple)
    cfg = packer or PackerConfig.desk_defaults()
    cfg = PackerConfig(**{**asdict(cfg), "k": max(1, cap)})
    bound = packer_lower_bound(g, triple, cfg)
    ok = ok and bound <= cap
    return ChainRecord(delta, lam, kappa, BOUND, bound, None, ok, kappa == lam == delta, None)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _run_trial(args: tuple) -> dict:
    n, k, c, trial, master, props, packer = args
    p = min(1.0, c * threshold_p(n, k))
    seed = trial_seed(master, n, k, c, trial)
    g = sample_gnp(n, p, seed)
    rec: dict = {
        "n": n, "k": k, "c": c, "p": p, "trial": trial, "seed": seed, "m": g.m,
        "connected": None, "delta": None, "kappa": None, "lambda": None,
        "kappa3_mode": SKIP, "kappa3_value": None, "lambda3_value": None, "chain_ok": None,
    }
    # cheap to expensive
    conn = is_connected(g)
    rec["connected"] = conn
    wants = set(props)
    if wants & {"min_degree", "kappa", "lambda", "chain_check", "kappa3_lower_by_packer", "kappa3_exact"}:
        rec["delta"] = min_degree(g)
    generalized = wants & {"chain_check", "kappa3_exact", "kappa3_lower_by_packer"}
    if generalized:
        ch = chain_check(
            g,
            exact_max_n=DEFAULT_MAX_N if "kappa3_exact" in wants else 0,
            packer=packer,
            with_packer="kappa3_lower_by_packer" in wants,
        )
        rec["kappa"], rec["lambda"] = ch.kappa, ch.lam
        rec["kappa3_mode"] = ch.kappa3_mode
        rec["kappa3_value"] = ch.kappa3
        rec["lambda3_value"] = ch.lambda3
        if "chain_check" in wants:
            rec["chain_ok"] = ch.chain_ok
    elif wants & {"kappa", "lambda"}:
        if not conn:
            rec["kappa"] = rec["lambda"] = 0
        else:
            kap = vertex_connectivity(g)
            rec["kappa"] = kap
            if "lambda" in wants:
                rec["lambda"] = rec["delta"] if kap == rec["delta"] else edge_connectivity(g)
    return rec


@dataclass
class CellSummary:
    n: int
    c: float
    p: float
    trials: int
    frequencies: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def wilson(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


BOOLEAN_PROPERTIES = {
    "connected": lambda r: r["connected"],
    "kappa_eq_lambda_eq_delta": lambda r: None if r["kappa"] is None or r["lambda"] is None
    else r["kappa"] == r["lambda"] == r["delta"],
    "min_degree_ge_k": lambda r: None if r["delta"] is None else r["delta"] >= r["k"],
    "kappa_ge_k": lambda r: None if r["kappa"] is None else r["kappa"] >= r["k"],
    "kappa3_ge_k": lambda r: None if r["kappa3_mode"] != EXACT else r["kappa3_value"] >= r["k"],
    "chain_ok": lambda r: r["chain_ok"],
}


@dataclass
class ThresholdCurve:
    spec: SweepSpec
    records: list[dict]
    cells: list[CellSummary]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([_fmt(r[col]) for col in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "cells": [c.to_json() for c in self.cells]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def frequency(self, prop: str, n: int) -> list[tuple[float, float]]:
        """(c, frequency) points for ``prop`` at ``n``, in c order."""
        pts = []
        for cell in self.cells:
            if cell.n == n and prop in cell.frequencies:
                pts.append((cell.c, cell.frequencies[prop]["freq"]))
        return sorted(pts)


def _summarize(spec: SweepSpec, records: Sequence[dict]) -> list[CellSummary]:
    cells = []
    by_cell: dict[tuple[int, float], list[dict]] = {}
    for r in records:
        by_cell.setdefault((r["n"], r["c"]), []).append(r)
    for n in spec.n_values:
        for c in spec.c_values:
            rs = by_cell[(n, c)]
            cell = CellSummary(n, c, rs[0]["p"], len(rs))
            for name, fn in BOOLEAN_PROPERTIES.items():
                vals = [fn(r) for r in rs]
                if any(v is None for v in vals):
                    continue
                hits = sum(bool(v) for v in vals)
                lo, hi = wilson(hits, len(vals))
                cell.frequencies[name] = {"count": hits, "freq": hits / len(vals), "wilson95": [lo, hi]}
            cells.append(cell)
    return cells


def run_sweep(spec: SweepSpec, jobs: int = 1) -> ThresholdCurve:
    """Run every (n, c, trial) cell of ``spec``."""
    spec.validate()
    tasks = [
        (n, spec.k, c, t, spec.master_seed, spec.properties, spec.packer)
        for n in spec.n_values
        for c in spec.c_values
        for t in range(spec.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            # map keeps input order, so output does not depend on scheduling
            records = list(ex.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        records = [_run_trial(t) for t in tasks]
    return ThresholdCurve(spec, records, _summarize(spec, records))


@dataclass(frozen=True)
class Transition:
    n: int
    c_star: float
    c_low: float | None  # crossing of 0.1
    c_high: float | None  # crossing of 0.9
    width: float | None
    monotone: bool


def _crossing(points: Sequence[tuple[float, float]], level: float) -> float | None:
    """First c at which the piecewise-linear curve reaches ``level``."""
    for (c0, f0), (c1, f1) in zip(points, points[1:]):
        if f0 == level:
            return c0
        if (f0 - level) * (f1 - level) < 0 or f1 == level:
            return c0 + (level - f0) * (c1 - c0) / (f1 - f0)
    return None


def estimate_transition(
    curve: ThresholdCurve | dict[int, Sequence[tuple[float, float]]],
    prop: str = "connected",
    level: float = 0.5,
) -> list[Transition]:
    """Per n, the interpolated c where the frequency crosses ``level``.

    Also gives the 0.1 and 0.9 crossings and their distance (the window
    width). Curves that go down somewhere are flagged with monotone=False,
    not smoothed. Raises NoCrossing when some curve never crosses ``level``.
    """
    if isinstance(curve, ThresholdCurve):
        series = {n: curve.frequency(prop, n) for n in curve.spec.n_values}
    else:
        series = {n: sorted(pts) for n, pts in curve.items()}
    out = []
    for n, pts in sorted(series.items()):
        c_star = _crossing(pts, level)
        if c_star is None:
            raise NoCrossing(f"{prop} never crosses {level} at n={n}")
        lo = _crossing(pts, 0.1)
        hi = _crossing(pts, 0.9)
        width = None if lo is None or hi is None else hi - lo
        monotone = all(f1 >= f0 for (_, f0), (_, f1) in zip(pts, pts[1:]))
        out.append(Transition(n, c_star, lo, hi, width, monotone))
    return out


@dataclass
class FittedWindow:
    n: int
    a: float
    b: float
    c_star: float
    c_low: float
    c_high: float
    width: float


def _gumbel_level(q: float) -> float:
    return -math.log(-math.log(q))


def fit_window(curve: ThresholdCurve, prop: str = "connected") -> list[FittedWindow]:
    """Fit P(c) = exp(-exp(-(a + b*c))) per n by binomial maximum likelihood.

    This is the shape of the connectivity limit law once p = c * threshold_p
    is written out, and it uses every cell rather than the two cells around
    each crossing, so the 0.1/0.9 window is far less noisy than
    :func:`estimate_transition` at the same trial count.
    """
    out = []
    for n in curve.spec.n_values:
        cells = [c for c in curve.cells if c.n == n and prop in c.frequencies]
        if not cells:
            raise NoCrossing(f"no {prop} data at n={n}")
        x = np.array([c.c for c in cells])
        hits = np.array([c.frequencies[prop]["count"] for c in cells], dtype=float)
        tot = np.array([c.trials for c in cells], dtype=float)

        def nll(theta):
            eta = theta[0] + theta[1] * x
            log_p = -np.exp(-eta)
            log_q = np.log(-np.expm1(log_p) + 1e-300)
            return -float(np.sum(hits * log_p + (tot - hits) * log_q))

        res = minimize(nll, np.array([-5.0, 8.0]), method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-9, "maxiter": 20000})
        a, b = res.x
        if b <= 0:
            raise NoCrossing(f"{prop} does not increase with c at n={n}")
        at = lambda q: (_gumbel_level(q) - a) / b
        a, b = float(a), float(b)
        out.append(FittedWindow(n, a, b, at(0.5), at(0.1), at(0.9), at(0.9) - at(0.1)))
    return out


def parse_float_list(text: str | Iterable[float]) -> tuple[float, ...]:
    if isinstance(text, str):
        return tuple(float(x) for x in text.replace(",", " ").split())
    return tuple(float(x) for x in text)
