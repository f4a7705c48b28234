"""Seeded G(n,p) / G(n,M) samplers and the threshold scale functions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadProbability, OutOfDomain, TooManyEdges
from .graph import Graph

GNP = "gnp"
GNM = "gnm"
# below this p, skip over absent pairs geometrically instead of testing each
DENSE_P = 0.25
MIN_THRESHOLD_N = 16
_U64 = (1 << 64) - 1


def rng_for(seed: int) -> np.random.Generator:
    """The package's generator: PCG64 seeded with a 64-bit unsigned int."""
    if not 0 <= seed <= _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(master: int, *keys: int) -> int:
    """A 64-bit seed that depends only on ``master`` and ``keys``.

    Used for per-trial seeds so that the execution order of trials cannot
    change any result.
    """
    ss = np.random.SeedSequence([master & _U64, *[k & _U64 for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _pair_from_index(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # pairs (u, v), u < v, enumerated column by column: index = v(v-1)/2 + u
    v = np.floor((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) / 2).astype(np.int64)
    base = v * (v - 1) // 2
    # guard against float rounding at large indices
    over = base > idx
    v[over] -= 1
    base = v * (v - 1) // 2
    under = idx - base >= v
    v[under] += 1
    base = v * (v - 1) // 2
    return idx - base, v


def sample_gnp(n: int, p: float, seed: int) -> Graph:
    """G(n,p): each of the N pairs is an edge independently with probability p."""
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise BadProbability(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be non-negative")
    total = n * (n - 1) // 2
    rng = rng_for(seed)
    if total == 0 or p == 0.0:
        return Graph(n)
    if p == 1.0:
        idx = np.arange(total, dtype=np.int64)
    elif p >= DENSE_P:
        idx = np.flatnonzero(rng.random(total) < p)
    else:
        # gaps between successive present pairs are Geometric(p)
        chunks = []
        pos = -1
        expect = int(p * total + 6 * math.sqrt(p * total) + 16)
        while True:
            gaps = rng.geometric(p, size=expect)
            steps = pos + np.cumsum(gaps)
            inside = steps[steps < total]
            chunks.append(inside)
            if len(inside) < len(steps):
                break
            pos = int(steps[-1])
        idx = np.concatenate(chunks)
    us, vs = _pair_from_index(idx)
    return Graph.from_arrays(n, us, vs)


def sample_gnm(n: int, m: int, seed: int) -> Graph:
    """G(n,M): a uniformly random set of ``m`` of the N pairs."""
    total = n * (n - 1) // 2
    if m < 0:
        raise ValueError("M must be non-negative")
    if m > total:
        raise TooManyEdges(f"M={m} exceeds N={total} for n={n}")
    rng = rng_for(seed)
    idx = np.sort(rng.choice(total, size=m, replace=False)) if m else np.zeros(0, dtype=np.int64)
    us, vs = _pair_from_index(np.asarray(idx, dtype=np.int64))
    return Graph.from_arrays(n, us, vs)


def _check_n(n: int) -> None:
    if n < MIN_THRESHOLD_N:
        raise OutOfDomain(f"needs n >= {MIN_THRESHOLD_N} so that log log log n is defined, got {n}")


def threshold_p(n: int, k: int) -> float:
    """(log n + (k+1) log log n - log log log n) / n, natural logs."""
    _check_n(n)
    if k < 1:
        raise OutOfDomain(f"k must be >= 1, got {k}")
    ln = math.log(n)
    lln = math.log(ln)
    return (ln + (k + 1) * lln - math.log(lln)) / n


def scale_D(n: int) -> float:
    _check_n(n)
    return math.log(n) / math.log(math.log(n))


def epsilon(n: int) -> float:
    _check_n(n)
    return 1.0 / math.log(math.log(n))


@dataclass(frozen=True)
class ModelSpec:
    model: str
    n: int
    parameter: float | int
    seed: int

    def __post_init__(self) -> None:
        if self.model not in (GNP, GNM):
            raise ValueError(f"model must be {GNP!r} or {GNM!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.model == GNP and not 0 <= self.parameter <= 1:
            raise BadProbability(f"p must lie in [0, 1], got {self.parameter}")
        if self.model == GNM and not 0 <= self.parameter <= self.n * (self.n - 1) // 2:
            raise TooManyEdges(f"M={self.parameter} out of range for n={self.n}")

    def sample(self) -> Graph:
        if self.model == GNP:
            return sample_gnp(self.n, float(self.parameter), self.seed)
        return sample_gnm(self.n, int(self.parameter), self.seed)

    def to_json(self) -> dict:
        key = "p" if self.model == GNP else "M"
        return {"model": self.model, "n": self.n, key: self.parameter, "seed": self.seed}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict | str) -> "ModelSpec":
        if isinstance(data, str):
            data = json.loads(data)
        model = data["model"]
        param = data["p"] if model == GNP else data["M"]
        return cls(model, int(data["n"]), param, int(data["seed"]))
