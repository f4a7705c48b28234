"""Edge-list text format: a header line "n m", then m lines "u v".

Vertices are 0-based; lines starting with '#' and blank lines are ignored.
Output is canonical (u < v, sorted) so equal graphs give equal files.
"""

from __future__ import annotations

from pathlib import Path

from .errors import BadGraph
from .graph import Graph


def format_edgelist(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_edgelist(text: str) -> Graph:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise BadGraph(f"line {lineno}: expected two integers, got {raw!r}")
        try:
            rows.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise BadGraph(f"line {lineno}: expected two integers, got {raw!r}") from None
    if not rows:
        raise BadGraph("missing 'n m' header")
    (n, m), edges = rows[0], rows[1:]
    if len(edges) != m:
        raise BadGraph(f"header announces {m} edges, found {len(edges)}")
    return Graph(n, edges)


def read_edgelist(path: str | Path) -> Graph:
    return parse_edgelist(Path(path).read_text())


def write_edgelist(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edgelist(g))
