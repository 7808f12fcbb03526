"""Weighted directed retweet graph construction and component extraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import EmptyGraphError
from .ingest import TweetRecord

Arc = tuple[str, str]


@dataclass(frozen=True)
class RetweetGraph:
    """Directed multigraph summary: arc (source, retweeter) -> retweet count.

    ``w_in[k]`` counts how often account k was retweeted, ``w_out[k]`` how
    often it retweeted others; ``w`` is the total retweet count. Self-loops
    are disallowed and every weight is a positive integer.
    """

    nodes: frozenset[str]
    arcs: Mapping[Arc, int]
    w_in: Mapping[str, int]
    w_out: Mapping[str, int]
    w: int

    @property
    def n(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_arcs(cls, arcs: Mapping[Arc, int]) -> "RetweetGraph":
        clean: dict[Arc, int] = {}
        for (source, retweeter), weight in arcs.items():
            if source == retweeter:
                raise ValueError(f"self-loop not allowed: {source!r}")
            if not isinstance(weight, int) or weight < 1:
                raise ValueError(f"arc weight must be a positive integer, got {weight!r}")
            clean[(source, retweeter)] = weight
        nodes = frozenset(x for arc in clean for x in arc)
        w_in = {node: 0 for node in nodes}
        w_out = {node: 0 for node in nodes}
        total = 0
        for (source, retweeter), weight in clean.items():
            w_in[source] += weight
            w_out[retweeter] += weight
            total += weight
        return cls(nodes=nodes, arcs=clean, w_in=w_in, w_out=w_out, w=total)


def build_retweet_graph(records: Iterable[TweetRecord]) -> RetweetGraph:
    """Count retweet events into arc weights, dropping self-retweets.

    Accounts that neither retweet nor get retweeted do not appear in the
    graph.
    """
    arcs: dict[Arc, int] = {}
    for record in records:
        source = record.retweeted_author_id
        if source is None or source == record.author_id:
            continue
        key = (source, record.author_id)
        arcs[key] = arcs.get(key, 0) + 1
    return RetweetGraph.from_arcs(arcs)


def weak_components(graph: RetweetGraph) -> list[frozenset[str]]:
    """Weakly connected node sets, largest first (ties: smallest min node id)."""
    neighbors: dict[str, set[str]] = {node: set() for node in graph.nodes}
    for source, retweeter in graph.arcs:
        neighbors[source].add(retweeter)
        neighbors[retweeter].add(source)
    seen: set[str] = set()
    components = []
    for start in sorted(graph.nodes):
        if start in seen:
            continue
        queue = deque([start])
        seen.add(start)
        members = {start}
        while queue:
            node = queue.popleft()
            for other in neighbors[node]:
                if other not in seen:
                    seen.add(other)
                    members.add(other)
                    queue.append(other)
        components.append(frozenset(members))
    components.sort(key=lambda c: (-len(c), min(c)))
    return components


def largest_component(graph: RetweetGraph) -> RetweetGraph:
    """Induced subgraph on the largest weakly connected node set."""
    if not graph.nodes:
        raise EmptyGraphError("graph has no nodes")
    keep = weak_components(graph)[0]
    arcs = {arc: weight for arc, weight in graph.arcs.items() if arc[0] in keep}
    return RetweetGraph.from_arcs(arcs)


def write_edges(graph: RetweetGraph, target: str | Path | IO[str]) -> None:
    """Write the arc list as 'source retweeter weight' lines, sorted."""
    lines = [
        f"{source} {retweeter} {weight}\n"
        for (source, retweeter), weight in sorted(graph.arcs.items())
    ]
    if hasattr(target, "write"):
        target.writelines(lines)
    else:
        with open(target, "w", encoding="utf-8") as handle:
            handle.writelines(lines)


def read_edges(source: str | Path | IO[str]) -> RetweetGraph:
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    arcs: dict[Arc, int] = {}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        src, retweeter, weight = line.split()
        arcs[(src, retweeter)] = arcs.get((src, retweeter), 0) + int(weight)
    return RetweetGraph.from_arcs(arcs)
