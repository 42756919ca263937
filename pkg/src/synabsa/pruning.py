"""Aspect anchoring and aspect-centered subgraph pruning.

A pruned subgraph at depth n keeps the aspect node, every node it reaches
within n directed hops, and every node that reaches it within n directed hops
(undirected mode relaxes this to an n-hop neighborhood). An edge survives
exactly when both endpoints survive. Unbounded depth disables pruning and
returns the full graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graph import DepEdge, UnifiedGraph

MODE_DIRECTED = "directed"
MODE_UNDIRECTED = "undirected"


class PruneError(Exception):
    pass


class AspectNotFound(PruneError):
    """The aspect's token sequence does not occur among the node forms."""


class OccurrenceOutOfRange(PruneError):
    """Fewer matches than the requested occurrence index."""


class UnknownAnchor(PruneError):
    """The anchor does not belong to the graph."""


@dataclass(frozen=True)
class AspectAnchor:
    """The aspect's token span and the single node standing in for it."""

    anchor_gid: int
    span_gids: tuple[int, ...]
    surface: str
    occurrence: int


@dataclass(frozen=True)
class PruneConfig:
    """depth None means unbounded (no pruning)."""

    depth: int | None = 2
    mode: str = MODE_DIRECTED
    strip_relations: bool = False

    def __post_init__(self):
        if self.depth is not None and self.depth < 0:
            raise ValueError(f"depth must be >= 0 or None, got {self.depth}")
        if self.mode not in (MODE_DIRECTED, MODE_UNDIRECTED):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def unbounded(self) -> bool:
        return self.depth is None

    def cache_key(self, fmt: str) -> str:
        depth = "inf" if self.depth is None else str(self.depth)
        suffix = "-nolabels" if self.strip_relations else ""
        return f"{fmt}-n{depth}-{self.mode}{suffix}"


@dataclass(frozen=True)
class PrunedSubgraph:
    graph: UnifiedGraph
    retained_gids: frozenset[int]
    retained_edges: tuple[DepEdge, ...]
    anchor: AspectAnchor
    config: PruneConfig

    def dump(self) -> str:
        """Retained edges in the graph dump's line format."""
        nodes = self.graph.nodes
        lines = []
        for e in sorted(self.retained_edges, key=lambda e: (e.head_gid, e.dep_gid)):
            head = nodes[e.head_gid]
            dep = nodes[e.dep_gid]
            lines.append(f"{head.gid}({head.form}) -{e.relation}-> {dep.gid}({dep.form})")
        return "\n".join(lines)


def locate_aspect(graph: UnifiedGraph, aspect: str, occurrence: int = 0) -> AspectAnchor:
    """Find the occurrence-th case-insensitive token-sequence match of the aspect.

    The anchor is the span token whose head lies outside the span (leftmost on
    ties), i.e. the node carrying the span's external attachment.
    """
    if not aspect.strip():
        raise AspectNotFound("aspect string is empty")
    if occurrence < 0:
        raise OccurrenceOutOfRange(f"occurrence must be >= 0, got {occurrence}")
    target = [part.lower() for part in aspect.split()]
    forms = [node.form.lower() for node in graph.nodes]
    k = len(target)
    matches = [
        start
        for start in range(len(forms) - k + 1)
        if forms[start : start + k] == target
    ]
    if not matches:
        raise AspectNotFound(f"aspect {aspect!r} not found in graph tokens")
    if occurrence >= len(matches):
        raise OccurrenceOutOfRange(
            f"aspect {aspect!r} occurs {len(matches)} time(s); occurrence {occurrence} requested"
        )
    start = matches[occurrence]
    span = tuple(range(start, start + k))
    span_set = set(span)
    anchor_gid = None
    for gid in span:
        parent = graph.parent_of(gid)
        if parent is None or parent not in span_set:
            anchor_gid = gid
            break
    if anchor_gid is None:
        # A span whose every token attaches inside itself cannot happen in a tree,
        # but guard against malformed graphs.
        anchor_gid = span[0]
    return AspectAnchor(anchor_gid=anchor_gid, span_gids=span, surface=aspect, occurrence=occurrence)


def _bounded_bfs(start: int, neighbors, limit: int) -> set[int]:
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        gid, dist = queue.popleft()
        if dist == limit:
            continue
        for nxt in neighbors(gid):
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, dist + 1))
    return seen


def prune(graph: UnifiedGraph, anchor: AspectAnchor, config: PruneConfig) -> PrunedSubgraph:
    """Compute the aspect-centered subgraph for the given depth and mode."""
    if not 0 <= anchor.anchor_gid < len(graph):
        raise UnknownAnchor(f"anchor gid {anchor.anchor_gid} not in graph")
    if config.unbounded:
        retained = frozenset(range(len(graph)))
        return PrunedSubgraph(graph, retained, graph.edges, anchor, config)

    center = anchor.anchor_gid
    depth = config.depth
    if config.mode == MODE_DIRECTED:
        down = _bounded_bfs(center, graph.out_neighbors, depth)

        def up_neighbors(gid: int):
            parent = graph.parent_of(gid)
            return () if parent is None else (parent,)

        up = _bounded_bfs(center, up_neighbors, depth)
        retained = frozenset(down | up)
    else:
        def undirected_neighbors(gid: int):
            parent = graph.parent_of(gid)
            children = graph.out_neighbors(gid)
            return children if parent is None else children + (parent,)

        retained = frozenset(_bounded_bfs(center, undirected_neighbors, depth))

    edges = tuple(
        e for e in graph.edges if e.head_gid in retained and e.dep_gid in retained
    )
    return PrunedSubgraph(graph, retained, edges, anchor, config)
