"""Whole-text dependency graph: per-sentence trees chained through their roots.

Every sentence tree keeps its head -> dependent edges; additionally, the root
of sentence m points at the root of sentence m-1 (relation "next-root"), so
the whole document forms a single tree rooted at the last sentence's root.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .conllu import SentenceBlock

INTER_SENTENCE_RELATION = "next-root"

KIND_INTRA = "intra"
KIND_INTER = "inter"


class GraphError(Exception):
    pass


class EmptyDocument(GraphError):
    """No sentence blocks were supplied."""


class UnknownNode(GraphError):
    """A node id does not exist in the graph."""


@dataclass(frozen=True)
class NodeRef:
    gid: int
    sentence_index: int
    token_id: int
    form: str
    deprel_to_head: str


@dataclass(frozen=True)
class DepEdge:
    head_gid: int
    dep_gid: int
    relation: str
    kind: str  # KIND_INTRA or KIND_INTER


class UnifiedGraph:
    """Immutable document graph; gids are assigned in reading order and double
    as indices into ``nodes``."""

    def __init__(
        self,
        nodes: list[NodeRef],
        edges: list[DepEdge],
        sentence_roots: list[int],
        source_blocks: list[SentenceBlock],
    ):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.sentence_roots = tuple(sentence_roots)
        self.source_blocks = tuple(source_blocks)
        self._gid_by_pos = {(n.sentence_index, n.token_id): n.gid for n in nodes}
        out: dict[int, list[int]] = {n.gid: [] for n in nodes}
        parent: dict[int, int | None] = {n.gid: None for n in nodes}
        for e in edges:
            out[e.head_gid].append(e.dep_gid)
            parent[e.dep_gid] = e.head_gid
        self._out = {g: tuple(v) for g, v in out.items()}
        self._parent = parent

    def __len__(self) -> int:
        return len(self.nodes)

    def check_gid(self, gid: int) -> None:
        if not 0 <= gid < len(self.nodes):
            raise UnknownNode(f"no node with gid {gid}")

    def node(self, gid: int) -> NodeRef:
        self.check_gid(gid)
        return self.nodes[gid]

    def gid_of(self, sentence_index: int, token_id: int) -> int:
        try:
            return self._gid_by_pos[(sentence_index, token_id)]
        except KeyError:
            raise UnknownNode(f"no node at sentence {sentence_index}, token {token_id}") from None

    def out_neighbors(self, gid: int) -> tuple[int, ...]:
        """Dependents of gid, plus the previous root if gid is a chained root."""
        self.check_gid(gid)
        return self._out[gid]

    def parent_of(self, gid: int) -> int | None:
        """The unique head of gid in the unified tree, None for the document root."""
        self.check_gid(gid)
        return self._parent[gid]

    def dump(self) -> str:
        """One deterministic line per edge: "gid(form) -rel-> gid(form)"."""
        lines = []
        for e in sorted(self.edges, key=lambda e: (e.head_gid, e.dep_gid)):
            head = self.nodes[e.head_gid]
            dep = self.nodes[e.dep_gid]
            lines.append(f"{head.gid}({head.form}) -{e.relation}-> {dep.gid}({dep.form})")
        return "\n".join(lines)


def build_unified_graph(blocks: list[SentenceBlock]) -> UnifiedGraph:
    """Join per-sentence trees into one document graph.

    Intra-sentence edges mirror each block's head relation (head -> dependent);
    for M sentences there are exactly M-1 inter-sentence edges, one from each
    root to the previous sentence's root.
    """
    if not blocks:
        raise EmptyDocument("cannot build a graph from zero sentences")
    nodes: list[NodeRef] = []
    edges: list[DepEdge] = []
    sentence_roots: list[int] = []
    for m, block in enumerate(blocks):
        base = len(nodes)
        for row in block.tokens:
            nodes.append(
                NodeRef(
                    gid=base + row.id - 1,
                    sentence_index=m,
                    token_id=row.id,
                    form=row.form,
                    deprel_to_head=row.deprel,
                )
            )
        for row in block.tokens:
            dep_gid = base + row.id - 1
            if row.head == 0:
                sentence_roots.append(dep_gid)
            else:
                edges.append(
                    DepEdge(
                        head_gid=base + row.head - 1,
                        dep_gid=dep_gid,
                        relation=row.deprel,
                        kind=KIND_INTRA,
                    )
                )
    for m in range(1, len(sentence_roots)):
        edges.append(
            DepEdge(
                head_gid=sentence_roots[m],
                dep_gid=sentence_roots[m - 1],
                relation=INTER_SENTENCE_RELATION,
                kind=KIND_INTER,
            )
        )
    return UnifiedGraph(nodes, edges, sentence_roots, blocks)


def directed_distance(graph: UnifiedGraph, from_gid: int, to_gid: int) -> int | None:
    """Shortest directed hop count from from_gid to to_gid, None if unreachable."""
    graph.check_gid(from_gid)
    graph.check_gid(to_gid)
    if from_gid == to_gid:
        return 0
    seen = {from_gid}
    queue = deque([(from_gid, 0)])
    while queue:
        gid, dist = queue.popleft()
        for nxt in graph.out_neighbors(gid):
            if nxt == to_gid:
                return dist + 1
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, dist + 1))
    return None
