"""Render pruned subgraphs as prompt text.

Two formats: the edge list ("head --rel--> dependent" entries joined by "; ",
optionally with relation labels stripped) and a CoNLL-U rendering of the
retained tokens. Both are deterministic functions of the subgraph.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conllu import SentenceBlock, renumber_block, serialize_conllu
from .pruning import PrunedSubgraph

FORMAT_EDGE = "edge"
FORMAT_CONLLU = "conllu"


@dataclass(frozen=True)
class DepText:
    body: str
    format: str
    relations_stripped: bool = False


def edge_format(sub: PrunedSubgraph, strip_relations: bool = False) -> DepText:
    """Each retained edge as "form(head) --rel--> form(dep)", ordered by
    (head gid, dependent gid); stripping drops the label but keeps the pair."""
    nodes = sub.graph.nodes
    entries = []
    for e in sorted(sub.retained_edges, key=lambda e: (e.head_gid, e.dep_gid)):
        head = nodes[e.head_gid].form
        dep = nodes[e.dep_gid].form
        if strip_relations:
            entries.append(f"{head} --> {dep}")
        else:
            entries.append(f"{head} --{e.relation}--> {dep}")
    return DepText(body="; ".join(entries), format=FORMAT_EDGE, relations_stripped=strip_relations)


def conllu_format(sub: PrunedSubgraph) -> DepText:
    """Retained tokens as CoNLL-U rows.

    Tokens keep their original order and are renumbered 1..k per sentence so
    the output re-parses cleanly; a token whose head was pruned away becomes
    the row's root (head 0, deprel "root"). Sentences with no retained tokens
    are omitted. Inter-sentence links are never CoNLL-U rows.
    """
    keep_by_sentence: dict[int, set[int]] = {}
    for gid in sub.retained_gids:
        node = sub.graph.nodes[gid]
        keep_by_sentence.setdefault(node.sentence_index, set()).add(node.token_id)
    blocks: list[SentenceBlock] = []
    for m, block in enumerate(sub.graph.source_blocks):
        keep = keep_by_sentence.get(m)
        if keep:
            blocks.append(renumber_block(block, keep))
    return DepText(body=serialize_conllu(blocks), format=FORMAT_CONLLU)


def render(sub: PrunedSubgraph, fmt: str, strip_relations: bool = False) -> DepText:
    if fmt == FORMAT_EDGE:
        return edge_format(sub, strip_relations=strip_relations)
    if fmt == FORMAT_CONLLU:
        return conllu_format(sub)
    raise ValueError(f"unknown textualization format {fmt!r}")
