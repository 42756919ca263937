#!/usr/bin/env python3
"""Regenerate the textualization golden files from the committed fixture.

Output must be reviewed by hand before committing: the golden files are the
frozen expectation, not a mirror of current behavior.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from synabsa.conllu import parse_conllu
from synabsa.graph import build_unified_graph
from synabsa.pruning import PruneConfig, locate_aspect, prune
from synabsa.textualize import conllu_format, edge_format

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"
GOLDEN = FIXTURES / "golden"

ASPECT = "food"
DEPTHS = {"0": 0, "1": 1, "2": 2, "inf": None}


def main():
    GOLDEN.mkdir(exist_ok=True)
    blocks = parse_conllu((FIXTURES / "three_sentences.conllu").read_text())
    graph = build_unified_graph(blocks)
    anchor = locate_aspect(graph, ASPECT)
    for label, depth in DEPTHS.items():
        sub = prune(graph, anchor, PruneConfig(depth=depth, mode="directed"))
        (GOLDEN / f"deptext_edge_{label}.txt").write_text(edge_format(sub).body + "\n")
        (GOLDEN / f"deptext_edge_{label}_strip.txt").write_text(
            edge_format(sub, strip_relations=True).body + "\n"
        )
        (GOLDEN / f"deptext_conllu_{label}.txt").write_text(conllu_format(sub).body)
    print(f"wrote {len(DEPTHS) * 3} golden files to {GOLDEN}")


if __name__ == "__main__":
    main()
