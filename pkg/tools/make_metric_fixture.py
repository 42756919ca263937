#!/usr/bin/env python3
"""Freeze reference BLEU/ROUGE values for the 20-pair oracle corpus.

This file is the independent reference implementation: it recomputes every
score from first principles (explicit loops, recursive LCS, no shared code
with the library) and records itself as the oracle tool inside the fixture.
Run it only to regenerate tests/fixtures/metric_oracle.json after reviewing
any change here.
"""

import json
import math
import pathlib
import re
import sys
from functools import lru_cache

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "metric_oracle.json"

PAIRS = [
    # (candidate, reference)
    ("the image shows a joyful crowd", "the image shows a joyful crowd"),
    ("completely different words here", "nothing shared at all between them"),
    ("a b c d", "a c b d"),
    ("the the the the", "the cat sat down"),
    ("players celebrate the title win", "the players celebrate winning the title"),
    ("gloomy sky and sad faces", "sad faces under a gloomy sky"),
    ("short", "short"),
    ("one two three four five six", "one two three four"),
    ("the text praises the team", "the text criticizes the team"),
    ("bright colors convey excitement and joy", "bright colors convey joy"),
    ("he scored twice in the final", "he scored twice in the final match"),
    ("negative tone dominates the caption", "the caption has a negative dominating tone"),
    ("fans wave flags happily", "happy fans wave their flags"),
    ("a a b b c c", "a b c a b c"),
    ("the aspect is mentioned factually", "the aspect is mentioned only factually"),
    ("smiling players lift the trophy high", "players smile and lift the trophy"),
    ("rain ruined the parade", "the parade was ruined by rain"),
    ("neutral report of the score", "a neutral report about the score"),
    ("crowd boos the referee loudly", "the referee was booed loudly by the crowd"),
    ("this caption, with punctuation!", "this caption has punctuation."),
]


def reference_tokenize(text):
    """Second implementation of the documented rule: lowercase, whitespace
    split, strip non-alphanumeric edges."""
    tokens = []
    for chunk in text.lower().split():
        match = re.search(r"[0-9a-z].*[0-9a-z]|[0-9a-z]", chunk)
        if match:
            tokens.append(match.group())
    return tokens


def reference_bleu4(pairs):
    tokenized = [(reference_tokenize(c), reference_tokenize(r)) for c, r in pairs]
    precisions = []
    for n in range(1, 5):
        match_total = 0
        cand_total = 0
        for cand, ref in tokenized:
            cand_ngrams = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
            ref_ngrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
            remaining = list(ref_ngrams)
            for gram in cand_ngrams:
                if gram in remaining:
                    remaining.remove(gram)
                    match_total += 1
            cand_total += len(cand_ngrams)
        if cand_total == 0 or match_total == 0:
            return 0.0
        precisions.append(match_total / cand_total)
    c = sum(len(cand) for cand, _ in tokenized)
    r = sum(len(ref) for _, ref in tokenized)
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return bp * math.prod(p ** 0.25 for p in precisions)


def reference_rouge_n(cand, ref, n):
    cand_ngrams = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
    ref_ngrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
    if not cand_ngrams or not ref_ngrams:
        return 0.0
    remaining = list(cand_ngrams)
    hits = 0
    for gram in ref_ngrams:
        if gram in remaining:
            remaining.remove(gram)
            hits += 1
    precision = hits / len(cand_ngrams)
    recall = hits / len(ref_ngrams)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def reference_rouge_l(cand, ref):
    cand_t = tuple(cand)
    ref_t = tuple(ref)

    @lru_cache(maxsize=None)
    def lcs(i, j):
        if i == 0 or j == 0:
            return 0
        if cand_t[i - 1] == ref_t[j - 1]:
            return lcs(i - 1, j - 1) + 1
        return max(lcs(i - 1, j), lcs(i, j - 1))

    length = lcs(len(cand_t), len(ref_t))
    if not cand_t or not ref_t or length == 0:
        return 0.0
    precision = length / len(cand_t)
    recall = length / len(ref_t)
    return 2 * precision * recall / (precision + recall)


def main():
    r1 = r2 = rl = 0.0
    for cand_text, ref_text in PAIRS:
        cand = reference_tokenize(cand_text)
        ref = reference_tokenize(ref_text)
        r1 += reference_rouge_n(cand, ref, 1)
        r2 += reference_rouge_n(cand, ref, 2)
        rl += reference_rouge_l(cand, ref)
    fixture = {
        "tool": "tools/make_metric_fixture.py bundled brute-force reference",
        "settings": {
            "bleu": "corpus-level, uniform 1-4 gram weights, clipped counts, "
                    "brevity penalty on total lengths, no smoothing",
            "rouge": "per-pair F1 (beta=1), arithmetic mean over pairs, "
                     "recursive LCS for rouge-L",
            "tokenizer": "lowercase, whitespace split, strip non-alphanumeric edges",
        },
        "pairs": [{"candidate": c, "reference": r} for c, r in PAIRS],
        "expected": {
            "bleu4": reference_bleu4(PAIRS),
            "rouge1_f": r1 / len(PAIRS),
            "rouge2_f": r2 / len(PAIRS),
            "rougeL_f": rl / len(PAIRS),
        },
    }
    OUT.write_text(json.dumps(fixture, indent=2) + "\n")
    print(json.dumps(fixture["expected"], indent=2))


if __name__ == "__main__":
    sys.exit(main())
