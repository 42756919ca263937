"""Classification and generation metrics.

Classification: accuracy and macro-F1 over the three sentiment classes, with
an explicit policy for predictions that failed format parsing. Generation:
corpus-level BLEU-4 and mean per-pair ROUGE-1/2/L F1. Every text metric uses
the single tokenization rule defined in :func:`tokenize`; an external
semantic-similarity score can be merged from a file but is never computed
here.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

LABELS = ("negative", "neutral", "positive")


class MetricError(Exception):
    pass


class EmptyInput(MetricError):
    """No scorable items remain."""


class EmptyCorpus(MetricError):
    """Generation metrics need at least one (candidate, reference) pair."""


class LengthMismatch(MetricError):
    pass


POLICY_DROP = "drop"
POLICY_COUNT_WRONG = "count-wrong"


def tokenize(text: str) -> list[str]:
    """The one tokenization rule all text metrics share.

    Lowercase, split on Unicode whitespace, then strip leading and trailing
    non-alphanumeric characters from each chunk (inner punctuation like the
    apostrophe in "don't" survives). Chunks that strip to nothing are dropped.
    """
    tokens = []
    for chunk in text.lower().split():
        start, end = 0, len(chunk)
        while start < end and not chunk[start].isalnum():
            start += 1
        while end > start and not chunk[end - 1].isalnum():
            end -= 1
        if start < end:
            tokens.append(chunk[start:end])
    return tokens


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    per_class: dict[str, ClassScores]
    macro_f1: float
    confusion: dict[str, dict[str, int]]  # gold label -> predicted label -> count
    total: int
    format_failures: int
    failure_policy: str

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": {
                label: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                }
                for label, s in self.per_class.items()
            },
            "confusion": self.confusion,
            "total": self.total,
            "format_failures": self.format_failures,
            "failure_policy": self.failure_policy,
        }


def _substitute_failure(gold: str) -> str:
    """Deterministic stand-in prediction for a format failure under
    count-wrong: the first label that differs from the gold one, so the item
    always scores as an error while the confusion matrix stays 3x3."""
    for label in LABELS:
        if label != gold:
            return label
    raise AssertionError("unreachable")


def classification_report(
    pairs: list[tuple[str | None, str]],
    failure_policy: str = POLICY_COUNT_WRONG,
) -> ClassificationReport:
    """Build accuracy/macro-F1/confusion from (predicted, gold) pairs.

    A predicted value of None marks a reply that failed format parsing; the
    policy decides whether such items are dropped or counted as wrong.
    Classes with zero predicted and zero gold support contribute f1 = 0 to
    the macro average.
    """
    if failure_policy not in (POLICY_DROP, POLICY_COUNT_WRONG):
        raise ValueError(f"unknown failure policy {failure_policy!r}")
    if not pairs:
        raise EmptyInput("no prediction pairs")
    for pred, gold in pairs:
        if gold not in LABELS:
            raise ValueError(f"gold label {gold!r} is not one of {LABELS}")
        if pred is not None and pred not in LABELS:
            raise ValueError(f"predicted label {pred!r} is not one of {LABELS}")

    failures = sum(1 for pred, _ in pairs if pred is None)
    confusion = {g: {p: 0 for p in LABELS} for g in LABELS}
    for pred, gold in pairs:
        if pred is None:
            if failure_policy == POLICY_DROP:
                continue
            pred = _substitute_failure(gold)
        confusion[gold][pred] += 1

    total = sum(sum(row.values()) for row in confusion.values())
    if total == 0:
        raise EmptyInput("all pairs dropped by failure policy")
    correct = sum(confusion[label][label] for label in LABELS)
    per_class = {}
    f1_values = []
    for label in LABELS:
        tp = confusion[label][label]
        fp = sum(confusion[g][label] for g in LABELS) - tp
        fn = sum(confusion[label].values()) - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassScores(precision, recall, f1, support=tp + fn)
        f1_values.append(f1)
    return ClassificationReport(
        accuracy=correct / total,
        per_class=per_class,
        macro_f1=sum(f1_values) / len(LABELS),
        confusion=confusion,
        total=total,
        format_failures=failures,
        failure_policy=failure_policy,
    )


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _check_corpus(candidates: list[str], references: list[str]) -> None:
    if len(candidates) != len(references):
        raise LengthMismatch(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    if not candidates:
        raise EmptyCorpus("no (candidate, reference) pairs")


def bleu4(candidates: list[str], references: list[str]) -> float:
    """Corpus-level BLEU with uniform weights over 1..4-grams.

    Clipped n-gram counts are pooled over the corpus before the precision
    ratio is taken; the brevity penalty uses total candidate and reference
    lengths. No smoothing: a zero precision at any order gives 0.0.
    """
    _check_corpus(candidates, references)
    cand_tokens = [tokenize(c) for c in candidates]
    ref_tokens = [tokenize(r) for r in references]
    matched = [0] * 4
    possible = [0] * 4
    for cand, ref in zip(cand_tokens, ref_tokens):
        for n in range(1, 5):
            cand_counts = _ngrams(cand, n)
            ref_counts = _ngrams(ref, n)
            matched[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in cand_counts.items()
            )
            possible[n - 1] += sum(cand_counts.values())
    if any(p == 0 for p in possible):
        return 0.0
    precisions = [m / p for m, p in zip(matched, possible)]
    if any(p == 0.0 for p in precisions):
        return 0.0
    cand_len = sum(len(t) for t in cand_tokens)
    ref_len = sum(len(t) for t in ref_tokens)
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(sum(math.log(p) for p in precisions) / 4.0)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _rouge_n_pair(cand: list[str], ref: list[str], n: int) -> float:
    cand_counts = _ngrams(cand, n)
    ref_counts = _ngrams(ref, n)
    match = sum(min(count, cand_counts[gram]) for gram, count in ref_counts.items())
    total_cand = sum(cand_counts.values())
    total_ref = sum(ref_counts.values())
    if total_cand == 0 or total_ref == 0:
        return 0.0
    return _f1(match / total_cand, match / total_ref)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _rouge_l_pair(cand: list[str], ref: list[str]) -> float:
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    return _f1(lcs / len(cand), lcs / len(ref))


def rouge(candidates: list[str], references: list[str]) -> tuple[float, float, float]:
    """(ROUGE-1, ROUGE-2, ROUGE-L) F1, averaged arithmetically over pairs."""
    _check_corpus(candidates, references)
    r1 = r2 = rl = 0.0
    for cand_text, ref_text in zip(candidates, references):
        cand = tokenize(cand_text)
        ref = tokenize(ref_text)
        r1 += _rouge_n_pair(cand, ref, 1)
        r2 += _rouge_n_pair(cand, ref, 2)
        rl += _rouge_l_pair(cand, ref)
    count = len(candidates)
    return r1 / count, r2 / count, rl / count


@dataclass(frozen=True)
class GenerationReport:
    bleu4: float
    rouge1_f: float
    rouge2_f: float
    rougeL_f: float
    pair_count: int
    external_semantic_score: float | None = None

    def to_dict(self) -> dict:
        return {
            "bleu4": self.bleu4,
            "rouge1_f": self.rouge1_f,
            "rouge2_f": self.rouge2_f,
            "rougeL_f": self.rougeL_f,
            "pair_count": self.pair_count,
            "external_semantic_score": self.external_semantic_score,
        }


def generation_report(
    candidates: list[str],
    references: list[str],
    external_scores: list[float] | None = None,
) -> GenerationReport:
    """All generation metrics over a parallel corpus.

    external_scores, when given, are per-sample values produced by an outside
    semantic scorer; only their mean is reported.
    """
    r1, r2, rl = rouge(candidates, references)
    external = None
    if external_scores:
        external = sum(external_scores) / len(external_scores)
    return GenerationReport(
        bleu4=bleu4(candidates, references),
        rouge1_f=r1,
        rouge2_f=r2,
        rougeL_f=rl,
        pair_count=len(candidates),
        external_semantic_score=external,
    )


@dataclass(frozen=True)
class EvaluationReport:
    classification: ClassificationReport
    generation: GenerationReport | None
    counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.to_dict(),
            "generation": self.generation.to_dict() if self.generation else None,
            "counts": self.counts,
        }


def load_external_scores(path) -> dict[str, float]:
    """Read a tab-separated (sample id, score) file."""
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise MetricError(f"{path}:{lineno}: expected 'id<TAB>score'")
            scores[parts[0]] = float(parts[1])
    return scores
