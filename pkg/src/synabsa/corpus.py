"""Corpus records and their lifecycle.

A sample couples a text, an image reference, one aspect occurrence, the gold
sentiment, and (after augmentation) a gold explanation. Corpora persist as
JSON-lines: one metadata line followed by one sample per line. The importer
reads the community 4-line Twitter layout (label / text with a "$T$"
placeholder / aspect / image id).
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import re
from dataclasses import dataclass, field

from .gateway import ChatReply
from .prompts import build_explain_gen_prompt, sequence_to_wire
from .replies import render_reply

logger = logging.getLogger(__name__)

LABELS = ("negative", "neutral", "positive")
LABEL_FROM_CODE = {"-1": "negative", "0": "neutral", "1": "positive"}
ASPECT_PLACEHOLDER = "$T$"

# Training settings shipped alongside fine-tuning exports for external trainers.
FINETUNE_HYPERPARAMETERS = {
    "method": "lora",
    "lora_rank": 4,
    "lora_scaling_factor": 16,
    "lora_dropout": 0.1,
    "epochs": 10,
    "batch_size": 1,
    "optimizer": "AdamW",
    "learning_rate": 1e-5,
}


class DatastoreError(Exception):
    pass


class BadLabel(DatastoreError):
    pass


class MissingPlaceholder(DatastoreError):
    pass


class UnreadableFile(DatastoreError):
    pass


class NothingAugmented(DatastoreError):
    pass


class MissingExplanation(DatastoreError):
    pass


class MissingDepText(DatastoreError):
    pass


@dataclass
class Sample:
    id: str
    split: str
    text: str
    image_ref: str
    aspect: str
    aspect_occurrence: int
    gold_sentiment: str
    gold_explanation: str | None = None
    deptext_cache: dict[str, str] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "split": self.split,
            "text": self.text,
            "image": self.image_ref,
            "aspect": self.aspect,
            "aspect_occurrence": self.aspect_occurrence,
            "sentiment": self.gold_sentiment,
            "explanation": self.gold_explanation,
            "deptext": dict(sorted(self.deptext_cache.items())),
        }

    @classmethod
    def from_record(cls, record: dict) -> "Sample":
        return cls(
            id=record["id"],
            split=record["split"],
            text=record["text"],
            image_ref=record["image"],
            aspect=record["aspect"],
            aspect_occurrence=record["aspect_occurrence"],
            gold_sentiment=record["sentiment"],
            gold_explanation=record.get("explanation"),
            deptext_cache=dict(record.get("deptext") or {}),
        )


@dataclass
class Corpus:
    name: str
    samples: list[Sample] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        ids = [s.id for s in self.samples]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DatastoreError(f"duplicate sample ids: {dupes[:5]}")

    def by_id(self, sample_id: str) -> Sample:
        for sample in self.samples:
            if sample.id == sample_id:
                return sample
        raise KeyError(sample_id)

    def split_sizes(self) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for sample in self.samples:
            sizes[sample.split] = sizes.get(sample.split, 0) + 1
        return sizes

    def of_split(self, split: str) -> list[Sample]:
        return [s for s in self.samples if s.split == split]


def save_corpus(corpus: Corpus, path) -> None:
    """Atomic JSON-lines write: metadata line first, then one sample per line."""
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            meta = {"corpus": {"name": corpus.name, "provenance": corpus.provenance}}
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
            for sample in corpus.samples:
                fh.write(json.dumps(sample.to_record(), sort_keys=True) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_corpus(path) -> Corpus:
    samples: list[Sample] = []
    name = os.path.splitext(os.path.basename(str(path)))[0]
    provenance: list[str] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"cannot open corpus {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "corpus" in record:
                name = record["corpus"].get("name", name)
                provenance = list(record["corpus"].get("provenance", []))
            elif "id" in record:
                samples.append(Sample.from_record(record))
            else:
                raise DatastoreError(f"{path}:{lineno}: unrecognized record")
    return Corpus(name=name, samples=samples, provenance=provenance)


def _aspect_pattern(aspect: str) -> re.Pattern:
    return re.compile(r"(?<!\w)" + re.escape(aspect) + r"(?!\w)", re.IGNORECASE)


@dataclass
class ImportResult:
    corpus: Corpus
    issues: list[str]


def _read_records(path) -> list[tuple[int, list[str]]]:
    """Group a 4-line-per-record file into (record line offset, lines)."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.rstrip("\n").rstrip("\r") for line in fh]
    except OSError as exc:
        raise UnreadableFile(f"cannot read {path}: {exc}") from exc
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) % 4 != 0:
        raise UnreadableFile(f"{path}: {len(lines)} lines is not a multiple of 4")
    return [(i + 1, lines[i : i + 4]) for i in range(0, len(lines), 4)]


def import_twitter_format(
    split_files: dict[str, str],
    image_dir: str,
    *,
    corpus_name: str = "corpus",
    strict: bool = True,
) -> ImportResult:
    """Build a corpus from split-named 4-line record files.

    Record layout: sentiment code (-1/0/1), text with a "$T$" aspect
    placeholder, aspect surface string, image file name. The aspect is
    substituted back into the text and its occurrence index is derived from
    the placeholder position. Records with missing image files are flagged in
    the provenance notes, never dropped. With strict=False, malformed records
    are skipped and reported as issues instead of raising.
    """
    samples: list[Sample] = []
    issues: list[str] = []
    provenance: list[str] = []

    def record_issue(message: str, exc_type=DatastoreError):
        if strict:
            raise exc_type(message)
        issues.append(message)
        logger.warning("skipping record: %s", message)

    for split in sorted(split_files):
        path = split_files[split]
        provenance.append(f"imported split {split} from {os.path.basename(str(path))}")
        for index, (lineno, rec) in enumerate(_read_records(path)):
            label_code, raw_text, aspect, image_name = (part.strip() for part in rec)
            where = f"{path}:{lineno}"
            if label_code not in LABEL_FROM_CODE:
                record_issue(f"{where}: label {label_code!r} is not one of -1/0/1", BadLabel)
                continue
            if ASPECT_PLACEHOLDER not in raw_text:
                record_issue(f"{where}: no {ASPECT_PLACEHOLDER} placeholder", MissingPlaceholder)
                continue
            if raw_text.count(ASPECT_PLACEHOLDER) > 1:
                record_issue(f"{where}: multiple {ASPECT_PLACEHOLDER} placeholders", MissingPlaceholder)
                continue
            if not aspect:
                record_issue(f"{where}: empty aspect", MissingPlaceholder)
                continue
            prefix, _, _ = raw_text.partition(ASPECT_PLACEHOLDER)
            text = raw_text.replace(ASPECT_PLACEHOLDER, aspect)
            occurrence = len(_aspect_pattern(aspect).findall(prefix))
            total = len(_aspect_pattern(aspect).findall(text))
            if total < occurrence + 1:
                provenance.append(
                    f"note: aspect not cleanly delimited at {where}; occurrence may be off"
                )
            image_ref = os.path.join(image_dir, image_name)
            if not os.path.isfile(image_ref):
                provenance.append(f"missing image for {split}-{index:04d}: {image_name}")
            samples.append(
                Sample(
                    id=f"{split}-{index:04d}",
                    split=split,
                    text=text,
                    image_ref=image_ref,
                    aspect=aspect,
                    aspect_occurrence=occurrence,
                    gold_sentiment=LABEL_FROM_CODE[label_code],
                )
            )
    return ImportResult(
        corpus=Corpus(name=corpus_name, samples=samples, provenance=provenance),
        issues=issues,
    )


@dataclass(frozen=True)
class AugmentationRecord:
    sample_id: str
    raw_reply: str
    accepted: bool
    reviewer_note: str | None = None


def augment_explanations(
    corpus: Corpus,
    gateway,
    *,
    checkpoint_path: str | None = None,
    batch_size: int = 8,
) -> list[AugmentationRecord]:
    """Generate an explanation for every sample that lacks one.

    The prompt carries the gold sentiment as a constraint; the raw reply is
    stored verbatim as the gold explanation. Already-augmented samples are
    skipped, so re-running after an interruption only touches the remainder.
    The corpus is checkpointed after every batch; per-sample failures are
    recorded and the run continues.
    """
    records: list[AugmentationRecord] = []
    pending = [s for s in corpus.samples if not s.gold_explanation]
    for start in range(0, len(pending), batch_size):
        batch = pending[start : start + batch_size]
        sequences = []
        ready = []
        for sample in batch:
            try:
                sequences.append(build_explain_gen_prompt(sample))
                ready.append(sample)
            except Exception as exc:
                records.append(
                    AugmentationRecord(sample.id, raw_reply=str(exc), accepted=False)
                )
        results = gateway.chat_batch(sequences)
        for sample, result in zip(ready, results):
            if isinstance(result, ChatReply):
                sample.gold_explanation = result.text
                records.append(
                    AugmentationRecord(sample.id, raw_reply=result.text, accepted=True)
                )
            else:
                records.append(
                    AugmentationRecord(sample.id, raw_reply=str(result), accepted=False)
                )
        if checkpoint_path:
            save_corpus(corpus, checkpoint_path)
    return records


def sample_for_review(corpus: Corpus, fraction: float = 0.10, seed: int = 0) -> list[str]:
    """Pick ceil(fraction * augmented) sample ids for manual checking.

    Deterministic for a given seed; raises NothingAugmented when no sample
    has an explanation yet.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    augmented = sorted(s.id for s in corpus.samples if s.gold_explanation)
    if not augmented:
        raise NothingAugmented("no sample has an explanation yet")
    k = math.ceil(fraction * len(augmented))
    rng = random.Random(seed)
    return sorted(rng.sample(augmented, k))


def write_review_sheet(corpus: Corpus, sample_ids: list[str], path) -> None:
    """Tab-separated sheet (id, text, aspect, label, explanation, image)."""

    def clean(value: str) -> str:
        return value.replace("\t", " ").replace("\n", " ")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id\ttext\taspect\tsentiment\texplanation\timage\n")
        for sample_id in sample_ids:
            sample = corpus.by_id(sample_id)
            fh.write(
                "\t".join(
                    (
                        sample.id,
                        clean(sample.text),
                        clean(sample.aspect),
                        sample.gold_sentiment,
                        clean(sample.gold_explanation or ""),
                        sample.image_ref,
                    )
                )
                + "\n"
            )


@dataclass(frozen=True)
class ExportVariant:
    """baseline, or syntax with the cache coordinates of the DepText to embed."""

    kind: str  # "baseline" | "syntax"
    depth: int | None = 2
    mode: str = "directed"
    strip_relations: bool = False
    fmt: str = "edge"

    def cache_key(self) -> str:
        from .pruning import PruneConfig

        config = PruneConfig(depth=self.depth, mode=self.mode, strip_relations=self.strip_relations)
        return config.cache_key(self.fmt)

    def to_dict(self) -> dict:
        if self.kind == "baseline":
            return {"kind": "baseline"}
        return {
            "kind": self.kind,
            "depth": "inf" if self.depth is None else self.depth,
            "mode": self.mode,
            "strip_relations": self.strip_relations,
            "format": self.fmt,
        }


def export_finetune_data(corpus: Corpus, variant: ExportVariant, out_path) -> int:
    """Write JSON-lines conversation records plus a sidecar training manifest.

    Every exported sample needs a gold explanation; syntax variants also need
    the matching cached DepText body.
    """
    from .prompts import build_inference_prompt

    count = 0
    tmp = f"{out_path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            for sample in corpus.samples:
                if not sample.gold_explanation:
                    raise MissingExplanation(f"sample {sample.id} has no gold explanation")
                if variant.kind == "baseline":
                    sequence = build_inference_prompt(sample)
                else:
                    key = variant.cache_key()
                    if key not in sample.deptext_cache:
                        raise MissingDepText(f"sample {sample.id} has no cached deptext {key!r}")
                    sequence = build_inference_prompt(sample, sample.deptext_cache[key])
                messages = sequence_to_wire(sequence)
                messages.append(
                    {
                        "role": "assistant",
                        "content": render_reply(sample.gold_sentiment, sample.gold_explanation),
                    }
                )
                fh.write(json.dumps({"id": sample.id, "messages": messages}, sort_keys=True) + "\n")
                count += 1
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    manifest = {
        "records": count,
        "variant": variant.to_dict(),
        "hyperparameters": FINETUNE_HYPERPARAMETERS,
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return count
