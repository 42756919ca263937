"""Command-line orchestration of the corpus workflows.

Subcommands cover the full loop: import a Twitter-layout corpus, augment it
with generated explanations, cache aspect-centered syntax text, run batch
inference against a chat endpoint, score the predictions, and run the
multi-system judge protocol. Every run takes a per-corpus lock, records its
arguments and input digests in a manifest, and draws all randomness from an
explicit --seed.

Exit codes: 0 clean, 1 per-record failures occurred, 2 configuration or IO
failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import os
import random
import re
import sys
from dataclasses import dataclass, field

from filelock import FileLock

from . import corpus as corpus_mod
from . import graph as graph_mod
from . import metrics as metrics_mod
from . import pruning as pruning_mod
from . import textualize as textualize_mod
from .conllu import ConlluError, load_conllu_file
from .gateway import ChatGateway, ChatReply, GatewayConfig
from .prompts import build_inference_prompt, build_judge_prompt
from .replies import ReplyFormatError, parse_reply

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


class ConfigFailure(Exception):
    """Aborts the run before any per-record work starts."""


class MissingParse(Exception):
    """No sidecar CoNLL-U file for a sample id."""


class CoverageGap(ConfigFailure):
    """A prediction file does not cover every sampled id."""


@dataclass
class RunManifest:
    command: str
    config: dict
    input_digests: dict[str, str] = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    counts: dict[str, int] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    def write(self, directory: str) -> str:
        os.makedirs(directory, exist_ok=True)
        stamp = re.sub(r"[^0-9T]", "", self.started)
        path = os.path.join(directory, f"{self.command}-{stamp}-{os.getpid()}.manifest.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.__dict__, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _utcnow() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S.%f")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _start_manifest(command: str, args: argparse.Namespace, inputs: list[str]) -> RunManifest:
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = RunManifest(command=command, config=config, started=_utcnow())
    for path in inputs:
        if path and os.path.isfile(path):
            manifest.input_digests[path] = _sha256(path)
    return manifest


def _finish(manifest: RunManifest, directory: str, exit_code: int) -> int:
    manifest.finished = _utcnow()
    path = manifest.write(directory)
    logger.info("manifest written to %s", path)
    return exit_code


def _corpus_lock(corpus_path: str) -> FileLock:
    return FileLock(f"{corpus_path}.lock")


def _parse_depth(value: str) -> int | None:
    if value == "inf":
        return None
    return int(value)


def _prune_config(args) -> pruning_mod.PruneConfig:
    return pruning_mod.PruneConfig(
        depth=_parse_depth(args.depth),
        mode=args.mode,
        strip_relations=args.strip_relations,
    )


def _gateway_config(args) -> GatewayConfig:
    return GatewayConfig(
        endpoint_url=args.endpoint,
        model_name=args.model,
        api_key_env=args.api_key_env,
        temperature=args.temperature,
        max_output_tokens=args.max_output_tokens,
        request_timeout=args.timeout,
        max_retries=args.max_retries,
        max_parallel=args.max_parallel,
        backoff_base=args.backoff_base,
        audit_log=args.audit_log,
    )


def _add_gateway_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--endpoint", required=True, help="chat-completions URL")
    parser.add_argument("--model", required=True, help="remote model name")
    parser.add_argument("--api-key-env", default="OPENAI_API_KEY")
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--max-output-tokens", type=int, default=512)
    parser.add_argument("--timeout", type=float, default=60.0)
    parser.add_argument("--max-retries", type=int, default=3)
    parser.add_argument("--max-parallel", type=int, default=4)
    parser.add_argument("--backoff-base", type=float, default=1.0)
    parser.add_argument("--audit-log", default=None, help="JSON-lines request/response log")


def _add_variant_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--depth", choices=["0", "1", "2", "3", "inf"], default="2")
    parser.add_argument("--mode", choices=["directed", "undirected"], default="directed")
    parser.add_argument("--strip-relations", action="store_true")
    parser.add_argument(
        "--format",
        dest="fmt",
        choices=[textualize_mod.FORMAT_EDGE, textualize_mod.FORMAT_CONLLU],
        default=textualize_mod.FORMAT_EDGE,
    )


# ---------------------------------------------------------------- import


def cmd_import(args) -> int:
    split_files = {}
    for split in ("train", "dev", "test"):
        path = getattr(args, split)
        if path:
            split_files[split] = path
    if not split_files:
        raise ConfigFailure("no split files given (use --train/--dev/--test)")
    manifest = _start_manifest("import", args, list(split_files.values()))
    result = corpus_mod.import_twitter_format(
        split_files, args.image_dir, corpus_name=args.name, strict=args.strict
    )
    with _corpus_lock(args.out):
        corpus_mod.save_corpus(result.corpus, args.out)
    sizes = result.corpus.split_sizes()
    for split in sorted(sizes):
        logger.info("split %s: %d samples", split, sizes[split])
    manifest.counts = {
        "processed": len(result.corpus.samples),
        "failed": len(result.issues),
        "skipped": 0,
    }
    manifest.outputs = [args.out, _sha256(args.out)]
    code = EXIT_PARTIAL if result.issues else EXIT_OK
    return _finish(manifest, os.path.dirname(os.path.abspath(args.out)), code)


# ---------------------------------------------------------------- prepare-syntax


def _deptext_for_sample(sample, parses_dir: str, config: pruning_mod.PruneConfig, fmt: str) -> str:
    parse_path = os.path.join(parses_dir, f"{sample.id}.conllu")
    if not os.path.isfile(parse_path):
        raise MissingParse(f"no parse file {parse_path}")
    blocks = load_conllu_file(parse_path)
    graph = graph_mod.build_unified_graph(blocks)
    anchor = pruning_mod.locate_aspect(graph, sample.aspect, sample.aspect_occurrence)
    sub = pruning_mod.prune(graph, anchor, config)
    return textualize_mod.render(sub, fmt, strip_relations=config.strip_relations).body


def cmd_prepare_syntax(args) -> int:
    manifest = _start_manifest("prepare-syntax", args, [args.corpus])
    config = _prune_config(args)
    key = config.cache_key(args.fmt)
    processed = failed = skipped = 0
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
        for sample in corpus.samples:
            if key in sample.deptext_cache and not args.force:
                skipped += 1
                continue
            try:
                sample.deptext_cache[key] = _deptext_for_sample(
                    sample, args.parses, config, args.fmt
                )
                processed += 1
            except (MissingParse, pruning_mod.PruneError, ConlluError) as exc:
                logger.warning("sample %s: %s", sample.id, exc)
                failed += 1
        corpus_mod.save_corpus(corpus, args.corpus)
    manifest.counts = {"processed": processed, "failed": failed, "skipped": skipped}
    manifest.outputs = [args.corpus]
    logger.info("cached %d deptexts under key %s (%d failed, %d skipped)", processed, key, failed, skipped)
    code = EXIT_PARTIAL if failed else EXIT_OK
    return _finish(manifest, os.path.dirname(os.path.abspath(args.corpus)), code)


# ---------------------------------------------------------------- augment


def cmd_augment(args) -> int:
    manifest = _start_manifest("augment", args, [args.corpus])
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
        with ChatGateway(_gateway_config(args)) as gateway:
            records = corpus_mod.augment_explanations(
                corpus, gateway, checkpoint_path=args.corpus, batch_size=args.batch_size
            )
        corpus_mod.save_corpus(corpus, args.corpus)
    accepted = sum(1 for r in records if r.accepted)
    manifest.counts = {
        "processed": accepted,
        "failed": len(records) - accepted,
        "skipped": len(corpus.samples) - len(records),
    }
    manifest.outputs = [args.corpus]
    code = EXIT_PARTIAL if accepted < len(records) else EXIT_OK
    return _finish(manifest, os.path.dirname(os.path.abspath(args.corpus)), code)


# ---------------------------------------------------------------- review-sample


def cmd_review_sample(args) -> int:
    manifest = _start_manifest("review-sample", args, [args.corpus])
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
    ids = corpus_mod.sample_for_review(corpus, fraction=args.fraction, seed=args.seed)
    corpus_mod.write_review_sheet(corpus, ids, args.out)
    manifest.counts = {"processed": len(ids), "failed": 0, "skipped": 0}
    manifest.outputs = [args.out]
    logger.info("review sheet with %d rows written to %s", len(ids), args.out)
    return _finish(manifest, os.path.dirname(os.path.abspath(args.out)), EXIT_OK)


# ---------------------------------------------------------------- export-finetune


def cmd_export_finetune(args) -> int:
    manifest = _start_manifest("export-finetune", args, [args.corpus])
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
    if args.split:
        corpus = corpus_mod.Corpus(
            name=corpus.name, samples=corpus.of_split(args.split), provenance=corpus.provenance
        )
    if args.variant == "baseline":
        variant = corpus_mod.ExportVariant(kind="baseline")
    else:
        variant = corpus_mod.ExportVariant(
            kind="syntax",
            depth=_parse_depth(args.depth),
            mode=args.mode,
            strip_relations=args.strip_relations,
            fmt=args.fmt,
        )
    count = corpus_mod.export_finetune_data(corpus, variant, args.out)
    manifest.counts = {"processed": count, "failed": 0, "skipped": 0}
    manifest.outputs = [args.out, f"{args.out}.manifest.json"]
    logger.info("exported %d conversation records to %s", count, args.out)
    return _finish(manifest, os.path.dirname(os.path.abspath(args.out)), EXIT_OK)


# ---------------------------------------------------------------- infer


def _load_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def cmd_infer(args) -> int:
    manifest = _start_manifest("infer", args, [args.corpus])
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
    samples = sorted(corpus.of_split(args.split), key=lambda s: s.id)
    if not samples:
        raise ConfigFailure(f"no samples in split {args.split!r}")

    done_ids: set[str] = set()
    if os.path.exists(args.out):
        done_ids = {row["id"] for row in _load_jsonl(args.out)}
    todo = [s for s in samples if s.id not in done_ids]
    logger.info("%d samples to infer (%d already done)", len(todo), len(done_ids))

    config = _prune_config(args) if args.variant == "syntax" else None
    cache_key = config.cache_key(args.fmt) if config else None

    rows: list[dict] = []
    sequences = []
    pending = []
    failed = 0
    for sample in todo:
        try:
            if args.variant == "syntax":
                deptext = sample.deptext_cache.get(cache_key)
                if deptext is None:
                    raise corpus_mod.MissingDepText(
                        f"sample {sample.id} has no cached deptext {cache_key!r}; run prepare-syntax"
                    )
                sequences.append(build_inference_prompt(sample, deptext))
            else:
                sequences.append(build_inference_prompt(sample))
            pending.append(sample)
        except Exception as exc:
            failed += 1
            rows.append(
                {
                    "id": sample.id,
                    "variant": args.variant,
                    "raw_reply": None,
                    "sentiment": None,
                    "explanation": None,
                    "error": {"stage": "prompt", "category": type(exc).__name__, "message": str(exc)},
                }
            )

    if pending:
        with ChatGateway(_gateway_config(args)) as gateway:
            results = gateway.chat_batch(sequences)
        for sample, result in zip(pending, results):
            row = {
                "id": sample.id,
                "variant": args.variant,
                "raw_reply": None,
                "sentiment": None,
                "explanation": None,
                "error": None,
            }
            if isinstance(result, ChatReply):
                row["raw_reply"] = result.text
                row["attempt"] = result.attempt
                try:
                    parsed = parse_reply(result.text)
                    row["sentiment"] = parsed.sentiment
                    row["explanation"] = parsed.explanation
                except ReplyFormatError as exc:
                    failed += 1
                    row["error"] = {
                        "stage": "parse",
                        "category": type(exc).__name__,
                        "message": str(exc),
                    }
            else:
                failed += 1
                row["error"] = {
                    "stage": "gateway",
                    "category": type(result).__name__,
                    "message": str(result),
                }
            rows.append(row)

    rows.sort(key=lambda r: r["id"])
    with open(args.out, "a", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    manifest.counts = {"processed": len(rows) - failed, "failed": failed, "skipped": len(done_ids)}
    manifest.outputs = [args.out]
    code = EXIT_PARTIAL if failed else EXIT_OK
    return _finish(manifest, os.path.dirname(os.path.abspath(args.out)), code)


# ---------------------------------------------------------------- evaluate


def cmd_evaluate(args) -> int:
    manifest = _start_manifest("evaluate", args, [args.corpus, args.predictions])
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
    predictions: dict[str, dict] = {}
    for row in _load_jsonl(args.predictions):
        predictions[row["id"]] = row  # later rows win on resume duplicates
    if not predictions:
        raise ConfigFailure(f"no prediction rows in {args.predictions}")

    external = {}
    if args.external_scores:
        external = metrics_mod.load_external_scores(args.external_scores)

    pairs = []
    sample_rows = []
    candidates = []
    references = []
    external_values = []
    for sample_id in sorted(predictions):
        row = predictions[sample_id]
        sample = corpus.by_id(sample_id)
        predicted = row.get("sentiment")
        pairs.append((predicted, sample.gold_sentiment))
        if row.get("explanation") and sample.gold_explanation:
            candidates.append(row["explanation"])
            references.append(sample.gold_explanation)
            if sample_id in external:
                external_values.append(external[sample_id])
        sample_rows.append(
            {
                "id": sample_id,
                "gold": sample.gold_sentiment,
                "predicted": predicted,
                "correct": predicted == sample.gold_sentiment,
                "error": row.get("error"),
            }
        )

    classification = metrics_mod.classification_report(pairs, failure_policy=args.failure_policy)
    generation = None
    if candidates:
        generation = metrics_mod.generation_report(
            candidates, references, external_values or None
        )
    report = metrics_mod.EvaluationReport(
        classification=classification,
        generation=generation,
        counts={
            "predictions": len(predictions),
            "format_failures": classification.format_failures,
            "generation_pairs": len(candidates),
        },
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(f"{args.out}.samples.jsonl", "w", encoding="utf-8") as fh:
        for row in sample_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    logger.info(
        "accuracy %.4f macro-F1 %.4f over %d items",
        classification.accuracy,
        classification.macro_f1,
        classification.total,
    )
    manifest.counts = {
        "processed": len(sample_rows),
        "failed": classification.format_failures,
        "skipped": 0,
    }
    manifest.outputs = [args.out, f"{args.out}.samples.jsonl"]
    return _finish(manifest, os.path.dirname(os.path.abspath(args.out)), EXIT_OK)


# ---------------------------------------------------------------- judge


def deshuffle_choice(permutation: list[int], choice: int) -> int:
    """Map the judge's 1-based pick over shuffled candidates back to the
    original system index."""
    return permutation[choice - 1]


def _judge_choice(text: str, k: int) -> int | None:
    match = re.search(r"\d+", text)
    if not match:
        return None
    choice = int(match.group())
    if not 1 <= choice <= k:
        return None
    return choice


def cmd_judge(args) -> int:
    manifest = _start_manifest("judge", args, [args.corpus] + list(args.predictions))
    with _corpus_lock(args.corpus):
        corpus = corpus_mod.load_corpus(args.corpus)
    systems = []
    for path in args.predictions:
        name = os.path.splitext(os.path.basename(path))[0]
        rows = {row["id"]: row for row in _load_jsonl(path)}
        systems.append((name, rows))

    split_ids = sorted(s.id for s in corpus.of_split(args.split))
    if not split_ids:
        raise ConfigFailure(f"no samples in split {args.split!r}")
    rng = random.Random(args.seed)
    size = min(args.subset_size, len(split_ids))
    sampled = sorted(rng.sample(split_ids, size))

    for name, rows in systems:
        missing = [i for i in sampled if i not in rows]
        if missing:
            raise CoverageGap(f"prediction file for {name!r} lacks ids {missing[:5]}")

    def candidate_text(row: dict) -> str | None:
        return row.get("explanation") or row.get("raw_reply")

    tally = {name: 0 for name, _ in systems}
    failures = 0
    detail_rows = []
    sequences = []
    meta = []
    for sample_id in sampled:
        sample = corpus.by_id(sample_id)
        texts = [candidate_text(rows[sample_id]) for _, rows in systems]
        if any(t is None for t in texts):
            failures += 1
            detail_rows.append({"id": sample_id, "error": "candidate missing"})
            continue
        permutation = rng.sample(range(len(systems)), len(systems))
        shuffled = [texts[i] for i in permutation]
        try:
            sequences.append(build_judge_prompt(sample, shuffled))
            meta.append((sample_id, permutation))
        except Exception as exc:
            failures += 1
            detail_rows.append({"id": sample_id, "error": f"{type(exc).__name__}: {exc}"})

    if sequences:
        with ChatGateway(_gateway_config(args)) as gateway:
            results = gateway.chat_batch(sequences)
        for (sample_id, permutation), result in zip(meta, results):
            if not isinstance(result, ChatReply):
                failures += 1
                detail_rows.append({"id": sample_id, "error": str(result)})
                continue
            choice = _judge_choice(result.text, len(systems))
            if choice is None:
                failures += 1
                detail_rows.append(
                    {"id": sample_id, "error": f"unparseable choice {result.text!r}"}
                )
                continue
            winner = systems[deshuffle_choice(permutation, choice)][0]
            tally[winner] += 1
            detail_rows.append(
                {
                    "id": sample_id,
                    "permutation": permutation,
                    "choice": choice,
                    "winner": winner,
                    "raw_reply": result.text,
                }
            )

    result_doc = {
        "systems": [name for name, _ in systems],
        "sampled": len(sampled),
        "tally": tally,
        "judge_failures": failures,
        "seed": args.seed,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(f"{args.out}.samples.jsonl", "w", encoding="utf-8") as fh:
        for row in detail_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    for name in sorted(tally):
        logger.info("judge tally %s: %d", name, tally[name])
    manifest.counts = {"processed": len(sampled) - failures, "failed": failures, "skipped": 0}
    manifest.outputs = [args.out, f"{args.out}.samples.jsonl"]
    code = EXIT_PARTIAL if failures else EXIT_OK
    return _finish(manifest, os.path.dirname(os.path.abspath(args.out)), code)


# ---------------------------------------------------------------- parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synabsa",
        description="Syntax-guided explainable aspect-based sentiment pipeline",
    )
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="import 4-line Twitter-layout split files")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--test")
    p.add_argument("--image-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="corpus")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed record")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("prepare-syntax", help="cache aspect-centered dependency text")
    p.add_argument("--corpus", required=True)
    p.add_argument("--parses", required=True, help="directory of <sample_id>.conllu files")
    p.add_argument("--force", action="store_true", help="overwrite existing cache entries")
    _add_variant_args(p)
    p.set_defaults(func=cmd_prepare_syntax)

    p = sub.add_parser("augment", help="generate explanations constrained by gold labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--batch-size", type=int, default=8)
    _add_gateway_args(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("review-sample", help="draw a fraction of explanations for manual checking")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fraction", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_review_sample)

    p = sub.add_parser("export-finetune", help="write conversation records for external trainers")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--variant", choices=["baseline", "syntax"], default="baseline")
    p.add_argument("--out", required=True)
    _add_variant_args(p)
    p.set_defaults(func=cmd_export_finetune)

    p = sub.add_parser("infer", help="run batch inference over a split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--variant", choices=["baseline", "syntax"], required=True)
    p.add_argument("--out", required=True)
    _add_variant_args(p)
    _add_gateway_args(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="score a predictions file against the corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument(
        "--failure-policy",
        choices=[metrics_mod.POLICY_DROP, metrics_mod.POLICY_COUNT_WRONG],
        default=metrics_mod.POLICY_COUNT_WRONG,
    )
    p.add_argument("--external-scores", default=None, help="tab-separated id/score file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("judge", help="pick the best explanation among systems per sample")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--subset-size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_gateway_args(p)
    p.set_defaults(func=cmd_judge)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigFailure as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except (corpus_mod.DatastoreError, ConlluError, OSError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
