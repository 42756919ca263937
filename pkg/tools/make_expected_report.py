#!/usr/bin/env python3
"""Regenerate tests/fixtures/e2e/expected_report.json.

Runs the import -> prepare-syntax -> infer -> evaluate flow against the
scripted mock endpoint and freezes the evaluation report. The frozen numbers
must be re-verified by hand against the reply table in tests/conftest.py
before committing.
"""

import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from conftest import TINY_PNG, MockEndpoint, e2e_reply_script  # noqa: E402

from synabsa.cli import main  # noqa: E402

E2E = ROOT / "tests" / "fixtures" / "e2e"


def run(argv):
    code = main([str(a) for a in argv])
    if code not in (0, 1):
        raise SystemExit(f"command failed with exit {code}: {argv}")


def build_report(work: pathlib.Path) -> dict:
    images = work / "images"
    images.mkdir()
    for i in range(10):
        (images / f"e2e_{i}.jpg").write_bytes(TINY_PNG)
    corpus = work / "corpus.jsonl"
    run(["import", "--test", E2E / "test.txt", "--image-dir", images, "--out", corpus, "--name", "e2e"])
    run(["prepare-syntax", "--corpus", corpus, "--parses", E2E / "parses", "--depth", "2"])
    endpoint = MockEndpoint(e2e_reply_script)
    try:
        run(
            [
                "infer",
                "--corpus", corpus,
                "--split", "test",
                "--variant", "syntax",
                "--depth", "2",
                "--out", work / "preds.jsonl",
                "--endpoint", endpoint.url,
                "--model", "mock",
                "--backoff-base", "0.01",
            ]
        )
    finally:
        endpoint.close()
    run(
        [
            "evaluate",
            "--corpus", corpus,
            "--predictions", work / "preds.jsonl",
            "--failure-policy", "count-wrong",
            "--out", work / "report.json",
        ]
    )
    return (work / "report.json").read_bytes()


def main_tool():
    import os

    os.environ.setdefault("OPENAI_API_KEY", "fixture-key")
    work = pathlib.Path(tempfile.mkdtemp(prefix="e2e-report-"))
    try:
        payload = build_report(work)
        (E2E / "expected_report.json").write_bytes(payload)
        print(payload.decode())
    finally:
        shutil.rmtree(work, ignore_errors=True)


if __name__ == "__main__":
    main_tool()
