import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterEach, describe, expect, test } from "vitest";

import {
  BackendUnavailable,
  analyzeText,
  aspectRecoverable,
  parseCorpus,
  readCorpus,
} from "../src/bridge";

const FIXTURE = path.join(__dirname, "..", "..", "tests", "fixtures", "noisy_tweets.jsonl");

let workDirs: string[] = [];

function makeOutDir(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "bridge-test-"));
  workDirs.push(dir);
  return dir;
}

afterEach(() => {
  for (const dir of workDirs) fs.rmSync(dir, { recursive: true, force: true });
  workDirs = [];
});

describe("readCorpus", () => {
  test("skips the metadata line and reads 25 samples", () => {
    const samples = readCorpus(FIXTURE);
    expect(samples).toHaveLength(25);
    expect(samples[0].id).toBe("bridge-0000");
  });
});

describe("aspectRecoverable", () => {
  test("counts token-sequence occurrences", () => {
    const sentences = analyzeText("Suarez scored twice ; Suarez is on fire");
    expect(aspectRecoverable(sentences, "Suarez", 0)).toBe(true);
    expect(aspectRecoverable(sentences, "Suarez", 1)).toBe(true);
    expect(aspectRecoverable(sentences, "Suarez", 2)).toBe(false);
    expect(aspectRecoverable(sentences, "Messi", 0)).toBe(false);
  });
});

describe("parseCorpus", () => {
  test("unknown backend is rejected", () => {
    expect(() =>
      parseCorpus({ backend: "stanford", corpusPath: FIXTURE, outDir: makeOutDir() }, () => {}),
    ).toThrow(BackendUnavailable);
  });

  test("emits one validated file per sample and logs aspect mismatches", () => {
    const outDir = makeOutDir();
    const logged: string[] = [];
    const report = parseCorpus(
      { backend: "heuristic", corpusPath: FIXTURE, outDir },
      (msg) => logged.push(msg),
    );
    expect(report.files).toBe(25);
    expect(report.skipped).toEqual([]);
    // The fixture contains exactly one deliberate tokenization mismatch.
    expect(report.aspectViolations).toEqual(["bridge-0019"]);
    expect(logged.some((m) => m.includes("bridge-0019"))).toBe(true);

    const files = fs.readdirSync(outDir).filter((f) => f.endsWith(".conllu"));
    expect(files).toHaveLength(25);
    for (const file of files) {
      const body = fs.readFileSync(path.join(outDir, file), "utf-8");
      expect(body.endsWith("\n\n")).toBe(true);
      for (const line of body.split("\n")) {
        if (!line) continue;
        expect(line.split("\t")).toHaveLength(10);
      }
    }
    expect(fs.readdirSync(outDir).some((f) => f.endsWith(".tmp"))).toBe(false);
  });

  test("multi-sentence texts produce multiple blocks in order", () => {
    const outDir = makeOutDir();
    parseCorpus({ backend: "heuristic", corpusPath: FIXTURE, outDir }, () => {});
    const body = fs.readFileSync(path.join(outDir, "bridge-0009.conllu"), "utf-8");
    const blocks = body.trim().split("\n\n");
    expect(blocks).toHaveLength(2);
    expect(blocks[0].split("\n")[0].split("\t")[1]).toBe("lifting");
    expect(blocks[1].split("\n")[0].split("\t")[1]).toBe("Fans");
  });

  test("empty corpus emits zero files", () => {
    const outDir = makeOutDir();
    const empty = path.join(outDir, "empty.jsonl");
    fs.writeFileSync(empty, '{"corpus": {"name": "empty", "provenance": []}}\n');
    const report = parseCorpus({ backend: "heuristic", corpusPath: empty, outDir }, () => {});
    expect(report.files).toBe(0);
  });

  test("one-word sample becomes a single-token rooted tree", () => {
    const outDir = makeOutDir();
    const tiny = path.join(outDir, "tiny.jsonl");
    fs.writeFileSync(
      tiny,
      JSON.stringify({
        id: "tiny-0000",
        split: "test",
        text: "wow",
        image: "images/x.jpg",
        aspect: "wow",
        aspect_occurrence: 0,
        sentiment: "positive",
        explanation: null,
        deptext: {},
      }) + "\n",
    );
    parseCorpus({ backend: "heuristic", corpusPath: tiny, outDir }, () => {});
    const body = fs.readFileSync(path.join(outDir, "tiny-0000.conllu"), "utf-8");
    expect(body).toBe("1\twow\t_\tNOUN\t_\t_\t0\troot\t_\t_\n\n");
  });
});
