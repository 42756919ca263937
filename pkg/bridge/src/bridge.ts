/**
 * Corpus-to-CoNLL-U bridge: reads the pipeline's JSON-lines corpus, analyses
 * every sample text, and writes one <sample_id>.conllu file per sample.
 *
 * Files are written atomically (temp + rename). When a sample's aspect is
 * not recoverable from the emitted token forms, the mismatch is logged and
 * the file is still written; hiding the sample would desynchronize the
 * corpus.
 */

import * as fs from "fs";
import * as path from "path";

import { toConllu, SentenceAnalysis } from "./conllu";
import { parseSentence } from "./parser";
import { splitSentences } from "./sentences";
import { tokenize } from "./tokenizer";

export interface BridgeConfig {
  backend: string;
  /** Pipeline identifier within the backend; "default" is the only one shipped. */
  pipeline?: string;
  corpusPath: string;
  outDir: string;
}

export interface BridgeReport {
  files: number;
  skipped: string[];
  aspectViolations: string[];
}

export class BackendUnavailable extends Error {}

export const BACKENDS = ["heuristic"];

interface CorpusSample {
  id: string;
  text: string;
  aspect: string;
  aspect_occurrence: number;
}

export function readCorpus(corpusPath: string): CorpusSample[] {
  const samples: CorpusSample[] = [];
  const raw = fs.readFileSync(corpusPath, "utf-8");
  for (const line of raw.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const record = JSON.parse(trimmed);
    if ("id" in record) {
      samples.push({
        id: record.id,
        text: record.text,
        aspect: record.aspect,
        aspect_occurrence: record.aspect_occurrence ?? 0,
      });
    }
  }
  return samples;
}

export function analyzeText(text: string): SentenceAnalysis[] {
  return splitSentences(tokenize(text)).map((tokens) => ({
    tokens,
    arcs: parseSentence(tokens),
  }));
}

/** Token-sequence aspect check mirroring the consumer's matching rule. */
export function aspectRecoverable(
  sentences: SentenceAnalysis[],
  aspect: string,
  occurrence: number,
): boolean {
  const forms = sentences.flatMap((s) => s.tokens.map((t) => t.toLowerCase()));
  const target = aspect.toLowerCase().split(/\s+/).filter(Boolean);
  if (target.length === 0) return false;
  let matches = 0;
  for (let i = 0; i + target.length <= forms.length; i++) {
    if (target.every((t, k) => forms[i + k] === t)) matches++;
  }
  return matches > occurrence;
}

function writeAtomic(filePath: string, payload: string): void {
  const tmp = `${filePath}.tmp`;
  fs.writeFileSync(tmp, payload, "utf-8");
  fs.renameSync(tmp, filePath);
}

export function parseCorpus(config: BridgeConfig, log: (msg: string) => void = console.error): BridgeReport {
  if (!BACKENDS.includes(config.backend)) {
    throw new BackendUnavailable(
      `backend ${JSON.stringify(config.backend)} not available; known: ${BACKENDS.join(", ")}`,
    );
  }
  const pipeline = config.pipeline ?? "default";
  if (pipeline !== "default") {
    throw new BackendUnavailable(
      `pipeline ${JSON.stringify(pipeline)} not available for the ${config.backend} backend`,
    );
  }
  const samples = readCorpus(config.corpusPath);
  fs.mkdirSync(config.outDir, { recursive: true });
  const report: BridgeReport = { files: 0, skipped: [], aspectViolations: [] };
  for (const sample of samples) {
    let sentences: SentenceAnalysis[];
    try {
      sentences = analyzeText(sample.text);
      if (sentences.length === 0) throw new Error("no tokens in text");
    } catch (err) {
      report.skipped.push(sample.id);
      log(`skip ${sample.id}: ${(err as Error).message}`);
      continue;
    }
    if (!aspectRecoverable(sentences, sample.aspect, sample.aspect_occurrence)) {
      report.aspectViolations.push(sample.id);
      log(
        `aspect mismatch for ${sample.id}: ${JSON.stringify(sample.aspect)} ` +
          `(occurrence ${sample.aspect_occurrence}) not recoverable from tokens`,
      );
    }
    writeAtomic(path.join(config.outDir, `${sample.id}.conllu`), toConllu(sentences));
    report.files++;
  }
  return report;
}
