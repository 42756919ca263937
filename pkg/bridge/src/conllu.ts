/**
 * CoNLL-U emission with a built-in validity check mirroring the consumer's
 * contract: 10 tab-separated columns, ids 1..n, exactly one root, heads in
 * range, no cycles. Emitting an invalid block is a bug, so validation throws.
 */

import { Arc } from "./parser";

export interface SentenceAnalysis {
  tokens: string[];
  arcs: Arc[];
}

export function validateSentence(sentence: SentenceAnalysis): void {
  const n = sentence.tokens.length;
  if (n === 0) throw new Error("empty sentence");
  if (sentence.arcs.length !== n) throw new Error("token/arc count mismatch");
  const roots = sentence.arcs.filter((a) => a.head === 0).length;
  if (roots !== 1) throw new Error(`expected exactly one root, found ${roots}`);
  sentence.arcs.forEach((arc, i) => {
    if (arc.head < 0 || arc.head > n) throw new Error(`head ${arc.head} out of range`);
    if (arc.head === i + 1) throw new Error(`token ${i + 1} is its own head`);
    if (!arc.deprel) throw new Error(`token ${i + 1} has an empty deprel`);
  });
  for (let start = 1; start <= n; start++) {
    const seen = new Set<number>();
    let cursor = start;
    while (cursor !== 0) {
      if (seen.has(cursor)) throw new Error(`head cycle at token ${start}`);
      seen.add(cursor);
      cursor = sentence.arcs[cursor - 1].head;
    }
  }
  for (const form of sentence.tokens) {
    if (form.includes("\t") || form.includes("\n")) {
      throw new Error(`form ${JSON.stringify(form)} contains a separator`);
    }
  }
}

export function toConllu(sentences: SentenceAnalysis[]): string {
  const blocks = sentences.map((sentence) => {
    validateSentence(sentence);
    const lines = sentence.tokens.map((form, i) => {
      const arc = sentence.arcs[i];
      return [
        String(i + 1),
        form,
        "_",
        arc.upos || "_",
        "_",
        "_",
        String(arc.head),
        arc.deprel,
        "_",
        "_",
      ].join("\t");
    });
    return lines.join("\n") + "\n\n";
  });
  return blocks.join("");
}
