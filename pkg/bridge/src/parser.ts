/**
 * Deterministic rule-based dependency assignment.
 *
 * There is no off-the-shelf dependency parser in the npm ecosystem, so the
 * bridge ships its own: a lexicon/suffix tagger plus attachment rules that
 * only ever point at the root or at a strictly later token, which makes the
 * result a valid single-root tree by construction. The label inventory is
 * small and downstream consumers treat it as opaque.
 */

export interface Arc {
  head: number; // 1-based token id, 0 for the root
  deprel: string;
  upos: string;
}

const DETERMINERS = new Set([
  "a", "an", "the", "this", "that", "these", "those", "my", "your", "his",
  "her", "its", "our", "their", "some", "any", "no", "every", "each",
]);
const ADPOSITIONS = new Set([
  "in", "on", "at", "by", "for", "with", "about", "against", "between",
  "into", "through", "during", "before", "after", "above", "below", "to",
  "from", "up", "down", "of", "off", "over", "under",
]);
const AUXILIARIES = new Set([
  "am", "is", "are", "was", "were", "be", "been", "being", "do", "does",
  "did", "have", "has", "had", "will", "would", "can", "could", "shall",
  "should", "may", "might", "must",
]);
const PRONOUNS = new Set([
  "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
  "who", "what",
]);
const CONJUNCTIONS = new Set(["and", "or", "but", "nor", "so", "yet"]);
const COMMON_ADJECTIVES = new Set([
  "good", "bad", "great", "new", "big", "small", "nice", "happy", "sad",
  "terrible", "brilliant", "amazing", "awful", "beautiful", "slow", "fast",
]);
const COMMON_VERBS = new Set([
  "go", "goes", "went", "make", "makes", "made", "score", "scores", "win",
  "wins", "won", "lift", "lifts", "play", "plays", "say", "says", "said",
  "cry", "cries", "look", "looks", "sink", "sinks", "cheer", "cheers",
  "love", "loves", "hate", "hates", "see", "sees", "saw", "get", "gets",
  "got", "feel", "feels", "felt", "watch", "watching", "miss", "misses",
]);

const PUNCT = /^[^\p{L}\p{N}@#]+$/u;
const NOUNISH = new Set(["NOUN", "PROPN", "NUM", "PRON"]);

export function tagToken(form: string): string {
  if (form.startsWith("http://") || form.startsWith("https://")) return "SYM";
  if (form.startsWith("@") || form.startsWith("#")) return "PROPN";
  if (PUNCT.test(form)) return "PUNCT";
  const lower = form.toLowerCase();
  if (DETERMINERS.has(lower)) return "DET";
  if (ADPOSITIONS.has(lower)) return "ADP";
  if (AUXILIARIES.has(lower)) return "AUX";
  if (PRONOUNS.has(lower)) return "PRON";
  if (CONJUNCTIONS.has(lower)) return "CCONJ";
  if (/^\d+([.,]\d+)*$/.test(form)) return "NUM";
  if (COMMON_ADJECTIVES.has(lower)) return "ADJ";
  if (COMMON_VERBS.has(lower)) return "VERB";
  if (lower.length > 4 && (lower.endsWith("ing") || lower.endsWith("ed"))) return "VERB";
  if (lower.length > 3 && lower.endsWith("ly")) return "ADV";
  if (lower.length > 4 && /(ful|ous|ish|ive|ble)$/.test(lower)) return "ADJ";
  if (/^[A-Z]/.test(form)) return "PROPN";
  return "NOUN";
}

function nextWithTag(tags: string[], start: number, wanted: Set<string>): number {
  for (let j = start + 1; j < tags.length; j++) {
    if (wanted.has(tags[j])) return j;
  }
  return -1;
}

export function parseSentence(tokens: string[]): Arc[] {
  const tags = tokens.map(tagToken);
  let root = tags.findIndex((t) => t === "VERB");
  if (root < 0) root = tags.findIndex((t) => NOUNISH.has(t));
  if (root < 0) root = tags.findIndex((t) => t !== "PUNCT");
  if (root < 0) root = 0;

  const arcs: Arc[] = tokens.map((_, i) => ({ head: root + 1, deprel: "dep", upos: tags[i] }));
  arcs[root] = { head: 0, deprel: "root", upos: tags[root] };

  let sawSubject = false;
  let sawObject = false;
  for (let i = 0; i < tokens.length; i++) {
    if (i === root) continue;
    const tag = tags[i];
    if (tag === "PUNCT") {
      arcs[i].deprel = "punct";
    } else if (tag === "DET" || tag === "ADJ") {
      const j = nextWithTag(tags, i, NOUNISH);
      if (j > i) arcs[i] = { head: j + 1, deprel: tag === "DET" ? "det" : "amod", upos: tag };
      else arcs[i].deprel = tag === "DET" ? "det" : "amod";
    } else if (tag === "ADP") {
      const j = nextWithTag(tags, i, NOUNISH);
      if (j > i) arcs[i] = { head: j + 1, deprel: "case", upos: tag };
      else arcs[i].deprel = "case";
    } else if (tag === "AUX") {
      const j = nextWithTag(tags, i, new Set(["VERB"]));
      if (j > i) arcs[i] = { head: j + 1, deprel: "aux", upos: tag };
      else arcs[i].deprel = "aux";
    } else if (tag === "ADV") {
      arcs[i].deprel = "advmod";
    } else if (tag === "CCONJ") {
      arcs[i].deprel = "cc";
    } else if (NOUNISH.has(tag)) {
      if ((tag === "PROPN" || tag === "NOUN") && i + 1 < tokens.length && tags[i + 1] === "PROPN") {
        // Adjacent name tokens form a right-headed compound run.
        arcs[i] = { head: i + 2, deprel: "compound", upos: tag };
      } else if (i < root && !sawSubject) {
        arcs[i].deprel = "nsubj";
        sawSubject = true;
      } else if (i > root && !sawObject) {
        arcs[i].deprel = "obj";
        sawObject = true;
      }
    }
  }
  return arcs;
}
