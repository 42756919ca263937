/**
 * Sentence splitting over the token stream: a run of sentence-final
 * punctuation closes the current sentence. Working on tokens (not raw text)
 * keeps URL dots and abbreviated handles intact.
 */

const SENTENCE_FINAL = /^[.!?…]+$/;

export function splitSentences(tokens: string[]): string[][] {
  const sentences: string[][] = [];
  let current: string[] = [];
  for (let i = 0; i < tokens.length; i++) {
    current.push(tokens[i]);
    const closes =
      SENTENCE_FINAL.test(tokens[i]) &&
      (i + 1 === tokens.length || !SENTENCE_FINAL.test(tokens[i + 1]));
    if (closes && current.length > 0 && i + 1 < tokens.length) {
      sentences.push(current);
      current = [];
    }
  }
  if (current.length > 0) {
    sentences.push(current);
  }
  return sentences;
}
