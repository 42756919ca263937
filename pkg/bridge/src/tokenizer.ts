/**
 * Tweet-aware tokenizer. URLs, @mentions and #hashtags stay single tokens
 * (aspects in the corpora appear verbatim, so no normalization happens);
 * words keep internal apostrophes and hyphens; everything else splits into
 * single-character symbol tokens.
 */

const TOKEN = new RegExp(
  [
    String.raw`https?:\/\/[^\s]+`, // URLs as-is
    String.raw`@\w+`, // mentions
    String.raw`#\w+`, // hashtags
    String.raw`[\p{L}\p{N}]+(?:['’\-][\p{L}\p{N}]+)*`, // words and numbers
    String.raw`[^\s]`, // any leftover symbol, one per token
  ].join("|"),
  "gu",
);

export function tokenize(text: string): string[] {
  return text.match(TOKEN) ?? [];
}
