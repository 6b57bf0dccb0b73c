/**
 * Raw-text segmentation, mirroring the scoring engine's naive rules so
 * both sides agree on token boundaries: sentences end at . ! ? followed
 * by whitespace, words split on whitespace with punctuation detached
 * (word-internal apostrophes and hyphens are kept).
 */

import { ExportError } from "./types.js";

const SENTENCE_BOUNDARY = /(?<=[.!?])\s+/u;
const TOKEN_PATTERN = /[\p{L}\p{N}_]+(?:['’-][\p{L}\p{N}_]+)*|[^\p{L}\p{N}_\s]/gu;

export function segmentPlaintext(text: string): string[][] {
  if (!text || !text.trim()) {
    throw new ExportError("cannot segment empty or whitespace-only text");
  }
  const sentences: string[][] = [];
  for (const part of text.trim().split(SENTENCE_BOUNDARY)) {
    const words = part.match(TOKEN_PATTERN);
    if (words && words.length > 0) {
      sentences.push([...words]);
    }
  }
  if (sentences.length === 0) {
    throw new ExportError("text contains no tokens");
  }
  return sentences;
}

export function isPunctuation(surface: string): boolean {
  return !/[\p{L}\p{N}]/u.test(surface);
}
