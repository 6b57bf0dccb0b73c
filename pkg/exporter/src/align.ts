/**
 * Word/subword alignment. Encoders emit subword pieces; the scoring
 * engine counts one token per word occurrence, so every word must map to
 * the contiguous, non-empty run of pieces it was split into.
 */

import { ExportError } from "./types.js";

const CONTINUATION = "##";

/** Greedy left-to-right character-consuming alignment.
 *
 * Comparison is case-insensitive (encoders may lowercase); pieces are
 * stripped of their continuation marker before consuming characters.
 * Every word must be covered exactly, otherwise the mismatch position
 * is reported.
 */
export function alignSubwords(words: string[], pieces: string[]): number[][] {
  const alignment: number[][] = [];
  let cursor = 0;
  for (let w = 0; w < words.length; w++) {
    const target = words[w].toLowerCase();
    let consumed = "";
    const indices: number[] = [];
    while (consumed.length < target.length) {
      if (cursor >= pieces.length) {
        throw new ExportError(
          `alignment failed at word ${w} ('${words[w]}'): ran out of pieces`
        );
      }
      const piece = pieces[cursor];
      const bare = (
        piece.startsWith(CONTINUATION) ? piece.slice(CONTINUATION.length) : piece
      ).toLowerCase();
      if (!target.startsWith(consumed + bare)) {
        throw new ExportError(
          `alignment failed at word ${w} ('${words[w]}'): piece '${piece}' ` +
            `does not continue '${consumed}'`
        );
      }
      consumed += bare;
      indices.push(cursor);
      cursor += 1;
    }
    if (indices.length === 0) {
      throw new ExportError(`alignment failed at word ${w} ('${words[w]}'): empty word`);
    }
    alignment.push(indices);
  }
  if (cursor !== pieces.length) {
    throw new ExportError(
      `alignment failed: ${pieces.length - cursor} trailing piece(s) left over`
    );
  }
  return alignment;
}
