/**
 * POS tagging for raw-text input, collapsed to the two classes the
 * scoring engine uses: NOUN (Penn NN/NNS/NNP/NNPS or an explicit NOUN
 * tag) and OTHER. Pre-annotated datasets keep their tags, only collapsed.
 */

import winkPosTagger from "wink-pos-tagger";

import type { AnnotatedToken } from "./types.js";

export const NOUN = "NOUN";
export const OTHER = "OTHER";

export function collapsePos(tag: string): string {
  return tag === NOUN || tag.startsWith("NN") ? NOUN : OTHER;
}

export interface PosTagger {
  tagSentence(words: string[]): AnnotatedToken[];
}

/** English tagger backed by wink-pos-tagger's pretrained lexicon+rules. */
export class WinkTagger implements PosTagger {
  private readonly tagger = winkPosTagger();

  tagSentence(words: string[]): AnnotatedToken[] {
    const tagged = this.tagger.tagRawTokens(words);
    return tagged.map((t: { value: string; pos: string }, i: number) => ({
      w: words[i],
      p: collapsePos(t.pos ?? OTHER),
    }));
  }
}

/** Tags everything OTHER; for callers that only need token alignment. */
export class NullTagger implements PosTagger {
  tagSentence(words: string[]): AnnotatedToken[] {
    return words.map((w) => ({ w, p: OTHER }));
  }
}
