declare module "wink-pos-tagger" {
  interface TaggedToken {
    value: string;
    tag: string;
    normal: string;
    pos: string;
    lemma?: string;
  }

  interface Tagger {
    tagSentence(sentence: string): TaggedToken[];
    tagRawTokens(tokens: string[]): TaggedToken[];
  }

  function winkPosTagger(): Tagger;
  export = winkPosTagger;
}
