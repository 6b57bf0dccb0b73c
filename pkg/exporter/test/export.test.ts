import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import type { Encoder } from "../src/encoders.js";
import { HashEncoder } from "../src/encoders.js";
import { encodeDocument, exportCorpus, prepareDocument } from "../src/export.js";
import { WinkTagger } from "../src/pos.js";
import { EmbeddingRecord, SentenceVectorRecord, SkippedRecord } from "../src/types.js";

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "exporter-"));
}

/** Splits "ab" into two pieces with fixed vectors; for the pooling oracle. */
class StubEncoder implements Encoder {
  readonly name = "stub";
  readonly dim = 2;
  readonly maxPieces = 0;

  async tokenize(words: string[]): Promise<string[]> {
    return words.flatMap((w) =>
      w === "ab" ? ["a", "##b"] : [w.toLowerCase()]
    );
  }

  async encode(pieces: string[]): Promise<number[][]> {
    const table: Record<string, number[]> = {
      a: [1, 0],
      "##b": [0, 2],
      seen: [4, 4],
    };
    return pieces.map((p) => table[p] ?? [9, 9]);
  }
}

describe("encodeDocument", () => {
  it("pools a split word by averaging its piece vectors", async () => {
    const doc = prepareDocument(
      { sentences: [[{ w: "ab", p: "NOUN" }, { w: "seen", p: "OTHER" }]] },
      "d1",
      "hypothesis",
      "sys",
      new WinkTagger()
    );
    const { records } = await encodeDocument(doc, new StubEncoder());
    const record = records[0] as EmbeddingRecord;
    // pieces (1,0) and (0,2) average to (0.5, 1)
    expect(record.vectors[0]).toEqual([0.5, 1]);
    expect(record.vectors[1]).toEqual([4, 4]);
    expect(record.token_count).toBe(2);
    expect(record.dim).toBe(2);
  });

  it("keeps a single-piece word's vector unchanged", async () => {
    const doc = prepareDocument(
      { sentences: [[{ w: "seen", p: "OTHER" }]] },
      "d2",
      "hypothesis",
      "sys",
      new WinkTagger()
    );
    const { records } = await encodeDocument(doc, new StubEncoder());
    expect((records[0] as EmbeddingRecord).vectors).toEqual([[4, 4]]);
  });

  it("emits a skipped record over the piece limit", async () => {
    const doc = prepareDocument(
      "one two three four five.",
      "big",
      "hypothesis",
      "sys",
      new WinkTagger()
    );
    const { records } = await encodeDocument(doc, new HashEncoder(8), {
      sentenceVectors: "none",
      maxLen: 3,
    });
    const record = records[0] as SkippedRecord;
    expect(record.skipped).toBe(true);
    expect(record.truncated).toBe(false);
  });

  it("adds pooled sentence vectors when asked", async () => {
    const doc = prepareDocument(
      { sentences: [[{ w: "ab", p: "NOUN" }], [{ w: "seen", p: "OTHER" }]] },
      "d3",
      "hypothesis",
      "sys",
      new WinkTagger()
    );
    const { records } = await encodeDocument(doc, new StubEncoder(), {
      sentenceVectors: "pooled",
      maxLen: 512,
    });
    expect(records).toHaveLength(2);
    const sent = records[1] as SentenceVectorRecord;
    expect(sent.sentence_vectors).toEqual([
      [0.5, 1],
      [4, 4],
    ]);
  });

  it("rejects empty documents", async () => {
    await expect(async () =>
      encodeDocument(
        { docId: "e", kind: "hypothesis", systemId: "s", sentences: [] },
        new StubEncoder()
      )
    ).rejects.toThrow(/no tokens/);
  });
});

describe("prepareDocument", () => {
  it("tags raw text with the pretrained tagger and collapses to NOUN/OTHER", () => {
    const doc = prepareDocument(
      "The team played well.",
      "d",
      "hypothesis",
      "sys",
      new WinkTagger()
    );
    const tags = Object.fromEntries(doc.sentences[0].map((t) => [t.w, t.p]));
    expect(tags["team"]).toBe("NOUN");
    expect(tags["played"]).toBe("OTHER");
    expect(tags["."]).toBe("OTHER");
  });

  it("collapses pre-annotated Penn tags", () => {
    const doc = prepareDocument(
      { sentences: [[{ w: "Chelsea", p: "NNP" }, { w: "won", p: "VBD" }]] },
      "d",
      "hypothesis",
      "sys",
      new WinkTagger()
    );
    expect(doc.sentences[0].map((t) => t.p)).toEqual(["NOUN", "OTHER"]);
  });
});

describe("exportCorpus", () => {
  function writeToyCorpus(dir: string, lines = 4): string {
    const path = join(dir, "dataset.ndjson");
    const rows = [];
    for (let d = 0; d < lines; d++) {
      rows.push(
        JSON.stringify({
          doc_id: `doc${d}`,
          system_id: "sysA",
          hypothesis: `The team played game ${d}. The team won again.`,
          references: [`The team played game ${d}. A crowd cheered loudly.`],
          ratings: { coherence: d },
        })
      );
    }
    writeFileSync(path, rows.join("\n") + "\n", "utf8");
    return path;
  }

  it("writes one record per document with consistent dims", async () => {
    const dir = tempDir();
    const dataset = writeToyCorpus(dir);
    const out = join(dir, "embeddings.ndjson");
    const summary = await exportCorpus(dataset, new HashEncoder(16), out);
    expect(summary.documents).toBe(8);
    expect(summary.skipped).toBe(0);
    const records = readFileSync(out, "utf8")
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line));
    expect(records).toHaveLength(8);
    for (const record of records) {
      expect(record.dim).toBe(16);
      expect(record.vectors).toHaveLength(record.token_count);
      for (const row of record.vectors) {
        expect(row).toHaveLength(16);
        for (const value of row) {
          expect(Number.isFinite(value)).toBe(true);
          expect(value).toBe(Math.fround(value));
        }
      }
    }
  });

  it("re-running produces byte-identical output", async () => {
    const dir = tempDir();
    const dataset = writeToyCorpus(dir);
    const a = join(dir, "a.ndjson");
    const b = join(dir, "b.ndjson");
    await exportCorpus(dataset, new HashEncoder(8), a);
    await exportCorpus(dataset, new HashEncoder(8), b);
    expect(readFileSync(a, "utf8")).toBe(readFileSync(b, "utf8"));
  });

  it("writes the annotated dataset copy for tokenization parity", async () => {
    const dir = tempDir();
    const dataset = writeToyCorpus(dir, 2);
    const out = join(dir, "embeddings.ndjson");
    const annotated = join(dir, "annotated.ndjson");
    await exportCorpus(dataset, new HashEncoder(8), out, {
      sentenceVectors: "none",
      maxLen: 512,
      annotatedOut: annotated,
    });
    const rows = readFileSync(annotated, "utf8").trim().split("\n").map((l) => JSON.parse(l));
    expect(rows).toHaveLength(2);
    const hyp = rows[0].hypothesis;
    expect(hyp.sentences.length).toBe(2);
    const embeddings = readFileSync(out, "utf8").trim().split("\n").map((l) => JSON.parse(l));
    const tokenCount = hyp.sentences.flat().length;
    expect(embeddings[0].token_count).toBe(tokenCount);
    expect(rows[0].ratings).toEqual({ coherence: 0 });
  });

  it("deduplicates shared references across systems", async () => {
    const dir = tempDir();
    const path = join(dir, "dataset.ndjson");
    const shared = "The team played. The team won.";
    const rows = ["sysA", "sysB"].map((system) =>
      JSON.stringify({
        doc_id: "doc0",
        system_id: system,
        hypothesis: `${system} output sentence.`,
        references: [shared],
        ratings: {},
      })
    );
    writeFileSync(path, rows.join("\n") + "\n", "utf8");
    const out = join(dir, "embeddings.ndjson");
    const summary = await exportCorpus(path, new HashEncoder(8), out);
    // two hypotheses plus one shared reference
    expect(summary.documents).toBe(3);
  });
});
