/**
 * Wire formats shared with the scoring engine.
 *
 * Dataset lines hold a hypothesis and its references, either as raw text
 * or as pre-annotated sentences of {w, p} tokens. Embedding lines carry
 * one float32 matrix per document, keyed by (doc_id, kind, system_id);
 * the i-th reference of a document uses system id `ref-i` spelled "ref0",
 * "ref1", ... so matrices can be joined back to texts.
 */

export type Pos = string;

export interface AnnotatedToken {
  w: string;
  p: Pos;
}

export interface AnnotatedText {
  sentences: AnnotatedToken[][];
}

export type DocumentValue = string | AnnotatedText;

export interface DatasetRecord {
  doc_id: string;
  system_id: string;
  hypothesis: DocumentValue;
  references: DocumentValue[];
  ratings: Record<string, number>;
}

export type Kind = "hypothesis" | "reference";

/** A fully tokenized document ready for encoding. */
export interface PreparedDocument {
  docId: string;
  kind: Kind;
  systemId: string;
  /** sentences of word tokens with collapsed POS (NOUN or OTHER) */
  sentences: AnnotatedToken[][];
}

export interface EmbeddingRecord {
  doc_id: string;
  kind: Kind;
  system_id: string;
  dim: number;
  token_count: number;
  vectors: number[][];
}

export interface SkippedRecord {
  doc_id: string;
  kind: Kind;
  system_id: string;
  skipped: true;
  truncated: false;
  reason: string;
}

export interface SentenceVectorRecord {
  doc_id: string;
  kind: Kind;
  system_id: string;
  dim: number;
  sentence_vectors: number[][];
}

export type OutputRecord = EmbeddingRecord | SkippedRecord | SentenceVectorRecord;

export function referenceSystemId(index: number): string {
  return `ref${index}`;
}

export function isAnnotated(value: DocumentValue): value is AnnotatedText {
  return typeof value === "object" && value !== null && "sentences" in value;
}

export class ExportError extends Error {}

export function parseDatasetLine(line: string, lineNo: number): DatasetRecord {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (err) {
    throw new ExportError(`line ${lineNo}: malformed JSON (${(err as Error).message})`);
  }
  const record = parsed as Partial<DatasetRecord>;
  for (const field of ["doc_id", "system_id", "hypothesis", "references"] as const) {
    if (record[field] === undefined) {
      throw new ExportError(`line ${lineNo}: missing required field '${field}'`);
    }
  }
  if (!Array.isArray(record.references)) {
    throw new ExportError(`line ${lineNo}: 'references' must be an array`);
  }
  return record as DatasetRecord;
}
