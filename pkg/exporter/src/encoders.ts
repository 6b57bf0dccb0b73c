/**
 * Encoder backends.
 *
 * An encoder splits words into subword pieces and embeds the piece
 * sequence. The built-in `hash-<dim>` backend is fully deterministic and
 * needs no model files: piece vectors are seeded from the piece text and
 * mixed with their neighbors, which gives identical documents identical
 * matrices while edits perturb the surrounding context. It exists so the
 * whole pipeline can run (and be tested) offline; swap in a transformer
 * backend for real evaluations.
 */

import { createHash } from "node:crypto";

import { ExportError } from "./types.js";

export interface Encoder {
  readonly name: string;
  readonly dim: number;
  /** hard limit on pieces per document; 0 means unlimited */
  readonly maxPieces: number;
  /** flat subword sequence for the given words, in order */
  tokenize(words: string[]): Promise<string[]>;
  /** one vector per piece */
  encode(pieces: string[]): Promise<number[][]>;
}

const CONTINUATION = "##";
const CHUNK = 4;

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Deterministic unit vector derived from a string. */
export function hashVector(tag: string, dim: number): number[] {
  const digest = createHash("sha256").update(tag, "utf8").digest();
  const rand = mulberry32(digest.readUInt32LE(0) ^ digest.readUInt32LE(4));
  const out = new Array<number>(dim);
  for (let i = 0; i < dim; i += 2) {
    // Box-Muller transform; guards keep log/cos well-defined
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    out[i] = radius * Math.cos(2 * Math.PI * v);
    if (i + 1 < dim) {
      out[i + 1] = radius * Math.sin(2 * Math.PI * v);
    }
  }
  let norm = Math.sqrt(out.reduce((acc, x) => acc + x * x, 0));
  if (norm === 0) {
    norm = 1;
  }
  return out.map((x) => x / norm);
}

export class HashEncoder implements Encoder {
  readonly name: string;
  readonly dim: number;
  readonly maxPieces = 0;

  constructor(dim: number) {
    if (!Number.isInteger(dim) || dim < 2) {
      throw new ExportError(`hash encoder dim must be an integer >= 2, got ${dim}`);
    }
    this.dim = dim;
    this.name = `hash-${dim}`;
  }

  subwordize(word: string): string[] {
    const lower = word.toLowerCase();
    const pieces: string[] = [];
    for (let i = 0; i < lower.length; i += CHUNK) {
      const chunk = lower.slice(i, i + CHUNK);
      pieces.push(i === 0 ? chunk : CONTINUATION + chunk);
    }
    return pieces.length > 0 ? pieces : [lower];
  }

  async tokenize(words: string[]): Promise<string[]> {
    return words.flatMap((w) => this.subwordize(w));
  }

  async encode(pieces: string[]): Promise<number[][]> {
    const base = pieces.map((p) => hashVector(`piece:${p}`, this.dim));
    const vectors: number[][] = [];
    for (let i = 0; i < pieces.length; i++) {
      const mixed = base[i].slice();
      if (i > 0) {
        const left = hashVector(`pair:${pieces[i - 1]}|${pieces[i]}`, this.dim);
        for (let c = 0; c < this.dim; c++) mixed[c] += 0.35 * left[c];
      }
      if (i + 1 < pieces.length) {
        const right = hashVector(`pair:${pieces[i]}|${pieces[i + 1]}`, this.dim);
        for (let c = 0; c < this.dim; c++) mixed[c] += 0.35 * right[c];
      }
      vectors.push(mixed);
    }
    return vectors;
  }
}

/**
 * Transformer backend through @xenova/transformers (optional install).
 * Loads lazily on first use; model files must be available locally or
 * downloadable. Hidden states come from the last layer.
 */
export class TransformerEncoder implements Encoder {
  readonly name: string;
  readonly maxPieces: number;
  dim = 0;
  private model: any = null;
  private tokenizer: any = null;
  private readonly modelId: string;

  constructor(modelId: string, maxPieces = 512) {
    this.modelId = modelId;
    this.name = `xenova:${modelId}`;
    this.maxPieces = maxPieces;
  }

  private async ensureLoaded(): Promise<void> {
    if (this.model) {
      return;
    }
    let transformers: any;
    try {
      transformers = await import("@xenova/transformers");
    } catch {
      throw new ExportError(
        "transformer backend needs the optional '@xenova/transformers' " +
          "package; install it or use a hash-<dim> encoder"
      );
    }
    this.tokenizer = await transformers.AutoTokenizer.from_pretrained(this.modelId);
    this.model = await transformers.AutoModel.from_pretrained(this.modelId);
  }

  async tokenize(words: string[]): Promise<string[]> {
    await this.ensureLoaded();
    return words.flatMap((w) => this.tokenizer.tokenize(w) as string[]);
  }

  async encode(pieces: string[]): Promise<number[][]> {
    await this.ensureLoaded();
    const inputs = await this.tokenizer(pieces.join(" "), {
      add_special_tokens: false,
    });
    const output = await this.model(inputs);
    const hidden = output.last_hidden_state;
    const [, tokens, dim] = hidden.dims as [number, number, number];
    this.dim = dim;
    if (tokens !== pieces.length) {
      throw new ExportError(
        `backend returned ${tokens} piece vectors for ${pieces.length} pieces`
      );
    }
    const data = hidden.data as Float32Array;
    const vectors: number[][] = [];
    for (let t = 0; t < tokens; t++) {
      vectors.push(Array.from(data.subarray(t * dim, (t + 1) * dim)));
    }
    return vectors;
  }
}

const HASH_SPEC = /^hash-(\d+)$/;

export function loadEncoder(spec: string): Encoder {
  const hash = HASH_SPEC.exec(spec);
  if (hash) {
    return new HashEncoder(Number(hash[1]));
  }
  if (spec.startsWith("xenova:")) {
    return new TransformerEncoder(spec.slice("xenova:".length));
  }
  throw new ExportError(
    `unknown encoder '${spec}' (expected hash-<dim> or xenova:<model>)`
  );
}
