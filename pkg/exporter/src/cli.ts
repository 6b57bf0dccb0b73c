#!/usr/bin/env node
/**
 * Command-line entry point:
 *
 *   discoscore-export export --dataset corpus.ndjson --encoder hash-64 \
 *       --out embeddings.ndjson [--sentence-vectors pooled] [--max-len 512] \
 *       [--annotated-out corpus.annotated.ndjson]
 */

import { realpathSync } from "node:fs";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadEncoder } from "./encoders.js";
import { exportCorpus } from "./export.js";
import { ExportError } from "./types.js";

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .command(
      "export",
      "encode a dataset into an embedding NDJSON file",
      (cmd) =>
        cmd
          .option("dataset", { type: "string", demandOption: true })
          .option("encoder", { type: "string", default: "hash-64" })
          .option("out", { type: "string", demandOption: true })
          .option("sentence-vectors", {
            choices: ["none", "pooled"] as const,
            default: "none" as const,
          })
          .option("max-len", { type: "number", default: 512 })
          .option("annotated-out", { type: "string" })
    )
    .demandCommand(1)
    .strict()
    .help();
  const args = await parser.parse();
  try {
    const summary = await exportCorpus(
      args.dataset as string,
      loadEncoder(args.encoder as string),
      args.out as string,
      {
        sentenceVectors: args["sentence-vectors"] as "none" | "pooled",
        maxLen: args["max-len"] as number,
        annotatedOut: args["annotated-out"] as string | undefined,
      }
    );
    console.error(
      `exported ${summary.documents} documents (${summary.skipped} skipped)`
    );
    return summary.skipped > 0 ? 2 : 0;
  } catch (err) {
    if (err instanceof ExportError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

function invokedDirectly(): boolean {
  if (!process.argv[1]) {
    return false;
  }
  try {
    // realpath resolves the bin symlink npm installs for this script
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
