import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";

function writeDataset(dir: string): string {
  const path = join(dir, "dataset.ndjson");
  writeFileSync(
    path,
    JSON.stringify({
      doc_id: "d0",
      system_id: "sysA",
      hypothesis: "The team played well. The team won.",
      references: ["The team played nicely. Fans cheered."],
      ratings: { coherence: 2 },
    }) + "\n",
    "utf8"
  );
  return path;
}

describe("cli main", () => {
  it("exports a dataset and returns 0", async () => {
    const dir = mkdtempSync(join(tmpdir(), "cli-"));
    const out = join(dir, "emb.ndjson");
    const code = await main([
      "export",
      "--dataset", writeDataset(dir),
      "--encoder", "hash-8",
      "--out", out,
    ]);
    expect(code).toBe(0);
    const records = readFileSync(out, "utf8").trim().split("\n");
    expect(records).toHaveLength(2);
  });

  it("returns 2 when documents get skipped over the length limit", async () => {
    const dir = mkdtempSync(join(tmpdir(), "cli-"));
    const out = join(dir, "emb.ndjson");
    const code = await main([
      "export",
      "--dataset", writeDataset(dir),
      "--encoder", "hash-8",
      "--max-len", "3",
      "--out", out,
    ]);
    expect(code).toBe(2);
  });

  it("returns 1 for an unknown encoder", async () => {
    const dir = mkdtempSync(join(tmpdir(), "cli-"));
    const code = await main([
      "export",
      "--dataset", writeDataset(dir),
      "--encoder", "nope-99",
      "--out", join(dir, "emb.ndjson"),
    ]);
    expect(code).toBe(1);
  });
});
