import { mkdtempSync, mkdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { loadModelTable, parseCsv } from "../src/csv.js";
import { main as cliMain } from "../src/cli.js";

describe("parseCsv", () => {
  it("parses header and rows", () => {
    const table = parseCsv("a,b\n1,2\n3,4\n");
    expect(table.columns).toEqual(["a", "b"]);
    expect(table.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("handles quoted fields with commas and quotes", () => {
    const table = parseCsv('name,note\n"x,y","say ""hi"""\n');
    expect(table.rows[0]).toEqual(["x,y", 'say "hi"']);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });
});

describe("loadModelTable", () => {
  function write(content: string): string {
    const dir = mkdtempSync(join(tmpdir(), "csv_"));
    const path = join(dir, "model_table.csv");
    writeFileSync(path, content);
    return path;
  }

  it("separates features from id columns", () => {
    const path = write("repo_id,corpus,outcome,commits,burstiness\nr,forge,1,5,0.5\n");
    const table = loadModelTable(path);
    expect(table.featureNames).toEqual(["commits", "burstiness"]);
    expect(table.X).toEqual([[5, 0.5]]);
    expect(table.y).toEqual([1]);
  });

  it("schema error names the missing columns", () => {
    const path = write("repo_id,corpus,outcome,commits\nr,forge,1,5\n");
    expect(() => loadModelTable(path, ["commits", "burstiness", "files"])).toThrow(
      /burstiness, files/,
    );
  });

  it("requires the outcome column", () => {
    const path = write("repo_id,corpus,commits\nr,forge,5\n");
    expect(() => loadModelTable(path)).toThrow(/outcome/);
  });
});

describe("figures command with absent exports", () => {
  it("skips missing inputs with warnings instead of failing", () => {
    const inDir = mkdtempSync(join(tmpdir(), "figs_in_"));
    const outDir = mkdtempSync(join(tmpdir(), "figs_out_"));
    mkdirSync(join(inDir, "exports"), { recursive: true });
    // Only one corpus present for the metric: must warn and skip.
    writeFileSync(join(inDir, "exports", "forge_commits.csv"), "commits\n1\n2\n");
    const code = cliMain(["figures", "--in", inDir, "--out", outDir, "--seed", "1"]);
    expect(code).toBe(0);
  });
});
