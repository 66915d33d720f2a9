import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { numericColumn, readCsv, SchemaError } from "../src/csv.js";

function tmpCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "rp-csv-"));
  const path = join(dir, "t.csv");
  writeFileSync(path, content);
  return path;
}

describe("readCsv", () => {
  it("parses header and rows", () => {
    const path = tmpCsv("a,b\n1,x\n2,y\n");
    const table = readCsv(path, ["a", "b"]);
    expect(table.columns).toEqual(["a", "b"]);
    expect(table.rows).toHaveLength(2);
    expect(table.rows[1]).toEqual({ a: "2", b: "y" });
  });

  it("raises SchemaError on a missing column", () => {
    const path = tmpCsv("a,b\n1,2\n");
    expect(() => readCsv(path, ["a", "c"])).toThrow(SchemaError);
    expect(() => readCsv(path, ["a", "c"])).toThrow(/missing column "c"/);
  });

  it("raises SchemaError on empty input", () => {
    const path = tmpCsv("a,b\n");
    expect(() => readCsv(path, ["a"])).toThrow(/empty input/);
  });

  it("raises SchemaError on an unreadable file", () => {
    expect(() => readCsv("/nonexistent/x.csv", [])).toThrow(SchemaError);
  });
});

describe("numericColumn", () => {
  it("parses numbers and flags junk", () => {
    const path = tmpCsv("v\n1.5\n-2\n");
    const table = readCsv(path, ["v"]);
    expect(numericColumn(table, "v")).toEqual([1.5, -2]);
    const bad = readCsv(tmpCsv("v\nhello\n"), ["v"]);
    expect(() => numericColumn(bad, "v")).toThrow(SchemaError);
  });
});
