import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { readCsv, SchemaError } from "../src/csv.js";
import { runCli } from "../src/cli.js";
import {
  decaySlope,
  FIGURE_KINDS,
  loadSpec,
  render,
  renderToString,
  type FigureKind,
  type FigureSpec,
} from "../src/figures.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "..", "fixtures");

const FIXTURE_FOR: Record<FigureKind, string> = {
  paths: join(FIXTURES, "paths.csv"),
  cluster: join(FIXTURES, "cluster.csv"),
  "cdf-overlay": join(FIXTURES, "cdf_overlay.csv"),
  "decay-fit": join(FIXTURES, "decay.csv"),
};

describe("renderToString", () => {
  it("renders all four figure kinds", () => {
    for (const kind of FIGURE_KINDS) {
      const svg = renderToString({ kind, input: FIXTURE_FOR[kind] });
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    }
  });

  it("is byte-identical across reruns", () => {
    for (const kind of FIGURE_KINDS) {
      const spec: FigureSpec = { kind, input: FIXTURE_FOR[kind], style: { styleSeed: 3 } };
      expect(renderToString(spec)).toBe(renderToString(spec));
    }
  });

  it("changes colours with the style seed but stays deterministic", () => {
    const a = renderToString({ kind: "paths", input: FIXTURE_FOR.paths, style: { styleSeed: 0 } });
    const b = renderToString({ kind: "paths", input: FIXTURE_FOR.paths, style: { styleSeed: 1 } });
    expect(a).not.toBe(b);
  });

  it("annotates KS D = 0 for identical series", () => {
    const svg = renderToString({ kind: "cdf-overlay", input: join(FIXTURES, "cdf_identical.csv") });
    expect(svg).toContain("KS D = 0.000000");
  });

  it("annotates a positive KS D for differing series", () => {
    const svg = renderToString({ kind: "cdf-overlay", input: FIXTURE_FOR["cdf-overlay"] });
    const m = svg.match(/KS D = (\d\.\d{6})/);
    expect(m).not.toBeNull();
    expect(Number(m![1])).toBeGreaterThan(0);
  });

  it("draws one polyline per walk in the paths figure", () => {
    const svg = renderToString({ kind: "paths", input: FIXTURE_FOR.paths });
    const polylines = svg.match(/<polyline /g) ?? [];
    expect(polylines.length).toBe(3);
    expect(svg).toContain("3 walks");
  });

  it("rejects wrong-schema input with a nonzero-path error", () => {
    expect(() => renderToString({ kind: "cluster", input: FIXTURE_FOR.paths })).toThrow(SchemaError);
  });
});

describe("decay fit", () => {
  it("reproduces the fixture's generating slope to 6 digits", () => {
    // fixture q values are exactly 0.02 * exp(-0.35 * level)
    const table = readCsv(FIXTURE_FOR["decay-fit"], ["level", "count", "q"]);
    const fit = decaySlope(table);
    expect(Math.abs(fit.slope - -0.35)).toBeLessThan(5e-7);
    expect(fit.r2).toBeCloseTo(1.0, 9);
  });

  it("embeds the slope annotation in the SVG", () => {
    const svg = renderToString({ kind: "decay-fit", input: FIXTURE_FOR["decay-fit"] });
    expect(svg).toContain("slope = -0.350000");
  });
});

describe("spec loading and file output", () => {
  function writeSpec(dir: string, spec: object): string {
    const path = join(dir, "fig.json");
    writeFileSync(path, JSON.stringify(spec));
    return path;
  }

  it("resolves input/output relative to the spec and writes identical bytes on rerun", () => {
    const dir = mkdtempSync(join(tmpdir(), "rp-fig-"));
    const specPath = writeSpec(dir, {
      kind: "cdf-overlay",
      input: FIXTURE_FOR["cdf-overlay"],
      output: "out.svg",
      style: { styleSeed: 2, title: "overlay" },
    });
    const out1 = render(loadSpec(specPath));
    const bytes1 = readFileSync(out1);
    const out2 = render(loadSpec(specPath));
    expect(out2).toBe(out1);
    expect(readFileSync(out2).equals(bytes1)).toBe(true);
    expect(out1).toBe(join(dir, "out.svg"));
  });

  it("rejects malformed specs", () => {
    const dir = mkdtempSync(join(tmpdir(), "rp-bad-"));
    expect(() => loadSpec(writeSpec(dir, { kind: "nope", input: "x.csv" }))).toThrow(SchemaError);
    expect(() => loadSpec(writeSpec(dir, { kind: "paths" }))).toThrow(SchemaError);
    expect(() => loadSpec(join(dir, "missing.json"))).toThrow(SchemaError);
  });
});

describe("cli", () => {
  it("renders via the command line and reports schema errors distinctly", () => {
    const dir = mkdtempSync(join(tmpdir(), "rp-cli-"));
    const specPath = join(dir, "fig.json");
    writeFileSync(
      specPath,
      JSON.stringify({ kind: "paths", input: FIXTURE_FOR.paths, output: "walks.svg" }),
    );
    expect(runCli(["render", "--spec", specPath])).toBe(0);
    expect(readFileSync(join(dir, "walks.svg"), "utf8")).toContain("<svg ");

    // schema mismatch: cluster columns fed to the paths renderer
    writeFileSync(
      specPath,
      JSON.stringify({ kind: "paths", input: FIXTURE_FOR.cluster, output: "walks.svg" }),
    );
    expect(runCli(["render", "--spec", specPath])).toBe(2);
    expect(runCli(["render"])).toBe(2);
    expect(runCli(["draw"])).toBe(2);
    expect(runCli([])).toBe(2);
    expect(runCli(["--help"])).toBe(0);
  });
});
