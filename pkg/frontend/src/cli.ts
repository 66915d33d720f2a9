#!/usr/bin/env node
/**
 * Batch figure renderer.
 *
 *   percolab-render render --spec <figure.json>
 *
 * The spec names the figure kind, input CSV, output SVG and optional
 * style overrides; see figures.ts for the four kinds and their column
 * schemas.  Exits 0 on success, 2 on schema/usage errors, 1 otherwise.
 */

import { SchemaError } from "./csv.js";
import { loadSpec, render } from "./figures.js";

const USAGE = "usage: percolab-render render --spec <figure.json>";

/** Run the CLI on argv (no leading node/script entries); returns exit code. */
export function runCli(argv: string[]): number {
  if (argv.length === 0 || argv[0] === "--help" || argv[0] === "-h") {
    console.log(USAGE);
    return argv.length === 0 ? 2 : 0;
  }
  if (argv[0] !== "render") {
    console.error(`unknown command ${argv[0]}\n${USAGE}`);
    return 2;
  }
  const specIdx = argv.indexOf("--spec");
  const specPath = specIdx >= 0 ? argv[specIdx + 1] : undefined;
  if (!specPath) {
    console.error(`missing --spec argument\n${USAGE}`);
    return 2;
  }
  try {
    const spec = loadSpec(specPath);
    const out = render(spec);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  typeof process.argv[1] === "string" && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
