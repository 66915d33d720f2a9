/**
 * The four figure kinds over harness CSV outputs:
 *
 * - "paths":       bundles of coalescing walks        (columns walk,t,x)
 * - "cluster":     reachable-site scatter             (columns x,t,reached)
 * - "cdf-overlay": two-series empirical CDF + KS gap  (columns series,value)
 * - "decay-fit":   log-linear fit of level counts     (columns level,count,q)
 *
 * Rendering is a pure function of (input bytes, style), so re-running a
 * spec reproduces the output file byte for byte.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { numericColumn, readCsv, SchemaError, type Table } from "./csv.js";
import { fitLine, ksTwoSample } from "./stats.js";
import { color, DEFAULT_STYLE, scale, SvgDoc, type Style } from "./svg.js";

export const FIGURE_KINDS = ["paths", "cluster", "cdf-overlay", "decay-fit"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  /** Input CSV path. */
  input: string;
  /** Output SVG path (optional when only the string is wanted). */
  output?: string;
  style?: Partial<Style>;
}

const REQUIRED: Record<FigureKind, string[]> = {
  paths: ["walk", "t", "x"],
  cluster: ["x", "t", "reached"],
  "cdf-overlay": ["series", "value"],
  "decay-fit": ["level", "count", "q"],
};

/** Load and validate a JSON figure spec; input paths resolve relative to it. */
export function loadSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`cannot load spec ${path}: ${(err as Error).message}`);
  }
  const spec = raw as FigureSpec;
  if (typeof spec !== "object" || spec === null) {
    throw new SchemaError(`${path}: spec must be a JSON object`);
  }
  if (!FIGURE_KINDS.includes(spec.kind)) {
    throw new SchemaError(`${path}: kind must be one of ${FIGURE_KINDS.join(", ")} (got ${spec.kind})`);
  }
  if (typeof spec.input !== "string" || spec.input === "") {
    throw new SchemaError(`${path}: input CSV path missing`);
  }
  const base = dirname(resolve(path));
  spec.input = resolve(base, spec.input);
  if (spec.output !== undefined) {
    spec.output = resolve(base, spec.output);
  }
  return spec;
}

/** Render a spec to an SVG string (no file output). */
export function renderToString(spec: FigureSpec): string {
  const style: Style = { ...DEFAULT_STYLE, ...(spec.style ?? {}) };
  const table = readCsv(spec.input, REQUIRED[spec.kind]);
  switch (spec.kind) {
    case "paths":
      return renderPaths(table, style, spec.input);
    case "cluster":
      return renderCluster(table, style, spec.input);
    case "cdf-overlay":
      return renderCdfOverlay(table, style, spec.input);
    case "decay-fit":
      return renderDecayFit(table, style, spec.input);
  }
}

/** Render a spec and write its output file; returns the output path. */
export function render(spec: FigureSpec): string {
  if (!spec.output) {
    throw new SchemaError("spec has no output path");
  }
  const svg = renderToString(spec);
  writeFileSync(spec.output, svg, "utf8");
  return spec.output;
}

function plotArea(style: Style): { x0: number; x1: number; y0: number; y1: number } {
  return {
    x0: style.margin,
    x1: style.width - style.margin,
    y0: style.height - style.margin, // pixel y grows downward; data y0 is the bottom
    y1: style.margin,
  };
}

function renderPaths(table: Table, style: Style, path: string): string {
  const walks = numericColumn(table, "walk", path);
  const ts = numericColumn(table, "t", path);
  const xs = numericColumn(table, "x", path);
  const byWalk = new Map<number, Array<[number, number]>>();
  for (let i = 0; i < walks.length; i++) {
    const w = walks[i]!;
    if (!byWalk.has(w)) byWalk.set(w, []);
    byWalk.get(w)!.push([ts[i]!, xs[i]!]);
  }
  const area = plotArea(style);
  const sx = scale(Math.min(...xs), Math.max(...xs), area.x0, area.x1);
  const sy = scale(Math.min(...ts), Math.max(...ts), area.y0, area.y1);
  const doc = new SvgDoc(style);
  doc.frame();
  let k = 0;
  for (const key of [...byWalk.keys()].sort((a, b) => a - b)) {
    const pts = byWalk
      .get(key)!
      .sort((a, b) => a[0] - b[0])
      .map(([t, x]): [number, number] => [sx(x), sy(t)]);
    doc.polyline(pts, color(k, style.styleSeed));
    k += 1;
  }
  doc.axisLabels("x", "t");
  doc.text(area.x0, area.y1 - 6, `${byWalk.size} walks`, "start");
  return doc.toString();
}

function renderCluster(table: Table, style: Style, path: string): string {
  const xs = numericColumn(table, "x", path);
  const ts = numericColumn(table, "t", path);
  const reached = numericColumn(table, "reached", path);
  const area = plotArea(style);
  const sx = scale(Math.min(...xs), Math.max(...xs), area.x0, area.x1);
  const sy = scale(Math.min(...ts), Math.max(...ts), area.y0, area.y1);
  const span = Math.max(Math.max(...ts) - Math.min(...ts), 1);
  const r = Math.max(1.2, Math.min(4, (area.y0 - area.y1) / (2.5 * span)));
  const doc = new SvgDoc(style);
  doc.frame();
  let n = 0;
  for (let i = 0; i < xs.length; i++) {
    if (reached[i] === 0) continue;
    doc.circle(sx(xs[i]!), sy(ts[i]!), r, color(0, style.styleSeed));
    n += 1;
  }
  doc.axisLabels("x", "t");
  doc.text(area.x0, area.y1 - 6, `${n} reached sites`, "start");
  return doc.toString();
}

function renderCdfOverlay(table: Table, style: Style, path: string): string {
  const values = numericColumn(table, "value", path);
  const bySeries = new Map<string, number[]>();
  table.rows.forEach((row, i) => {
    const name = row["series"] ?? "";
    if (!bySeries.has(name)) bySeries.set(name, []);
    bySeries.get(name)!.push(values[i]!);
  });
  const names = [...bySeries.keys()].sort();
  if (names.length !== 2) {
    throw new SchemaError(`${path}: cdf-overlay needs exactly 2 series (found ${names.length})`);
  }
  const [a, b] = [bySeries.get(names[0]!)!, bySeries.get(names[1]!)!];
  const d = ksTwoSample(a, b);
  const area = plotArea(style);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const sx = scale(lo, hi, area.x0, area.x1);
  const sy = scale(0, 1, area.y0, area.y1);
  const doc = new SvgDoc(style);
  doc.frame();
  names.forEach((name, k) => {
    const sample = [...bySeries.get(name)!].sort((u, v) => u - v);
    const pts: Array<[number, number]> = [[sx(lo), sy(0)]];
    sample.forEach((v, i) => pts.push([sx(v), sy((i + 1) / sample.length)]));
    pts.push([sx(hi), sy(1)]);
    doc.steps(pts, color(k, style.styleSeed));
    doc.text(area.x1 - 6, area.y1 + 16 + 14 * k, name, "end");
  });
  doc.text(area.x0 + 6, area.y1 + 16, `KS D = ${d.toFixed(6)}`, "start");
  doc.axisLabels("value", "F(value)");
  return doc.toString();
}

/** Least-squares slope of ln q over levels with positive q. */
export function decaySlope(table: Table, path = "input"): { slope: number; intercept: number; r2: number } {
  const levels = numericColumn(table, "level", path);
  const qs = numericColumn(table, "q", path);
  const x: number[] = [];
  const y: number[] = [];
  for (let i = 0; i < levels.length; i++) {
    if (qs[i]! > 0) {
      x.push(levels[i]!);
      y.push(Math.log(qs[i]!));
    }
  }
  if (x.length < 2) {
    throw new SchemaError(`${path}: decay-fit needs >= 2 levels with positive q`);
  }
  return fitLine(x, y);
}

function renderDecayFit(table: Table, style: Style, path: string): string {
  const levels = numericColumn(table, "level", path);
  const qs = numericColumn(table, "q", path);
  const fit = decaySlope(table, path);
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < levels.length; i++) {
    if (qs[i]! > 0) pts.push([levels[i]!, Math.log(qs[i]!)]);
  }
  const area = plotArea(style);
  const xsAll = pts.map((p) => p[0]);
  const ysAll = pts.map((p) => p[1]);
  const sx = scale(Math.min(...xsAll), Math.max(...xsAll), area.x0, area.x1);
  const sy = scale(Math.min(...ysAll), Math.max(...ysAll), area.y0, area.y1);
  const doc = new SvgDoc(style);
  doc.frame();
  for (const [x, y] of pts) {
    doc.circle(sx(x), sy(y), 3, color(0, style.styleSeed));
  }
  const xLo = Math.min(...xsAll);
  const xHi = Math.max(...xsAll);
  doc.polyline(
    [
      [sx(xLo), sy(fit.intercept + fit.slope * xLo)],
      [sx(xHi), sy(fit.intercept + fit.slope * xHi)],
    ],
    color(1, style.styleSeed),
  );
  doc.text(area.x0 + 6, area.y1 + 16, `slope = ${fit.slope.toFixed(6)}`, "start");
  doc.text(area.x0 + 6, area.y1 + 30, `R^2 = ${fit.r2.toFixed(4)}`, "start");
  doc.axisLabels("level", "ln q");
  return doc.toString();
}
