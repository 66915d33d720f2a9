/**
 * Minimal deterministic SVG assembly.
 *
 * No timestamps, no randomness: every coordinate is formatted with a
 * fixed precision, so the same inputs and style always produce the
 * same bytes.
 */

export interface Style {
  width: number;
  height: number;
  margin: number;
  /** Rotates the colour palette; same seed, same colours. */
  styleSeed: number;
  title: string;
}

export const DEFAULT_STYLE: Style = {
  width: 640,
  height: 420,
  margin: 52,
  styleSeed: 0,
  title: "",
};

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

/** The k-th palette colour under the given seed rotation. */
export function color(k: number, styleSeed: number): string {
  const n = PALETTE.length;
  return PALETTE[(((k + styleSeed) % n) + n) % n]!;
}

/** Fixed-precision coordinate formatting (trailing zeros trimmed). */
export function fmt(v: number): string {
  if (!Number.isFinite(v)) {
    throw new Error(`non-finite coordinate: ${v}`);
  }
  const s = v.toFixed(3);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

/** Affine map from data range [lo, hi] to pixel range [p0, p1]. */
export function scale(lo: number, hi: number, p0: number, p1: number): (v: number) => number {
  const span = hi - lo;
  if (span === 0) {
    return () => (p0 + p1) / 2;
  }
  return (v: number) => p0 + ((v - lo) / span) * (p1 - p0);
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly style: Style) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${style.width}" height="${style.height}" ` +
        `viewBox="0 0 ${style.width} ${style.height}" font-family="monospace" font-size="12">`,
      `<rect width="${style.width}" height="${style.height}" fill="white"/>`,
    );
    if (style.title !== "") {
      this.text(style.width / 2, style.margin / 2, style.title, "middle", 14);
    }
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  /** Right-continuous step curve through the ECDF points. */
  steps(points: Array<[number, number]>, stroke: string): void {
    const path: Array<[number, number]> = [];
    for (let i = 0; i < points.length; i++) {
      const [x, y] = points[i]!;
      if (i > 0) {
        path.push([x, path[path.length - 1]![1]]);
      }
      path.push([x, y]);
    }
    this.polyline(path, stroke);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, anchor = "start", size = 12): void {
    const esc = content
      .replaceAll("&", "&amp;")
      .replaceAll("<", "&lt;")
      .replaceAll(">", "&gt;");
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}">${esc}</text>`,
    );
  }

  /** Plain axis frame around the plot area. */
  frame(): void {
    const { width, height, margin } = this.style;
    this.parts.push(
      `<rect x="${margin}" y="${margin}" width="${width - 2 * margin}" height="${height - 2 * margin}" ` +
        `fill="none" stroke="#444" stroke-width="1"/>`,
    );
  }

  axisLabels(xLabel: string, yLabel: string): void {
    const { width, height, margin } = this.style;
    this.text(width / 2, height - margin / 3, xLabel, "middle");
    this.parts.push(
      `<text x="${fmt(margin / 3)}" y="${fmt(height / 2)}" text-anchor="middle" ` +
        `transform="rotate(-90 ${fmt(margin / 3)} ${fmt(height / 2)})">${yLabel}</text>`,
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
