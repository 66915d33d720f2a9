import { describe, expect, it } from "vitest";

import { ecdf, fitLine, ksTwoSample } from "../src/stats.js";

describe("ecdf", () => {
  it("collapses ties into single steps", () => {
    const e = ecdf([2, 1, 2, 4]);
    expect(e.x).toEqual([1, 2, 4]);
    expect(e.f).toEqual([0.25, 0.75, 1.0]);
    expect(e.n).toBe(4);
  });

  it("rejects empty samples", () => {
    expect(() => ecdf([])).toThrow();
  });
});

describe("ksTwoSample", () => {
  it("is exactly 0 for identical samples", () => {
    const a = [0.3, 0.1, 0.7, 0.1];
    expect(ksTwoSample(a, [...a])).toBe(0);
  });

  it("is 1 for disjoint samples", () => {
    expect(ksTwoSample([0, 1, 2], [10, 11])).toBe(1);
  });

  it("handles ties across the two samples", () => {
    // F_a jumps to 1 at 1; F_b is 0.5 there
    expect(ksTwoSample([0, 1], [1, 2])).toBeCloseTo(0.5, 12);
  });

  it("matches a hand-computed mixed case", () => {
    const a = [1, 2, 3, 4, 5];
    const b = [3, 4, 5, 6, 7];
    // max gap at value 2: F_a = 0.4, F_b = 0
    expect(ksTwoSample(a, b)).toBeCloseTo(0.4, 12);
  });
});

describe("fitLine", () => {
  it("recovers an exact line", () => {
    const x = [1, 2, 3, 4];
    const y = x.map((v) => 2.5 * v - 1.25);
    const fit = fitLine(x, y);
    expect(fit.slope).toBeCloseTo(2.5, 12);
    expect(fit.intercept).toBeCloseTo(-1.25, 12);
    expect(fit.r2).toBeCloseTo(1.0, 12);
  });

  it("rejects degenerate input", () => {
    expect(() => fitLine([1], [2])).toThrow();
    expect(() => fitLine([1, 1], [2, 3])).toThrow();
  });
});
