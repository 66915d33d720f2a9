/**
 * The two statistics the figures annotate: the two-sample
 * Kolmogorov-Smirnov distance for CDF overlays and the closed-form
 * least-squares line for decay fits.
 */

export interface Ecdf {
  /** Sorted unique sample values (step locations). */
  x: number[];
  /** CDF value attained at and after each step. */
  f: number[];
  n: number;
}

/** Empirical CDF as a right-continuous step function. */
export function ecdf(sample: number[]): Ecdf {
  if (sample.length === 0) {
    throw new Error("ecdf needs a nonempty sample");
  }
  const sorted = [...sample].sort((a, b) => a - b);
  const x: number[] = [];
  const f: number[] = [];
  for (let i = 0; i < sorted.length; i++) {
    const v = sorted[i]!;
    if (x.length > 0 && x[x.length - 1] === v) {
      f[f.length - 1] = (i + 1) / sorted.length;
    } else {
      x.push(v);
      f.push((i + 1) / sorted.length);
    }
  }
  return { x, f, n: sorted.length };
}

/**
 * Two-sample Kolmogorov-Smirnov statistic, exact under ties.
 *
 * Evaluates both empirical CDFs at every observed value and takes the
 * maximum absolute difference; identical samples give exactly 0.
 */
export function ksTwoSample(a: number[], b: number[]): number {
  if (a.length === 0 || b.length === 0) {
    throw new Error("ksTwoSample needs two nonempty samples");
  }
  const fa = ecdf(a);
  const fb = ecdf(b);
  const evalAt = (e: Ecdf, v: number): number => {
    // count of sample points <= v, via binary search over step locations
    let lo = 0;
    let hi = e.x.length;
    while (lo < hi) {
      const mid = (lo + hi) >> 1;
      if (e.x[mid]! <= v) lo = mid + 1;
      else hi = mid;
    }
    return lo === 0 ? 0 : e.f[lo - 1]!;
  };
  let d = 0;
  for (const v of [...fa.x, ...fb.x]) {
    d = Math.max(d, Math.abs(evalAt(fa, v) - evalAt(fb, v)));
  }
  return d;
}

export interface LineFit {
  slope: number;
  intercept: number;
  /** Coefficient of determination of the fit. */
  r2: number;
}

/** Ordinary least squares line through (x, y), closed form. */
export function fitLine(x: number[], y: number[]): LineFit {
  const n = x.length;
  if (n < 2 || y.length !== n) {
    throw new Error("fitLine needs two equal-length arrays with >= 2 points");
  }
  const mx = x.reduce((s, v) => s + v, 0) / n;
  const my = y.reduce((s, v) => s + v, 0) / n;
  let sxx = 0;
  let sxy = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    const dx = x[i]! - mx;
    const dy = y[i]! - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx === 0) {
    throw new Error("fitLine: x values are all identical");
  }
  const slope = sxy / sxx;
  const intercept = my - slope * mx;
  const r2 = syy === 0 ? 1 : (sxy * sxy) / (sxx * syy);
  return { slope, intercept, r2 };
}
