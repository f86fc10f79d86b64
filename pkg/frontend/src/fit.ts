/** Small numeric helpers: least squares, axis ticks. */

export function linearFit(xs: number[], ys: number[]): { slope: number; intercept: number } {
  const n = xs.length;
  if (n < 2) throw new Error(`need at least 2 points to fit, got ${n}`);
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx === 0) throw new Error("degenerate fit: all x identical");
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

/** Slope of log(y) against log(x), for convergence plots. */
export function logLogSlope(xs: number[], ys: number[]): number {
  const pts = xs
    .map((x, i) => [x, ys[i]])
    .filter(([x, y]) => x > 0 && y > 0);
  return linearFit(pts.map(([x]) => Math.log(x)), pts.map(([, y]) => Math.log(y))).slope;
}

export function mean(vals: number[]): number {
  return vals.reduce((a, b) => a + b, 0) / vals.length;
}

/** Round-number ticks for a linear axis. */
export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.01; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Powers of ten spanning a positive range, thinned to at most `count`. */
export function logTicks(min: number, max: number, count: number): number[] {
  const lo = Math.ceil(Math.log10(min) - 1e-12);
  const hi = Math.floor(Math.log10(max) + 1e-12);
  const decades: number[] = [];
  for (let d = lo; d <= hi; d++) decades.push(Math.pow(10, d));
  if (decades.length === 0) return [min, max];
  const stride = Math.max(1, Math.ceil(decades.length / count));
  return decades.filter((_, i) => i % stride === 0);
}

/** Format a tick value compactly (scientific below 1e-3 / above 1e4). */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const exp = Math.floor(Math.log10(a));
    const mant = v / Math.pow(10, exp);
    const m = Math.abs(mant - 1) < 1e-9 ? "" : `${mant.toPrecision(2)}x`;
    return `${m}1e${exp}`;
  }
  return a % 1 === 0 ? String(v) : String(parseFloat(v.toPrecision(3)));
}
