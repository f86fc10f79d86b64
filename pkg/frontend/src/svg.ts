/** Hand-rolled SVG chart builders: convergence (log-log), time series,
 * and 2D heatmaps. No chart library; every figure is a template string. */

import { fmtTick, logTicks, niceTicks } from "./fit.js";
import { divergingColor, encodePng } from "./png.js";
import { AxisScale, Series } from "./types.js";

export const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f4a261",
  "#9d4edd", "#0096c7", "#b5838d", "#6d6875",
];

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

interface Frame {
  W: number;
  H: number;
  ml: number;
  mt: number;
  pw: number;
  ph: number;
}

const FRAME: Frame = { W: 700, H: 420, ml: 70, mt: 40, pw: 700 - 70 - 24, ph: 420 - 40 - 58 };

function axisMapper(scale: AxisScale, lo: number, hi: number, p0: number, plen: number) {
  if (scale === "log") {
    const llo = Math.log(lo);
    const span = Math.log(hi) - llo || 1;
    return (v: number) => p0 + ((Math.log(v) - llo) / span) * plen;
  }
  const span = hi - lo || 1;
  return (v: number) => p0 + ((v - lo) / span) * plen;
}

function open(f: Frame, title: string, subtitle: string): string {
  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${f.W} ${f.H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${f.W}" height="${f.H}" fill="#fff"/>\n`;
  s += `<text x="${f.ml}" y="${f.mt - 22}" font-size="13" font-weight="600" fill="#222">${esc(title)}</text>\n`;
  if (subtitle) {
    s += `<text x="${f.ml}" y="${f.mt - 8}" font-size="9" fill="#888">${esc(subtitle)}</text>\n`;
  }
  return s;
}

function axesFrame(f: Frame): string {
  let s = `<line x1="${f.ml}" y1="${f.mt}" x2="${f.ml}" y2="${f.mt + f.ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${f.ml}" y1="${f.mt + f.ph}" x2="${f.ml + f.pw}" y2="${f.mt + f.ph}" stroke="#333" stroke-width="0.8"/>\n`;
  return s;
}

function legend(f: Frame, entries: { label: string; color: string; dash?: string }[]): string {
  if (entries.length === 0) return "";
  const lw = Math.max(...entries.map((e) => e.label.length)) * 5.4 + 30;
  const lh = entries.length * 13 + 6;
  const lx = f.ml + f.pw - lw - 6;
  const ly = f.mt + 6;
  let s = `<rect x="${lx}" y="${ly}" width="${lw}" height="${lh}" rx="2" fill="white" fill-opacity="0.85" stroke="#ddd" stroke-width="0.5"/>\n`;
  entries.forEach((e, i) => {
    const yy = ly + 10 + i * 13;
    s += `<line x1="${lx + 6}" y1="${yy}" x2="${lx + 22}" y2="${yy}" stroke="${e.color}" stroke-width="1.4" ${e.dash ? `stroke-dasharray="${e.dash}"` : ""}/>\n`;
    s += `<text x="${lx + 26}" y="${yy + 3}" font-size="8.5" fill="#444">${esc(e.label)}</text>\n`;
  });
  return s;
}

function drawTicks(
  f: Frame,
  xScale: AxisScale,
  yScale: AxisScale,
  xLo: number,
  xHi: number,
  yLo: number,
  yHi: number,
  xLabel: string,
  yLabel: string,
): string {
  const xOf = axisMapper(xScale, xLo, xHi, f.ml, f.pw);
  const yOf = axisMapper(yScale, yLo, yHi, f.mt + f.ph, -f.ph);
  const xTicks = xScale === "log" ? logTicks(xLo, xHi, 8) : niceTicks(xLo, xHi, 7);
  const yTicks = yScale === "log" ? logTicks(yLo, yHi, 8) : niceTicks(yLo, yHi, 6);
  let s = "";
  for (const v of yTicks) {
    const y = yOf(v);
    s += `<line x1="${f.ml}" y1="${y.toFixed(1)}" x2="${f.ml + f.pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<line x1="${f.ml - 4}" y1="${y.toFixed(1)}" x2="${f.ml}" y2="${y.toFixed(1)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${f.ml - 7}" y="${(y + 3).toFixed(1)}" text-anchor="end" font-size="8.5" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }
  for (const v of xTicks) {
    const x = xOf(v);
    s += `<line x1="${x.toFixed(1)}" y1="${f.mt + f.ph}" x2="${x.toFixed(1)}" y2="${f.mt + f.ph + 4}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${x.toFixed(1)}" y="${f.mt + f.ph + 15}" text-anchor="middle" font-size="8.5" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }
  s += `<text x="${f.ml + f.pw / 2}" y="${f.H - 10}" text-anchor="middle" font-size="10" fill="#444">${esc(xLabel)}</text>\n`;
  s += `<text x="16" y="${f.mt + f.ph / 2}" text-anchor="middle" font-size="10" fill="#444" transform="rotate(-90,16,${f.mt + f.ph / 2})">${esc(yLabel)}</text>\n`;
  return s;
}

function polyline(
  xs: number[],
  ys: number[],
  xOf: (v: number) => number,
  yOf: (v: number) => number,
  color: string,
  width: number,
  dash?: string,
  markers?: boolean,
): string {
  const pts = xs.map((x, i) => `${xOf(x).toFixed(1)},${yOf(ys[i]).toFixed(1)}`).join(" ");
  let s = `<polyline fill="none" stroke="${color}" stroke-width="${width}" ${dash ? `stroke-dasharray="${dash}"` : ""} points="${pts}"/>\n`;
  if (markers) {
    for (let i = 0; i < xs.length; i++) {
      s += `<circle cx="${xOf(xs[i]).toFixed(1)}" cy="${yOf(ys[i]).toFixed(1)}" r="2.4" fill="${color}"/>\n`;
    }
  }
  return s;
}

export function buildEmptyFigure(title: string, caption: string): string {
  const f = FRAME;
  let s = open(f, title, "");
  s += axesFrame(f);
  s += `<text x="${f.ml + f.pw / 2}" y="${f.mt + f.ph / 2}" text-anchor="middle" font-size="12" fill="#999">${esc(caption)}</text>\n`;
  s += "</svg>\n";
  return s;
}

/** Log-log convergence chart with dashed reference guides of slopes 1 and 2. */
export function buildRatesFigure(
  series: Series[],
  title: string,
  subtitle: string,
  xLabel: string,
  yLabel: string,
): string {
  const f = FRAME;
  const allX = series.flatMap((s) => s.xs).filter((v) => v > 0);
  const allY = series.flatMap((s) => s.ys).filter((v) => v > 0);
  const xLo = Math.min(...allX);
  const xHi = Math.max(...allX);
  const yLo = Math.min(...allY);
  const yHi = Math.max(...allY);
  const xOf = axisMapper("log", xLo, xHi, f.ml, f.pw);
  const yOf = axisMapper("log", yLo, yHi, f.mt + f.ph, -f.ph);

  let s = open(f, title, subtitle);
  s += drawTicks(f, "log", "log", xLo, xHi, yLo, yHi, xLabel, yLabel);

  // Reference guides anchored at the lower-right data corner.
  const guides: { label: string; color: string; dash: string }[] = [];
  const guideDefs = [
    { slope: 1, dash: "7,4" },
    { slope: 2, dash: "2,3" },
  ];
  for (const g of guideDefs) {
    const yAt = (x: number) => yLo * Math.pow(x / xHi, g.slope);
    // Clip the guide to the plotted y range.
    let xStart = xLo;
    if (yAt(xLo) > yHi) xStart = xHi * Math.pow(yHi / yLo, -1 / g.slope);
    s += polyline([xStart, xHi], [yAt(xStart), yLo], xOf, yOf, "#999", 1, g.dash);
    s += `<text x="${(xOf(xStart) + 6).toFixed(1)}" y="${(yOf(yAt(xStart)) + 10).toFixed(1)}" font-size="8.5" fill="#999">slope ${g.slope}</text>\n`;
    guides.push({ label: `reference slope ${g.slope}`, color: "#999", dash: g.dash });
  }

  for (const sr of series) {
    s += polyline(sr.xs, sr.ys, xOf, yOf, sr.color, sr.width ?? 1.4, sr.dash, sr.markers ?? true);
  }
  s += axesFrame(f);
  s += legend(f, [
    ...series.map((sr) => ({ label: sr.label, color: sr.color, dash: sr.dash })),
    ...guides,
  ]);
  s += "</svg>\n";
  return s;
}

/** Linear (or semilog) time-series chart. */
export function buildTimeseriesFigure(
  series: Series[],
  title: string,
  subtitle: string,
  xLabel: string,
  yLabel: string,
  yScale: AxisScale,
): string {
  const f = FRAME;
  const allX = series.flatMap((s) => s.xs);
  let allY = series.flatMap((s) => s.ys);
  if (yScale === "log") allY = allY.filter((v) => v > 0);
  const xLo = Math.min(...allX);
  const xHi = Math.max(...allX);
  let yLo = Math.min(...allY);
  let yHi = Math.max(...allY);
  if (yScale === "linear") {
    const pad = 0.06 * (yHi - yLo || 1);
    yLo = Math.min(0, yLo) === 0 && yLo >= 0 ? 0 : yLo - pad;
    yHi = yHi + pad;
  }
  const xOf = axisMapper("linear", xLo, xHi, f.ml, f.pw);
  const yOf = axisMapper(yScale, yLo, yHi, f.mt + f.ph, -f.ph);

  let s = open(f, title, subtitle);
  s += drawTicks(f, "linear", yScale, xLo, xHi, yLo, yHi, xLabel, yLabel);
  for (const sr of series) {
    s += polyline(sr.xs, sr.ys, xOf, yOf, sr.color, sr.width ?? 1.3, sr.dash, sr.markers ?? false);
  }
  s += axesFrame(f);
  s += legend(f, series.map((sr) => ({ label: sr.label, color: sr.color, dash: sr.dash })));
  s += "</svg>\n";
  return s;
}

/** 2D field heatmap; the raster is embedded as a PNG so the cell grid keeps
 * its exact aspect ratio. Returns both the SVG text and the raw PNG. */
export function buildHeatmapFigure(
  matrix: number[][],
  shape: [number, number],
  domain: [number, number] | null,
  title: string,
  subtitle: string,
): { svg: string; png: Buffer } {
  const [nRows, nCols] = shape;
  let vmax = 0;
  for (const row of matrix) {
    for (const v of row) vmax = Math.max(vmax, Math.abs(v));
  }
  if (vmax === 0) vmax = 1;
  const rgb = new Uint8Array(nRows * nCols * 3);
  // Row i of the file is the slice at the i-th x node; render x rightward
  // (columns) and the second axis upward, i.e. transpose and flip.
  for (let py = 0; py < nRows; py++) {
    for (let px = 0; px < nCols; px++) {
      const v = matrix[px][nRows - 1 - py];
      const [r, g, b] = divergingColor(v / vmax);
      const o = (py * nCols + px) * 3;
      rgb[o] = r;
      rgb[o + 1] = g;
      rgb[o + 2] = b;
    }
  }
  const png = encodePng(nCols, nRows, rgb);

  // Square data => square panel; margins around it.
  const side = 420;
  const ml = 64;
  const mt = 46;
  const W = ml + side + 30;
  const H = mt + side + 56;
  const f: Frame = { W, H, ml, mt, pw: side, ph: side };
  const lo = domain ? domain[0] : 0;
  const hi = domain ? domain[1] : nCols;

  let s = open(f, title, subtitle);
  const uri = `data:image/png;base64,${png.toString("base64")}`;
  s += `<image x="${ml}" y="${mt}" width="${side}" height="${side}" href="${uri}" preserveAspectRatio="none" image-rendering="pixelated"/>\n`;
  s += drawTicks(f, "linear", "linear", lo, hi, lo, hi, "x", "y");
  s += `<rect x="${ml}" y="${mt}" width="${side}" height="${side}" fill="none" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<text x="${ml + side}" y="${mt - 8}" text-anchor="end" font-size="8.5" fill="#888">max |u| = ${esc(vmax.toPrecision(4))}</text>\n`;
  s += "</svg>\n";
  return { svg: s, png };
}
