/** Turns solver-harness CSV outputs into figures.
 *
 * Three kinds:
 *  - rates:      refinement tables (eps,h,tau,e_h1,...) -> log-log chart,
 *                one series per eps, fitted slopes printed on stdout;
 *  - timeseries: time-sampled tables (t plus value columns, optionally
 *                grouped by an eps column) -> line chart;
 *  - heatmap:    headerless 2D snapshot matrices with a `# shape: N,M`
 *                comment -> raster panel (PNG, embedded when output is SVG).
 *
 * Rendering only reads its inputs and is deterministic: identical input
 * bytes produce identical output bytes.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import {
  columnIndex,
  parseShape,
  readHarnessCsv,
  readMatrixCsv,
  requireColumns,
} from "./csv.js";
import { logLogSlope, mean } from "./fit.js";
import {
  buildEmptyFigure,
  buildHeatmapFigure,
  buildRatesFigure,
  buildTimeseriesFigure,
  PALETTE,
} from "./svg.js";
import { ParsedCsv, PlotSpec, Series, SlopeFit } from "./types.js";

export interface RenderResult {
  /** Path the figure was written to. */
  output: string;
  /** Lines for stdout (fitted slopes, notes). */
  printed: string[];
  /** Lines for stderr (ignored columns, fallbacks). */
  warnings: string[];
  /** Per-series fits for rates figures; empty for other kinds. */
  fits: SlopeFit[];
}

/** Columns the refinement-table reader knows how to use. */
const TABLE_COLUMNS = new Set([
  "eps", "h", "tau", "e_h1", "edot_h1", "l2_error", "energy_err", "rate",
]);

function warnUnknown(csv: ParsedCsv, known: Set<string>, warnings: string[]): void {
  const unknown = csv.columns.filter((c) => !known.has(c));
  if (unknown.length > 0) {
    warnings.push(`${csv.path}: ignoring unknown columns: ${unknown.join(", ")}`);
  }
}

/** Compact numeric label: "0.10000000000000001" -> "0.1". */
function compactNumber(cell: string): string {
  const v = Number(cell);
  if (!Number.isFinite(v)) return cell;
  return String(parseFloat(v.toPrecision(6)));
}

/** Group data-row indices by the raw string in one column, in file order. */
function groupBy(csv: ParsedCsv, col: string): Map<string, number[]> {
  const idx = columnIndex(csv, col);
  const groups = new Map<string, number[]>();
  csv.cells.forEach((row, r) => {
    const key = row[idx];
    const bucket = groups.get(key);
    if (bucket) bucket.push(r);
    else groups.set(key, [r]);
  });
  return groups;
}

function distinctCount(csv: ParsedCsv, col: string): number {
  const idx = csv.columns.indexOf(col);
  if (idx < 0) return 0;
  return new Set(csv.cells.map((row) => row[idx])).size;
}

function ensureDir(file: string): void {
  fs.mkdirSync(path.dirname(path.resolve(file)), { recursive: true });
}

function writeText(file: string, text: string): void {
  ensureDir(file);
  fs.writeFileSync(file, text, "utf8");
}

function renderRates(spec: PlotSpec, res: RenderResult): void {
  const seriesList: Series[] = [];
  let color = 0;
  let xKey = "tau";
  for (const input of spec.inputs) {
    const csv = readHarnessCsv(input);
    requireColumns(csv, ["eps", "h", "tau", "e_h1"]);
    warnUnknown(csv, TABLE_COLUMNS, res.warnings);
    // The refinement axis is whichever of tau/h actually varies.
    xKey = distinctCount(csv, "tau") > 1 ? "tau" : "h";
    const xi = columnIndex(csv, xKey);
    const yi = columnIndex(csv, "e_h1");
    const ri = csv.columns.indexOf("rate");
    for (const [epsCell, rowIdxs] of groupBy(csv, "eps")) {
      const xs: number[] = [];
      const ys: number[] = [];
      const rates: number[] = [];
      for (const r of rowIdxs) {
        const x = csv.rows[r][xi];
        const y = csv.rows[r][yi];
        if (Number.isFinite(x) && Number.isFinite(y) && x > 0 && y > 0) {
          xs.push(x);
          ys.push(y);
        }
        if (ri >= 0 && Number.isFinite(csv.rows[r][ri])) rates.push(csv.rows[r][ri]);
      }
      if (xs.length === 0) continue;
      const label = epsCell === "max" ? "max over eps" : `eps = ${compactNumber(epsCell)}`;
      seriesList.push({ label, xs, ys, color: PALETTE[color++ % PALETTE.length] });
      if (xs.length >= 2) {
        const slope = logLogSlope(xs, ys);
        const meanRate = rates.length > 0 ? mean(rates) : null;
        res.fits.push({ label, slope, meanTabulatedRate: meanRate });
        let line = `fitted slope [${label}] = ${slope.toFixed(3)}`;
        if (meanRate !== null) line += ` (mean tabulated rate ${meanRate.toFixed(3)})`;
        res.printed.push(line);
      }
    }
  }
  const title = spec.title ?? "Convergence under refinement";
  if (seriesList.length === 0) {
    writeText(spec.output, buildEmptyFigure(title, "no data rows in input"));
    res.printed.push("input has no data rows; wrote empty-axes figure");
    return;
  }
  const xLabel = xKey === "tau" ? "time step tau" : "mesh size h";
  const subtitle = spec.inputs.map((p) => path.basename(p)).join(", ");
  writeText(
    spec.output,
    buildRatesFigure(seriesList, title, subtitle, xLabel, "H1 error"),
  );
}

function renderTimeseries(spec: PlotSpec, res: RenderResult): void {
  const yScale = spec.yScale ?? "linear";
  const seriesList: Series[] = [];
  let color = 0;
  for (const input of spec.inputs) {
    const csv = readHarnessCsv(input);
    requireColumns(csv, ["t"]);
    const ti = columnIndex(csv, "t");
    const valueCols = csv.columns.filter((c) => c !== "t" && c !== "eps");
    const groups = csv.columns.includes("eps")
      ? groupBy(csv, "eps")
      : new Map([["", csv.cells.map((_, r) => r)]]);
    for (const colName of valueCols) {
      const vi = columnIndex(csv, colName);
      for (const [epsCell, rowIdxs] of groups) {
        const xs: number[] = [];
        const ys: number[] = [];
        for (const r of rowIdxs) {
          const t = csv.rows[r][ti];
          const v = csv.rows[r][vi];
          if (!Number.isFinite(t) || !Number.isFinite(v)) continue;
          if (yScale === "log" && v <= 0) continue;
          xs.push(t);
          ys.push(v);
        }
        if (xs.length === 0) continue;
        const label = epsCell === ""
          ? colName
          : `${colName}, eps = ${compactNumber(epsCell)}`;
        seriesList.push({ label, xs, ys, color: PALETTE[color++ % PALETTE.length] });
      }
    }
  }
  const title = spec.title ?? "Error against time";
  if (seriesList.length === 0) {
    writeText(spec.output, buildEmptyFigure(title, "no data rows in input"));
    res.printed.push("input has no data rows; wrote empty-axes figure");
    return;
  }
  const subtitle = spec.inputs.map((p) => path.basename(p)).join(", ");
  writeText(
    spec.output,
    buildTimeseriesFigure(seriesList, title, subtitle, "t", "value", yScale),
  );
}

/** "[−20,20]^2" (or "[−20,20]") -> [−20, 20]; null when absent/unparseable. */
function parseDomain(metadata: Record<string, string>): [number, number] | null {
  const raw = metadata["domain"];
  if (!raw) return null;
  const m = raw.match(/\[\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\]/);
  if (!m) return null;
  const lo = Number(m[1]);
  const hi = Number(m[2]);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return null;
  return [lo, hi];
}

function renderHeatmap(spec: PlotSpec, res: RenderResult): void {
  if (spec.inputs.length !== 1) {
    throw new Error(`heatmap takes exactly one input file, got ${spec.inputs.length}`);
  }
  const input = spec.inputs[0];
  const parsed = readMatrixCsv(input);
  const title = spec.title ?? `Field snapshot${parsed.metadata["t"] !== undefined ? ` at t = ${parsed.metadata["t"]}` : ""}`;
  if (parsed.matrix.length === 0) {
    writeText(spec.output, buildEmptyFigure(title, "no data rows in input"));
    res.printed.push("input has no data rows; wrote empty-axes figure");
    return;
  }
  const shape = parseShape(parsed);
  if (parsed.matrix.length !== shape[0] || parsed.matrix.some((row) => row.length !== shape[1])) {
    throw new Error(
      `${input}: shape header says ${shape[0]}x${shape[1]} but the file holds `
      + `${parsed.matrix.length} rows of ${parsed.matrix[0]?.length ?? 0} values`,
    );
  }
  const domain = parseDomain(parsed.metadata);
  const subtitle = path.basename(input);
  const { svg, png } = buildHeatmapFigure(parsed.matrix, shape, domain, title, subtitle);
  ensureDir(spec.output);
  if (spec.output.toLowerCase().endsWith(".png")) {
    fs.writeFileSync(spec.output, png);
  } else {
    fs.writeFileSync(spec.output, svg, "utf8");
  }
}

/** Render one figure. Throws SchemaError when required columns are missing. */
export function renderSpec(spec: PlotSpec): RenderResult {
  if (spec.inputs.length === 0) {
    throw new Error("no input files given");
  }
  if (spec.kind !== "heatmap" && spec.output.toLowerCase().endsWith(".png")) {
    throw new Error(
      "PNG output is supported for heatmap figures only; choose an .svg output path",
    );
  }
  const res: RenderResult = { output: spec.output, printed: [], warnings: [], fits: [] };
  switch (spec.kind) {
    case "rates":
      renderRates(spec, res);
      break;
    case "timeseries":
      renderTimeseries(spec, res);
      break;
    case "heatmap":
      renderHeatmap(spec, res);
      break;
    default:
      throw new Error(`unknown figure kind: ${String(spec.kind)}`);
  }
  return res;
}
