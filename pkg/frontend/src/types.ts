/** Shared types for the figure renderer. */

export type PlotKind = "rates" | "timeseries" | "heatmap";
export type AxisScale = "linear" | "log";

/** A render request, either loaded from a JSON file or built from CLI flags. */
export interface PlotSpec {
  /** Input CSV paths (harness output files). */
  inputs: string[];
  kind: PlotKind;
  /** Output figure path; .svg always works, .png additionally for heatmaps. */
  output: string;
  title?: string;
  xScale?: AxisScale;
  yScale?: AxisScale;
}

/** A parsed harness CSV: `# key: value` metadata, a header, data rows. */
export interface ParsedCsv {
  path: string;
  metadata: Record<string, string>;
  columns: string[];
  /** Raw string cells, one array per data row. */
  cells: string[][];
  /** Numeric view of `cells`; non-numeric cells (e.g. "max") are NaN. */
  rows: number[][];
}

/** One polyline in a chart. */
export interface Series {
  label: string;
  xs: number[];
  ys: number[];
  color: string;
  dash?: string;
  width?: number;
  markers?: boolean;
}

/** Least-squares fit of one rates series, reported on stdout. */
export interface SlopeFit {
  label: string;
  /** Fitted slope of log(error) against log(step). */
  slope: number;
  /** Mean of the tabulated per-refinement rates for the same series. */
  meanTabulatedRate: number | null;
}

export class SchemaError extends Error {
  constructor(path: string, missing: string[]) {
    super(`${path}: missing columns: ${missing.join(", ")}`);
    this.name = "SchemaError";
  }
}
