#!/usr/bin/env node
/** Command line for the figure renderer.
 *
 *   kgmti-plots render --spec FILE
 *   kgmti-plots render INPUT.csv [INPUT2.csv ...] --kind rates|timeseries|heatmap
 *                      [--out PATH] [--title TEXT] [--x-scale linear|log]
 *                      [--y-scale linear|log]
 *
 * With --spec, paths inside the JSON file resolve relative to the file's
 * directory. Without --out, the figure lands next to nothing in particular:
 * the first input's basename with an .svg extension, in the current
 * directory. Exit 0 on success (including the empty-input figure), 1 on any
 * error; missing required columns are listed in the error message.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { renderSpec } from "./render.js";
import { AxisScale, PlotKind, PlotSpec } from "./types.js";

const KINDS: PlotKind[] = ["rates", "timeseries", "heatmap"];
const SCALES: AxisScale[] = ["linear", "log"];

const USAGE = `usage:
  kgmti-plots render --spec FILE
  kgmti-plots render INPUT.csv [...] --kind ${KINDS.join("|")} [--out PATH]
                     [--title TEXT] [--x-scale linear|log] [--y-scale linear|log]`;

function takeValue(args: string[], flag: string): string {
  const v = args.shift();
  if (v === undefined) throw new Error(`${flag} expects a value\n${USAGE}`);
  return v;
}

function asKind(v: string): PlotKind {
  if ((KINDS as string[]).includes(v)) return v as PlotKind;
  throw new Error(`unknown figure kind "${v}" (expected ${KINDS.join(", ")})`);
}

function asScale(v: string, flag: string): AxisScale {
  if ((SCALES as string[]).includes(v)) return v as AxisScale;
  throw new Error(`${flag} must be one of ${SCALES.join(", ")}, got "${v}"`);
}

interface Flags {
  specFile?: string;
  kind?: PlotKind;
  out?: string;
  title?: string;
  xScale?: AxisScale;
  yScale?: AxisScale;
  inputs: string[];
}

function parseFlags(argv: string[]): Flags {
  const args = [...argv];
  const flags: Flags = { inputs: [] };
  while (args.length > 0) {
    const a = args.shift()!;
    switch (a) {
      case "--spec":
        flags.specFile = takeValue(args, a);
        break;
      case "--kind":
        flags.kind = asKind(takeValue(args, a));
        break;
      case "--out":
        flags.out = takeValue(args, a);
        break;
      case "--title":
        flags.title = takeValue(args, a);
        break;
      case "--x-scale":
        flags.xScale = asScale(takeValue(args, a), a);
        break;
      case "--y-scale":
        flags.yScale = asScale(takeValue(args, a), a);
        break;
      case "-h":
      case "--help":
        console.log(USAGE);
        process.exit(0);
        break;
      default:
        if (a.startsWith("-")) throw new Error(`unknown flag ${a}\n${USAGE}`);
        flags.inputs.push(a);
    }
  }
  return flags;
}

function loadSpecFile(file: string): PlotSpec {
  const raw = JSON.parse(fs.readFileSync(file, "utf8")) as Record<string, unknown>;
  const dir = path.dirname(path.resolve(file));
  const rel = (p: string) => (path.isAbsolute(p) ? p : path.join(dir, p));

  const inputsRaw = raw["inputs"] ?? raw["input"];
  const inputs = (Array.isArray(inputsRaw) ? inputsRaw : [inputsRaw])
    .filter((p): p is string => typeof p === "string")
    .map(rel);
  if (inputs.length === 0) throw new Error(`${file}: spec needs "inputs" (or "input")`);
  if (typeof raw["kind"] !== "string") throw new Error(`${file}: spec needs "kind"`);
  if (typeof raw["output"] !== "string") throw new Error(`${file}: spec needs "output"`);

  const spec: PlotSpec = {
    inputs,
    kind: asKind(raw["kind"]),
    output: rel(raw["output"]),
  };
  if (typeof raw["title"] === "string") spec.title = raw["title"];
  if (typeof raw["xScale"] === "string") spec.xScale = asScale(raw["xScale"], "xScale");
  if (typeof raw["yScale"] === "string") spec.yScale = asScale(raw["yScale"], "yScale");
  return spec;
}

/** Build the effective PlotSpec from argv. */
function specFromArgv(argv: string[]): PlotSpec {
  if (argv[0] !== "render") {
    throw new Error(`expected the "render" subcommand\n${USAGE}`);
  }
  const flags = parseFlags(argv.slice(1));
  let spec: PlotSpec;
  if (flags.specFile !== undefined) {
    if (flags.inputs.length > 0) {
      throw new Error("give either --spec FILE or positional inputs, not both");
    }
    spec = loadSpecFile(flags.specFile);
  } else {
    if (flags.inputs.length === 0) {
      throw new Error(`no input files given\n${USAGE}`);
    }
    if (flags.kind === undefined) {
      throw new Error(`--kind is required without --spec\n${USAGE}`);
    }
    const stem = path.basename(flags.inputs[0]).replace(/\.[^.]*$/, "");
    spec = {
      inputs: flags.inputs,
      kind: flags.kind,
      output: `${stem}.svg`,
    };
  }
  // Flags override spec-file fields.
  if (flags.kind !== undefined) spec.kind = flags.kind;
  if (flags.out !== undefined) spec.output = flags.out;
  if (flags.title !== undefined) spec.title = flags.title;
  if (flags.xScale !== undefined) spec.xScale = flags.xScale;
  if (flags.yScale !== undefined) spec.yScale = flags.yScale;
  return spec;
}

async function main(): Promise<void> {
  const spec = specFromArgv(process.argv.slice(2));
  const res = renderSpec(spec);
  for (const w of res.warnings) console.error(`warning: ${w}`);
  for (const line of res.printed) console.log(line);
  console.log(`wrote ${res.output}`);
}

main().catch((err: unknown) => {
  const msg = err instanceof Error ? err.message : String(err);
  console.error(`Fatal: ${msg}`);
  process.exit(1);
});
