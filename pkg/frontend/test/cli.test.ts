import assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

const CLI = fileURLToPath(new URL("../src/cli.js", import.meta.url));
const GOLDEN = fileURLToPath(new URL("../../golden/", import.meta.url));
const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "plots-cli-"));

function run(args: string[], cwd?: string) {
  const r = spawnSync(process.execPath, [CLI, ...args], {
    cwd: cwd ?? tmp,
    encoding: "utf8",
  });
  return { status: r.status, stdout: r.stdout, stderr: r.stderr };
}

test("render with positional input and --kind", () => {
  const out = path.join(tmp, "rates.svg");
  const r = run(["render", path.join(GOLDEN, "table_temporal.csv"), "--kind", "rates", "--out", out]);
  assert.equal(r.status, 0, r.stderr);
  assert.match(r.stdout, /fitted slope \[eps = 0\.5\] = 2\.0\d+ \(mean tabulated rate 2\.000\)/);
  assert.match(r.stdout, /fitted slope \[max over eps\] = 1\.0\d+/);
  assert.match(r.stdout, new RegExp(`wrote ${out.replace(/[.*+?^${}()|[\]\\]/g, "\\$&")}`));
  assert.ok(fs.existsSync(out));
});

test("default output is the input basename with .svg", () => {
  const cwd = fs.mkdtempSync(path.join(os.tmpdir(), "plots-cwd-"));
  const r = run(["render", path.join(GOLDEN, "limits_zero.csv"), "--kind", "timeseries", "--y-scale", "log"], cwd);
  assert.equal(r.status, 0, r.stderr);
  assert.ok(fs.existsSync(path.join(cwd, "limits_zero.svg")));
});

test("spec-file mode resolves paths relative to the spec file", () => {
  const specDir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-spec-"));
  fs.copyFileSync(path.join(GOLDEN, "dyn2d_eps1_t0.csv"), path.join(specDir, "snap.csv"));
  fs.writeFileSync(
    path.join(specDir, "fig.json"),
    JSON.stringify({
      input: "snap.csv",
      kind: "heatmap",
      output: "figs/snap.png",
      title: "initial field",
    }),
  );
  const r = run(["render", "--spec", path.join(specDir, "fig.json")]);
  assert.equal(r.status, 0, r.stderr);
  const png = fs.readFileSync(path.join(specDir, "figs", "snap.png"));
  assert.ok(png.subarray(0, 8).equals(Buffer.from([137, 80, 78, 71, 13, 10, 26, 10])));
});

test("empty input exits 0 and still writes a figure", () => {
  const empty = path.join(tmp, "empty.csv");
  fs.writeFileSync(empty, "eps,t,e_sw,e_we\n");
  const out = path.join(tmp, "empty.svg");
  const r = run(["render", empty, "--kind", "timeseries", "--out", out]);
  assert.equal(r.status, 0, r.stderr);
  assert.match(fs.readFileSync(out, "utf8"), /no data rows in input/);
});

test("schema mismatch exits nonzero and lists the missing columns", () => {
  const bad = path.join(tmp, "bad.csv");
  fs.writeFileSync(bad, "eps,tau\n0.5,0.1\n");
  const r = run(["render", bad, "--kind", "rates", "--out", path.join(tmp, "bad.svg")]);
  assert.notEqual(r.status, 0);
  assert.match(r.stderr, /missing columns: h, e_h1/);
});

test("unknown kind and missing flags are usage errors", () => {
  const input = path.join(GOLDEN, "table_temporal.csv");
  const r1 = run(["render", input, "--kind", "pie"]);
  assert.notEqual(r1.status, 0);
  assert.match(r1.stderr, /unknown figure kind "pie"/);
  const r2 = run(["render", input]);
  assert.notEqual(r2.status, 0);
  assert.match(r2.stderr, /--kind is required/);
  const r3 = run(["plot", input]);
  assert.notEqual(r3.status, 0);
  assert.match(r3.stderr, /"render" subcommand/);
});

test("warnings about ignored columns go to stderr, not the figure", () => {
  const extra = path.join(tmp, "extra.csv");
  fs.writeFileSync(
    extra,
    "eps,h,tau,e_h1,bogus,rate\n0.5,1,0.2,1e-2,42,\n0.5,1,0.05,1e-3,42,1.66\n",
  );
  const out = path.join(tmp, "extra.svg");
  const r = run(["render", extra, "--kind", "rates", "--out", out]);
  assert.equal(r.status, 0, r.stderr);
  assert.match(r.stderr, /ignoring unknown columns: bogus/);
  assert.doesNotMatch(fs.readFileSync(out, "utf8"), /bogus/);
});

test("re-running the CLI reproduces the output byte for byte", () => {
  const out1 = path.join(tmp, "stable1.svg");
  const out2 = path.join(tmp, "stable2.svg");
  const input = path.join(GOLDEN, "table_temporal.csv");
  assert.equal(run(["render", input, "--kind", "rates", "--out", out1]).status, 0);
  assert.equal(run(["render", input, "--kind", "rates", "--out", out2]).status, 0);
  assert.ok(fs.readFileSync(out1).equals(fs.readFileSync(out2)));
});
