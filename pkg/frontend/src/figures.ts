/** One renderer per figure kind; all consume serialized artifacts only. */

import {
  ArtifactError,
  column,
  concentrationSchema,
  lstarSchema,
  readCsv,
  readJson,
  sweepSchema,
  symmetrySchema,
} from "./artifacts.js";
import { DEFAULT_BOX, SvgDoc, fmt, linearScale, logScale, plotArea, viridis } from "./svg.js";

export interface FigureSpec {
  kind: string;
  inputs: Record<string, string>;
  output: string;
  title?: string;
}

function need(spec: FigureSpec, key: string): string {
  const v = spec.inputs[key];
  if (!v) throw new ArtifactError(`figure kind "${spec.kind}" needs inputs.${key}`);
  return v;
}

interface GridData {
  xs: number[];
  ys: number[];
  values: Map<string, number>;
}

function gridFromCsv(path: string, xcol: string, ycol: string, vcol: string): GridData {
  const table = readCsv(path, [xcol, ycol, vcol]);
  const xs = [...new Set(column(table, xcol))].sort((a, b) => a - b);
  const ys = [...new Set(column(table, ycol))].sort((a, b) => a - b);
  const values = new Map<string, number>();
  for (const row of table.rows) {
    values.set(`${row[xcol]}|${row[ycol]}`, row[vcol] as number);
  }
  return { xs, ys, values };
}

function heatmap(doc: SvgDoc, data: GridData, title: string, xlabel: string, ylabel: string): void {
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(data.xs[0], data.xs[data.xs.length - 1], x0, x1);
  const ys = linearScale(data.ys[0], data.ys[data.ys.length - 1], y0, y1);
  let vmax = -Infinity;
  let vmin = Infinity;
  for (const v of data.values.values()) {
    vmax = Math.max(vmax, v);
    vmin = Math.min(vmin, v);
  }
  if (!(vmax > vmin)) vmax = vmin + 1;
  const cw = (x1 - x0) / data.xs.length;
  const ch = (y0 - y1) / data.ys.length;
  for (let i = 0; i < data.xs.length; i += 1) {
    for (let j = 0; j < data.ys.length; j += 1) {
      const v = data.values.get(`${data.xs[i]}|${data.ys[j]}`);
      if (v === undefined) continue;
      const t = (v - vmin) / (vmax - vmin);
      doc.rect(xs(data.xs[i]) - cw / 2, ys(data.ys[j]) - ch / 2, cw + 0.5, ch + 0.5, viridis(t));
    }
  }
  doc.axes(xs, ys, xlabel, ylabel, title);
  // compact colorbar
  const bx = x1 + 6;
  for (let k = 0; k < 40; k += 1) {
    doc.rect(bx, y0 - ((k + 1) * (y0 - y1)) / 40, 8, (y0 - y1) / 40 + 0.5, viridis(k / 39));
  }
  doc.text(bx + 4, y1 - 6, fmt(vmax), { size: 9 });
  doc.text(bx + 4, y0 + 12, fmt(vmin), { size: 9 });
}

function renderFrontHeatmap(spec: FigureSpec): string {
  const data = gridFromCsv(need(spec, "front_csv"), "x1", "y", "U");
  const doc = new SvgDoc({ ...DEFAULT_BOX, right: 64 });
  heatmap(doc, data, spec.title ?? "Front profile U(x1, y)", "x1", "y");
  return doc.finish();
}

function midRow(data: GridData): { x: number[]; u: number[] } {
  const j = data.ys[Math.floor(data.ys.length / 2)];
  const x: number[] = [];
  const u: number[] = [];
  for (const xv of data.xs) {
    const v = data.values.get(`${xv}|${j}`);
    if (v !== undefined) {
      x.push(xv);
      u.push(v);
    }
  }
  return { x, u };
}

function renderFrontProfile(spec: FigureSpec): string {
  const data = gridFromCsv(need(spec, "front_csv"), "x1", "y", "U");
  const { x, u } = midRow(data);
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(x[0], x[x.length - 1], x0, x1);
  const ys = linearScale(0, Math.max(...u) * 1.05 || 1, y0, y1);
  doc.axes(xs, ys, "x1", "U at mid-height", spec.title ?? "Front mid-height profile");
  doc.path(x.map((xv, i) => [xs(xv), ys(u[i])] as [number, number]), "#1f77b4", 2);
  return doc.finish();
}

function renderDecayFit(spec: FigureSpec): string {
  const data = gridFromCsv(need(spec, "front_csv"), "x1", "y", "U");
  const summary = readJson(need(spec, "symmetry_json"), symmetrySchema, "symmetry");
  const { x, u } = midRow(data);
  const pos = x.map((xv, i) => [xv, u[i]] as [number, number]).filter(([, v]) => v > 0);
  const umax = Math.max(...pos.map(([, v]) => v));
  const floor = umax * 1e-14;
  const pts = pos.filter(([, v]) => v > floor);
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(pts[0][0], pts[pts.length - 1][0], x0, x1);
  const ys = logScale(Math.min(...pts.map(([, v]) => v)), umax * 1.5, y0, y1);
  doc.axes(xs, ys, "x1", "U (log scale)", spec.title ?? "Tail decay and fitted exponents");
  doc.path(pts.map(([xv, v]) => [xs(xv), ys(v)] as [number, number]), "#1f77b4", 2, "profile");

  const anchorIdx = pts.reduce((best, p, i) => (p[1] > pts[best][1] ? i : best), 0);
  const [xa, ua] = pts[anchorIdx];
  const drawSlope = (rate: number, side: 1 | -1, color: string, dash: string, cls: string) => {
    const xEnd = side > 0 ? pts[pts.length - 1][0] : pts[0][0];
    const seg: [number, number][] = [];
    const steps = 32;
    for (let k = 0; k <= steps; k += 1) {
      const xv = xa + ((xEnd - xa) * k) / steps;
      const v = ua * Math.exp(-rate * Math.abs(xv - xa));
      if (v < ys.domain[0]) break;
      seg.push([xs(xv), ys(v)]);
    }
    doc.path(seg, color, 1.5, cls, dash);
  };
  drawSlope(summary.left_exponent, -1, "#d62728", "", "measured-left");
  drawSlope(summary.right_exponent, 1, "#d62728", "", "measured-right");
  drawSlope(summary.left_predicted, -1, "#2ca02c", "4 3", "predicted-left");
  drawSlope(summary.right_predicted, 1, "#2ca02c", "4 3", "predicted-right");
  doc.text(x1 - 8, y1 + 14, `measured L/R: ${fmt(summary.left_exponent)} / ${fmt(summary.right_exponent)}`, {
    anchor: "end", size: 11, fill: "#d62728",
  });
  doc.text(x1 - 8, y1 + 30, `predicted L/R: ${fmt(summary.left_predicted)} / ${fmt(summary.right_predicted)}`, {
    anchor: "end", size: 11, fill: "#2ca02c",
  });
  doc.text(x1 - 8, y1 + 46, `verdict: ${summary.verdict}`, { anchor: "end", size: 11 });
  return doc.finish();
}

function renderLambdaCurve(spec: FigureSpec): string {
  const summary = readJson(need(spec, "lstar_json"), lstarSchema, "lstar");
  const L = summary.lambda_L_table.map(([l]) => l);
  const lam = summary.lambda_L_table.map(([, v]) => v);
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(L[0], L[L.length - 1], x0, x1);
  const ys = linearScale(Math.min(...lam) * 1.05, Math.max(...lam) * 1.05, y0, y1);
  doc.axes(xs, ys, "plateau length L", "principal eigenvalue", spec.title ?? "Eigenvalue vs plateau length");
  doc.line(x0, ys(0), x1, ys(0), "#999", 1, "4 3");
  doc.path(L.map((l, i) => [xs(l), ys(lam[i])] as [number, number]), "#1f77b4", 2);
  for (let i = 0; i < L.length; i += 1) doc.circle(xs(L[i]), ys(lam[i]), 2.5, "#1f77b4");
  const lx = xs(summary.L_star_eigen);
  doc.line(lx, y0, lx, y1, "#d62728", 1.5, "6 3", "lstar-marker");
  doc.text(lx + 4, y1 + 14, `L* = ${fmt(summary.L_star_eigen)}`, { anchor: "start", size: 11, fill: "#d62728" });
  return doc.finish();
}

function renderPhaseC(spec: FigureSpec): string {
  const table = readCsv(need(spec, "phase_csv"), ["c", "lambda", "outcome"]);
  const summary = readJson(need(spec, "sweep_json"), sweepSchema, "sweep");
  const cs = column(table, "c");
  const lam = column(table, "lambda");
  const outcomes = table.rows.map((r) => String(r.outcome));
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(cs[0], cs[cs.length - 1], x0, x1);
  const ys = linearScale(Math.min(...lam) * 1.1, Math.max(...lam) * 1.1, y0, y1);
  doc.axes(xs, ys, "forced speed c", "principal eigenvalue", spec.title ?? "Persistence phase diagram in c");
  doc.line(x0, ys(0), x1, ys(0), "#999", 1, "4 3");
  doc.path(cs.map((c, i) => [xs(c), ys(lam[i])] as [number, number]), "#555", 1.5);
  const colors: Record<string, string> = {
    persistence: "#2ca02c",
    extinction: "#d62728",
    undecided: "#ff7f0e",
  };
  cs.forEach((c, i) => doc.circle(xs(c), ys(lam[i]), 4, colors[outcomes[i]] ?? "#333"));
  if (summary.c_star !== null) {
    const px = xs(summary.c_star);
    doc.line(px, y0, px, y1, "#1f77b4", 1.5, "6 3", "cstar-marker");
    doc.text(px + 4, y1 + 14, `c* = ${fmt(summary.c_star)}`, { anchor: "start", size: 11, fill: "#1f77b4" });
  }
  return doc.finish();
}

function renderPhaseCL(spec: FigureSpec): string {
  const summary = readJson(need(spec, "lstar_json"), lstarSchema, "lstar");
  const run_c = summary.c;
  const L = summary.lambda_L_table.map(([l]) => l);
  // lambda_L was computed at the run speed; undo the c^2/4 shift and map to c*(L)
  const cstar = summary.lambda_L_table.map(([, lam]) => {
    const lam0 = lam - (run_c * run_c) / 4;
    return lam0 < 0 ? 2 * Math.sqrt(-lam0) : 0;
  });
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(L[0], L[L.length - 1], x0, x1);
  const ys = linearScale(0, Math.max(...cstar, run_c) * 1.15 || 1, y0, y1);
  doc.axes(xs, ys, "plateau length L", "forced speed c", spec.title ?? "Persistence region over (c, L)");
  const region: [number, number][] = L.map((l, i) => [xs(l), ys(cstar[i])] as [number, number]);
  const poly = [`M${fmt(xs(L[0]))} ${fmt(y0)}`]
    .concat(region.map(([px, py]) => `L${fmt(px)} ${fmt(py)}`))
    .concat([`L${fmt(xs(L[L.length - 1]))} ${fmt(y0)} Z`])
    .join(" ");
  doc.raw(`<path d="${poly}" fill="#2ca02c" fill-opacity="0.18" stroke="none"/>`);
  doc.path(region, "#2ca02c", 2, "cstar-boundary");
  doc.line(x0, ys(run_c), x1, ys(run_c), "#1f77b4", 1.5, "6 3");
  doc.text(x1 - 6, ys(run_c) - 6, `run speed c = ${fmt(run_c)}`, { anchor: "end", size: 11, fill: "#1f77b4" });
  doc.text(x0 + 10, y1 + 16, "persistence below the boundary", { anchor: "start", size: 11, fill: "#2ca02c" });
  return doc.finish();
}

function renderConcentration(spec: FigureSpec): string {
  const table = readCsv(need(spec, "concentration_csv"),
    ["n", "lambda_n", "sup_exterior", "dist_to_dirichlet_front"]);
  const summary = readJson(need(spec, "concentration_json"), concentrationSchema, "concentration");
  const n = column(table, "n");
  const sup = column(table, "sup_exterior");
  const dist = column(table, "dist_to_dirichlet_front");
  const lam = column(table, "lambda_n");
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(n[0], n[n.length - 1], x0, x1);
  const vals = sup.concat(dist).filter((v) => v > 0);
  const ys = logScale(Math.min(...vals), Math.max(...vals) * 2, y0, y1);
  doc.axes(xs, ys, "penalization index n", "sup norms (log scale)",
    spec.title ?? "Concentration under exterior penalization");
  doc.path(n.map((v, i) => [xs(v), ys(Math.max(sup[i], ys.domain[0]))] as [number, number]), "#d62728", 2, "exterior-sup");
  doc.path(n.map((v, i) => [xs(v), ys(Math.max(dist[i], ys.domain[0]))] as [number, number]), "#1f77b4", 2, "strip-distance");
  doc.text(x1 - 8, y1 + 14, "exterior sup", { anchor: "end", size: 11, fill: "#d62728" });
  doc.text(x1 - 8, y1 + 30, "distance to Dirichlet front", { anchor: "end", size: 11, fill: "#1f77b4" });
  const gap = lam.map((v) => summary.lambda_d - v);
  doc.text(x1 - 8, y1 + 46, `lambda gap: ${fmt(gap[0])} down to ${fmt(gap[gap.length - 1])}`, {
    anchor: "end", size: 11,
  });
  return doc.finish();
}

function renderSpacetime(spec: FigureSpec): string {
  const data = gridFromCsv(need(spec, "spacetime_csv"), "x1", "t", "u");
  const doc = new SvgDoc({ ...DEFAULT_BOX, right: 64 });
  heatmap(doc, data, spec.title ?? "Pulsating front, one period", "x1", "t");
  return doc.finish();
}

function renderTrajectory(spec: FigureSpec): string {
  const table = readCsv(need(spec, "trajectory_csv"), ["t", "sup_norm", "l1_norm"]);
  const t = column(table, "t");
  const sup = column(table, "sup_norm");
  const l1 = column(table, "l1_norm");
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea(doc.box);
  const xs = linearScale(t[0], t[t.length - 1], x0, x1);
  const pos = sup.concat(l1).filter((v) => v > 0);
  const lo = Math.max(Math.min(...pos), 1e-18);
  const ys = logScale(lo, Math.max(...pos) * 2, y0, y1);
  doc.axes(xs, ys, "time", "norms (log scale)", spec.title ?? "Evolution diagnostics");
  const clip = (v: number) => Math.max(v, lo);
  doc.path(t.map((tv, i) => [xs(tv), ys(clip(sup[i]))] as [number, number]), "#1f77b4", 2, "sup-norm");
  doc.path(t.map((tv, i) => [xs(tv), ys(clip(l1[i]))] as [number, number]), "#ff7f0e", 2, "l1-norm");
  doc.text(x1 - 8, y1 + 14, "sup norm", { anchor: "end", size: 11, fill: "#1f77b4" });
  doc.text(x1 - 8, y1 + 30, "L1 norm", { anchor: "end", size: 11, fill: "#ff7f0e" });
  return doc.finish();
}

export const RENDERERS: Record<string, (spec: FigureSpec) => string> = {
  front_heatmap: renderFrontHeatmap,
  front_profile: renderFrontProfile,
  decay_fit: renderDecayFit,
  lambda_curve: renderLambdaCurve,
  phase_c: renderPhaseC,
  phase_cL: renderPhaseCL,
  concentration: renderConcentration,
  pulsating_spacetime: renderSpacetime,
  trajectory: renderTrajectory,
};

export function renderFigure(spec: FigureSpec): string {
  const renderer = RENDERERS[spec.kind];
  if (!renderer) {
    throw new ArtifactError(
      `unknown figure kind "${spec.kind}" (known: ${Object.keys(RENDERERS).sort().join(", ")})`,
    );
  }
  return renderer(spec);
}
