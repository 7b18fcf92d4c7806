/** Deterministic SVG building blocks: fixed number formatting, no timestamps. */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toPrecision(8);
  return String(Number(s));
}

export interface Box {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_BOX: Box = { width: 720, height: 480, left: 72, right: 24, top: 40, bottom: 52 };

export interface Scale {
  (v: number): number;
  domain: [number, number];
  ticks: number[];
  log: boolean;
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) ticks.push(Number(v.toPrecision(10)));
  return ticks;
}

export function linearScale(lo: number, hi: number, rangeLo: number, rangeHi: number): Scale {
  if (hi === lo) {
    hi = lo + 1;
  }
  const f = ((v: number) => rangeLo + ((v - lo) / (hi - lo)) * (rangeHi - rangeLo)) as Scale;
  f.domain = [lo, hi];
  f.ticks = niceTicks(lo, hi);
  f.log = false;
  return f;
}

export function logScale(lo: number, hi: number, rangeLo: number, rangeHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const f = ((v: number) => rangeLo + ((Math.log10(v) - llo) / (lhi - llo)) * (rangeHi - rangeLo)) as Scale;
  f.domain = [lo, hi];
  const ticks: number[] = [];
  for (let e = Math.ceil(llo); e <= Math.floor(lhi); e += 1) ticks.push(Math.pow(10, e));
  f.ticks = ticks.length >= 2 ? ticks : [lo, hi];
  f.log = true;
  return f;
}

/** Nine-stop viridis approximation, linearly interpolated. */
const VIRIDIS: [number, number, number][] = [
  [68, 1, 84], [72, 40, 120], [62, 74, 137], [49, 104, 142], [38, 130, 142],
  [31, 158, 137], [53, 183, 121], [109, 205, 89], [253, 231, 37],
];

export function viridis(t: number): string {
  const u = Math.min(1, Math.max(0, t)) * (VIRIDIS.length - 1);
  const i = Math.min(VIRIDIS.length - 2, Math.floor(u));
  const w = u - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * w);
  const [r1, g1, b1] = VIRIDIS[i];
  const [r2, g2, b2] = VIRIDIS[i + 1];
  return `rgb(${mix(r1, r2)},${mix(g1, g2)},${mix(b1, b2)})`;
}

export class SvgDoc {
  private parts: string[] = [];
  constructor(public box: Box = DEFAULT_BOX) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${box.width}" height="${box.height}" ` +
        `viewBox="0 0 ${box.width} ${box.height}" font-family="Helvetica, Arial, sans-serif">`,
    );
    this.parts.push(`<rect width="${box.width}" height="${box.height}" fill="white"/>`);
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = "", cls = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    const c = cls ? ` class="${cls}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}${c}/>`,
    );
  }

  path(points: [number, number][], stroke: string, width = 1.5, cls = "", dash = ""): void {
    if (points.length === 0) return;
    const d = points.map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)} ${fmt(y)}`).join(" ");
    const c = cls ? ` class="${cls}"` : "";
    const da = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(`<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${c}${da}/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, opts: { anchor?: string; size?: number; fill?: string; rotate?: boolean } = {}): void {
    const anchor = opts.anchor ?? "middle";
    const size = opts.size ?? 12;
    const fill = opts.fill ?? "#222";
    const transform = opts.rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}" fill="${fill}"${transform}>${escapeXml(s)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xlabel: string, ylabel: string, title: string): void {
    const b = this.box;
    const x0 = b.left;
    const x1 = b.width - b.right;
    const y0 = b.height - b.bottom;
    const y1 = b.top;
    this.line(x0, y0, x1, y0, "#222");
    this.line(x0, y0, x0, y1, "#222");
    for (const t of xs.ticks) {
      const px = xs(t);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      this.line(px, y0, px, y0 + 5, "#222");
      this.text(px, y0 + 18, xs.log ? `1e${Math.round(Math.log10(t))}` : tickLabel(t));
    }
    for (const t of ys.ticks) {
      const py = ys(t);
      if (py > y0 + 0.5 || py < y1 - 0.5) continue;
      this.line(x0 - 5, py, x0, py, "#222");
      this.text(x0 - 8, py + 4, ys.log ? `1e${Math.round(Math.log10(t))}` : tickLabel(t), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, b.height - 14, xlabel);
    this.text(18, (y0 + y1) / 2, ylabel, { rotate: true });
    this.text((x0 + x1) / 2, 22, title, { size: 14 });
  }

  finish(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function tickLabel(t: number): string {
  const a = Math.abs(t);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) return t.toExponential(1);
  return String(Number(t.toPrecision(6)));
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function plotArea(box: Box): { x0: number; x1: number; y0: number; y1: number } {
  return { x0: box.left, x1: box.width - box.right, y0: box.height - box.bottom, y1: box.top };
}
