/**
 * Software rasterizer for log-scale curve plots.
 *
 * Draws straight into a pngjs RGBA buffer: no canvas binding, no font
 * files, so the output for a given input is byte-identical everywhere.
 * The y axis is log10 with values clamped at a configurable floor
 * (curl errors of the exactly constraint-preserving scheme are at
 * rounding level and would otherwise hit log(0)).
 */

import { PNG } from "pngjs";
import { Curve } from "./csv.js";
import { GLYPH_H, GLYPH_W, glyphColumns, textWidth } from "./font.js";

export type RGB = readonly [number, number, number];

export interface RenderOptions {
  width?: number;
  height?: number;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  floor?: number;
}

export const PALETTE: RGB[] = [
  [31, 119, 180],   // blue
  [214, 39, 40],    // red
  [44, 160, 44],    // green
  [255, 127, 14],   // orange
  [148, 103, 189],  // purple
  [140, 86, 75],    // brown
];

const MARGIN = { left: 84, right: 24, top: 30, bottom: 46 } as const;
const BG: RGB = [255, 255, 255];
const FRAME: RGB = [64, 64, 64];
const GRID: RGB = [220, 220, 220];
const TEXT: RGB = [32, 32, 32];

export interface Scales {
  xmin: number;
  xmax: number;
  declo: number;
  dechi: number;
  px(t: number): number;
  py(y: number): number;
}

/** Shared by the renderer and the tests that probe pixel positions. */
export function makeScales(curves: Curve[], width: number, height: number,
                           floor: number): Scales {
  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const c of curves) {
    for (const t of c.t) {
      if (t < xmin) xmin = t;
      if (t > xmax) xmax = t;
    }
    for (const raw of c.y) {
      const y = Math.max(raw, floor);
      if (y < ymin) ymin = y;
      if (y > ymax) ymax = y;
    }
  }
  if (xmax === xmin) { xmin -= 0.5; xmax += 0.5; }
  let declo = Math.floor(Math.log10(ymin));
  let dechi = Math.ceil(Math.log10(ymax));
  if (dechi <= declo) dechi = declo + 1;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  return {
    xmin, xmax, declo, dechi,
    px: (t) => MARGIN.left + ((t - xmin) / (xmax - xmin)) * plotW,
    py: (y) => MARGIN.top + (1 - (Math.log10(Math.max(y, floor)) - declo)
                                  / (dechi - declo)) * plotH,
  };
}

function linearTicks(lo: number, hi: number, target = 6): number[] {
  const raw = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = mag * (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10);
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return ticks;
}

function formatLinear(v: number, ticks: number[]): string {
  const step = ticks.length > 1 ? ticks[1] - ticks[0] : Math.abs(v) || 1;
  const decimals = Math.max(0, -Math.floor(Math.log10(step) + 1e-9));
  return v.toFixed(Math.min(decimals, 12));
}

class Raster {
  readonly png: PNG;

  constructor(readonly width: number, readonly height: number) {
    this.png = new PNG({ width, height });
    this.png.data.fill(255);
  }

  set(x: number, y: number, [r, g, b]: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) << 2;
    this.png.data[i] = r;
    this.png.data[i + 1] = g;
    this.png.data[i + 2] = b;
    this.png.data[i + 3] = 255;
  }

  hline(x0: number, x1: number, y: number, c: RGB): void {
    for (let x = Math.min(x0, x1); x <= Math.max(x0, x1); x++) this.set(x, y, c);
  }

  vline(x: number, y0: number, y1: number, c: RGB): void {
    for (let y = Math.min(y0, y1); y <= Math.max(y0, y1); y++) this.set(x, y, c);
  }

  fill(x0: number, y0: number, w: number, h: number, c: RGB): void {
    for (let y = y0; y < y0 + h; y++) this.hline(x0, x0 + w - 1, y, c);
  }

  /** Bresenham segment stamped as a 2x2 block for a visible stroke. */
  line(x0: number, y0: number, x1: number, y1: number, c: RGB): void {
    let ax = Math.round(x0), ay = Math.round(y0);
    const bx = Math.round(x1), by = Math.round(y1);
    const dx = Math.abs(bx - ax), sx = ax < bx ? 1 : -1;
    const dy = -Math.abs(by - ay), sy = ay < by ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(ax, ay, c);
      this.set(ax + 1, ay, c);
      this.set(ax, ay + 1, c);
      this.set(ax + 1, ay + 1, c);
      if (ax === bx && ay === by) break;
      const e2 = 2 * err;
      if (e2 >= dy) { err += dy; ax += sx; }
      if (e2 <= dx) { err += dx; ay += sy; }
    }
  }

  text(x: number, y: number, s: string, c: RGB, scale = 1): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of s) {
      const cols = glyphColumns(ch);
      for (let i = 0; i < GLYPH_W; i++) {
        for (let j = 0; j < GLYPH_H; j++) {
          if ((cols[i] >> j) & 1) {
            this.fill(cx + i * scale, cy + j * scale, scale, scale, c);
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }
}

function decadeLabel(d: number): string {
  return d === 0 ? "1" : `1e${d}`;
}

export function renderCurves(curves: Curve[], options: RenderOptions = {}): PNG {
  if (curves.length === 0) throw new Error("nothing to plot");
  if (curves.length > PALETTE.length) {
    throw new Error(`at most ${PALETTE.length} curves per figure, ` +
      `got ${curves.length}`);
  }
  const width = options.width ?? 900;
  const height = options.height ?? 600;
  const floor = options.floor ?? 1e-16;
  const { left, right, top, bottom } = MARGIN;
  if (width < left + right + 80 || height < top + bottom + 60) {
    throw new Error(`canvas ${width}x${height} is too small to plot into`);
  }
  const sc = makeScales(curves, width, height, floor);
  const r = new Raster(width, height);
  const x0 = left, x1 = width - right;
  const y0 = top, y1 = height - bottom;

  // grid and tick labels
  const stride = Math.max(1, Math.ceil((sc.dechi - sc.declo) / 8));
  for (let d = sc.declo; d <= sc.dechi; d++) {
    const y = Math.round(sc.py(Math.pow(10, d)));
    if ((d - sc.declo) % stride !== 0 && d !== sc.dechi) continue;
    if (y > y0 && y < y1) r.hline(x0 + 1, x1 - 1, y, GRID);
    r.hline(x0 - 4, x0 - 1, y, FRAME);
    const label = decadeLabel(d);
    r.text(x0 - 7 - textWidth(label), y - 3, label, TEXT);
  }
  const xticks = linearTicks(sc.xmin, sc.xmax);
  for (const v of xticks) {
    const x = Math.round(sc.px(v));
    if (x > x0 && x < x1) r.vline(x, y0 + 1, y1 - 1, GRID);
    r.vline(x, y1 + 1, y1 + 4, FRAME);
    const label = formatLinear(v, xticks);
    r.text(x - textWidth(label) / 2, y1 + 8, label, TEXT);
  }

  // frame
  r.hline(x0, x1, y0, FRAME);
  r.hline(x0, x1, y1, FRAME);
  r.vline(x0, y0, y1, FRAME);
  r.vline(x1, y0, y1, FRAME);

  // curves
  curves.forEach((c, k) => {
    const color = PALETTE[k];
    for (let i = 1; i < c.t.length; i++) {
      r.line(sc.px(c.t[i - 1]), sc.py(c.y[i - 1]),
             sc.px(c.t[i]), sc.py(c.y[i]), color);
    }
  });

  // legend (upper right, inside the frame)
  const rowH = GLYPH_H + 5;
  const maxLabel = Math.max(...curves.map((c) => textWidth(c.label)));
  const legW = 6 + 14 + 4 + maxLabel + 6;
  const legH = 6 + curves.length * rowH - 5 + 6;
  const lx = x1 - 10 - legW;
  const ly = y0 + 10;
  r.fill(lx, ly, legW, legH, BG);
  r.hline(lx, lx + legW - 1, ly, FRAME);
  r.hline(lx, lx + legW - 1, ly + legH - 1, FRAME);
  r.vline(lx, ly, ly + legH - 1, FRAME);
  r.vline(lx + legW - 1, ly, ly + legH - 1, FRAME);
  curves.forEach((c, k) => {
    const yy = ly + 6 + k * rowH;
    r.fill(lx + 6, yy + 2, 14, 2, PALETTE[k]);
    r.text(lx + 6 + 14 + 4, yy, c.label, TEXT);
  });

  // titles
  if (options.title) {
    r.text((width - textWidth(options.title)) / 2, 8, options.title, TEXT);
  }
  r.text(x0, y0 - 12, options.yLabel ?? "", TEXT);
  const xl = options.xLabel ?? "";
  if (xl) r.text((x0 + x1 - textWidth(xl)) / 2, height - 13, xl, TEXT);

  return r.png;
}

export function encodePng(png: PNG): Buffer {
  return PNG.sync.write(png);
}
