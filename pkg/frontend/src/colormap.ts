/**
 * Map grid values to colors. Dispersion maps ("bigger is better") run
 * dark-to-bright directly; conditioning maps ("smaller is better") are
 * displayed on a log scale since interesting values span decades.
 */

import type { DopGridResponse } from "./types.js";

export interface ColorScale {
  lo: number;
  hi: number;
  log: boolean;
  /** normalized position in [0, 1] for a raw value */
  t(value: number): number;
  rgb(value: number): [number, number, number];
}

export function scaleForGrid(grid: DopGridResponse): ColorScale {
  const finite = grid.values.filter((v): v is number => v !== null && isFinite(v));
  const log = grid.kind === "linear-cond";
  let lo = finite.length ? Math.min(...finite) : 0;
  let hi = finite.length ? Math.max(...finite) : 1;
  if (log) {
    lo = Math.max(lo, 1e-12);
    hi = Math.max(hi, lo * (1 + 1e-9));
  } else if (hi <= lo) {
    hi = lo + 1;
  }
  const t = (value: number) => {
    let x: number;
    if (log) {
      const v = Math.max(value, lo);
      x = (Math.log(v) - Math.log(lo)) / (Math.log(hi) - Math.log(lo));
    } else {
      x = (value - lo) / (hi - lo);
    }
    return Math.min(1, Math.max(0, x));
  };
  return {
    lo,
    hi,
    log,
    t,
    rgb(value: number) {
      return viridis(t(value));
    },
  };
}

/** small fixed-stop approximation of the usual perceptual ramp */
export function viridis(t: number): [number, number, number] {
  const stops: [number, number, number][] = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
  ];
  const x = Math.min(1, Math.max(0, t)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(x));
  const f = x - i;
  const a = stops[i];
  const b = stops[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export interface LegendTick {
  value: number;
  t: number;
}

export function legendTicks(scale: ColorScale, count = 5): LegendTick[] {
  const out: LegendTick[] = [];
  for (let i = 0; i < count; i++) {
    const t = i / (count - 1);
    const value = scale.log
      ? Math.exp(Math.log(scale.lo) + t * (Math.log(scale.hi) - Math.log(scale.lo)))
      : scale.lo + t * (scale.hi - scale.lo);
    out.push({ value, t });
  }
  return out;
}
