/**
 * Cursor probe: report the value under a world coordinate, read straight
 * from the last service grid. Nothing is recomputed client-side; the
 * probe merely indexes and formats what the service sent, so the number
 * shown always equals the service value at the displayed precision.
 */

import type { DopGridResponse } from "./types.js";

export const PROBE_DIGITS = 6;

export interface ProbeResult {
  ix: number;
  iy: number;
  value: number | null;
  masked: boolean;
  /** what the UI displays */
  text: string;
}

export function cellIndexAt(
  grid: DopGridResponse,
  x: number,
  y: number,
): { ix: number; iy: number } | null {
  const { x_min, x_max, y_min, y_max } = grid.bounds;
  if (x < x_min || x > x_max || y < y_min || y > y_max) return null;
  const ix = Math.min(
    grid.nx - 1,
    Math.floor(((x - x_min) / (x_max - x_min)) * grid.nx),
  );
  const iy = Math.min(
    grid.ny - 1,
    Math.floor(((y - y_min) / (y_max - y_min)) * grid.ny),
  );
  return { ix, iy };
}

export function formatValue(value: number | null): string {
  if (value === null) return "masked";
  return value.toPrecision(PROBE_DIGITS);
}

export function probe(grid: DopGridResponse, x: number, y: number): ProbeResult | null {
  const cell = cellIndexAt(grid, x, y);
  if (!cell) return null;
  const flat = cell.ix * grid.ny + cell.iy; // row-major over x then y
  const value = grid.values[flat];
  const masked = grid.mask[flat];
  return {
    ix: cell.ix,
    iy: cell.iy,
    value,
    masked,
    text: masked ? "masked" : formatValue(value),
  };
}
