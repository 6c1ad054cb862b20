import { describe, expect, it } from "vitest";

import { cellIndexAt, formatValue, probe, PROBE_DIGITS } from "../src/probe.js";
import type { DopGridResponse } from "../src/types.js";

function grid3x2(): DopGridResponse {
  // values are row-major over x then y: [ix*ny + iy]
  return {
    v: 1,
    request_hash: "x".repeat(64),
    bounds: { x_min: 0, x_max: 3, y_min: 0, y_max: 2 },
    nx: 3,
    ny: 2,
    kind: "nonlinear-kappa",
    central: null,
    values: [1.1111111, 2.2222222, 3.3333333, null, 5.5555555, 2.8284271247461903],
    mask: [false, false, false, true, false, false],
  };
}

describe("cursor probe", () => {
  it("indexes the cell under a world coordinate", () => {
    const g = grid3x2();
    expect(cellIndexAt(g, 0.4, 0.6)).toEqual({ ix: 0, iy: 0 });
    expect(cellIndexAt(g, 2.9, 1.9)).toEqual({ ix: 2, iy: 1 });
    expect(cellIndexAt(g, 1.5, 0.5)).toEqual({ ix: 1, iy: 0 });
    expect(cellIndexAt(g, -1, 0.5)).toBeNull();
    expect(cellIndexAt(g, 0.5, 99)).toBeNull();
  });

  it("returns exactly the service value for the cell", () => {
    const g = grid3x2();
    const r = probe(g, 2.5, 1.5)!;
    expect(r.value).toBe(2.8284271247461903); // untouched service number
    expect(r.masked).toBe(false);
  });

  it("displays the service value at the displayed precision", () => {
    const g = grid3x2();
    const r = probe(g, 2.5, 1.5)!;
    // what the UI shows is the service value formatted, nothing recomputed
    expect(r.text).toBe((2.8284271247461903).toPrecision(PROBE_DIGITS));
    expect(r.text).toBe("2.82843");
  });

  it("reports masked cells as masked", () => {
    const g = grid3x2();
    const r = probe(g, 1.5, 1.5)!;
    expect(r.masked).toBe(true);
    expect(r.text).toBe("masked");
  });

  it("formats null as masked", () => {
    expect(formatValue(null)).toBe("masked");
  });
});
