/**
 * Session <-> URL query round trip so layouts are shareable: reloading a
 * copied link reproduces the session exactly.
 *
 * Format: a=x1,y1;x2,y2;... k=kind c=central bb=xmin,xmax,ymin,ymax
 * r=nx,ny s=sigma t=0|1 seed=n  -- numbers in full precision.
 */

import type { SessionState } from "./state.js";
import { defaultSession } from "./state.js";
import type { MapKind } from "./types.js";

export function sessionToQuery(s: SessionState): string {
  const params = new URLSearchParams();
  params.set("a", s.anchors.map((p) => `${p.x},${p.y}`).join(";"));
  params.set("k", s.kind);
  if (s.central !== null) params.set("c", String(s.central));
  params.set(
    "bb",
    [s.bounds.x_min, s.bounds.x_max, s.bounds.y_min, s.bounds.y_max].join(","),
  );
  params.set("r", `${s.res.nx},${s.res.ny}`);
  params.set("s", String(s.sigma));
  params.set("t", s.trackEnabled ? "1" : "0");
  params.set("seed", String(s.seed));
  return params.toString();
}

export function sessionFromQuery(query: string): SessionState {
  const params = new URLSearchParams(query);
  const out = defaultSession();
  const a = params.get("a");
  if (a) {
    const anchors = a
      .split(";")
      .filter((chunk) => chunk.length > 0)
      .map((chunk, i) => {
        const [x, y] = chunk.split(",").map(Number);
        return { x, y, label: String(i + 1) };
      });
    if (anchors.every((p) => Number.isFinite(p.x) && Number.isFinite(p.y))) {
      out.anchors = anchors;
    }
  }
  const k = params.get("k");
  if (k === "linear-cond" || k === "nonlinear-kappa") out.kind = k as MapKind;
  const c = params.get("c");
  out.central = c !== null && c !== "" ? Number(c) : null;
  if (out.central !== null && !Number.isInteger(out.central)) out.central = null;
  const bb = params.get("bb");
  if (bb) {
    const [x_min, x_max, y_min, y_max] = bb.split(",").map(Number);
    if ([x_min, x_max, y_min, y_max].every(Number.isFinite) && x_min < x_max && y_min < y_max) {
      out.bounds = { x_min, x_max, y_min, y_max };
    }
  }
  const r = params.get("r");
  if (r) {
    const [nx, ny] = r.split(",").map(Number);
    if (Number.isInteger(nx) && Number.isInteger(ny) && nx > 0 && ny > 0) {
      out.res = { nx, ny };
    }
  }
  const s = params.get("s");
  if (s !== null && Number.isFinite(Number(s)) && Number(s) >= 0) out.sigma = Number(s);
  out.trackEnabled = params.get("t") === "1";
  const seed = params.get("seed");
  if (seed !== null && Number.isInteger(Number(seed))) out.seed = Number(seed);
  return out;
}
