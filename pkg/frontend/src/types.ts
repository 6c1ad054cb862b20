/** Wire types mirroring the compute service's /v1 JSON bodies. */

export interface Anchor {
  x: number;
  y: number;
  label?: string;
}

export interface Bounds {
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
}

export type MapKind = "linear-cond" | "nonlinear-kappa";

export interface DopGridResponse {
  v: number;
  request_hash: string;
  bounds: Bounds;
  nx: number;
  ny: number;
  kind: MapKind;
  central: number | null;
  /** row-major over x then y; null marks a masked (degenerate) cell */
  values: (number | null)[];
  mask: boolean[];
}

export interface TrackFixJson {
  time_index: number;
  x: number;
  y: number;
  cov: number[][];
  innovation_norm: number | null;
  quality: number;
}

export interface SimulateTrackResponse {
  v: number;
  request_hash: string;
  trajectory: { fixes: TrackFixJson[] };
  rmse: number;
  failures: number;
}

export interface DopMapRequest {
  anchors: Anchor[];
  kind: MapKind;
  central?: number | null;
  symmetric?: boolean;
  bounds: Bounds;
  res: { nx: number; ny: number };
}
