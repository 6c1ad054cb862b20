/**
 * Planner session state. The store holds everything the view needs; the
 * view is a pure function of (session, last responses). Mutations go
 * through methods that notify subscribers, so rendering and recompute
 * scheduling stay decoupled.
 */

import type { Anchor, Bounds, DopGridResponse, MapKind } from "./types.js";

export interface Snapshot {
  name: string;
  anchors: Anchor[];
  kind: MapKind;
  central: number | null;
  /** summary numbers lifted from service responses at pin time */
  valueMin: number | null;
  valueMax: number | null;
  rmse: number | null;
}

export interface SessionState {
  anchors: Anchor[];
  kind: MapKind;
  central: number | null;
  bounds: Bounds;
  res: { nx: number; ny: number };
  sigma: number;
  trackEnabled: boolean;
  seed: number;
}

export const MIN_ANCHORS = 3;

export function defaultSession(): SessionState {
  return {
    anchors: [
      { x: 0, y: 0, label: "1" },
      { x: 4, y: 0, label: "2" },
      { x: 0, y: 4, label: "3" },
      { x: -4, y: 0, label: "4" },
      { x: 0, y: -4, label: "5" },
    ],
    kind: "nonlinear-kappa",
    central: null,
    bounds: { x_min: -6, x_max: 6, y_min: -6, y_max: 6 },
    res: { nx: 120, ny: 120 },
    sigma: 0.3,
    trackEnabled: false,
    seed: 0,
  };
}

export type Listener = (s: SessionStore) => void;

export class SessionStore {
  state: SessionState;
  lastGrid: DopGridResponse | null = null;
  lastRmse: number | null = null;
  stale = false;
  snapshots: Snapshot[] = [];
  private listeners: Listener[] = [];

  constructor(initial?: SessionState) {
    this.state = initial ?? defaultSession();
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private notify() {
    for (const fn of this.listeners) fn(this);
  }

  /** compute is allowed only with enough stations for a fix */
  canCompute(): boolean {
    return this.state.anchors.length >= MIN_ANCHORS;
  }

  moveAnchor(index: number, x: number, y: number) {
    const a = this.state.anchors[index];
    if (!a) return;
    this.state.anchors[index] = { ...a, x, y };
    this.stale = true;
    this.notify();
  }

  addAnchor(x: number, y: number) {
    this.state.anchors.push({ x, y, label: String(this.state.anchors.length + 1) });
    this.stale = true;
    this.notify();
  }

  removeAnchor(index: number) {
    this.state.anchors.splice(index, 1);
    if (this.state.central !== null) {
      if (this.state.central === index) this.state.central = null;
      else if (this.state.central > index) this.state.central -= 1;
    }
    this.stale = true;
    this.notify();
  }

  setKind(kind: MapKind) {
    this.state.kind = kind;
    if (kind === "nonlinear-kappa") this.state.central = null;
    else if (this.state.central === null) this.state.central = 0;
    this.stale = true;
    this.notify();
  }

  setCentral(central: number | null) {
    this.state.central = central;
    this.stale = true;
    this.notify();
  }

  setAnchors(anchors: Anchor[]) {
    this.state.anchors = anchors.map((a) => ({ ...a }));
    if (this.state.central !== null && this.state.central >= anchors.length) {
      this.state.central = null;
    }
    this.stale = true;
    this.notify();
  }

  setGrid(grid: DopGridResponse) {
    this.lastGrid = grid;
    this.stale = false;
    this.notify();
  }

  setRmse(rmse: number | null) {
    this.lastRmse = rmse;
    this.notify();
  }

  /** service failed: keep the old layer but badge it as stale */
  markStale() {
    this.stale = true;
    this.notify();
  }

  pinSnapshot(name: string): Snapshot {
    let valueMin: number | null = null;
    let valueMax: number | null = null;
    if (this.lastGrid) {
      const finite = this.lastGrid.values.filter((v): v is number => v !== null);
      if (finite.length) {
        valueMin = Math.min(...finite);
        valueMax = Math.max(...finite);
      }
    }
    const snap: Snapshot = {
      name,
      anchors: this.state.anchors.map((a) => ({ ...a })),
      kind: this.state.kind,
      central: this.state.central,
      valueMin,
      valueMax,
      rmse: this.lastRmse,
    };
    this.snapshots.push(snap);
    this.notify();
    return snap;
  }
}

export interface SnapshotDelta {
  dValueMin: number | null;
  dValueMax: number | null;
  dRmse: number | null;
}

/** b minus a, per summary number; null when either side is missing */
export function compareSnapshots(a: Snapshot, b: Snapshot): SnapshotDelta {
  const diff = (x: number | null, y: number | null) =>
    x === null || y === null ? null : y - x;
  return {
    dValueMin: diff(a.valueMin, b.valueMin),
    dValueMax: diff(a.valueMax, b.valueMax),
    dRmse: diff(a.rmse, b.rmse),
  };
}
