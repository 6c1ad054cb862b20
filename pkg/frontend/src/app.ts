/**
 * DOM wiring: canvas layers (heatmap, anchors, track), drag interaction
 * with a debounced recompute, probe readout, presets, snapshot compare,
 * and session <-> URL sync. Every displayed number comes from the
 * service's responses.
 */

import { ApiClient, ApiError } from "./api.js";
import { legendTicks, scaleForGrid } from "./colormap.js";
import { debounce } from "./debounce.js";
import { PRESETS, presetById } from "./presets.js";
import { formatValue, probe } from "./probe.js";
import { compareSnapshots, MIN_ANCHORS, SessionStore } from "./state.js";
import { sessionFromQuery, sessionToQuery } from "./url.js";
import type { DopMapRequest } from "./types.js";

export const RECOMPUTE_DELAY_MS = 150;

const ANCHOR_HIT_RADIUS_PX = 12;

export class PlannerApp {
  store: SessionStore;
  api: ApiClient;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private dragIndex: number | null = null;
  private recompute = debounce(() => void this.fetchAll(), RECOMPUTE_DELAY_MS);

  constructor(root: Document, api: ApiClient) {
    this.api = api;
    this.store = new SessionStore(
      window.location.search.length > 1
        ? sessionFromQuery(window.location.search.slice(1))
        : undefined,
    );
    this.canvas = root.getElementById("map") as HTMLCanvasElement;
    this.ctx = this.canvas.getContext("2d")!;
    this.bindControls(root);
    this.bindCanvas();
    this.store.subscribe(() => this.render());
    this.render();
    if (this.store.canCompute()) void this.fetchAll();
  }

  // ---- coordinate transforms ------------------------------------------

  private worldToPx(x: number, y: number): [number, number] {
    const b = this.store.state.bounds;
    const px = ((x - b.x_min) / (b.x_max - b.x_min)) * this.canvas.width;
    const py = (1 - (y - b.y_min) / (b.y_max - b.y_min)) * this.canvas.height;
    return [px, py];
  }

  private pxToWorld(px: number, py: number): [number, number] {
    const b = this.store.state.bounds;
    const x = b.x_min + (px / this.canvas.width) * (b.x_max - b.x_min);
    const y = b.y_min + (1 - py / this.canvas.height) * (b.y_max - b.y_min);
    return [x, y];
  }

  // ---- service round trips --------------------------------------------

  private buildMapRequest(): DopMapRequest {
    const s = this.store.state;
    return {
      anchors: s.anchors,
      kind: s.kind,
      central: s.kind === "linear-cond" ? s.central : null,
      symmetric: s.kind === "linear-cond" && s.central === null,
      bounds: s.bounds,
      res: s.res,
    };
  }

  async fetchAll(): Promise<void> {
    if (!this.store.canCompute()) return;
    try {
      const grid = await this.api.dopMap(this.buildMapRequest());
      this.store.setGrid(grid);
    } catch (e) {
      if (e instanceof DOMException && e.name === "AbortError") return;
      this.store.markStale();
      this.toast(e instanceof ApiError ? e.message : String(e));
      return;
    }
    if (this.store.state.trackEnabled) {
      try {
        const s = this.store.state;
        const b = s.bounds;
        const midY = (b.y_min + b.y_max) / 2;
        const span = (b.y_max - b.y_min) / 4;
        const scenario = {
          anchors: s.anchors,
          deployment: "planner",
          segment: {
            from: { x: (b.x_min + b.x_max) / 2, y: midY - span },
            to: { x: (b.x_min + b.x_max) / 2, y: midY + span },
          },
          sigma_d: s.sigma,
          steps: 50,
          estimator:
            s.kind === "linear-cond"
              ? s.central !== null
                ? `linear-central:${s.central}`
                : "linear-symmetric"
              : "gauss-newton",
        };
        const resp = await this.api.simulateTrack(scenario, s.seed);
        this.store.setRmse(resp.rmse);
      } catch (e) {
        if (e instanceof DOMException && e.name === "AbortError") return;
        this.store.setRmse(null);
        this.toast(e instanceof ApiError ? e.message : String(e));
      }
    }
    this.syncUrl();
  }

  private syncUrl() {
    const query = sessionToQuery(this.store.state);
    window.history.replaceState(null, "", `?${query}`);
  }

  // ---- interaction ------------------------------------------------------

  private bindCanvas() {
    this.canvas.addEventListener("mousedown", (e) => {
      const [mx, my] = this.eventPx(e);
      this.dragIndex = this.hitAnchor(mx, my);
    });
    this.canvas.addEventListener("mousemove", (e) => {
      const [mx, my] = this.eventPx(e);
      if (this.dragIndex !== null) {
        const [x, y] = this.pxToWorld(mx, my);
        this.store.moveAnchor(this.dragIndex, x, y);
        this.recompute();
      } else {
        this.updateProbe(mx, my);
      }
    });
    const endDrag = () => {
      this.dragIndex = null;
    };
    this.canvas.addEventListener("mouseup", endDrag);
    this.canvas.addEventListener("mouseleave", endDrag);
    this.canvas.addEventListener("dblclick", (e) => {
      const [mx, my] = this.eventPx(e);
      const hit = this.hitAnchor(mx, my);
      if (hit !== null) this.store.removeAnchor(hit);
      else {
        const [x, y] = this.pxToWorld(mx, my);
        this.store.addAnchor(x, y);
      }
      this.recompute();
    });
  }

  private eventPx(e: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [
      ((e.clientX - rect.left) / rect.width) * this.canvas.width,
      ((e.clientY - rect.top) / rect.height) * this.canvas.height,
    ];
  }

  private hitAnchor(px: number, py: number): number | null {
    const anchors = this.store.state.anchors;
    for (let i = 0; i < anchors.length; i++) {
      const [ax, ay] = this.worldToPx(anchors[i].x, anchors[i].y);
      if (Math.hypot(ax - px, ay - py) <= ANCHOR_HIT_RADIUS_PX) return i;
    }
    return null;
  }

  private updateProbe(px: number, py: number) {
    const grid = this.store.lastGrid;
    const el = document.getElementById("probe")!;
    if (!grid) {
      el.textContent = "";
      return;
    }
    const [x, y] = this.pxToWorld(px, py);
    const res = probe(grid, x, y);
    el.textContent = res
      ? `(${x.toFixed(2)}, ${y.toFixed(2)}) ${grid.kind === "linear-cond" ? "cond" : "dispersion"} = ${res.text}`
      : "";
  }

  private bindControls(root: Document) {
    const kindSel = root.getElementById("kind") as HTMLSelectElement;
    kindSel.addEventListener("change", () => {
      this.store.setKind(kindSel.value as "linear-cond" | "nonlinear-kappa");
      this.recompute();
    });
    const centralSel = root.getElementById("central") as HTMLSelectElement;
    centralSel.addEventListener("change", () => {
      const v = centralSel.value;
      this.store.setCentral(v === "" ? null : Number(v));
      this.recompute();
    });
    const sigma = root.getElementById("sigma") as HTMLInputElement;
    sigma.addEventListener("input", () => {
      this.store.state.sigma = Number(sigma.value);
      root.getElementById("sigma-label")!.textContent = `${sigma.value} m`;
      if (this.store.state.trackEnabled) this.recompute();
    });
    const trackToggle = root.getElementById("track-toggle") as HTMLInputElement;
    trackToggle.addEventListener("change", () => {
      this.store.state.trackEnabled = trackToggle.checked;
      this.recompute();
    });
    const presetsDiv = root.getElementById("presets")!;
    for (const preset of PRESETS) {
      const btn = root.createElement("button");
      btn.textContent = preset.title;
      btn.addEventListener("click", () => this.applyPreset(preset.id));
      presetsDiv.appendChild(btn);
    }
    root.getElementById("pin")!.addEventListener("click", () => {
      this.store.pinSnapshot(`#${this.store.snapshots.length + 1}`);
    });
    root.getElementById("share")!.addEventListener("click", () => {
      this.syncUrl();
      void navigator.clipboard?.writeText(window.location.href);
      this.toast("link copied");
    });
  }

  applyPreset(id: string) {
    const preset = presetById(id);
    if (!preset) return;
    this.store.setAnchors(preset.anchors);
    this.store.setCentral(preset.central);
    this.store.state.bounds = { ...preset.bounds };
    this.recompute();
  }

  private toast(message: string) {
    const el = document.getElementById("toast")!;
    el.textContent = message;
    el.classList.add("show");
    setTimeout(() => el.classList.remove("show"), 2500);
  }

  // ---- rendering --------------------------------------------------------

  render() {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    this.renderHeatmap();
    this.renderAnchors();
    this.renderSidebar();
  }

  private renderHeatmap() {
    const grid = this.store.lastGrid;
    if (!grid) return;
    const { ctx, canvas } = this;
    const scale = scaleForGrid(grid);
    const cw = canvas.width / grid.nx;
    const ch = canvas.height / grid.ny;
    for (let ix = 0; ix < grid.nx; ix++) {
      for (let iy = 0; iy < grid.ny; iy++) {
        const flat = ix * grid.ny + iy;
        const v = grid.values[flat];
        const px = ix * cw;
        const py = canvas.height - (iy + 1) * ch;
        if (grid.mask[flat] || v === null) {
          ctx.fillStyle = "#303030";
          ctx.fillRect(px, py, cw + 1, ch + 1);
          ctx.strokeStyle = "#555";
          ctx.beginPath();
          ctx.moveTo(px, py + ch);
          ctx.lineTo(px + cw, py);
          ctx.stroke();
        } else {
          const [r, g, b] = scale.rgb(v);
          ctx.fillStyle = `rgb(${r},${g},${b})`;
          ctx.fillRect(px, py, cw + 1, ch + 1);
        }
      }
    }
    const legend = document.getElementById("legend")!;
    const ticks = legendTicks(scale)
      .map((t) => formatValue(t.value))
      .join(" / ");
    legend.textContent =
      `${grid.kind}: ${ticks}` + (this.store.stale ? "  [stale]" : "");
  }

  private renderAnchors() {
    const { ctx } = this;
    const s = this.store.state;
    s.anchors.forEach((a, i) => {
      const [px, py] = this.worldToPx(a.x, a.y);
      ctx.beginPath();
      ctx.arc(px, py, 7, 0, 2 * Math.PI);
      ctx.fillStyle = i === s.central ? "#ff7043" : "#eceff1";
      ctx.fill();
      ctx.strokeStyle = "#263238";
      ctx.stroke();
      ctx.fillStyle = "#10141a";
      ctx.font = "9px sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      ctx.fillText(a.label ?? String(i + 1), px, py);
    });
  }

  private renderSidebar() {
    const s = this.store.state;
    const hint = document.getElementById("hint")!;
    hint.textContent = this.store.canCompute()
      ? ""
      : `place at least ${MIN_ANCHORS} stations to compute`;
    const rmseEl = document.getElementById("rmse")!;
    rmseEl.textContent =
      s.trackEnabled && this.store.lastRmse !== null
        ? `track RMSE: ${formatValue(this.store.lastRmse)} m`
        : "";
    const centralSel = document.getElementById("central") as HTMLSelectElement;
    if (centralSel.options.length !== s.anchors.length + 1) {
      centralSel.innerHTML = "";
      const none = document.createElement("option");
      none.value = "";
      none.textContent = "(symmetric)";
      centralSel.appendChild(none);
      s.anchors.forEach((a, i) => {
        const opt = document.createElement("option");
        opt.value = String(i);
        opt.textContent = a.label ?? String(i);
        centralSel.appendChild(opt);
      });
    }
    centralSel.value = s.central === null ? "" : String(s.central);
    const snapsEl = document.getElementById("snapshots")!;
    if (this.store.snapshots.length >= 2) {
      const a = this.store.snapshots[this.store.snapshots.length - 2];
      const b = this.store.snapshots[this.store.snapshots.length - 1];
      const d = compareSnapshots(a, b);
      const fmt = (v: number | null) => (v === null ? "n/a" : formatValue(v));
      snapsEl.textContent =
        `${a.name} vs ${b.name}:  d(min)=${fmt(d.dValueMin)}  ` +
        `d(max)=${fmt(d.dValueMax)}  d(RMSE)=${fmt(d.dRmse)}`;
    } else if (this.store.snapshots.length === 1) {
      snapsEl.textContent = `${this.store.snapshots[0].name} pinned; pin another to compare`;
    } else {
      snapsEl.textContent = "";
    }
  }
}
