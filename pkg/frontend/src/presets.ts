/**
 * One-click deployment presets. The two tutorial topologies contrast the
 * estimator families: a station ring around a central one (where the
 * closed-form linear estimator shines) versus corners only (fine for the
 * iterative estimator, hostile to the linear one). The third is the
 * six-station reference site used by the benchmark scenarios.
 */

import type { Anchor, Bounds } from "./types.js";

export interface Preset {
  id: string;
  title: string;
  anchors: Anchor[];
  central: number | null;
  bounds: Bounds;
}

export const PRESETS: Preset[] = [
  {
    id: "dispersed-around-center",
    title: "Dispersed around center",
    anchors: [
      { x: 0, y: 0, label: "C" },
      { x: 4, y: 0, label: "1" },
      { x: 0, y: 4, label: "2" },
      { x: -4, y: 0, label: "3" },
      { x: 0, y: -4, label: "4" },
    ],
    central: 0,
    bounds: { x_min: -6, x_max: 6, y_min: -6, y_max: 6 },
  },
  {
    id: "corners-only",
    title: "Corners only",
    anchors: [
      { x: -4, y: -4, label: "1" },
      { x: 4, y: -4, label: "2" },
      { x: 4, y: 4, label: "3" },
      { x: -4, y: 4, label: "4" },
    ],
    central: null,
    bounds: { x_min: -6, x_max: 6, y_min: -6, y_max: 6 },
  },
  {
    id: "reference-site",
    title: "Reference site (6 stations)",
    anchors: [
      { x: 20.961, y: 68.941, label: "1" },
      { x: 20.911, y: 63.929, label: "2" },
      { x: 22.652, y: 66.441, label: "3" },
      { x: 25.417, y: 66.461, label: "4" },
      { x: 28.274, y: 63.91, label: "5" },
      { x: 28.324, y: 68.961, label: "6" },
    ],
    central: 2,
    bounds: { x_min: 19, x_max: 30, y_min: 62, y_max: 71 },
  },
];

export function presetById(id: string): Preset | undefined {
  return PRESETS.find((p) => p.id === id);
}
