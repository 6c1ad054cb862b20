/**
 * Thin client for the compute service. At most one request is in flight
 * per endpoint: a newer call aborts the stale one, so a fast sequence of
 * interactions settles on the latest answer.
 */

import type { DopGridResponse, DopMapRequest, SimulateTrackResponse } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`service error ${status}: ${detail}`);
  }
}

export class ApiClient {
  private controllers = new Map<string, AbortController>();

  constructor(
    public baseUrl: string = "http://127.0.0.1:8787",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(endpoint: string, body: unknown): Promise<T> {
    const stale = this.controllers.get(endpoint);
    if (stale) stale.abort();
    const controller = new AbortController();
    this.controllers.set(endpoint, controller);
    try {
      const resp = await this.fetchImpl(`${this.baseUrl}${endpoint}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
      if (!resp.ok) {
        let detail = resp.statusText;
        try {
          const data = (await resp.json()) as { detail?: unknown };
          if (data.detail !== undefined) detail = JSON.stringify(data.detail);
        } catch {
          /* non-JSON error body */
        }
        throw new ApiError(resp.status, detail);
      }
      return (await resp.json()) as T;
    } finally {
      if (this.controllers.get(endpoint) === controller) {
        this.controllers.delete(endpoint);
      }
    }
  }

  dopMap(req: DopMapRequest): Promise<DopGridResponse> {
    return this.post<DopGridResponse>("/v1/dop-map", { v: 1, ...req });
  }

  simulateTrack(scenario: unknown, seed: number): Promise<SimulateTrackResponse> {
    return this.post<SimulateTrackResponse>("/v1/simulate-track", {
      v: 1,
      scenario,
      seed,
    });
  }

  async health(): Promise<{ status: string; version: string }> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/health`);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return (await resp.json()) as { status: string; version: string };
  }

  inFlight(endpoint: string): boolean {
    return this.controllers.has(endpoint);
  }
}
