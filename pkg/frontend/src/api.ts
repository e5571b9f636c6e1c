/**
 * Typed client for the anomaly service. Every displayed number comes from
 * one of these calls; the UI layers never derive statistics themselves.
 */
import {
  AnnotationSchema,
  Annotations,
  AnomaliesSchema,
  Anomaly,
  EventRow,
  EventsSchema,
  Fused,
  FusedSchema,
  Meta,
  MetaSchema,
  Recall,
  RecallSchema,
  Sunburst,
  SunburstSchema,
  ZoneCollection,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async getJson(path: string, params?: Record<string, string | number>): Promise<unknown> {
    const q = params
      ? "?" +
        Object.entries(params)
          .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
          .join("&")
      : "";
    const res = await this.fetchImpl(`${this.base}${path}${q}`);
    if (!res.ok) {
      throw new Error(`${path} failed: ${res.status} ${await res.text()}`);
    }
    return res.json();
  }

  meta(): Promise<Meta> {
    return this.getJson("/meta").then((j) => MetaSchema.parse(j));
  }

  zones(): Promise<ZoneCollection> {
    return this.getJson("/zones") as Promise<ZoneCollection>;
  }

  sunburst(detector: string): Promise<Sunburst> {
    return this.getJson("/sunburst", { detector }).then((j) => SunburstSchema.parse(j));
  }

  anomalies(detector: string, date?: string, source?: string): Promise<Anomaly[]> {
    const params: Record<string, string> = { detector };
    if (date) params.date = date;
    if (source) params.source = source;
    return this.getJson("/anomalies", params).then((j) => AnomaliesSchema.parse(j));
  }

  fused(method: string, s: number, k: number, weights?: Record<string, number>): Promise<Fused> {
    const params: Record<string, string | number> = { method, S: s, k };
    if (weights) params.weights = encodeWeights(weights);
    return this.getJson("/fused", params).then((j) => FusedSchema.parse(j));
  }

  recall(opts: {
    r: number;
    offset: number;
    method: string;
    s?: number;
    k?: number;
    weights?: Record<string, number>;
  }): Promise<Recall> {
    const params: Record<string, string | number> = {
      R: opts.r,
      offset: opts.offset,
      method: opts.method,
    };
    if (opts.s !== undefined) params.S = opts.s;
    if (opts.k !== undefined) params.k = opts.k;
    if (opts.weights) params.weights = encodeWeights(opts.weights);
    return this.getJson("/recall", params).then((j) => RecallSchema.parse(j));
  }

  annotations(zone: string, date: string, bin: number, k = 12): Promise<Annotations> {
    return this.getJson("/annotations", { zone, date, bin, k }).then((j) =>
      AnnotationSchema.parse(j),
    );
  }

  events(): Promise<EventRow[]> {
    return this.getJson("/events").then((j) => EventsSchema.parse(j));
  }

  async setSources(enabled: string[]): Promise<{ version: number }> {
    const res = await this.fetchImpl(`${this.base}/config/sources`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ enabled }),
    });
    if (res.status === 409) {
      throw new RefusionInProgress();
    }
    if (!res.ok) {
      throw new Error(`PUT /config/sources failed: ${res.status}`);
    }
    return (await res.json()) as { version: number };
  }
}

export class RefusionInProgress extends Error {
  constructor() {
    super("re-fusion already in progress");
  }
}

/** Serialize slider weights for the API, normalized to sum to one. */
export function encodeWeights(weights: Record<string, number>): string {
  const total = Object.values(weights).reduce((a, b) => a + b, 0);
  const scale = total > 0 ? 1 / total : 0;
  return Object.entries(weights)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([source, w]) => `${source}:${w * scale}`)
    .join(",");
}
