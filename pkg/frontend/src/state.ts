/**
 * View state, fully serializable to the URL query string.
 *
 * The round trip state -> URL -> state is the identity, so any view can be
 * shared as a link.
 */

export type FusionMethodName = "weighted" | "mean" | "majority";

export interface ViewState {
  sources: string[]; // enabled source names, sorted
  detector: string;
  method: FusionMethodName;
  s: number; // fusion score threshold in [0, 1]
  k: number; // majority votes needed
  r: number; // localization radius slider, 0..4000 m
  offset: 0 | -1; // event start hour vs. hour prior
  zone: string | null;
  date: string | null;
  bin: number | null;
}

export const DEFAULT_STATE: ViewState = {
  sources: ["CDR", "CHECKIN", "TAXI_DROPOFF"],
  detector: "zscore",
  method: "majority",
  s: 0.6,
  k: 2,
  r: 1500,
  offset: 0,
  zone: null,
  date: null,
  bin: null,
};

export function clampState(s: ViewState): ViewState {
  return {
    ...s,
    sources: [...s.sources].sort(),
    s: Math.min(1, Math.max(0, s.s)),
    r: Math.min(4000, Math.max(0, s.r)),
    k: Math.max(1, Math.round(s.k)),
    offset: s.offset === -1 ? -1 : 0,
  };
}

export function stateToQuery(s: ViewState): string {
  const q = new URLSearchParams();
  q.set("sources", [...s.sources].sort().join(","));
  q.set("detector", s.detector);
  q.set("method", s.method);
  q.set("s", String(s.s));
  q.set("k", String(s.k));
  q.set("r", String(s.r));
  q.set("offset", String(s.offset));
  if (s.zone !== null) q.set("zone", s.zone);
  if (s.date !== null) q.set("date", s.date);
  if (s.bin !== null) q.set("bin", String(s.bin));
  return q.toString();
}

export function stateFromQuery(query: string): ViewState {
  const q = new URLSearchParams(query);
  const getNum = (key: string, fallback: number): number => {
    const raw = q.get(key);
    if (raw === null) return fallback;
    const v = Number(raw);
    return Number.isFinite(v) ? v : fallback;
  };
  const sources = q.get("sources");
  const state: ViewState = {
    sources:
      sources !== null
        ? sources.split(",").filter(Boolean).sort()
        : [...DEFAULT_STATE.sources],
    detector: q.get("detector") ?? DEFAULT_STATE.detector,
    method: (q.get("method") as FusionMethodName) ?? DEFAULT_STATE.method,
    s: getNum("s", DEFAULT_STATE.s),
    k: getNum("k", DEFAULT_STATE.k),
    r: getNum("r", DEFAULT_STATE.r),
    offset: getNum("offset", DEFAULT_STATE.offset) === -1 ? -1 : 0,
    zone: q.get("zone"),
    date: q.get("date"),
    bin: q.has("bin") ? getNum("bin", 0) : null,
  };
  return clampState(state);
}
