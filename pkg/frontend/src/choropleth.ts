/**
 * Event landscape view geometry: a plate-carree style linear projection of
 * the zone polygons into a pixel viewport, zone shading from anomaly
 * scores, and venue markers (actual vs. per-source estimates).
 */
import { Anomaly, EventRow, ZoneCollection } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
  pad: number;
}

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
}

export function fitProjection(zones: ZoneCollection, vp: Viewport): Projection {
  let lonMin = Infinity;
  let lonMax = -Infinity;
  let latMin = Infinity;
  let latMax = -Infinity;
  for (const f of zones.features) {
    for (const ring of f.geometry.coordinates) {
      for (const [lon, lat] of ring) {
        lonMin = Math.min(lonMin, lon);
        lonMax = Math.max(lonMax, lon);
        latMin = Math.min(latMin, lat);
        latMax = Math.max(latMax, lat);
      }
    }
  }
  const sx = (vp.width - 2 * vp.pad) / (lonMax - lonMin || 1);
  const sy = (vp.height - 2 * vp.pad) / (latMax - latMin || 1);
  const s = Math.min(sx, sy);
  return {
    x: (lon) => vp.pad + (lon - lonMin) * s,
    // screen y grows downward
    y: (lat) => vp.height - vp.pad - (lat - latMin) * s,
  };
}

export function zonePath(feature: ZoneCollection["features"][number], p: Projection): string {
  const parts: string[] = [];
  for (const ring of feature.geometry.coordinates) {
    const coords = ring.map(([lon, lat]) => `${p.x(lon).toFixed(2)},${p.y(lat).toFixed(2)}`);
    parts.push(`M${coords.join("L")}Z`);
  }
  return parts.join("");
}

/** Per-source bin widths (from /meta), for aligning a fine-bin selection. */
export interface BinAlign {
  binMinutes: Record<string, number>;
  fineMinutes: number;
}

function rowMatchesBin(a: Anomaly, bin: number, align?: BinAlign): boolean {
  if (!align) return a.bin_of_day === bin;
  const width = align.binMinutes[a.source] ?? align.fineMinutes;
  return Math.floor((bin * align.fineMinutes) / width) === a.bin_of_day;
}

/**
 * Max anomaly |score| per zone for one date+bin selection; zones without a
 * matching anomaly are absent (rendered unshaded, not zero). Rows the API
 * could not resolve to a zone (a bus stop without coordinates) are skipped.
 * Sources coarser than the selected bin width (hourly CDR against a 15-min
 * slider) match when their bin covers the selection.
 */
export function zoneScores(
  anomalies: Anomaly[],
  date: string | null,
  bin: number | null,
  align?: BinAlign,
): Map<string, number> {
  const out = new Map<string, number>();
  for (const a of anomalies) {
    if (a.zone_id === null) continue;
    if (date !== null && a.date !== date) continue;
    if (bin !== null && !rowMatchesBin(a, bin, align)) continue;
    const cur = out.get(a.zone_id) ?? 0;
    out.set(a.zone_id, Math.max(cur, Math.abs(a.score)));
  }
  return out;
}

export const SOURCE_COLORS: Record<string, string> = {
  ACTUAL: "#111111",
  CDR: "#e08214",
  BUS: "#1b7837",
  CHECKIN: "#2166ac",
  TAXI_PICKUP: "#8073ac",
  TAXI_DROPOFF: "#c51b7d",
};

export interface VenueMarker {
  label: string;
  color: string;
  x: number;
  y: number;
  kind: "actual" | "estimate";
}

export function venueMarkers(
  event: EventRow,
  zoneCentroids: Map<string, [number, number]>,
  p: Projection,
): VenueMarker[] {
  const markers: VenueMarker[] = [
    {
      label: "ACTUAL",
      color: SOURCE_COLORS.ACTUAL,
      x: p.x(event.venue.lon),
      y: p.y(event.venue.lat),
      kind: "actual",
    },
  ];
  for (const [source, est] of Object.entries(event.nearest_anomalous_zone)) {
    const centroid = zoneCentroids.get(est.zone_id);
    if (!centroid) continue;
    markers.push({
      label: source,
      color: SOURCE_COLORS[source] ?? "#555555",
      x: p.x(centroid[0]),
      y: p.y(centroid[1]),
      kind: "estimate",
    });
  }
  return markers;
}

export function ringCentroid(ring: number[][]): [number, number] {
  // area-weighted centroid of one closed ring (shoelace)
  let area = 0;
  let cx = 0;
  let cy = 0;
  for (let i = 0; i < ring.length - 1; i++) {
    const [x0, y0] = ring[i];
    const [x1, y1] = ring[i + 1];
    const cross = x0 * y1 - x1 * y0;
    area += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  if (area === 0) {
    const xs = ring.slice(0, -1);
    return [
      xs.reduce((a, c) => a + c[0], 0) / xs.length,
      xs.reduce((a, c) => a + c[1], 0) / xs.length,
    ];
  }
  return [cx / (3 * area), cy / (3 * area)];
}
