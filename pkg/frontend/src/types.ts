import { z } from "zod";

export const MetaSchema = z.object({
  version: z.number().int(),
  enabled_sources: z.array(z.string()),
  available_sources: z.array(z.string()),
  detectors: z.array(z.string()),
  date_range: z.tuple([z.string(), z.string()]),
  bin_minutes: z.record(z.string(), z.number().int()),
  n_events: z.number().int(),
});
export type Meta = z.infer<typeof MetaSchema>;

export const SunburstNodeSchema: z.ZodType<SunburstNode> = z.lazy(() =>
  z.object({
    name: z.string(),
    value: z.number().optional(),
    children: z.array(SunburstNodeSchema).optional(),
  }),
);
export interface SunburstNode {
  name: string;
  value?: number;
  children?: SunburstNode[];
}

export const SunburstSchema = z.object({
  name: z.string(),
  total: z.number(),
  children: z.array(SunburstNodeSchema),
});
export type Sunburst = z.infer<typeof SunburstSchema>;

export const AnomalySchema = z.object({
  source: z.string(),
  location_id: z.string(),
  zone_id: z.string().nullable(),
  date: z.string(),
  bin_of_day: z.number().int(),
  score: z.number(),
  direction: z.string(),
});
export type Anomaly = z.infer<typeof AnomalySchema>;
export const AnomaliesSchema = z.array(AnomalySchema);

export const FusedCellSchema = z.object({
  zone_id: z.string(),
  date: z.string(),
  bin_of_day: z.number().int(),
  fused_score: z.number().nullable(),
  votes: z.number().int(),
});
export const FusedSchema = z.object({
  method: z.string(),
  S: z.number(),
  k: z.number().int(),
  sources: z.array(z.string()),
  version: z.number().int(),
  cells: z.array(FusedCellSchema),
});
export type Fused = z.infer<typeof FusedSchema>;
export type FusedCell = z.infer<typeof FusedCellSchema>;

export const RecallSchema = z.object({
  label: z.string(),
  offset_hours: z.number().int(),
  R_m: z.number(),
  recall: z.number(),
  version: z.number().int(),
});
export type Recall = z.infer<typeof RecallSchema>;

export const AnnotationSchema = z.array(
  z.object({ term: z.string(), score: z.number() }),
);
export type Annotations = z.infer<typeof AnnotationSchema>;

export const EventRowSchema = z.object({
  event_id: z.string(),
  name: z.string(),
  venue: z.object({ lon: z.number(), lat: z.number() }),
  start: z.string(),
  end: z.string(),
  scale: z.string(),
  nearest_anomalous_zone: z.record(
    z.string(),
    z.object({ zone_id: z.string(), distance_m: z.number() }),
  ),
});
export type EventRow = z.infer<typeof EventRowSchema>;
export const EventsSchema = z.array(EventRowSchema);

export interface ZoneFeature {
  type: "Feature";
  properties: { zone_id: string };
  geometry: { type: "Polygon"; coordinates: number[][][] };
}
export interface ZoneCollection {
  type: "FeatureCollection";
  features: ZoneFeature[];
}
