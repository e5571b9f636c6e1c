/**
 * What-if panel model: R/S/k sliders re-query the recall endpoint and fused
 * decisions without a page reload. Responses are tagged with the snapshot
 * version; anything from a superseded snapshot is discarded.
 */
import { ApiClient } from "./api.js";
import { Recall } from "./types.js";
import { ViewState } from "./state.js";

export interface RecallPoint {
  r: number;
  recall: number;
}

/** Readout cache keyed by radius; rebuilt when method/S/k/offset change. */
export class RecallReadout {
  private points = new Map<number, number>();
  private version = -1;

  constructor(private readonly signature: string) {}

  static signatureOf(state: ViewState): string {
    return [state.method, state.s, state.k, state.offset, state.sources.join("+")].join("|");
  }

  matches(state: ViewState): boolean {
    return this.signature === RecallReadout.signatureOf(state);
  }

  absorb(resp: Recall): void {
    if (this.version >= 0 && resp.version !== this.version) {
      // snapshot changed mid-sweep: keep only the newest snapshot's numbers
      if (resp.version < this.version) return;
      this.points.clear();
    }
    this.version = resp.version;
    this.points.set(resp.R_m, resp.recall);
  }

  curve(): RecallPoint[] {
    return [...this.points.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([r, recall]) => ({ r, recall }));
  }

  at(r: number): number | undefined {
    return this.points.get(r);
  }
}

export async function sweepRecall(
  api: ApiClient,
  state: ViewState,
  radii: number[],
  weights?: Record<string, number>,
): Promise<RecallReadout> {
  const readout = new RecallReadout(RecallReadout.signatureOf(state));
  for (const r of radii) {
    const resp = await api.recall({
      r,
      offset: state.offset,
      method: state.method,
      s: state.s,
      k: state.k,
      weights: state.method === "weighted" ? weights : undefined,
    });
    readout.absorb(resp);
  }
  return readout;
}

export function sliderRadii(step = 250, max = 4000): number[] {
  const out: number[] = [];
  for (let r = 0; r <= max; r += step) out.push(r);
  return out;
}
