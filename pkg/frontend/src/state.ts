/** View state: thresholds, selection, label draft, serialized label posts.
 *
 * Thresholds snap to the run's sweep grid by default; free entry is allowed
 * as an explicit override (the asymmetric 0.2/0.1 default pair is itself off
 * the 0.05 grid). The client never computes probabilities: it only decides
 * which payload to request.
 */

import { Client, LabelRecord, Summary } from "./api.js";

export type Side = "cluster-to-topic" | "topic-to-cluster" | "combined";

export interface ViewState {
  tauCt: number;
  tauTc: number;
  side: Side;
  selected: string | null; // "topic:3" | "cluster:12"
  labelDraft: string;
}

/** Nearest grid value; outside the grid's range clamps to its ends. */
export function snapToGrid(value: number, grid: number[]): number {
  if (grid.length === 0) return value;
  let best = grid[0];
  for (const g of grid) {
    if (Math.abs(g - value) < Math.abs(best - value)) best = g;
  }
  return best;
}

export function initialState(summary: Summary): ViewState {
  return {
    tauCt: summary.tau_ct,
    tauTc: summary.tau_tc,
    side: "combined",
    selected: null,
    labelDraft: "",
  };
}

export function setThreshold(
  state: ViewState,
  which: "ct" | "tc",
  value: number,
  grid: number[],
  freeEntry = false
): ViewState {
  const v = freeEntry ? value : snapToGrid(value, grid);
  if (v <= 0 || v > 1) {
    throw new RangeError(`threshold ${v} outside (0, 1]`);
  }
  return which === "ct" ? { ...state, tauCt: v } : { ...state, tauTc: v };
}

/** Selection must name an entity the loaded summary can resolve. */
export function select(
  state: ViewState,
  entity: string,
  summary: Summary
): ViewState {
  const [kind, raw] = entity.split(":");
  const id = Number(raw);
  const ok =
    (kind === "topic" && Number.isInteger(id) && id >= 0 && id < summary.n_topics) ||
    (kind === "cluster" && Number.isInteger(id) && id >= 0);
  if (!ok) {
    throw new RangeError(`cannot resolve entity ${entity}`);
  }
  return { ...state, selected: entity, labelDraft: "" };
}

/** Serializes label posts: at most one request in flight, in submit order. */
export class LabelQueue {
  private chain: Promise<unknown> = Promise.resolve();
  private pending = 0;

  constructor(private client: Client) {}

  get inFlight(): number {
    return this.pending;
  }

  submit(entity: string, label: string): Promise<LabelRecord> {
    this.pending += 1;
    const next = this.chain
      .catch(() => undefined) // one failure must not block later posts
      .then(() => this.client.postLabel(entity, label))
      .finally(() => {
        this.pending -= 1;
      });
    this.chain = next;
    return next;
  }
}
