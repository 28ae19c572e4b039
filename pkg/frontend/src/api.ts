/** Typed client for the mapcompare HTTP API. Read-only except for labels. */

export interface Summary {
  n_topics: number;
  n_clusters: number;
  n_selected_clusters: number;
  n_docs: number;
  coverage: number;
  tau_ct: number;
  tau_tc: number;
  sweep_grid: number[];
  seed: number;
}

export type RelationType =
  | "one-to-one"
  | "one-to-many"
  | "many-to-many"
  | "unique";

export interface RelationNode {
  id: number;
  type: RelationType;
}

export interface RelationEdge {
  topic: number;
  cluster: number;
  p_ct: number;
  p_tc: number;
  fired_ct: boolean;
  fired_tc: boolean;
}

export interface RelationPayload {
  tau_ct: number;
  tau_tc: number;
  topics: RelationNode[];
  clusters: RelationNode[];
  edges: RelationEdge[];
  census: Record<RelationType, number>;
}

export interface SweepPoint {
  tau: number;
  census: Record<RelationType, number>;
  graph: RelationPayload;
}

export interface Dossier {
  entity: string;
  top_terms: [string, number][];
  top_docs: [string, number][];
  rollup_paths: string[][];
  unmatched_terms: string[];
  human_label: string | null;
  area?: {
    size: number;
    field_count: number;
    share: number;
    selected: boolean;
    category: number;
    residual: boolean;
  };
}

export interface TopicSummary {
  id: number;
  prevalence: number;
  coords: [number, number];
  label: string | null;
}

export interface DistancesPayload {
  distances: number[][];
  coords: number[][];
  prevalence: number[];
  reconstruction_error: number;
}

export interface LabelRecord {
  entity: string;
  label: string;
  author: string;
  ts: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  if (!res.ok) {
    throw new ApiError(res.status, await res.text());
  }
  return (await res.json()) as T;
}

export class Client {
  constructor(private base: string) {}

  summary(): Promise<Summary> {
    return getJson(`${this.base}/api/summary`);
  }

  topics(): Promise<TopicSummary[]> {
    return getJson(`${this.base}/api/topics`);
  }

  topicDossier(t: number): Promise<Dossier> {
    return getJson(`${this.base}/api/topics/${t}`);
  }

  clusterDossier(c: number): Promise<Dossier> {
    return getJson(`${this.base}/api/clusters/${c}`);
  }

  distances(): Promise<DistancesPayload> {
    return getJson(`${this.base}/api/distances`);
  }

  relations(tauCt?: number, tauTc?: number): Promise<RelationPayload> {
    const params = new URLSearchParams();
    if (tauCt !== undefined) params.set("tct", String(tauCt));
    if (tauTc !== undefined) params.set("ttc", String(tauTc));
    const qs = params.toString();
    return getJson(`${this.base}/api/relations${qs ? "?" + qs : ""}`);
  }

  sweep(side: "cluster-to-topic" | "topic-to-cluster"): Promise<SweepPoint[]> {
    return getJson(`${this.base}/api/sweep?side=${side}`);
  }

  labels(): Promise<Record<string, LabelRecord>> {
    return getJson(`${this.base}/api/labels`);
  }

  async postLabel(entity: string, label: string, author = ""): Promise<LabelRecord> {
    const res = await fetch(`${this.base}/api/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ entity, label, author }),
    });
    if (!res.ok) {
      throw new ApiError(res.status, await res.text());
    }
    return (await res.json()) as LabelRecord;
  }
}
