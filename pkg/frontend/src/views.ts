/** Pure view-model builders.
 *
 * Every number in a view model is copied verbatim from an API payload field;
 * nothing is recomputed client-side, so payload equality is testable.
 */

import {
  DistancesPayload,
  Dossier,
  RelationPayload,
  RelationType,
} from "./api.js";

export interface GraphNodeView {
  key: string; // "topic:0" | "cluster:12"
  kind: "topic" | "cluster";
  id: number;
  badge: RelationType;
  x: number;
  y: number;
}

export interface GraphEdgeView {
  from: string;
  to: string;
  tooltip: string;
  firedCt: boolean;
  firedTc: boolean;
}

export interface RelationGraphView {
  nodes: GraphNodeView[];
  edges: GraphEdgeView[];
  census: Record<RelationType, number>;
  tauCt: number;
  tauTc: number;
}

/** Two-column bipartite layout: topics left, clusters right. */
export function relationGraphView(payload: RelationPayload): RelationGraphView {
  const nodes: GraphNodeView[] = [];
  payload.topics.forEach((t, i) => {
    nodes.push({
      key: `topic:${t.id}`,
      kind: "topic",
      id: t.id,
      badge: t.type,
      x: 0,
      y: payload.topics.length > 1 ? i / (payload.topics.length - 1) : 0.5,
    });
  });
  payload.clusters.forEach((c, i) => {
    nodes.push({
      key: `cluster:${c.id}`,
      kind: "cluster",
      id: c.id,
      badge: c.type,
      x: 1,
      y: payload.clusters.length > 1 ? i / (payload.clusters.length - 1) : 0.5,
    });
  });
  const edges: GraphEdgeView[] = payload.edges.map((e) => ({
    from: `topic:${e.topic}`,
    to: `cluster:${e.cluster}`,
    tooltip: `P(c→t)=${e.p_ct.toFixed(3)}  P(t→c)=${e.p_tc.toFixed(3)}`,
    firedCt: e.fired_ct,
    firedTc: e.fired_tc,
  }));
  return {
    nodes,
    edges,
    census: payload.census,
    tauCt: payload.tau_ct,
    tauTc: payload.tau_tc,
  };
}

export interface TermBar {
  term: string;
  score: number;
}

export interface DossierView {
  entity: string;
  humanLabel: string | null;
  termBars: TermBar[];
  topDocs: { id: string; score: number }[];
  rollupPaths: string[][];
  unmatchedTerms: string[];
  area: Dossier["area"];
}

export function dossierView(payload: Dossier): DossierView {
  return {
    entity: payload.entity,
    humanLabel: payload.human_label ?? null,
    termBars: payload.top_terms.map(([term, score]) => ({ term, score })),
    topDocs: payload.top_docs.map(([id, score]) => ({ id, score })),
    rollupPaths: payload.rollup_paths,
    unmatchedTerms: payload.unmatched_terms,
    area: payload.area,
  };
}

export interface TopicCircle {
  id: number;
  x: number;
  y: number;
  /** Circle area is proportional to prevalence, so radius = sqrt scale. */
  radius: number;
  prevalence: number;
}

export interface TopicMapView {
  circles: TopicCircle[];
  reconstructionError: number;
}

export function topicMapView(payload: DistancesPayload): TopicMapView {
  const circles = payload.coords.map((xy, t) => ({
    id: t,
    x: xy[0],
    y: xy[1],
    radius: Math.sqrt(payload.prevalence[t]),
    prevalence: payload.prevalence[t],
  }));
  return { circles, reconstructionError: payload.reconstruction_error };
}
