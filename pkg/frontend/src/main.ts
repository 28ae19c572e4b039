/** Browser entry point: wires the API client, view state, and DOM together. */

import { ApiError, Client, Summary } from "./api.js";
import { initialState, LabelQueue, setThreshold, select, Side, ViewState } from "./state.js";
import { dossierView, relationGraphView, topicMapView } from "./views.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = ""
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

class App {
  private state!: ViewState;
  private summary!: Summary;
  private queue: LabelQueue;

  constructor(private client: Client, private root: HTMLElement) {
    this.queue = new LabelQueue(client);
  }

  async start(): Promise<void> {
    try {
      this.summary = await this.client.summary();
    } catch (e) {
      this.showError(e);
      return;
    }
    this.state = initialState(this.summary);
    this.renderShell();
    await Promise.all([this.refreshGraph(), this.refreshTopicMap()]);
  }

  private showError(e: unknown): void {
    // visible error state; the last rendered view stays on screen
    let box = document.getElementById("error-box");
    if (!box) {
      box = el("div", { id: "error-box", class: "error" });
      this.root.prepend(box);
    }
    box.textContent =
      e instanceof ApiError ? `API error ${e.status}: ${e.message}` : String(e);
  }

  private clearError(): void {
    document.getElementById("error-box")?.remove();
  }

  private renderShell(): void {
    this.root.innerHTML = "";
    const header = el("header");
    header.append(
      el("h1", {}, "mapcompare explorer"),
      el(
        "p",
        {},
        `${this.summary.n_docs} documents, ${this.summary.n_topics} topics, ` +
          `${this.summary.n_selected_clusters} selected clusters ` +
          `(coverage ${(this.summary.coverage * 100).toFixed(1)}%)`
      )
    );
    this.root.append(header);
    this.root.append(this.thresholdControls());
    const graph = document.createElementNS(SVG_NS, "svg");
    graph.setAttribute("id", "relation-graph");
    graph.setAttribute("viewBox", "0 0 800 600");
    this.root.append(graph);
    const map = document.createElementNS(SVG_NS, "svg");
    map.setAttribute("id", "topic-map");
    map.setAttribute("viewBox", "-1.2 -1.2 2.4 2.4");
    this.root.append(map);
    this.root.append(el("aside", { id: "dossier" }));
    this.root.append(el("div", { id: "census" }));
  }

  private thresholdControls(): HTMLElement {
    const box = el("div", { class: "controls" });
    const grid = this.summary.sweep_grid;
    for (const which of ["ct", "tc"] as const) {
      const label = el(
        "label",
        {},
        which === "ct" ? "cluster→topic τ " : "topic→cluster τ "
      );
      const slider = el("input", {
        type: "range",
        min: String(Math.min(...grid)),
        max: String(Math.max(...grid)),
        step: "0.05",
        value: String(which === "ct" ? this.state.tauCt : this.state.tauTc),
      });
      const free = el("input", {
        type: "number",
        min: "0.01",
        max: "1",
        step: "0.01",
        value: slider.value,
      });
      slider.addEventListener("change", () => {
        this.applyThreshold(which, Number(slider.value), false);
        free.value = String(which === "ct" ? this.state.tauCt : this.state.tauTc);
      });
      free.addEventListener("change", () => {
        this.applyThreshold(which, Number(free.value), true);
      });
      label.append(slider, free);
      box.append(label);
    }
    const sideSel = el("select", { id: "side" });
    for (const s of ["combined", "cluster-to-topic", "topic-to-cluster"]) {
      sideSel.append(el("option", { value: s }, s));
    }
    sideSel.addEventListener("change", () => {
      this.state = { ...this.state, side: sideSel.value as Side };
      void this.refreshGraph();
    });
    box.append(sideSel);
    return box;
  }

  private applyThreshold(which: "ct" | "tc", value: number, freeEntry: boolean): void {
    try {
      this.state = setThreshold(
        this.state,
        which,
        value,
        this.summary.sweep_grid,
        freeEntry
      );
    } catch (e) {
      this.showError(e);
      return;
    }
    void this.refreshGraph();
  }

  private effectiveThresholds(): [number, number] {
    // single-sided views disable the other side (any value above 1)
    if (this.state.side === "cluster-to-topic") return [this.state.tauCt, 1.01];
    if (this.state.side === "topic-to-cluster") return [1.01, this.state.tauTc];
    return [this.state.tauCt, this.state.tauTc];
  }

  private async refreshGraph(): Promise<void> {
    const [tct, ttc] = this.effectiveThresholds();
    try {
      const payload = await this.client.relations(tct, ttc);
      this.clearError();
      const view = relationGraphView(payload);
      const svg = document.getElementById("relation-graph")!;
      svg.innerHTML = "";
      const pos = new Map(view.nodes.map((n) => [n.key, n]));
      for (const e of view.edges) {
        const a = pos.get(e.from)!;
        const b = pos.get(e.to)!;
        const line = document.createElementNS(SVG_NS, "line");
        line.setAttribute("x1", String(100 + a.x * 600));
        line.setAttribute("y1", String(50 + a.y * 500));
        line.setAttribute("x2", String(100 + b.x * 600));
        line.setAttribute("y2", String(50 + b.y * 500));
        line.setAttribute("class", "edge");
        const tip = document.createElementNS(SVG_NS, "title");
        tip.textContent = e.tooltip;
        line.append(tip);
        svg.append(line);
      }
      for (const n of view.nodes) {
        const g = document.createElementNS(SVG_NS, "g");
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", String(100 + n.x * 600));
        circle.setAttribute("cy", String(50 + n.y * 500));
        circle.setAttribute("r", "10");
        circle.setAttribute("class", `${n.kind} badge-${n.badge}`);
        g.append(circle);
        g.addEventListener("click", () => void this.openDossier(n.key));
        svg.append(g);
      }
      const census = document.getElementById("census")!;
      census.textContent = Object.entries(view.census)
        .map(([k, v]) => `${k}: ${v}`)
        .join("   ");
    } catch (e) {
      this.showError(e);
    }
  }

  private async refreshTopicMap(): Promise<void> {
    try {
      const view = topicMapView(await this.client.distances());
      const svg = document.getElementById("topic-map")!;
      svg.innerHTML = "";
      for (const c of view.circles) {
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", String(c.x));
        circle.setAttribute("cy", String(c.y));
        circle.setAttribute("r", String(c.radius * 0.3));
        circle.setAttribute("class", "topic-circle");
        const tip = document.createElementNS(SVG_NS, "title");
        tip.textContent = `topic ${c.id} (prevalence ${c.prevalence.toFixed(3)})`;
        circle.append(tip);
        circle.addEventListener("click", () => void this.openDossier(`topic:${c.id}`));
        svg.append(circle);
      }
    } catch (e) {
      this.showError(e);
    }
  }

  private async openDossier(entity: string): Promise<void> {
    try {
      this.state = select(this.state, entity, this.summary);
      const [kind, id] = entity.split(":");
      const payload =
        kind === "topic"
          ? await this.client.topicDossier(Number(id))
          : await this.client.clusterDossier(Number(id));
      this.clearError();
      this.renderDossier(dossierView(payload));
    } catch (e) {
      this.showError(e);
    }
  }

  private renderDossier(view: ReturnType<typeof dossierView>): void {
    const box = document.getElementById("dossier")!;
    box.innerHTML = "";
    box.append(el("h2", {}, view.entity));
    if (view.humanLabel) box.append(el("p", { class: "label" }, view.humanLabel));

    const terms = el("ul", { class: "terms" });
    const maxScore = Math.max(...view.termBars.map((b) => b.score), 1e-12);
    for (const bar of view.termBars) {
      const li = el("li", {}, `${bar.term} (${bar.score.toFixed(3)})`);
      li.style.setProperty("--w", String(bar.score / maxScore));
      terms.append(li);
    }
    box.append(terms);

    const docs = el("ol", { class: "docs" });
    for (const d of view.topDocs) {
      docs.append(el("li", {}, `${d.id} (${d.score.toFixed(3)})`));
    }
    box.append(docs);

    for (const path of view.rollupPaths) {
      box.append(el("p", { class: "rollup" }, path.join(" › ")));
    }

    const form = el("form");
    const input = el("input", { type: "text", placeholder: "label…" });
    const save = el("button", { type: "submit" }, "save label");
    form.append(input, save);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const entity = view.entity;
      this.queue
        .submit(entity, input.value)
        .then(() => this.openDossier(entity))
        .catch((e) => this.showError(e));
    });
    box.append(form);
  }
}

export function boot(base = ""): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  void new App(new Client(base), root).start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
