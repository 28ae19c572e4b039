/** Integration tests against a real served run.
 *
 * Runs the bundled pipeline once into a temp directory, starts the HTTP
 * service as a child process, and checks that what the explorer would render
 * is exactly what the API reports. Includes a full service restart to prove
 * label persistence.
 */

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { LabelQueue } from "../src/state.js";
import { relationGraphView } from "../src/views.js";

const REPO = resolve(__dirname, "..", "..");
const PORT = 18934;
const BASE = `http://127.0.0.1:${PORT}`;
const DISABLED = 1.01; // any threshold above 1 turns that side off

let workDir: string;
let configPath: string;
let server: ChildProcess | null = null;
const client = new Client(BASE);

function writeConfig(): void {
  // fixture config with absolute paths plus our test port
  const fixture = readFileSync(join(REPO, "fixtures", "config.yaml"), "utf-8");
  const rewritten = fixture
    .replace(/^corpus:.*$/m, `corpus: ${join(REPO, "fixtures", "corpus.jsonl")}`)
    .replace(/^thesaurus:.*$/m, `thesaurus: ${join(REPO, "fixtures", "thesaurus.tsv")}`)
    .replace(/^output_dir:.*$/m, `output_dir: ${join(workDir, "out")}`);
  writeFileSync(configPath, rewritten + `host: 127.0.0.1\nport: ${PORT}\n`);
}

function runPipeline(): void {
  const res = spawnSync(
    "python3",
    ["-m", "mapcompare.cli", "all", "--config", configPath],
    { encoding: "utf-8" }
  );
  if (res.status !== 0) {
    throw new Error(`pipeline failed: ${res.stderr}`);
  }
}

async function startServer(): Promise<void> {
  server = spawn("python3", ["-m", "mapcompare.cli", "serve", "--config", configPath], {
    stdio: "ignore",
  });
  for (let i = 0; i < 100; i++) {
    try {
      await client.summary();
      return;
    } catch {
      await new Promise((r) => setTimeout(r, 200));
    }
  }
  throw new Error("service did not come up");
}

async function stopServer(): Promise<void> {
  if (!server) return;
  const proc = server;
  server = null;
  const gone = new Promise((r) => proc.once("exit", r));
  proc.kill("SIGTERM");
  await gone;
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "explorer-"));
  configPath = join(workDir, "config.yaml");
  writeConfig();
  runPipeline();
  await startServer();
}, 180_000);

afterAll(async () => {
  await stopServer();
});

describe("threshold slider vs relations payload", () => {
  it("edge counts match at every grid point, both sides", async () => {
    const grid = (await client.summary()).sweep_grid;
    expect(grid[0]).toBe(0.5);
    expect(grid[grid.length - 1]).toBeCloseTo(0.05, 10);

    for (const side of ["cluster-to-topic", "topic-to-cluster"] as const) {
      const stored = await client.sweep(side);
      expect(stored.map((p) => p.tau)).toEqual(grid);
      for (const point of stored) {
        const payload =
          side === "cluster-to-topic"
            ? await client.relations(point.tau, DISABLED)
            : await client.relations(DISABLED, point.tau);
        const view = relationGraphView(payload);
        // what the slider position renders == the live payload == the stored sweep
        expect(view.edges.length).toBe(payload.edges.length);
        expect(payload.edges).toEqual(point.graph.edges);
        expect(view.census).toEqual(point.census);
        expect(view.nodes.length).toBe(
          payload.topics.length + payload.clusters.length
        );
      }
    }
  }, 60_000);

  it("edge sets only grow as the threshold drops", async () => {
    const stored = await client.sweep("cluster-to-topic");
    for (let i = 1; i < stored.length; i++) {
      const prev = new Set(
        stored[i - 1].graph.edges.map((e) => `${e.topic}:${e.cluster}`)
      );
      const cur = new Set(stored[i].graph.edges.map((e) => `${e.topic}:${e.cluster}`));
      for (const key of prev) expect(cur.has(key)).toBe(true);
    }
  });
});

describe("dossier panel", () => {
  it("numbers equal the exported bundle payloads", async () => {
    const bundle = JSON.parse(
      readFileSync(join(workDir, "out", "export", "bundle.json"), "utf-8")
    );
    for (let t = 0; t < bundle.summary.n_topics; t++) {
      const api = await client.topicDossier(t);
      const exported = bundle.topics[t];
      expect(api.top_terms).toEqual(exported.top_terms);
      expect(api.top_docs).toEqual(exported.top_docs);
      expect(api.rollup_paths).toEqual(exported.rollup_paths);
    }
    const clusterApi = await client.clusterDossier(0);
    const clusterExport = bundle.clusters.find(
      (c: { entity: string }) => c.entity === "cluster:0"
    );
    expect(clusterApi.top_terms).toEqual(clusterExport.top_terms);
    expect(clusterApi.area).toEqual(clusterExport.area);
  });

  it("topic map coordinates equal the distances payload", async () => {
    const payload = await client.distances();
    const bundle = JSON.parse(
      readFileSync(join(workDir, "out", "export", "bundle.json"), "utf-8")
    );
    expect(payload).toEqual(bundle.distances);
  });
});

describe("labels", () => {
  it("round-trips and survives a service restart", async () => {
    await client.postLabel("topic:1", "planted domain one");
    expect((await client.topicDossier(1)).human_label).toBe("planted domain one");

    await stopServer();
    await startServer();

    expect((await client.topicDossier(1)).human_label).toBe("planted domain one");
    const records = await client.labels();
    expect(records["topic:1"].label).toBe("planted domain one");
  }, 60_000);

  it("serializes posts: at most one in flight", async () => {
    const queue = new LabelQueue(client);
    const a = queue.submit("cluster:0", "first");
    const b = queue.submit("cluster:0", "second");
    expect(queue.inFlight).toBe(2); // queued, not yet resolved
    await Promise.all([a, b]);
    expect(queue.inFlight).toBe(0);
    expect((await client.clusterDossier(0)).human_label).toBe("second");
  });

  it("unknown entities are rejected", async () => {
    await expect(client.postLabel("topic:99", "x")).rejects.toMatchObject({
      status: 404,
    });
  });
});
