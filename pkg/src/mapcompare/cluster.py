"""Direct-citation network clustering.

Builds the undirected citation graph, clusters it with the Leiden algorithm
under the constant Potts model quality function
    V(x) = sum_{i<j} delta(x_i, x_j) * (a_ij - gamma * s_i * s_j),
produces a nested macro/meso/micro hierarchy by clustering aggregated cluster
graphs, selects field clusters by publication share, and groups selected areas
into top-level categories.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .corpus import Document

__all__ = [
    "CitationGraph",
    "ClusterLevel",
    "ClusterSolution",
    "AreaSelection",
    "build_graph",
    "leiden",
    "hierarchy",
    "select_areas",
    "group_areas",
    "cpm_quality",
]

_EPS = 1e-12


class CitationGraph:
    """Undirected, unweighted citation graph over corpus documents."""

    def __init__(self, node_ids: list[str], edges: set[tuple[int, int]]):
        self.node_ids = list(node_ids)
        self.index = {d: i for i, d in enumerate(self.node_ids)}
        self.edges = {(min(i, j), max(i, j)) for i, j in edges if i != j}
        self.adj: list[set[int]] = [set() for _ in self.node_ids]
        for i, j in self.edges:
            self.adj[i].add(j)
            self.adj[j].add(i)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def weighted_adj(self) -> list[dict[int, float]]:
        return [{j: 1.0 for j in nbrs} for nbrs in self.adj]


def build_graph(docs: list[Document]) -> CitationGraph:
    """Symmetrize citations; references outside the corpus are dropped."""
    index = {d.id: i for i, d in enumerate(docs)}
    edges = set()
    for i, doc in enumerate(docs):
        for ref in doc.references:
            j = index.get(ref)
            if j is not None and j != i:
                edges.add((min(i, j), max(i, j)))
    return CitationGraph([d.id for d in docs], edges)


# --- CPM / Leiden core (index-level, weighted, sized nodes) -----------------

def cpm_quality(
    adj: list[dict[int, float]],
    sizes: np.ndarray,
    membership: np.ndarray,
    gamma: float,
) -> float:
    """CPM quality of a partition: internal weight minus gamma-weighted pairs."""
    internal = 0.0
    for i, nbrs in enumerate(adj):
        for j, w in nbrs.items():
            if j > i and membership[i] == membership[j]:
                internal += w
    penalty = 0.0
    comm_size: dict[int, float] = {}
    comm_sumsq: dict[int, float] = {}
    for i, c in enumerate(membership):
        c = int(c)
        comm_size[c] = comm_size.get(c, 0.0) + sizes[i]
        comm_sumsq[c] = comm_sumsq.get(c, 0.0) + sizes[i] ** 2
    for c, total in comm_size.items():
        penalty += (total * total - comm_sumsq[c]) / 2.0
    return internal - gamma * penalty


def _local_move(adj, sizes, membership, gamma, rng):
    """Queue-based best-gain node moves; returns True if anything moved."""
    n = len(adj)
    comm_size: dict[int, float] = {}
    for i in range(n):
        c = int(membership[i])
        comm_size[c] = comm_size.get(c, 0.0) + sizes[i]
    next_comm = max(comm_size) + 1 if comm_size else 0
    order = rng.permutation(n)
    queue = deque(int(v) for v in order)
    in_queue = [True] * n
    moved_any = False
    while queue:
        v = queue.popleft()
        in_queue[v] = False
        a = int(membership[v])
        w_to: dict[int, float] = {}
        for u, w in adj[v].items():
            w_to[int(membership[u])] = w_to.get(int(membership[u]), 0.0) + w
        w_va = w_to.get(a, 0.0)
        s_v = sizes[v]
        rest_a = comm_size[a] - s_v
        best_gain = _EPS
        best_comm = a
        for b in sorted(w_to):
            if b == a:
                continue
            gain = (w_to[b] - w_va) - gamma * s_v * (comm_size[b] - rest_a)
            if gain > best_gain:
                best_gain = gain
                best_comm = b
        # leaving for a fresh singleton community
        gain = -w_va - gamma * s_v * (0.0 - rest_a)
        if gain > best_gain:
            best_gain = gain
            best_comm = next_comm
        if best_comm != a:
            membership[v] = best_comm
            comm_size[a] = rest_a
            comm_size[best_comm] = comm_size.get(best_comm, 0.0) + s_v
            if best_comm == next_comm:
                next_comm += 1
            moved_any = True
            for u in adj[v]:
                if int(membership[u]) != best_comm and not in_queue[u]:
                    queue.append(u)
                    in_queue[u] = True
    return moved_any


def _refine(adj, sizes, membership, gamma, rng):
    """Split each community into well-merged subcommunities (singletons merged
    greedily within their parent community)."""
    n = len(adj)
    refined = np.arange(n, dtype=np.int64)
    sub_size = {i: float(sizes[i]) for i in range(n)}
    singleton = [True] * n
    for v in (int(x) for x in rng.permutation(n)):
        if not singleton[v]:
            continue
        w_to: dict[int, float] = {}
        for u, w in adj[v].items():
            if membership[u] == membership[v]:
                r = int(refined[u])
                if r != v:
                    w_to[r] = w_to.get(r, 0.0) + w
        best_gain = 0.0
        best_r = -1
        for r, w_vr in sorted(w_to.items()):
            gain = w_vr - gamma * sizes[v] * sub_size[r]
            if gain > best_gain + _EPS:
                best_gain = gain
                best_r = r
        if best_r >= 0:
            sub_size[best_r] += sub_size.pop(v)
            refined[v] = best_r
            singleton[v] = False
            singleton[best_r] = False
    return refined


def _split_disconnected(adj, membership):
    """Split communities into connected components (never decreases CPM)."""
    n = len(adj)
    new_membership = np.full(n, -1, dtype=np.int64)
    next_c = 0
    for start in range(n):
        if new_membership[start] >= 0:
            continue
        c = membership[start]
        comp = [start]
        new_membership[start] = next_c
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if membership[u] == c and new_membership[u] < 0:
                    new_membership[u] = next_c
                    comp.append(u)
                    queue.append(u)
        next_c += 1
    return new_membership


def _merge_pass(adj, sizes, membership, gamma):
    """Merge connected community pairs while any merge has positive gain."""
    improved = False
    while True:
        comm_size: dict[int, float] = {}
        for i, c in enumerate(membership):
            c = int(c)
            comm_size[c] = comm_size.get(c, 0.0) + sizes[i]
        between: dict[tuple[int, int], float] = {}
        for i, nbrs in enumerate(adj):
            ci = int(membership[i])
            for j, w in nbrs.items():
                if j > i:
                    cj = int(membership[j])
                    if ci != cj:
                        key = (min(ci, cj), max(ci, cj))
                        between[key] = between.get(key, 0.0) + w
        best = None
        best_gain = _EPS
        for (a, b), w_ab in sorted(between.items()):
            gain = w_ab - gamma * comm_size[a] * comm_size[b]
            if gain > best_gain:
                best_gain = gain
                best = (a, b)
        if best is None:
            return improved
        a, b = best
        membership[membership == b] = a
        improved = True


def _project(agg_membership, node_map):
    """Membership of aggregate nodes -> membership of original nodes."""
    n_orig = sum(len(m) for m in node_map)
    out = np.empty(n_orig, dtype=np.int64)
    for agg, members in enumerate(node_map):
        out[members] = agg_membership[agg]
    return out


def _aggregate(adj, sizes, refined, node_map):
    comms = sorted(set(int(r) for r in refined))
    remap = {c: i for i, c in enumerate(comms)}
    new_node_map = [[] for _ in comms]
    for agg, members in enumerate(node_map):
        new_node_map[remap[int(refined[agg])]].extend(members)
    new_sizes = np.zeros(len(comms))
    for i, c in enumerate(refined):
        new_sizes[remap[int(c)]] += sizes[i]
    new_adj: list[dict[int, float]] = [{} for _ in comms]
    for i, nbrs in enumerate(adj):
        ci = remap[int(refined[i])]
        for j, w in nbrs.items():
            if j > i:
                cj = remap[int(refined[j])]
                if ci != cj:
                    new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
                    new_adj[cj][ci] = new_adj[cj].get(ci, 0.0) + w
    return new_adj, new_sizes, new_node_map, remap


def _leiden_run(adj, sizes, gamma, rng):
    """One randomized Leiden run (local move + refinement + aggregation loop,
    then a deterministic polish of node moves / merges / splits)."""
    n_orig = len(adj)
    cur_adj = adj
    cur_sizes = np.asarray(sizes, dtype=np.float64)
    node_map = [[i] for i in range(n_orig)]
    cur_memb = np.arange(len(adj), dtype=np.int64)
    while True:
        _local_move(cur_adj, cur_sizes, cur_memb, gamma, rng)
        n_comms = len(set(int(c) for c in cur_memb))
        if n_comms == len(cur_adj):
            break
        refined = _refine(cur_adj, cur_sizes, cur_memb, gamma, rng)
        if len(set(int(r) for r in refined)) == len(cur_adj):
            # refinement kept everything singleton: aggregation cannot shrink
            # the graph, so stop here and let the polish phase finish the job
            break
        # parent community of each refined subcommunity seeds the next level
        parent = {int(r): int(cur_memb[i]) for i, r in enumerate(refined)}
        cur_adj, cur_sizes, node_map, remap = _aggregate(
            cur_adj, cur_sizes, refined, node_map
        )
        cur_memb = np.array(
            [parent[r] for r, _ in sorted(remap.items(), key=lambda kv: kv[1])],
            dtype=np.int64,
        )
    membership = _project(cur_memb, node_map)
    # polish on the original graph until a CPM-local optimum is reached
    sizes = np.asarray(sizes, dtype=np.float64)
    while True:
        moved = _local_move(adj, sizes, membership, gamma, rng)
        membership = _split_disconnected(adj, membership)
        merged = _merge_pass(adj, sizes, membership, gamma)
        if not moved and not merged:
            break
    return _split_disconnected(adj, membership)


def leiden_partition(
    adj: list[dict[int, float]],
    sizes,
    gamma: float,
    seed: int = 0,
    n_restarts: int | None = None,
) -> np.ndarray:
    """Best-of-restarts Leiden partition; deterministic per seed.

    Returns a membership array with communities numbered by first occurrence.
    """
    if gamma <= 0:
        raise ValueError("resolution must be > 0")
    n = len(adj)
    if n == 0:
        raise ValueError("empty graph")
    if n_restarts is None:
        n_restarts = 8 if n <= 64 else 2
    sizes = np.asarray(sizes, dtype=np.float64)
    best = None
    best_q = -np.inf
    for r in range(n_restarts):
        rng = np.random.Generator(np.random.Philox(key=[seed, r]))
        memb = _leiden_run(adj, sizes, gamma, rng)
        q = cpm_quality(adj, sizes, memb, gamma)
        if q > best_q + _EPS:
            best_q = q
            best = memb
    return _canonical(best)


def _canonical(membership: np.ndarray) -> np.ndarray:
    remap: dict[int, int] = {}
    out = np.empty_like(membership)
    for i, c in enumerate(membership):
        c = int(c)
        if c not in remap:
            remap[c] = len(remap)
        out[i] = remap[c]
    return out


# --- solution types ---------------------------------------------------------

@dataclass
class ClusterLevel:
    resolution: float
    assignment: dict[str, int]  # doc id -> cluster id
    residual: set[int] = field(default_factory=set)  # undersized isolated clusters

    def clusters(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for doc, c in self.assignment.items():
            out.setdefault(c, []).append(doc)
        return out


@dataclass
class ClusterSolution:
    levels: list[ClusterLevel]  # coarse -> fine (macro, meso, micro)
    min_cluster_size: int
    seed: int

    @property
    def micro(self) -> ClusterLevel:
        return self.levels[-1]

    @property
    def assignment(self) -> dict[str, int]:
        return self.micro.assignment


@dataclass
class AreaSelection:
    field_count: dict[int, int]
    total_count: dict[int, int]
    share: dict[int, float]
    selected: set[int]
    min_share: float
    coverage: float  # fraction of in-field docs inside selected clusters


def _enforce_min_size(adj, sizes, membership, gamma, min_size):
    """Merge undersized communities into the best-gain neighboring community;
    isolated undersized communities become residual. Sizes are node sizes."""
    residual: set[int] = set()
    sizes = np.asarray(sizes, dtype=np.float64)
    while True:
        comm_nodes: dict[int, list[int]] = {}
        for i, c in enumerate(membership):
            comm_nodes.setdefault(int(c), []).append(i)
        comm_size = {c: sum(sizes[i] for i in nodes) for c, nodes in comm_nodes.items()}
        small = sorted(
            c
            for c, s in comm_size.items()
            if s < min_size and c not in residual
        )
        if not small:
            break
        c = min(small, key=lambda cc: (comm_size[cc], cc))
        w_to: dict[int, float] = {}
        for i in comm_nodes[c]:
            for j, w in adj[i].items():
                cj = int(membership[j])
                if cj != c:
                    w_to[cj] = w_to.get(cj, 0.0) + w
        if not w_to:
            residual.add(c)
            continue
        best = max(
            sorted(w_to),
            key=lambda b: w_to[b] - gamma * comm_size[c] * comm_size[b],
        )
        membership[membership == c] = best
    return membership, residual


def leiden(
    graph: CitationGraph,
    resolution: float,
    min_cluster_size: int = 1,
    seed: int = 0,
) -> ClusterSolution:
    """Single-level Leiden/CPM clustering of the citation graph."""
    adj = graph.weighted_adj()
    sizes = np.ones(graph.n_nodes)
    membership = leiden_partition(adj, sizes, resolution, seed=seed)
    residual: set[int] = set()
    if min_cluster_size > 1:
        membership, residual = _enforce_min_size(
            adj, sizes, membership, resolution, min_cluster_size
        )
        membership = _canonical(membership)
        # residual markers must survive relabeling
        residual = {
            int(membership[i])
            for i, c in enumerate(membership)
            if _undersized(membership, i, min_cluster_size)
        }
    assignment = {graph.node_ids[i]: int(membership[i]) for i in range(graph.n_nodes)}
    level = ClusterLevel(resolution=resolution, assignment=assignment, residual=residual)
    return ClusterSolution(levels=[level], min_cluster_size=min_cluster_size, seed=seed)


def _undersized(membership, i, min_size):
    return int(np.sum(membership == membership[i])) < min_size


def hierarchy(
    graph: CitationGraph,
    resolutions: list[float],
    min_cluster_size: int = 1,
    seed: int = 0,
) -> ClusterSolution:
    """Three-level (or n-level) nested clustering.

    resolutions are ordered coarse -> fine (macro, meso, micro) and must be
    strictly increasing. The finest level is clustered first; coarser levels
    cluster the aggregated cluster graph, so nesting holds by construction.
    """
    if len(resolutions) < 1:
        raise ValueError("need at least one resolution")
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be strictly increasing (coarse to fine)")
    adj = graph.weighted_adj()
    sizes = np.ones(graph.n_nodes)
    fine_res = resolutions[-1]
    micro_memb = leiden_partition(adj, sizes, fine_res, seed=seed)
    residual: set[int] = set()
    if min_cluster_size > 1:
        micro_memb, _ = _enforce_min_size(
            adj, sizes, micro_memb, fine_res, min_cluster_size
        )
        micro_memb = _canonical(micro_memb)
        residual = {
            int(micro_memb[i])
            for i in range(len(micro_memb))
            if _undersized(micro_memb, i, min_cluster_size)
        }

    levels = [
        ClusterLevel(
            resolution=fine_res,
            assignment={graph.node_ids[i]: int(micro_memb[i]) for i in range(graph.n_nodes)},
            residual=residual,
        )
    ]
    # aggregate upward for each coarser resolution
    cur_memb = micro_memb
    cur_adj, cur_sizes, node_map, _ = _aggregate(
        adj, sizes, cur_memb, [[i] for i in range(graph.n_nodes)]
    )
    for res in reversed(resolutions[:-1]):
        agg_memb = leiden_partition(cur_adj, cur_sizes, res, seed=seed)
        doc_memb = _canonical(_project(agg_memb, node_map))
        levels.insert(
            0,
            ClusterLevel(
                resolution=res,
                assignment={
                    graph.node_ids[i]: int(doc_memb[i]) for i in range(graph.n_nodes)
                },
            ),
        )
        cur_adj, cur_sizes, node_map, _ = _aggregate(
            cur_adj, cur_sizes, agg_memb, node_map
        )
    return ClusterSolution(levels=levels, min_cluster_size=min_cluster_size, seed=seed)


def select_areas(
    solution: ClusterSolution,
    docs: list[Document],
    min_share: float = 0.10,
) -> AreaSelection:
    """Select micro-level areas whose in-field publication share meets min_share."""
    in_field = {d.id: d.in_field for d in docs}
    level = solution.micro
    field_count: dict[int, int] = {}
    total_count: dict[int, int] = {}
    for doc_id, c in level.assignment.items():
        total_count[c] = total_count.get(c, 0) + 1
        if in_field.get(doc_id, False):
            field_count[c] = field_count.get(c, 0) + 1
    share = {
        c: field_count.get(c, 0) / total_count[c] for c in total_count
    }
    selected = {c for c, s in share.items() if s >= min_share}
    n_field = sum(1 for v in in_field.values() if v)
    covered = sum(
        1
        for doc_id, c in level.assignment.items()
        if c in selected and in_field.get(doc_id, False)
    )
    coverage = covered / n_field if n_field else 0.0
    return AreaSelection(
        field_count={c: field_count.get(c, 0) for c in total_count},
        total_count=total_count,
        share=share,
        selected=selected,
        min_share=min_share,
        coverage=coverage,
    )


def group_areas(
    solution: ClusterSolution,
    graph: CitationGraph,
    selection: AreaSelection | None = None,
    resolution: float = 0.9,
    min_size: int = 10,
    seed: int = 0,
) -> dict[int, int]:
    """Cluster selected areas into top-level categories.

    Builds the area-area network (edge weight = inter-area citation link
    count, association-strength normalized: 2W * w_ij / (s_i * s_j)), then
    clusters it with Leiden/CPM at the given resolution. Returns a category id
    per selected area.
    """
    level = solution.micro
    areas = sorted(
        selection.selected if selection is not None else set(level.assignment.values())
    )
    if not areas:
        raise ValueError("no selected areas to group")
    area_idx = {a: i for i, a in enumerate(areas)}
    doc_area = {
        graph.index[doc_id]: area_idx[c]
        for doc_id, c in level.assignment.items()
        if c in area_idx
    }
    raw: dict[tuple[int, int], float] = {}
    for i, j in graph.edges:
        ai = doc_area.get(i)
        aj = doc_area.get(j)
        if ai is None or aj is None or ai == aj:
            continue
        key = (min(ai, aj), max(ai, aj))
        raw[key] = raw.get(key, 0.0) + 1.0
    strength = np.zeros(len(areas))
    for (a, b), w in raw.items():
        strength[a] += w
        strength[b] += w
    total_w = sum(raw.values())
    adj: list[dict[int, float]] = [{} for _ in areas]
    for (a, b), w in raw.items():
        norm = 2.0 * total_w * w / (strength[a] * strength[b]) if total_w else 0.0
        adj[a][b] = norm
        adj[b][a] = norm
    sizes = np.ones(len(areas))
    membership = leiden_partition(adj, sizes, resolution, seed=seed)
    if min_size > 1:
        membership, _ = _enforce_min_size(adj, sizes, membership, resolution, min_size)
        membership = _canonical(membership)
    return {a: int(membership[area_idx[a]]) for a in areas}
