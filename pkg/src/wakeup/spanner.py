"""Randomized Baswana-Sen (2k-1)-spanner with an edge taxonomy.

Every spanner edge is recorded as a directed addition ``u -> v`` made by the
node ``u`` that was being processed:

* ``INTRA``: ``u``'s cluster was not sampled, ``u`` had a neighbor ``v`` in a
  sampled cluster and joined it through ``v`` (``v`` becomes ``u``'s parent);
* ``INTER``: ``u`` had no such neighbor and kept one edge to every adjacent
  cluster of the previous clustering, ``v`` being that cluster's smallest-ID
  member adjacent to ``u``.  The last iteration samples nothing, so every
  node still clustered ends this way.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean

import numpy as np

from .netgraph import Network, bfs_distances

__all__ = [
    "EdgeKind",
    "SpannerEdge",
    "Spanner",
    "build_spanner",
    "verify_stretch",
    "spanner_size_report",
    "write_spanner",
]


class EdgeKind(str, enum.Enum):
    INTRA = "intra"
    INTER = "inter"


@dataclass(frozen=True)
class SpannerEdge:
    u: int
    v: int
    kind: EdgeKind
    iteration: int
    cluster: int  # leader of the cluster u joined (INTRA) or connected to (INTER)

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.u, self.v), max(self.u, self.v))


@dataclass
class Spanner:
    k: int
    seed: int
    edges: list[SpannerEdge]
    # clusterings[i] maps each i-clustered node to its cluster leader; clusterings[k] == {}
    clusterings: list[dict[int, int]]
    # parents[i][u]: u's parent in its cluster tree after iteration i (absent for leaders)
    parents: list[dict[int, int]]
    finalized_at: list[int] = field(default_factory=list)

    def edge_set(self) -> set[tuple[int, int]]:
        return {e.key for e in self.edges}

    @property
    def size(self) -> int:
        return len(self.edge_set())

    def outgoing_inter_counts(self) -> dict[int, int]:
        counts: dict[int, int] = defaultdict(int)
        for e in self.edges:
            if e.kind is EdgeKind.INTER:
                counts[e.u] += 1
        return dict(counts)

    def intra_children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for e in self.edges:
            if e.kind is EdgeKind.INTRA and e.u not in out[e.v]:
                out[e.v].append(e.u)
        return dict(out)

    def incoming_inter(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for e in self.edges:
            if e.kind is EdgeKind.INTER and e.u not in out[e.v]:
                out[e.v].append(e.u)
        return dict(out)


def build_spanner(net: Network, k: int, seed: int) -> Spanner:
    """Run ``k`` iterations of cluster sampling with probability ``n^(-1/k)``.

    Decisions within an iteration are taken against the edge set as it stood
    when the iteration began; removals are applied afterwards.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = net.n
    ids = net.ids
    rng = np.random.default_rng(seed)
    prob = n ** (-1.0 / k)
    cluster = {v: v for v in range(n)}
    parent: dict[int, int] = {}
    alive = [set(row) for row in net.ports]
    edges: list[SpannerEdge] = []
    clusterings = [dict(cluster)]
    parents = [dict(parent)]
    finalized_at = [0] * n

    for i in range(1, k + 1):
        leaders = sorted(set(cluster.values()), key=ids.__getitem__)
        # one coin per leader, drawn in leader-ID order
        coins = rng.random(len(leaders)) if i < k else np.ones(len(leaders))
        sampled = {c for c, x in zip(leaders, coins) if x < prob}
        nxt = {v: c for v, c in cluster.items() if c in sampled}
        defeated = sorted((v for v, c in cluster.items() if c not in sampled), key=ids.__getitem__)
        removed: list[tuple[int, int]] = []
        joins: dict[int, tuple[int, int]] = {}
        for u in defeated:
            nbrs = [x for x in alive[u] if x in cluster]
            hits = [x for x in nbrs if x in nxt]
            if hits:
                v = min(hits, key=ids.__getitem__)
                c = cluster[v]
                edges.append(SpannerEdge(u, v, EdgeKind.INTRA, i, c))
                joins[u] = (c, v)
                removed += [(u, x) for x in nbrs if cluster[x] == c]
            else:
                groups: dict[int, list[int]] = defaultdict(list)
                for x in nbrs:
                    groups[cluster[x]].append(x)
                for c in sorted(groups, key=ids.__getitem__):
                    v = min(groups[c], key=ids.__getitem__)
                    edges.append(SpannerEdge(u, v, EdgeKind.INTER, i, c))
                removed += [(u, x) for x in nbrs]
                finalized_at[u] = i
        for u, x in removed:
            alive[u].discard(x)
            alive[x].discard(u)
        for u, (c, v) in joins.items():
            nxt[u] = c
            parent[u] = v
        for u in [u for u in parent if u not in nxt]:
            del parent[u]
        for v, c in nxt.items():
            for x in [x for x in alive[v] if nxt.get(x) == c]:
                alive[v].discard(x)
                alive[x].discard(v)
        cluster = nxt
        clusterings.append(dict(cluster))
        parents.append(dict(parent))

    return Spanner(k, seed, edges, clusterings, parents, finalized_at)


def verify_stretch(net: Network, spanner_edges, k: int, max_n: int = 500) -> bool:
    """True iff every edge of ``net`` is stretched to at most ``2k - 1`` hops."""
    if net.n > max_n:
        raise ValueError(f"n={net.n} exceeds the stretch-check bound {max_n}")
    adj: list[set[int]] = [set() for _ in range(net.n)]
    for u, v in spanner_edges:
        if not net.has_edge(u, v):
            raise ValueError(f"spanner edge {u}-{v} is not an edge of the graph")
        adj[u].add(v)
        adj[v].add(u)
    sub = Network(tuple(tuple(sorted(a)) for a in adj), net.ids)
    limit = 2 * k - 1
    for u in range(net.n):
        dist = bfs_distances(sub, [u])
        if any(dist[v] > limit for v in net.ports[u]):
            return False
    return True


def spanner_size_report(net: Network, k: int, seeds) -> dict:
    """Edge-count and outgoing-inter-edge statistics over several builds."""
    sizes, max_out = [], []
    for s in seeds:
        sp = build_spanner(net, k, s)
        sizes.append(sp.size)
        max_out.append(max(sp.outgoing_inter_counts().values(), default=0))
    scale = k * net.n ** (1 + 1 / k)
    return {
        "n": net.n,
        "m": net.m,
        "k": k,
        "builds": len(sizes),
        "mean_size": mean(sizes),
        "max_size": max(sizes),
        "mean_size_over_k_n_1_plus_1_over_k": mean(sizes) / scale,
        "max_outgoing_inter": max(max_out),
        "mean_max_outgoing_inter": mean(max_out),
        "n_to_1_over_k": net.n ** (1 / k),
        "ln_n": math.log(net.n),
    }


def write_spanner(sp: Spanner, path: str | Path) -> None:
    """Edge list ``u v kind iteration`` (node indices, one line per addition)."""
    Path(path).write_text(
        "".join(f"{e.u} {e.v} {e.kind.value} {e.iteration}\n" for e in sp.edges)
    )
