"""Networks with port numbering, instance generators and exact graph oracles.

Nodes are addressed internally by index ``0..n-1``.  Each node also carries a
distinct positive integer ID, which is what protocols see, and a port mapping
``ports[v][j - 1]`` giving the neighbor index reached through port ``j``.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Knowledge",
    "Network",
    "WakeSchedule",
    "Tree",
    "GraphError",
    "DisconnectedGraphError",
    "UnsupportedInstanceError",
    "from_edges",
    "generate_random_connected",
    "generate_lb_family_G",
    "generate_lb_family_Gk",
    "path_graph",
    "star_graph",
    "complete_graph",
    "bfs_tree",
    "bfs_distances",
    "awake_distance",
    "diameter",
    "is_connected",
    "write_network",
    "read_network",
    "write_schedule",
    "read_schedule",
]


class GraphError(ValueError):
    """Invalid graph parameters or structure."""


class DisconnectedGraphError(GraphError):
    pass


class UnsupportedInstanceError(GraphError):
    pass


class Knowledge(str, enum.Enum):
    KT0 = "KT0"
    KT1 = "KT1"


@dataclass(frozen=True)
class Network:
    """Simple undirected graph with per-node port maps and node IDs.

    Attributes
    ----------
    ports : tuple of tuples
        ``ports[v][j]`` is the neighbor index behind port ``j + 1`` of ``v``.
    ids : tuple of int
        ``ids[v]`` is the ID of node ``v``; all distinct and >= 1.
    knowledge : Knowledge
        What nodes know initially (KT0: degree and own ID; KT1: also the
        neighbor IDs).
    """

    ports: tuple[tuple[int, ...], ...]
    ids: tuple[int, ...]
    knowledge: Knowledge = Knowledge.KT0
    _port_of: tuple[dict[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.ports)
        if len(self.ids) != n:
            raise GraphError("ids and ports disagree on node count")
        if len(set(self.ids)) != n or any(i < 1 for i in self.ids):
            raise GraphError("node IDs must be distinct positive integers")
        inverse = []
        for v, row in enumerate(self.ports):
            inv = {}
            for j, u in enumerate(row, start=1):
                if u == v or not 0 <= u < n:
                    raise GraphError(f"node {v}: port {j} leads to invalid node {u}")
                if u in inv:
                    raise GraphError(f"node {v}: duplicate neighbor {u}")
                inv[u] = j
            inverse.append(inv)
        for v, inv in enumerate(inverse):
            for u in inv:
                if v not in inverse[u]:
                    raise GraphError(f"edge {v}-{u} is not symmetric")
        object.__setattr__(self, "knowledge", Knowledge(self.knowledge))
        object.__setattr__(self, "_port_of", tuple(inverse))

    @property
    def n(self) -> int:
        return len(self.ports)

    @property
    def m(self) -> int:
        return sum(len(row) for row in self.ports) // 2

    def degree(self, v: int) -> int:
        return len(self.ports[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.ports[v]

    def port(self, v: int, j: int) -> int:
        """Neighbor index behind port ``j`` (1-based) of ``v``."""
        if not 1 <= j <= len(self.ports[v]):
            raise IndexError(f"node {v} has no port {j}")
        return self.ports[v][j - 1]

    def port_to(self, v: int, u: int) -> int:
        """Inverse port map: the port of ``v`` leading to neighbor ``u``."""
        return self._port_of[v][u]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._port_of[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(v, u) for v, row in enumerate(self.ports) for u in row if v < u]

    def index_of(self, node_id: int) -> int:
        return self.ids.index(node_id)

    def with_knowledge(self, knowledge: Knowledge | str) -> Network:
        return Network(self.ports, self.ids, Knowledge(knowledge))


@dataclass(frozen=True)
class WakeSchedule:
    """Adversarial wake-up times, fixed before execution.

    ``entries`` holds ``(node_index, tick)`` pairs.
    """

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        entries = tuple((int(v), int(t)) for v, t in self.entries)
        if not entries:
            raise ValueError("a wake schedule must wake at least one node")
        if any(t < 0 for _, t in entries):
            raise ValueError("wake ticks must be non-negative")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def at_zero(cls, nodes: Iterable[int]) -> WakeSchedule:
        return cls(tuple((v, 0) for v in nodes))

    @property
    def nodes(self) -> set[int]:
        return {v for v, _ in self.entries}

    @property
    def first_tick(self) -> int:
        return min(t for _, t in self.entries)


@dataclass(frozen=True)
class Tree:
    """Rooted spanning tree as parent pointers (``-1`` at the root)."""

    root: int
    parent: tuple[int, ...]
    depth: tuple[int, ...]

    def children(self, v: int) -> list[int]:
        return [u for u, p in enumerate(self.parent) if p == v]

    def children_map(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.parent]
        for u, p in enumerate(self.parent):
            if p >= 0:
                out[p].append(u)
        return out

    def tree_degree(self) -> list[int]:
        deg = [0] * len(self.parent)
        for u, p in enumerate(self.parent):
            if p >= 0:
                deg[u] += 1
                deg[p] += 1
        return deg

    def neighbors_map(self) -> list[list[int]]:
        out = self.children_map()
        for u, p in enumerate(self.parent):
            if p >= 0:
                out[u].append(p)
        return out


# -- construction -----------------------------------------------------------


def from_edges(
    n: int,
    edges: Iterable[tuple[int, int]],
    *,
    ids: Sequence[int] | None = None,
    knowledge: Knowledge | str = Knowledge.KT0,
    rng: np.random.Generator | None = None,
) -> Network:
    """Build a network from an edge list.

    Ports follow ascending neighbor index unless ``rng`` is given, in which
    case every node gets an independent uniformly random port bijection.
    """
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            raise GraphError(f"self-loop at {u}")
        adj[u].add(v)
        adj[v].add(u)
    rows = []
    for v in range(n):
        row = sorted(adj[v])
        if rng is not None and len(row) > 1:
            row = [row[i] for i in rng.permutation(len(row))]
        rows.append(tuple(row))
    if ids is None:
        ids = range(1, n + 1)
    return Network(tuple(rows), tuple(int(i) for i in ids), Knowledge(knowledge))


def generate_random_connected(
    n: int, m: int, seed: int, knowledge: Knowledge | str = Knowledge.KT1
) -> Network:
    """Random connected simple graph with exactly ``n`` nodes and ``m`` edges.

    A random recursive spanning tree is completed with uniformly chosen extra
    edges.  Ports are uniform random bijections and IDs a random permutation
    of ``1..n``; everything derives from ``seed``.
    """
    max_m = n * (n - 1) // 2
    if n < 2 or not n - 1 <= m <= max_m:
        raise GraphError(f"infeasible (n={n}, m={m}): need n >= 2 and n-1 <= m <= {max_m}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges: set[tuple[int, int]] = set()
    for i in range(1, n):
        a, b = int(order[i]), int(order[rng.integers(i)])
        edges.add((min(a, b), max(a, b)))
    extra = m - (n - 1)
    if extra:
        if 2 * m <= max_m:
            while len(edges) < m:
                a, b = (int(x) for x in rng.integers(n, size=2))
                if a != b:
                    edges.add((min(a, b), max(a, b)))
        else:
            iu, ju = np.triu_indices(n, k=1)
            free = [(int(a), int(b)) for a, b in zip(iu, ju) if (int(a), int(b)) not in edges]
            pick = rng.choice(len(free), size=extra, replace=False)
            edges.update(free[int(i)] for i in np.sort(pick))
    ids = rng.permutation(n) + 1
    return from_edges(n, sorted(edges), ids=ids, knowledge=knowledge, rng=rng)


def generate_lb_family_G(
    n: int,
    seed: int,
    id_permutation: Sequence[int] | None = None,
    knowledge: Knowledge | str = Knowledge.KT0,
) -> tuple[Network, WakeSchedule]:
    """Sample the lower-bound graph on ``U ∪ V ∪ W`` (``3n`` nodes).

    Indices ``0..n-1`` are U, ``n..2n-1`` are the center nodes V and
    ``2n..3n-1`` are W.  U×V is complete bipartite and ``v_i``-``w_i`` is a
    perfect matching.  All of V is woken at tick 0.  IDs default to the
    identity order ``1..3n``; pass ``id_permutation`` to fix another one.
    """
    if n < 1:
        raise GraphError("n must be >= 1")
    edges = [(u, n + i) for u in range(n) for i in range(n)]
    edges += [(n + i, 2 * n + i) for i in range(n)]
    ids = list(id_permutation) if id_permutation is not None else list(range(1, 3 * n + 1))
    if sorted(ids) != list(range(1, 3 * n + 1)):
        raise GraphError("id_permutation must be a permutation of 1..3n")
    net = from_edges(3 * n, edges, ids=ids, knowledge=knowledge, rng=np.random.default_rng(seed))
    return net, WakeSchedule.at_zero(range(n, 2 * n))


def generate_lb_family_Gk(n: int, k: int, seed: int):
    # Needs a girth >= k+5 regular bipartite construction; deliberately absent.
    raise UnsupportedInstanceError(
        "the high-girth family G_k is not provided; use generate_lb_family_G"
    )


def path_graph(n: int, knowledge: Knowledge | str = Knowledge.KT1) -> Network:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)], knowledge=knowledge)


def star_graph(leaves: int, knowledge: Knowledge | str = Knowledge.KT0, seed: int | None = None) -> Network:
    """Star with center index 0 and ``leaves`` leaves."""
    rng = None if seed is None else np.random.default_rng(seed)
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], knowledge=knowledge, rng=rng)


def complete_graph(n: int, knowledge: Knowledge | str = Knowledge.KT1) -> Network:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], knowledge=knowledge)


# -- oracles ----------------------------------------------------------------


def bfs_distances(net: Network, sources: Iterable[int]) -> list[float]:
    """Multi-source hop distances; unreachable nodes get ``math.inf``."""
    dist: list[float] = [math.inf] * net.n
    queue = deque()
    for s in sources:
        if dist[s] != 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for u in net.ports[v]:
            if dist[u] == math.inf:
                dist[u] = dv
                queue.append(u)
    return dist


def is_connected(net: Network) -> bool:
    return net.n == 0 or math.inf not in bfs_distances(net, [0])


def bfs_tree(net: Network, root: int) -> Tree:
    """BFS tree where each node's parent is its smallest-ID neighbor one level up."""
    dist = bfs_distances(net, [root])
    if math.inf in dist:
        raise DisconnectedGraphError("bfs_tree requires a connected graph")
    parent = [-1] * net.n
    for v in range(net.n):
        if v == root:
            continue
        up = [u for u in net.ports[v] if dist[u] == dist[v] - 1]
        parent[v] = min(up, key=net.ids.__getitem__)
    return Tree(root, tuple(parent), tuple(int(d) for d in dist))


def awake_distance(net: Network, awake: Iterable[int]) -> float:
    """Largest hop distance from the awake set; ``math.inf`` if some node is unreachable."""
    awake = list(awake)
    if not awake:
        raise ValueError("awake set must be nonempty")
    dist = bfs_distances(net, awake)
    worst = max(dist)
    return worst if worst == math.inf else int(worst)


def diameter(net: Network) -> int:
    best = 0
    for s in range(net.n):
        ecc = max(bfs_distances(net, [s]))
        if ecc == math.inf:
            raise DisconnectedGraphError("diameter of a disconnected graph is undefined")
        best = max(best, int(ecc))
    return best


# -- files ------------------------------------------------------------------


def write_network(net: Network, path: str | Path) -> None:
    """Line format: ``n m knowledge`` then ``id deg p1 .. pdeg`` per node."""
    lines = [f"{net.n} {net.m} {net.knowledge.value}"]
    for v in range(net.n):
        lines.append(" ".join(str(x) for x in (net.ids[v], net.degree(v), *net.ports[v])))
    Path(path).write_text("\n".join(lines) + "\n")


def read_network(path: str | Path) -> Network:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows:
        raise GraphError(f"{path}: empty graph file")
    n, m, knowledge = int(rows[0][0]), int(rows[0][1]), rows[0][2]
    if len(rows) != n + 1:
        raise GraphError(f"{path}: expected {n} node lines, got {len(rows) - 1}")
    ids, ports = [], []
    for row in rows[1:]:
        vals = [int(x) for x in row]
        if len(vals) != vals[1] + 2:
            raise GraphError(f"{path}: degree mismatch on node line {row}")
        ids.append(vals[0])
        ports.append(tuple(vals[2:]))
    net = Network(tuple(ports), tuple(ids), Knowledge(knowledge))
    if net.m != m:
        raise GraphError(f"{path}: header says m={m}, ports give {net.m}")
    return net


def write_schedule(schedule: WakeSchedule, path: str | Path) -> None:
    Path(path).write_text("".join(f"{v} {t}\n" for v, t in schedule.entries))


def read_schedule(path: str | Path) -> WakeSchedule:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    return WakeSchedule(tuple((int(v), int(t)) for v, t in rows))
