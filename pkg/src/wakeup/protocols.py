"""Node-level wake-up protocols: flooding, randomized DFS-rank (KT1) and the
advice-driven dispatch shell."""
from __future__ import annotations

from collections import defaultdict

from .advising import BroadcastRuntime, CenRuntime
from .asim import Message, NodeContext, NodeRuntime, Protocol, ProtocolFault, Simulator
from .netgraph import Knowledge

__all__ = [
    "FloodingProtocol",
    "DfsRankProtocol",
    "AdviceProtocol",
    "TokenAudit",
    "flooding_runtime",
    "dfs_rank_runtime",
    "advice_runtime",
    "draw_rank",
    "make_protocol",
]


class _Flood(NodeRuntime):
    def on_wake(self, ctx: NodeContext, trigger: Message | None) -> None:
        for port in range(1, ctx.degree + 1):
            ctx.send(port, "WAKE")


class FloodingProtocol(Protocol):
    """Every node broadcasts once on all its ports when it first wakes."""

    name = "flooding"

    def runtime(self, ctx: NodeContext) -> NodeRuntime:
        return _Flood()


def flooding_runtime() -> FloodingProtocol:
    return FloodingProtocol()


# -- DFS-rank -------------------------------------------------------------------


def draw_rank(rng, n: int, c: int) -> int:
    """Uniform rank from ``1..n**c``."""
    return rng.randint(1, max(2, n) ** c)


class _Token:
    """The single in-flight copy of one DFS traversal.

    Only one copy exists at a time, so the visited list is extended in place
    rather than copied per hop.
    """

    __slots__ = ("key", "visited", "seen")

    def __init__(self, key: tuple[int, int]):
        self.key = key
        self.visited: list[int] = []
        self.seen: set[int] = set()

    def visit(self, node_id: int) -> None:
        self.visited.append(node_id)
        self.seen.add(node_id)


class TokenAudit:
    """Records every token hop and checks that each traversal is a tree walk."""

    def __init__(self):
        self.steps: dict[tuple[int, int], list[tuple[int, int, str]]] = defaultdict(list)
        self.violations: list[str] = []

    def record(self, key, src: int, dst: int, kind: str) -> None:
        self.steps[key].append((src, dst, kind))

    def resolve(self, net) -> None:
        """Turn recorded ``(node index, port)`` hops into ``(src ID, dst ID)``."""
        for key, steps in self.steps.items():
            self.steps[key] = [
                (net.ids[s], net.ids[net.ports[s][p - 1]], kind) for s, p, kind in steps
            ]

    def check(self) -> list[str]:
        problems = []
        for key, steps in self.steps.items():
            reached = {key[1]}
            used: dict[frozenset, int] = defaultdict(int)
            for src, dst, kind in steps:
                e = frozenset((src, dst))
                if kind == "TOKEN":
                    if dst in reached:
                        problems.append(f"token {key}: revisits node {dst}")
                    reached.add(dst)
                elif used[e] != 1:
                    problems.append(f"token {key}: backtrack over {src}-{dst} is not a once-used tree edge")
                used[e] += 1
            if len(used) != len(reached) - 1:
                problems.append(f"token {key}: traversed edges do not form a tree")
        self.violations = problems
        return problems


class _DfsRank(NodeRuntime):
    def __init__(self, proto: DfsRankProtocol, ctx: NodeContext):
        self.proto = proto
        self.best = (0, 0)
        self.parent_of: dict[tuple[int, int], int] = {}
        self.nbr_order: list[tuple[int, int]] | None = None

    def on_wake(self, ctx: NodeContext, trigger: Message | None) -> None:
        # neighbor IDs are static KT1 knowledge; cache them sorted by ID
        ids = ctx.neighbor_ids
        self.nbr_order = sorted((nid, port) for port, nid in enumerate(ids, start=1))
        if trigger is not None:
            return
        key = (draw_rank(ctx.rng, ctx.n, self.proto.c), ctx.id)
        token = _Token(key)
        token.visit(ctx.id)
        self.best = key
        self._advance(ctx, token)

    def on_message(self, ctx: NodeContext, msg: Message) -> None:
        token: _Token = msg.data
        key = token.key
        if msg.kind == "TOKEN":
            if ctx.id in token.seen:
                raise ProtocolFault(ctx.index, f"token {key} revisits its own path")
            if key > self.best:
                self.best = key
                token.visit(ctx.id)
                self.parent_of[key] = msg.arrival_port
                self._advance(ctx, token)
            return
        # a backtracking token returns to a node that accepted it earlier
        if key < self.best:
            return
        self._advance(ctx, token)

    def _advance(self, ctx: NodeContext, token: _Token) -> None:
        for nid, port in self.nbr_order:
            if nid not in token.seen:
                self._send(ctx, port, "TOKEN", token)
                return
        parent = self.parent_of.get(token.key)
        if parent is not None:
            self._send(ctx, parent, "BACK", token)
        # the origin retires the token once it has nowhere left to go

    def _send(self, ctx: NodeContext, port: int, kind: str, token: _Token) -> None:
        ctx.record_forward(token.key)
        if self.proto.audit is not None:
            self.proto.audit.record(token.key, ctx.index, port, kind)
        ctx.send(port, kind, token, self.proto.token_bits(ctx.n, len(token.visited)))


class DfsRankProtocol(Protocol):
    """Randomized rank-based DFS token passing for KT1 LOCAL."""

    name = "dfs-rank"
    requires_knowledge = Knowledge.KT1

    def __init__(self, c: int = 4, audit: bool = True):
        if c < 2:
            raise ValueError("c must be >= 2")
        self.c = c
        self.audited = audit
        self.audit: TokenAudit | None = None

    def start(self, sim: Simulator) -> None:
        self.audit = TokenAudit() if self.audited else None

    def token_bits(self, n: int, visited: int) -> int:
        id_bits = max(1, n.bit_length())
        return self.c * id_bits + id_bits * (1 + visited) + 1

    def runtime(self, ctx: NodeContext) -> NodeRuntime:
        return _DfsRank(self, ctx)

    def finish(self, sim: Simulator) -> None:
        if self.audit is not None:
            self.audit.resolve(sim.net)
            problems = self.audit.check()
            if problems:
                raise ProtocolFault(-1, "token tree property violated: " + "; ".join(problems[:3]))


def dfs_rank_runtime(c: int = 4, audit: bool = True) -> DfsRankProtocol:
    """Factory for the DFS-rank protocol.  Algorithm randomness comes from
    the ``rng_seed`` given to the simulator run."""
    return DfsRankProtocol(c, audit)


# -- advice shell -----------------------------------------------------------------


class AdviceProtocol(Protocol):
    """Delegates each node to the decoder of an advising scheme."""

    requires_advice = True

    def __init__(self, scheme: str):
        if scheme in ("basic-bfs", "scheme-a"):
            self._make = lambda ctx: BroadcastRuntime(scheme)
        elif scheme == "scheme-b" or scheme.startswith("spanner:"):
            if scheme.startswith("spanner:"):
                try:
                    k = int(scheme.split(":", 1)[1])
                except ValueError:
                    raise ValueError(f"bad spanner scheme id {scheme!r}") from None
                if k < 1:
                    raise ValueError("spanner k must be >= 1")
            self._make = lambda ctx: CenRuntime(ctx.n)
        else:
            raise ValueError(f"unknown advising scheme {scheme!r}")
        self.scheme = scheme
        self.name = f"advice:{scheme}"

    def check(self, net, advice) -> None:
        super().check(net, advice)
        if advice.scheme != self.scheme:
            raise ValueError(f"advice was produced by {advice.scheme!r}, protocol expects {self.scheme!r}")
        if len(advice) != net.n:
            raise ValueError("advice map size does not match the network")

    def runtime(self, ctx: NodeContext) -> NodeRuntime:
        return self._make(ctx)


def advice_runtime(scheme: str) -> AdviceProtocol:
    return AdviceProtocol(scheme)


def make_protocol(protocol_id: str, c: int = 4) -> Protocol:
    """Resolve ``flooding``, ``dfs-rank`` or ``advice:<scheme>``."""
    if protocol_id == "flooding":
        return FloodingProtocol()
    if protocol_id == "dfs-rank":
        return DfsRankProtocol(c)
    if protocol_id.startswith("advice:"):
        return AdviceProtocol(protocol_id.split(":", 1)[1])
    raise ValueError(f"unknown protocol {protocol_id!r}")
