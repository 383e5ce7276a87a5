"""Deterministic discrete-event simulation of the asynchronous model.

Time is integer ticks.  Every message gets an adversarial delay in
``[1, tau]`` that depends only on the directed channel, the message's index
on that channel and the adversary seed, so algorithm randomness can never
influence it.  Channels are FIFO and simultaneous deliveries are ordered by
global send sequence.
"""
from __future__ import annotations

import enum
import hashlib
import heapq
import json
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .netgraph import Knowledge, Network, WakeSchedule, awake_distance

__all__ = [
    "DelayMode",
    "DelayPolicy",
    "Message",
    "NodeContext",
    "NodeRuntime",
    "Protocol",
    "RunMetrics",
    "Simulator",
    "ProtocolFault",
    "CongestViolation",
    "assign_delay",
    "run",
]

log = logging.getLogger(__name__)


class ProtocolFault(RuntimeError):
    """A node runtime broke the model's rules (bad port, broken invariant)."""

    def __init__(self, node: int, message: str):
        super().__init__(f"node {node}: {message}")
        self.node = node


class CongestViolation(RuntimeError):
    pass


class DelayMode(str, enum.Enum):
    UNIFORM = "uniform"
    CONSTANT = "constant"
    TABLE = "table"


@dataclass(frozen=True)
class DelayPolicy:
    """Oblivious adversary's delay rule.

    ``uniform`` draws from ``[1, tau]`` keyed by ``(seed, channel, index)``;
    ``constant`` always returns ``value``; ``table`` looks up
    ``(u, v, index)`` in ``table`` and falls back to ``tau``.
    """

    tau: int = 1
    mode: DelayMode = DelayMode.UNIFORM
    seed: int = 0
    value: int | None = None
    table: dict[tuple[int, int, int], int] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", DelayMode(self.mode))
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.mode is DelayMode.CONSTANT:
            d = self.tau if self.value is None else self.value
            if not 1 <= d <= self.tau:
                raise ValueError(f"constant delay {d} outside [1, {self.tau}]")
            object.__setattr__(self, "value", d)
        if self.mode is DelayMode.TABLE:
            table = self.table or {}
            bad = [k for k, d in table.items() if not 1 <= d <= self.tau]
            if bad:
                raise ValueError(f"table delays outside [1, {self.tau}] at {bad[:3]}")
            object.__setattr__(self, "table", dict(table))

    @classmethod
    def uniform(cls, tau: int, seed: int) -> DelayPolicy:
        return cls(tau=tau, mode=DelayMode.UNIFORM, seed=seed)

    @classmethod
    def constant(cls, d: int, tau: int | None = None) -> DelayPolicy:
        return cls(tau=d if tau is None else tau, mode=DelayMode.CONSTANT, value=d)

    @classmethod
    def from_table_file(cls, path: str | Path, tau: int) -> DelayPolicy:
        """Load ``u v msg_index delay`` lines (node indices)."""
        table = {}
        for line in Path(path).read_text().splitlines():
            if line.strip():
                u, v, k, d = (int(x) for x in line.split())
                table[(u, v, k)] = d
        return cls(tau=tau, mode=DelayMode.TABLE, table=table)


def assign_delay(policy: DelayPolicy, channel: tuple[int, int], msg_index: int) -> int:
    """Raw delay of the ``msg_index``-th message on directed ``channel``."""
    if msg_index < 0:
        raise ValueError("msg_index must be >= 0")
    if policy.mode is DelayMode.CONSTANT:
        return policy.value
    if policy.mode is DelayMode.TABLE:
        return policy.table.get((channel[0], channel[1], msg_index), policy.tau)
    if policy.tau == 1:
        return 1
    key = f"{policy.seed}:{channel[0]}:{channel[1]}:{msg_index}".encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return 1 + (h * policy.tau >> 64)


@dataclass(frozen=True)
class Message:
    kind: str
    data: Any
    size_bits: int
    src: int
    arrival_port: int


class NodeRuntime:
    """Per-node protocol state machine.  Override the two hooks."""

    def on_wake(self, ctx: NodeContext, trigger: Message | None) -> None:
        """``trigger`` is the first received message, or None for an adversarial wake."""

    def on_message(self, ctx: NodeContext, msg: Message) -> None:
        pass


class Protocol:
    """Factory for node runtimes, plus the run-level requirements."""

    name = "protocol"
    scheme: str | None = None
    requires_knowledge: Knowledge | None = None
    requires_advice = False

    def runtime(self, ctx: NodeContext) -> NodeRuntime:
        raise NotImplementedError

    def check(self, net: Network, advice) -> None:
        if self.requires_knowledge is not None and net.knowledge is not self.requires_knowledge:
            raise ValueError(f"{self.name} requires {self.requires_knowledge.value}, network is {net.knowledge.value}")
        if self.requires_advice and advice is None:
            raise ValueError(f"{self.name} requires advice")

    def start(self, sim: Simulator) -> None:
        """Called once before any runtime is created."""

    def finish(self, sim: Simulator) -> None:
        """Called once after the queue drains (audits, summaries)."""


class NodeContext:
    """What a node may see and do.  Under KT0 neighbor IDs are hidden."""

    __slots__ = ("_sim", "index", "id", "degree", "n", "advice", "rng", "awake", "forwarded")

    def __init__(self, sim: Simulator, index: int, advice: str | None, rng: random.Random):
        self._sim = sim
        self.index = index
        self.id = sim.net.ids[index]
        self.degree = sim.net.degree(index)
        self.n = sim.net.n
        self.advice = advice
        self.rng = rng
        self.awake = False
        self.forwarded: set = set()

    @property
    def neighbor_ids(self) -> tuple[int, ...]:
        """IDs behind ports ``1..deg`` (KT1 only)."""
        net = self._sim.net
        if net.knowledge is not Knowledge.KT1:
            raise ProtocolFault(self.index, "neighbor IDs are unknown under KT0")
        return tuple(net.ids[u] for u in net.ports[self.index])

    def port_of_id(self, node_id: int) -> int:
        ids = self.neighbor_ids
        return ids.index(node_id) + 1

    @property
    def now(self) -> int:
        return self._sim.now

    def send(self, port: int, kind: str, data: Any = None, size_bits: int = 1) -> None:
        self._sim.send(self.index, port, kind, data, size_bits)

    def record_forward(self, key) -> None:
        self.forwarded.add(key)


@dataclass
class RunMetrics:
    messages_total: int = 0
    last_receipt_tick: int = 0
    first_wake_tick: int = 0
    tau: int = 1
    max_message_bits: int = 0
    per_node_forwards: dict[int, int] = field(default_factory=dict)
    advice_max_bits: int = 0
    advice_avg_bits: Fraction = Fraction(0)
    awake_distance: float = 0
    all_awake: bool = False
    congest_violations: int = 0
    seed: int = 0
    n: int = 0
    m: int = 0
    protocol: str = ""
    scheme: str | None = None

    @property
    def time_units(self) -> Fraction:
        """Ticks from the first adversarial wake to the last receipt, over tau."""
        span = max(0, self.last_receipt_tick - self.first_wake_tick)
        return Fraction(span, self.tau)

    @property
    def max_node_forwards(self) -> int:
        return max(self.per_node_forwards.values(), default=0)

    def to_dict(self) -> dict:
        return {
            "messages_total": self.messages_total,
            "time_units": float(self.time_units),
            "last_receipt_tick": self.last_receipt_tick,
            "max_message_bits": self.max_message_bits,
            "advice_max_bits": self.advice_max_bits,
            "advice_avg_bits": float(self.advice_avg_bits),
            "awake_distance": None if self.awake_distance == float("inf") else self.awake_distance,
            "all_awake": self.all_awake,
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "protocol": self.protocol,
            "scheme": self.scheme,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


_WAKE = 0
_DELIVER = 1


class Simulator:
    """One execution.  Build, call :meth:`run`, then inspect state if needed."""

    def __init__(
        self,
        net: Network,
        protocol: Protocol,
        schedule: WakeSchedule,
        delays: DelayPolicy,
        advice=None,
        rng_seed: int = 0,
        congest_limit: int | None = None,
        strict_congest: bool = False,
        trace: list[str] | None = None,
        record_delays: bool = False,
    ):
        protocol.check(net, advice)
        for v, _ in schedule.entries:
            if not 0 <= v < net.n:
                raise ValueError(f"wake schedule names unknown node {v}")
        self.net = net
        self.protocol = protocol
        self.schedule = schedule
        self.delays = delays
        self.advice = advice
        self.rng_seed = rng_seed
        self.congest_limit = congest_limit
        self.strict_congest = strict_congest
        self.trace = trace
        self.delay_log: list[tuple[int, int, int, int]] | None = [] if record_delays else None
        self.now = 0
        self._queue: list = []
        self._seq = 0
        self._channel_count: dict[tuple[int, int], int] = {}
        self._channel_last: dict[tuple[int, int], int] = {}
        self.metrics = RunMetrics(
            tau=delays.tau,
            first_wake_tick=schedule.first_tick,
            seed=rng_seed,
            n=net.n,
            m=net.m,
            protocol=protocol.name,
            scheme=protocol.scheme,
        )
        protocol.start(self)
        self.contexts = [
            NodeContext(
                self,
                v,
                None if advice is None else advice[v],
                random.Random(f"{rng_seed}:{net.ids[v]}"),
            )
            for v in range(net.n)
        ]
        self.runtimes = [protocol.runtime(ctx) for ctx in self.contexts]

    def _push(self, tick: int, kind: int, payload) -> None:
        heapq.heappush(self._queue, (tick, self._seq, kind, payload))
        self._seq += 1

    def send(self, src: int, port: int, kind: str, data, size_bits: int) -> None:
        net = self.net
        if not 1 <= port <= net.degree(src):
            raise ProtocolFault(src, f"send on invalid port {port} (degree {net.degree(src)})")
        if size_bits < 1:
            raise ProtocolFault(src, "messages carry at least one bit")
        dst = net.ports[src][port - 1]
        channel = (src, dst)
        k = self._channel_count.get(channel, 0)
        self._channel_count[channel] = k + 1
        raw = assign_delay(self.delays, channel, k)
        if self.delay_log is not None:
            self.delay_log.append((src, dst, k, raw))
        tick = max(self.now + raw, self._channel_last.get(channel, 0))
        self._channel_last[channel] = tick
        m = self.metrics
        m.messages_total += 1
        if size_bits > m.max_message_bits:
            m.max_message_bits = size_bits
        if self.congest_limit is not None and size_bits > self.congest_limit:
            m.congest_violations += 1
            if self.strict_congest:
                raise CongestViolation(
                    f"node {src} sent {size_bits} bits on port {port}, limit {self.congest_limit}"
                )
        msg = Message(kind, data, size_bits, net.ids[src], net.port_to(dst, src))
        self._push(tick, _DELIVER, (dst, msg))

    def _wake(self, v: int, trigger: Message | None) -> None:
        ctx = self.contexts[v]
        ctx.awake = True
        self.runtimes[v].on_wake(ctx, trigger)

    def run(self) -> RunMetrics:
        for v, t in sorted(self.schedule.entries, key=lambda e: (e[1], e[0])):
            self._push(t, _WAKE, v)
        queue = self._queue
        while queue:
            tick, _, kind, payload = heapq.heappop(queue)
            self.now = tick
            if kind == _WAKE:
                if not self.contexts[payload].awake:
                    self._wake(payload, None)
                continue
            dst, msg = payload
            self.metrics.last_receipt_tick = tick
            if self.trace is not None:
                self.trace.append(
                    f"{tick} {msg.src} {self.net.ids[dst]} {msg.kind} {msg.size_bits}"
                )
            if not self.contexts[dst].awake:
                self._wake(dst, msg)
            self.runtimes[dst].on_message(self.contexts[dst], msg)
        return self._finish()

    def _finish(self) -> RunMetrics:
        m = self.metrics
        m.all_awake = all(ctx.awake for ctx in self.contexts)
        m.per_node_forwards = {
            self.net.ids[ctx.index]: len(ctx.forwarded) for ctx in self.contexts if ctx.forwarded
        }
        if self.advice is not None:
            m.advice_max_bits = self.advice.max_bits
            m.advice_avg_bits = self.advice.avg_bits
        m.awake_distance = awake_distance(self.net, self.schedule.nodes)
        self.protocol.finish(self)
        return m


def run(
    net: Network,
    protocol: Protocol,
    schedule: WakeSchedule,
    delays: DelayPolicy,
    advice=None,
    rng_seed: int = 0,
    congest_limit: int | None = None,
    strict_congest: bool = False,
    trace: list[str] | None = None,
) -> RunMetrics:
    """Execute ``protocol`` on ``net`` until no message is in flight."""
    sim = Simulator(
        net, protocol, schedule, delays, advice, rng_seed, congest_limit, strict_congest, trace
    )
    return sim.run()
