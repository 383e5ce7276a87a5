"""Oracle advice for KT0 wake-up and the matching node-side decoders.

Advice strings are plain ``'0'/'1'`` strings so their lengths are exact.
Fields start with a 2-bit kind header:

    00  empty (no body)
    01  unsigned integer, fixed width (ports: ``port_width(n)`` bits,
        instance tags: ``tag_width(n)`` bits)
    10  raw bitmap of ``n`` bits

Port numbers fit in ``ceil(log2 n)`` bits because a degree never exceeds
``n - 1``; nodes are assumed to know ``n`` (the basic scheme carries it
explicitly as an Elias-gamma prefix).

Child encoding (CEN) records are five fields ``tag p fc next_a next_b``.
``p`` and ``fc`` are ports of the record's owner; ``next_a``/``next_b`` are
ports of the owner's parent in that instance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .asim import Message, NodeContext, NodeRuntime, ProtocolFault
from .netgraph import Network, bfs_tree
from .spanner import Spanner, build_spanner

__all__ = [
    "AdviceMap",
    "AdviceDecodeError",
    "CenRecord",
    "SCHEMES",
    "port_width",
    "tag_width",
    "gamma",
    "cen_encode",
    "encode_cen_book",
    "decode_cen_records",
    "oracle_basic_bfs",
    "oracle_scheme_A",
    "oracle_scheme_B",
    "oracle_spanner_scheme",
    "compute_advice",
    "BroadcastRuntime",
    "CenRuntime",
]

SCHEMES = ("basic-bfs", "scheme-a", "scheme-b", "spanner:<k>")

EMPTY, UINT, BITMAP = "00", "01", "10"


class AdviceDecodeError(ProtocolFault):
    pass


def port_width(n: int) -> int:
    return max(1, (n - 1).bit_length())


def tag_width(n: int) -> int:
    # a node heads at most two CEN instances, so tags stay below 2n
    return max(1, (2 * n - 1).bit_length())


def gamma(x: int) -> str:
    """Elias-gamma code of ``x >= 1``."""
    if x < 1:
        raise ValueError("gamma code needs x >= 1")
    b = bin(x)[2:]
    return "0" * (len(b) - 1) + b


def _uint(value: int, width: int) -> str:
    if value < 0 or value.bit_length() > width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return UINT + format(value, f"0{width}b")


def _opt(value: int | None, width: int) -> str:
    return EMPTY if value is None else _uint(value, width)


class _Reader:
    def __init__(self, bits: str, node: int):
        self.bits = bits
        self.pos = 0
        self.node = node

    def done(self) -> bool:
        return self.pos >= len(self.bits)

    def take(self, k: int) -> str:
        if self.pos + k > len(self.bits):
            raise AdviceDecodeError(self.node, "advice ends mid-field")
        out = self.bits[self.pos : self.pos + k]
        self.pos += k
        return out

    def gamma(self) -> int:
        zeros = 0
        while self.take(1) == "0":
            zeros += 1
        return int("1" + self.take(zeros), 2)

    def field(self, width: int) -> int | None:
        kind = self.take(2)
        if kind == EMPTY:
            return None
        if kind == UINT:
            return int(self.take(width), 2)
        raise AdviceDecodeError(self.node, f"unexpected field kind {kind}")


@dataclass(frozen=True)
class AdviceMap:
    """Per-node advice bit strings, indexed by node index."""

    bits: tuple[str, ...]
    scheme: str

    def __getitem__(self, v: int) -> str:
        return self.bits[v]

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def total_bits(self) -> int:
        return sum(len(b) for b in self.bits)

    @property
    def max_bits(self) -> int:
        return max((len(b) for b in self.bits), default=0)

    @property
    def avg_bits(self) -> Fraction:
        return Fraction(self.total_bits, len(self.bits)) if self.bits else Fraction(0)

    def write(self, path: str | Path) -> None:
        """One line per node: ``node_index bit_len hex`` (hex left-aligned, zero padded)."""
        lines = [f"# scheme {self.scheme}"]
        for v, b in enumerate(self.bits):
            pad = -len(b) % 4
            hx = format(int(b + "0" * pad, 2), f"0{(len(b) + pad) // 4}x") if b else "-"
            lines.append(f"{v} {len(b)} {hx}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def read(cls, path: str | Path) -> AdviceMap:
        scheme, rows = "", {}
        for line in Path(path).read_text().splitlines():
            if line.startswith("# scheme"):
                scheme = line.split(maxsplit=2)[2]
            elif line.strip():
                v, length, hx = line.split()
                length = int(length)
                b = "" if hx == "-" else format(int(hx, 16), f"0{len(hx) * 4}b")[:length]
                rows[int(v)] = b
        return cls(tuple(rows[v] for v in range(len(rows))), scheme)


# -- child encoding -----------------------------------------------------------


@dataclass
class CenRecord:
    tag: int | None = None
    p: int | None = None
    fc: int | None = None
    next_a: int | None = None
    next_b: int | None = None

    def set(self, name: str, value: int) -> None:
        old = getattr(self, name)
        if old is not None and old != value:
            raise ValueError(f"CEN record tag={self.tag}: {name} already {old}, cannot set {value}")
        setattr(self, name, value)

    def encode(self, n: int) -> str:
        pw = port_width(n)
        return (
            _opt(self.tag, tag_width(n))
            + _opt(self.p, pw)
            + _opt(self.fc, pw)
            + _opt(self.next_a, pw)
            + _opt(self.next_b, pw)
        )


CenBook = dict  # node index -> list[CenRecord]


def _record(book: CenBook, node: int, tag: int | None) -> CenRecord:
    recs = book.setdefault(node, [])
    for r in recs:
        if r.tag == tag:
            return r
    r = CenRecord(tag)
    recs.append(r)
    return r


def cen_encode(net: Network, v: int, children, tag: int | None, book: CenBook) -> CenBook:
    """Add the child-encoding records for ``v`` and its ordered child list.

    ``children[0]`` becomes ``v``'s first child; child ``i`` (1-based) stores
    its port to ``v`` and the pair of ``v``'s ports to children ``2i`` and
    ``2i + 1``.  ``tag=None`` merges into each node's single untagged record.
    """
    children = list(children)
    if len(set(children)) != len(children):
        raise ValueError("children must be distinct")
    for u in children:
        if not net.has_edge(v, u):
            raise ValueError(f"node {u} is not a neighbor of {v}")
    root = _record(book, v, tag)
    if not children:
        return book
    root.set("fc", net.port_to(v, children[0]))
    c = len(children)
    half = math.ceil((c - 1) / 2)
    for i, u in enumerate(children, start=1):
        rec = _record(book, u, tag)
        rec.set("p", net.port_to(u, v))
        if i <= half:
            if 2 * i <= c:
                rec.set("next_a", net.port_to(v, children[2 * i - 1]))
            if 2 * i + 1 <= c:
                rec.set("next_b", net.port_to(v, children[2 * i]))
    return book


def encode_cen_book(book: CenBook, n: int) -> list[str]:
    return ["".join(r.encode(n) for r in book.get(v, [])) for v in range(n)]


def decode_cen_records(bits: str, n: int, node: int = -1) -> list[CenRecord]:
    rd = _Reader(bits, node)
    pw, tw = port_width(n), tag_width(n)
    out = []
    while not rd.done():
        out.append(CenRecord(rd.field(tw), rd.field(pw), rd.field(pw), rd.field(pw), rd.field(pw)))
    return out


# -- oracles ------------------------------------------------------------------


def _smallest_id(net: Network) -> int:
    return min(range(net.n), key=net.ids.__getitem__)


def _tree_ports(net: Network, tree) -> list[list[int]]:
    nbrs = tree.neighbors_map()
    return [sorted(net.port_to(v, u) for u in nbrs[v]) for v in range(net.n)]


def oracle_basic_bfs(net: Network) -> AdviceMap:
    """``gamma(n)`` then the tree ports, or an n-bit port bitmap for nodes
    with more than ``n / ln n`` tree neighbors."""
    n = net.n
    tree = bfs_tree(net, _smallest_id(net))
    threshold = n / math.log(n) if n > 1 else math.inf
    pw = port_width(n)
    out = []
    for v, ports in enumerate(_tree_ports(net, tree)):
        head = gamma(n)
        if len(ports) <= threshold:
            out.append(head + "".join(_uint(p, pw) for p in ports))
        else:
            bitmap = ["0"] * n
            for p in ports:
                bitmap[p - 1] = "1"
            out.append(head + BITMAP + "".join(bitmap))
    return AdviceMap(tuple(out), "basic-bfs")


def oracle_scheme_A(net: Network) -> AdviceMap:
    """Tree ports for nodes with at most sqrt(n) tree neighbors, else the single bit ``1``."""
    n = net.n
    tree = bfs_tree(net, _smallest_id(net))
    pw = port_width(n)
    out = []
    for ports in _tree_ports(net, tree):
        if len(ports) <= math.sqrt(n):
            out.append("".join(_uint(p, pw) for p in ports))
        else:
            out.append("1")
    return AdviceMap(tuple(out), "scheme-a")


def oracle_scheme_B(net: Network) -> AdviceMap:
    """One untagged CEN instance per BFS-tree node over its children."""
    tree = bfs_tree(net, _smallest_id(net))
    book: CenBook = {}
    kids = tree.children_map()
    for v in sorted(range(net.n), key=net.ids.__getitem__):
        cen_encode(net, v, sorted(kids[v], key=net.ids.__getitem__), None, book)
    return AdviceMap(tuple(encode_cen_book(book, net.n)), "scheme-b")


def spanner_cen_book(net: Network, sp: Spanner) -> CenBook:
    """CEN instances for the intra-cluster children and incoming inter-cluster
    neighbors of every node, tagged in (parent ID, intra-before-inter) order."""
    intra, inter = sp.intra_children(), sp.incoming_inter()
    instances = [(v, 0, kids) for v, kids in intra.items()]
    instances += [(v, 1, kids) for v, kids in inter.items()]
    instances.sort(key=lambda t: (net.ids[t[0]], t[1]))
    book: CenBook = {}
    for tag, (v, _, kids) in enumerate(instances):
        cen_encode(net, v, sorted(kids, key=net.ids.__getitem__), tag, book)
    return book


def oracle_spanner_scheme(net: Network, k: int, seed: int) -> AdviceMap:
    sp = build_spanner(net, k, seed)
    book = spanner_cen_book(net, sp)
    return AdviceMap(tuple(encode_cen_book(book, net.n)), f"spanner:{k}")


def compute_advice(net: Network, scheme: str, seed: int = 0) -> AdviceMap:
    if scheme == "basic-bfs":
        return oracle_basic_bfs(net)
    if scheme == "scheme-a":
        return oracle_scheme_A(net)
    if scheme == "scheme-b":
        return oracle_scheme_B(net)
    if scheme.startswith("spanner:"):
        return oracle_spanner_scheme(net, int(scheme.split(":", 1)[1]), seed)
    raise ValueError(f"unknown advising scheme {scheme!r}; known: {', '.join(SCHEMES)}")


# -- decoders -----------------------------------------------------------------


class BroadcastRuntime(NodeRuntime):
    """basic-bfs / scheme-a decoder: wake every tree neighbor named in the advice."""

    def __init__(self, scheme: str):
        self.scheme = scheme

    def ports(self, ctx: NodeContext) -> list[int]:
        bits, node = ctx.advice, ctx.index
        if self.scheme == "scheme-a" and bits == "1":
            return list(range(1, ctx.degree + 1))
        rd = _Reader(bits, node)
        n = ctx.n
        if self.scheme == "basic-bfs":
            n = rd.gamma()
            if n != ctx.n:
                raise AdviceDecodeError(node, f"advice claims n={n}")
            if not rd.done() and rd.bits[rd.pos : rd.pos + 2] == BITMAP:
                rd.take(2)
                bitmap = rd.take(n)
                if not rd.done():
                    raise AdviceDecodeError(node, "trailing bits after bitmap")
                return [i + 1 for i, b in enumerate(bitmap) if b == "1"]
        out = []
        while not rd.done():
            p = rd.field(port_width(n))
            if p is None:
                raise AdviceDecodeError(node, "empty port field")
            out.append(p)
        return out

    def on_wake(self, ctx: NodeContext, trigger: Message | None) -> None:
        for p in self.ports(ctx):
            ctx.send(p, "WAKE")


class CenRuntime(NodeRuntime):
    """Decoder for CEN-based advice (scheme-b and the spanner schemes).

    On waking, the node reports every ``next`` pair it holds to the parent of
    that record (which also wakes the parent) and wakes its first children.
    A parent receiving a report wakes the two advertised ports.  WAKE is
    never sent twice on a port, nor on a port a message already came from.
    """

    def __init__(self, n: int):
        self.n = n
        self.records: list[CenRecord] = []
        self.heard: set[int] = set()
        self.woke: set[int] = set()
        self.parent_ports: dict[int | None, int] = {}
        self.child_ports: dict[int | None, set[int]] = {}
        self.discovered_at: dict[int, int] = {}

    def _wake_port(self, ctx: NodeContext, port: int) -> None:
        if port not in self.woke and port not in self.heard:
            self.woke.add(port)
            ctx.send(port, "WAKE")

    def _learn_child(self, ctx: NodeContext, tag, port: int) -> None:
        self.child_ports.setdefault(tag, set()).add(port)
        self.discovered_at.setdefault(port, ctx.now)

    def on_wake(self, ctx: NodeContext, trigger: Message | None) -> None:
        if trigger is not None:
            self.heard.add(trigger.arrival_port)
        self.records = decode_cen_records(ctx.advice, self.n, ctx.index)
        reports: dict[int, list[tuple]] = {}
        for r in self.records:
            if r.p is not None:
                self._check_port(ctx, r.p)
                self.parent_ports[r.tag] = r.p
                reports.setdefault(r.p, []).append((r.tag, r.next_a, r.next_b))
            if r.fc is not None:
                self._check_port(ctx, r.fc)
            if r.fc is not None or r.p is None:
                # this node heads instance r.tag
                self.child_ports.setdefault(r.tag, set())
        bits = tag_width(self.n) + 2 * port_width(self.n) + 3
        for port, entries in reports.items():
            ctx.send(port, "NEXT", tuple(entries), bits * len(entries))
        for r in self.records:
            if r.fc is not None:
                self._learn_child(ctx, r.tag, r.fc)
                self._wake_port(ctx, r.fc)

    def _check_port(self, ctx: NodeContext, port: int) -> None:
        if not 1 <= port <= ctx.degree:
            raise AdviceDecodeError(ctx.index, f"advice names port {port}, degree is {ctx.degree}")

    def on_message(self, ctx: NodeContext, msg: Message) -> None:
        self.heard.add(msg.arrival_port)
        if msg.kind != "NEXT":
            return
        for tag, a, b in msg.data:
            if tag not in self.child_ports:
                raise AdviceDecodeError(ctx.index, f"NEXT for unknown CEN instance {tag}")
            self._learn_child(ctx, tag, msg.arrival_port)
            for port in (a, b):
                if port is not None:
                    self._check_port(ctx, port)
                    self._learn_child(ctx, tag, port)
                    self._wake_port(ctx, port)

    def known_ports(self) -> set[int]:
        out = set(self.parent_ports.values())
        for ports in self.child_ports.values():
            out |= ports
        return out
