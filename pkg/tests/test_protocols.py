import math
import random

import pytest

from wakeup import netgraph as ng
from wakeup.advising import compute_advice
from wakeup.asim import DelayPolicy, ProtocolFault, Simulator, run
from wakeup.harness import staggered_schedule
from wakeup.netgraph import Knowledge, WakeSchedule
from wakeup.protocols import (
    AdviceProtocol,
    DfsRankProtocol,
    FloodingProtocol,
    TokenAudit,
    draw_rank,
    make_protocol,
)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_flooding_complete_graph(n):
    m = run(ng.complete_graph(n), FloodingProtocol(), WakeSchedule.at_zero([0]), DelayPolicy.constant(1))
    assert m.messages_total == n * (n - 1)


@pytest.mark.parametrize("seed", range(4))
def test_flooding_sends_2m_and_wakes_within_awake_distance(seed):
    net = ng.generate_random_connected(60, 150, seed)
    tau = 5
    sched = WakeSchedule.at_zero([seed, 30 + seed])
    trace = []
    m = run(net, FloodingProtocol(), sched, DelayPolicy.constant(tau), trace=trace)
    assert m.messages_total == 2 * net.m
    rho = ng.awake_distance(net, sched.nodes)
    # first receipt at each sleeping node is its wake tick
    first = {}
    for line in trace:
        tick, _, dst, *_ = line.split()
        first.setdefault(int(dst), int(tick))
    assert max(first.values()) <= rho * tau
    # the last wake is followed by at most one more hop of echoes
    assert m.time_units <= rho + 1


def test_dfs_on_path_single_initiator():
    net = ng.path_graph(4)
    m = run(net, DfsRankProtocol(), WakeSchedule.at_zero([0]), DelayPolicy.constant(1))
    assert m.messages_total == 6
    assert m.all_awake


def test_dfs_k2_two_initiators():
    net = ng.path_graph(2)
    proto = DfsRankProtocol()
    sim = Simulator(net, proto, WakeSchedule.at_zero([0, 1]), DelayPolicy.constant(1), rng_seed=3)
    m = sim.run()
    keys = sorted(proto.audit.steps)
    low, high = keys
    assert [k for *_, k in proto.audit.steps[low]] == ["TOKEN"]
    assert [k for *_, k in proto.audit.steps[high]] == ["TOKEN", "BACK"]
    assert m.messages_total == 3 and m.all_awake
    assert all(rt.best == high for rt in sim.runtimes)


def test_dfs_requires_kt1():
    net = ng.path_graph(3, knowledge=Knowledge.KT0)
    with pytest.raises(ValueError):
        Simulator(net, DfsRankProtocol(), WakeSchedule.at_zero([0]), DelayPolicy.constant(1))
    with pytest.raises(ValueError):
        DfsRankProtocol(c=1)


@pytest.mark.parametrize("seed", range(6))
def test_dfs_wakes_everyone_under_staggered_wakes(seed):
    net = ng.generate_random_connected(96, 300, seed)
    sched = staggered_schedule(net.n, seed)
    proto = DfsRankProtocol()
    m = run(net, proto, sched, DelayPolicy.uniform(7, seed), rng_seed=seed)
    assert m.all_awake
    assert proto.audit.violations == []
    assert m.max_node_forwards <= 4 * math.log(net.n)


def test_max_rank_token_visits_everyone():
    net = ng.generate_random_connected(50, 120, 2)
    proto = DfsRankProtocol()
    sim = Simulator(net, proto, WakeSchedule.at_zero(range(0, 50, 5)), DelayPolicy.uniform(4, 1), rng_seed=9)
    sim.run()
    top = max(proto.audit.steps)
    reached = {dst for _, dst, kind in proto.audit.steps[top] if kind == "TOKEN"} | {top[1]}
    assert reached == set(net.ids)
    # each tree edge of the winner: once down, once back
    assert len(proto.audit.steps[top]) == 2 * (net.n - 1)


def test_token_audit_flags_revisits_and_bad_backtracks():
    audit = TokenAudit()
    key = (5, 1)
    audit.steps[key] = [(1, 2, "TOKEN"), (2, 3, "TOKEN"), (3, 1, "TOKEN")]
    assert any("revisits" in p for p in audit.check())
    audit.steps[key] = [(1, 2, "TOKEN"), (2, 3, "BACK")]
    assert any("backtrack" in p for p in audit.check())
    audit.steps[key] = [(1, 2, "TOKEN"), (2, 1, "BACK")]
    assert audit.check() == []


def test_token_revisit_raises_fault():
    # hand a runtime a token that already lists the receiver
    from wakeup.asim import Message
    from wakeup.protocols import _Token

    net = ng.path_graph(2)
    proto = DfsRankProtocol()
    sim = Simulator(net, proto, WakeSchedule.at_zero([0]), DelayPolicy.constant(1))
    ctx, rt = sim.contexts[1], sim.runtimes[1]
    rt.on_wake(ctx, Message("TOKEN", None, 1, 1, 1))
    tok = _Token((99, 1))
    tok.visit(1)
    tok.visit(2)
    with pytest.raises(ProtocolFault):
        rt.on_message(ctx, Message("TOKEN", tok, 1, 1, 1))


def test_rank_uniqueness_birthday():
    n, c = 32, 4
    dup = 0
    for sweep in range(1000):
        ranks = [draw_rank(random.Random(f"{sweep}:{i}"), n, c) for i in range(1, n + 1)]
        dup += len(set(ranks)) != n
    assert dup / 1000 < 0.01


def test_advice_protocol_dispatch():
    net = ng.path_graph(2, knowledge=Knowledge.KT0)
    adv = compute_advice(net, "basic-bfs")
    m = run(net, AdviceProtocol("basic-bfs"), WakeSchedule.at_zero([0]), DelayPolicy.constant(1), advice=adv)
    assert m.messages_total == 2 and m.all_awake
    star = ng.star_graph(5)
    adv = compute_advice(star, "scheme-b")
    m = run(star, AdviceProtocol("scheme-b"), WakeSchedule.at_zero([0]), DelayPolicy.constant(1), advice=adv)
    assert m.all_awake and m.messages_total == 10
    for bad in ("nope", "spanner:x", "spanner:0"):
        with pytest.raises(ValueError):
            AdviceProtocol(bad)
    with pytest.raises(ValueError):
        make_protocol("gossip")


def test_advice_protocol_checks_scheme_and_presence():
    net = ng.path_graph(4, knowledge=Knowledge.KT0)
    adv = compute_advice(net, "scheme-a")
    with pytest.raises(ValueError):
        Simulator(net, AdviceProtocol("scheme-b"), WakeSchedule.at_zero([0]), DelayPolicy.constant(1), advice=adv)
    with pytest.raises(ValueError):
        Simulator(net, AdviceProtocol("scheme-a"), WakeSchedule.at_zero([0]), DelayPolicy.constant(1))
