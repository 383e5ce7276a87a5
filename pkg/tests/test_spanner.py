from collections import Counter

import numpy as np
import pytest

from wakeup import netgraph as ng
from wakeup.spanner import EdgeKind, build_spanner, spanner_size_report, verify_stretch, write_spanner


@pytest.mark.parametrize("seed", range(3))
def test_k1_keeps_every_edge(seed):
    net = ng.generate_random_connected(40, 120, seed)
    sp = build_spanner(net, 1, seed)
    assert sp.edge_set() == set(net.edges())
    assert spanner_size_report(net, 1, range(4))["max_size"] == net.m


def test_triangle_k2_all_seeds():
    net = ng.complete_graph(3)
    for seed in range(200):
        sp = build_spanner(net, 2, seed)
        assert sp.size >= 2
        assert verify_stretch(net, sp.edge_set(), 2)


@pytest.mark.parametrize("seed", range(3))
def test_all_pairs_stretch_against_apsp(seed, apsp_oracle):
    k = 3
    net = ng.generate_random_connected(200, 900, seed)
    sp = build_spanner(net, k, seed)
    dg = apsp_oracle(net.n, net.edges())
    dh = apsp_oracle(net.n, sorted(sp.edge_set()))
    assert np.all(dh <= (2 * k - 1) * dg)
    assert verify_stretch(net, sp.edge_set(), k)


def test_verify_stretch_examples():
    net = ng.path_graph(5)
    assert verify_stretch(net, net.edges(), 1)
    assert not verify_stretch(net, net.edges()[1:], 4)
    with pytest.raises(ValueError):
        verify_stretch(net, [(0, 2)], 2)
    with pytest.raises(ValueError):
        verify_stretch(ng.path_graph(10), [], 2, max_n=5)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_clustering_invariants(k):
    net = ng.generate_random_connected(150, 600, k)
    sp = build_spanner(net, k, 11)
    assert sp.clusterings[0] == {v: v for v in range(net.n)}
    assert sp.clusterings[k] == {}
    assert len(sp.clusterings) == len(sp.parents) == k + 1
    for cl, par in zip(sp.clusterings, sp.parents):
        # dict keys already make clusters disjoint; parent chains must reach the leader
        for v, leader in cl.items():
            x, steps = v, 0
            while x in par:
                assert net.has_edge(x, par[x])
                x = par[x]
                steps += 1
                assert steps <= net.n
            assert x == leader
    # every node is finalized in exactly one iteration, 1..k
    assert all(1 <= i <= k for i in sp.finalized_at)
    for i, cl in enumerate(sp.clusterings[1:], start=1):
        for v in range(net.n):
            assert (v in cl) == (sp.finalized_at[v] > i)


@pytest.mark.parametrize("k", [2, 3])
def test_case_a_exclusivity(k):
    net = ng.generate_random_connected(120, 500, k + 10)
    sp = build_spanner(net, k, 3)
    per = Counter((e.u, e.iteration, e.kind) for e in sp.edges)
    for (u, i, kind), cnt in per.items():
        if kind is EdgeKind.INTRA:
            assert cnt == 1
            assert per.get((u, i, EdgeKind.INTER), 0) == 0
    for e in sp.edges:
        if e.kind is EdgeKind.INTRA:
            assert sp.clusterings[e.iteration][e.v] == e.cluster
            assert sp.parents[e.iteration][e.u] == e.v


def test_build_is_seed_deterministic():
    net = ng.generate_random_connected(100, 400, 0)
    a, b = build_spanner(net, 3, 5), build_spanner(net, 3, 5)
    assert a.edges == b.edges
    assert build_spanner(net, 3, 6).edges != a.edges


def test_rejects_bad_k():
    with pytest.raises(ValueError):
        build_spanner(ng.path_graph(3), 0, 0)


def test_size_report_and_export(tmp_path):
    net = ng.generate_random_connected(128, 700, 1)
    rep = spanner_size_report(net, 2, range(5))
    assert rep["builds"] == 5 and rep["mean_size"] <= net.m
    assert rep["max_outgoing_inter"] >= 1
    sp = build_spanner(net, 2, 0)
    write_spanner(sp, tmp_path / "s.txt")
    lines = (tmp_path / "s.txt").read_text().splitlines()
    assert len(lines) == len(sp.edges)
    u, v, kind, it = lines[0].split()
    assert kind in ("intra", "inter") and 1 <= int(it) <= 2
