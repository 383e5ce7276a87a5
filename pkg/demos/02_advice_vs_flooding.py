# %% [markdown]
# Why advice helps in KT0
#
# On the lower-bound family (U x V complete bipartite plus a V-W matching,
# all of V awake) a node in V cannot tell which of its ports leads to its
# private W neighbor.  Without help it has to try them all.  A few bits of
# advice per node, computed by an oracle that sees the whole graph, remove
# that search.

# %%
from wakeup import netgraph as ng
from wakeup.advising import compute_advice
from wakeup.asim import DelayPolicy, Simulator
from wakeup.protocols import AdviceProtocol, FloodingProtocol

n = 64
net, centers = ng.generate_lb_family_G(n, seed=0)
delays = DelayPolicy.uniform(tau=4, seed=0)
print(f"{net.n} nodes, {net.m} edges, {len(centers.nodes)} awake at tick 0")

# %%
flood = Simulator(net, FloodingProtocol(), centers, delays).run()
print(f"flooding:  {flood.messages_total:6d} messages (n^2 = {n * n})")

for scheme in ("basic-bfs", "scheme-a", "scheme-b"):
    adv = compute_advice(net, scheme)
    m = Simulator(net, AdviceProtocol(scheme), centers, delays, advice=adv).run()
    print(f"{scheme:10s} {m.messages_total:6d} messages, time {float(m.time_units):5.2f}, "
          f"advice max {adv.max_bits} bits / avg {float(adv.avg_bits):.1f} bits")

# %% [markdown]
# Child encoding in isolation: a star center learns the ports of its 100
# leaves by a doubling chain of replies, two messages per leaf.

# %%
star = ng.star_graph(100, seed=5)
adv = compute_advice(star, "scheme-b")
sim = Simulator(star, AdviceProtocol("scheme-b"), ng.WakeSchedule.at_zero([0]),
                DelayPolicy.constant(1), advice=adv)
m = sim.run()
found = sorted(sim.runtimes[0].discovered_at.values())
for t in sorted(set(found)):
    print(f"tick {t:2d}: {sum(x <= t for x in found):3d} leaf ports known")
print("messages:", m.messages_total)
