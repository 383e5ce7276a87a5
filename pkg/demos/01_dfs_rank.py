# %% [markdown]
# DFS-rank on KT1 graphs
#
# Every node woken by the adversary draws a random rank and starts a
# depth-first token.  A node only forwards a token whose (rank, origin id)
# beats everything it has seen, so the globally best token visits all nodes
# and the rest die out.  Messages grow like n log n.

# %%
import math

from wakeup import netgraph as ng
from wakeup.asim import DelayPolicy, Simulator
from wakeup.harness import scaling_sweep, staggered_schedule
from wakeup.protocols import DfsRankProtocol

net = ng.generate_random_connected(200, 800, seed=1)
schedule = staggered_schedule(net.n, seed=1)
print(f"n={net.n} m={net.m}; adversary wakes {len(schedule.nodes)} nodes at ticks",
      sorted({t for _, t in schedule.entries}))

# %%
proto = DfsRankProtocol(c=4)
sim = Simulator(net, proto, schedule, DelayPolicy.uniform(tau=8, seed=3), rng_seed=7)
m = sim.run()
print("all awake:", m.all_awake)
print("messages:", m.messages_total, f"= {m.messages_total / (net.n * math.log(net.n)):.2f} n ln n")
print("time units:", float(m.time_units))
print("most distinct tokens forwarded by one node:", m.max_node_forwards)

# %% [markdown]
# The audit records every token hop.  The winning token walks a spanning
# tree: each tree edge once down and once back.

# %%
winner = max(proto.audit.steps)
print("winning key:", winner, "hops:", len(proto.audit.steps[winner]), "=", 2 * (net.n - 1))
print("tokens started:", len(proto.audit.steps), "tree violations:", proto.audit.violations)

# %% [markdown]
# Scaling: the normalized column should stay roughly flat.

# %%
for row in scaling_sweep("dfs-rank", [64, 128, 256, 512], 8, wake={"kind": "staggered"}):
    print(f"n={row['n']:4d}  messages/(n ln n)={row['messages_per_n_ln_n']:.3f}  "
          f"max forwards={row['max_node_forwards']}")
