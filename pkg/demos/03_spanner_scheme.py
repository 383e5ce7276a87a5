# %% [markdown]
# Spanner-based advice
#
# A (2k-1)-spanner keeps few edges but stretches distances only by a
# constant factor.  Encoding its edges with child encoding gives a wake-up
# scheme whose messages follow the spanner size and whose time follows the
# awake distance.

# %%
import math

import numpy as np

from wakeup import netgraph as ng
from wakeup.advising import compute_advice
from wakeup.asim import DelayPolicy, Simulator
from wakeup.netgraph import WakeSchedule
from wakeup.protocols import AdviceProtocol
from wakeup.spanner import build_spanner, verify_stretch

net = ng.generate_random_connected(300, 3000, seed=2)
print(f"n={net.n} m={net.m}")

# %%
for k in (1, 2, 3, 4, 6):
    sp = build_spanner(net, k, seed=0)
    print(f"k={k}: {sp.size:5d} edges, stretch ok: {verify_stretch(net, sp.edge_set(), k)}, "
          f"max outgoing inter-cluster edges: {max(sp.outgoing_inter_counts().values())}")

# %% [markdown]
# Wake-up with the spanner scheme from a handful of random nodes.

# %%
rng = np.random.default_rng(4)
for k in (2, 3, 5):
    adv = compute_advice(net, f"spanner:{k}", seed=0)
    wake = WakeSchedule.at_zero(rng.choice(net.n, size=3, replace=False).tolist())
    m = Simulator(net, AdviceProtocol(f"spanner:{k}"), wake, DelayPolicy.uniform(4, k), advice=adv).run()
    print(f"k={k}: messages {m.messages_total} (2m = {2 * net.m}), time {float(m.time_units):.1f} "
          f"for awake distance {m.awake_distance}, advice max {adv.max_bits} bits "
          f"({adv.max_bits / math.log2(net.n) ** 2:.2f} log2^2 n)")
