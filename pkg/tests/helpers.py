"""Deterministic instance generators shared across test modules."""

from hyperlocal.hypergraph import GadgetParams, Hypergraph
from hyperlocal.synth import SplitMix64


def random_instance(seed, max_n=30, max_m=60, max_size=6, deltas=(1.0, 2.0, 3.0),
                    min_n=3):
    rng = SplitMix64(seed)
    n = min_n + rng.randrange(max_n - min_n + 1)
    m = 1 + rng.randrange(max_m)
    edges = []
    gadgets = []
    for _ in range(m):
        size = 2 + rng.randrange(min(max_size, n) - 1)
        edges.append(tuple(sorted(rng.sample(range(n), size))))
        gadgets.append([GadgetParams(1.0, deltas[rng.randrange(len(deltas))])])
    return Hypergraph(n, edges, gadgets)


def random_seeds(h, seed, kmax=3):
    rng = SplitMix64(seed ^ 0x5EED5EED5EED5EED)
    eligible = [v for v in range(h.num_nodes) if h.degrees[v] > 0]
    k = 1 + rng.randrange(min(kmax, len(eligible)))
    return sorted(rng.sample(eligible, k))


def delta_max(h):
    return float(max(h.gadget_delta)) if h.num_gadgets else 1.0
