"""Sweepcut rounding of diffusion vectors and cluster evaluation metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hypergraph import Hypergraph


@dataclass
class SweepProfile:
    """Per-prefix conductance profile of a sweep over the positive support.

    order[i] is the node added at rank i (x descending, ties by ascending
    id); prefix_* hold the running volume, cut, and conductance after that
    addition. Prefixes whose min-side volume is zero carry conductance inf
    and are skipped when selecting best_set (earliest minimum on ties).
    boundary_delta_bar is the cardinality cap max over best_set's boundary
    hyperedges of min(delta_e, |e|/2).
    """

    order: list[int]
    x_values: list[float]
    prefix_vol: list[float]
    prefix_cut: list[float]
    prefix_conductance: list[float]
    best_set: tuple[int, ...]
    best_conductance: float
    boundary_delta_bar: float


def sweepcut(h: Hypergraph, x) -> SweepProfile:
    """Sweep the positive support of x from largest to smallest value.

    The cut is maintained incrementally via per-hyperedge in-counts: each
    step changes one count and re-prices only the gadgets of the incident
    edges. x may be a dict over node ids or a dense array; entries beyond
    the original nodes (auxiliaries) are ignored.
    """
    if isinstance(x, dict):
        items = [(v, val) for v, val in x.items() if v < h.num_nodes and val > 0]
    else:
        items = [(v, float(val)) for v, val in enumerate(x[: h.num_nodes]) if val > 0]
    if not items:
        raise ValueError("sweepcut needs at least one positive entry")
    items.sort(key=lambda t: (-t[1], t[0]))

    incident_edges: dict[int, list[int]] = {}
    for k, edge in enumerate(h.hyperedges):
        for v in edge:
            incident_edges.setdefault(v, []).append(k)

    total = h.total_volume
    in_count = [0] * len(h.hyperedges)
    cut = 0.0
    vol = 0.0
    order: list[int] = []
    x_values: list[float] = []
    vols: list[float] = []
    cuts: list[float] = []
    conds: list[float] = []
    best_rank = -1
    best_val = math.inf
    for v, val in items:
        for k in incident_edges.get(v, ()):
            cut -= h.edge_penalty(k, in_count[k])
            in_count[k] += 1
            cut += h.edge_penalty(k, in_count[k])
        vol += h.degrees[v]
        order.append(v)
        x_values.append(val)
        vols.append(vol)
        cuts.append(cut)
        side = min(vol, total - vol)
        if side <= 0:
            conds.append(math.inf)
            continue
        phi = cut / side
        conds.append(phi)
        if phi < best_val:
            best_val = phi
            best_rank = len(order) - 1

    if best_rank < 0:
        best_set: tuple[int, ...] = ()
        dbar = 0.0
    else:
        best_set = tuple(order[: best_rank + 1])
        dbar = boundary_delta_bar(h, best_set)
    return SweepProfile(order=order, x_values=x_values, prefix_vol=vols,
                        prefix_cut=cuts, prefix_conductance=conds,
                        best_set=best_set, best_conductance=best_val,
                        boundary_delta_bar=dbar)


def boundary_delta_bar(h: Hypergraph, s) -> float:
    """max over hyperedges crossing s of min(delta_e, |e|/2), 0 if none cross.

    delta_e for a multi-gadget edge is the largest gadget cap, the point past
    which the edge's penalty saturates.
    """
    s = set(s)
    edge_delta: dict[int, float] = {}
    for j in range(h.num_gadgets):
        k = h.gadget_edge[j]
        d = float(h.gadget_delta[j])
        if d > edge_delta.get(k, 0.0):
            edge_delta[k] = d
    best = 0.0
    for k, edge in enumerate(h.hyperedges):
        inside = sum(1 for v in edge if v in s)
        if 0 < inside < len(edge):
            val = min(edge_delta.get(k, 1.0), len(edge) / 2.0)
            if val > best:
                best = val
    return best


def prf1(pred, truth):
    """Precision, recall, F1 of a predicted node set against the truth set."""
    pred = set(pred)
    truth = set(truth)
    hit = len(pred & truth)
    precision = hit / len(pred) if pred else 0.0
    recall = hit / len(truth) if truth else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def profile_csv(profile: SweepProfile) -> str:
    """Render a profile as `rank,node,x,prefix_vol,prefix_cut,prefix_conductance`
    rows (1-based ranks and node ids, header included)."""
    lines = ["rank,node,x,prefix_vol,prefix_cut,prefix_conductance"]
    for r, v in enumerate(profile.order):
        phi = profile.prefix_conductance[r]
        phi_s = "inf" if math.isinf(phi) else f"{phi:.12g}"
        lines.append(f"{r + 1},{v + 1},{profile.x_values[r]:.12g},"
                     f"{profile.prefix_vol[r]:.12g},{profile.prefix_cut[r]:.12g},{phi_s}")
    return "\n".join(lines) + "\n"
