"""Strongly local quadratic diffusion over the implicit gadget graph.

State lives in sparse dicts keyed by reduced-graph node ids (originals
0..n-1, auxiliaries n+2j / n+2j+1 for gadget j); missing keys are exactly 0.
The solver repeatedly takes a node whose residual violates r_i > kappa*d_i
off a FIFO queue, raises x_i until the residual drops to rho*kappa*d_i
(hyperpush), then restores the residuals of the touched gadgets' auxiliary
pairs to zero (auxpush) and propagates the resulting nonnegative residual
bumps to the gadgets' other members. Everything is O(size of the touched
region); the full graph is never materialized.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .hypergraph import Hypergraph

# r_i counts as violating when r_i > kappa*d_i*(1 + VIOLATION_GUARD); the
# slack stops rounding dust from re-enqueueing settled nodes forever.
VIOLATION_GUARD = 1e-12


class PushLimitError(RuntimeError):
    """Push cap hit before convergence; carries the partial state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass
class DiffusionConfig:
    kappa: float
    gamma: float = 0.1
    rho: float = 0.5
    delta: float = 1.0  # default gadget threshold, consumed by parsers/CLI
    p: float = 2.0
    eps: float = 1e-8
    max_pushes: int | None = None

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (self.kappa > 0):
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if not (0 < self.rho < 1):
            raise ValueError(f"rho must be in (0,1), got {self.rho}")
        if not (self.delta >= 1):
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if not (1 < self.p <= 2):
            raise ValueError(f"p must be in (1,2], got {self.p}")
        if not (self.eps > 0):
            raise ValueError(f"eps must be > 0, got {self.eps}")


@dataclass
class DiffusionState:
    x: dict = field(default_factory=dict)
    r: dict = field(default_factory=dict)
    seeds: frozenset = frozenset()
    queue: deque = field(default_factory=deque)
    in_queue: set = field(default_factory=set)
    node_caches: dict = field(default_factory=dict)    # i -> (s_a, s_b, a_min, b_min)
    gadget_caches: dict = field(default_factory=dict)  # j -> (z_a, z_b, xmin_a, xmin_b)
    touched_gadgets: set = field(default_factory=set)
    pushes: int = 0
    aux_pushes: int = 0
    sum_pushed_degree: float = 0.0
    seed_volume: float = 0.0


@dataclass
class SolveResult:
    x: dict                  # positive entries over original nodes
    state: DiffusionState    # full internals, auxiliary values included
    converged: bool
    pushes: int
    sum_pushed_degree: float
    seed_volume: float


def aux_ids(h: Hypergraph, j: int):
    a = h.num_nodes + 2 * j
    return a, a + 1


def init_state(h: Hypergraph, seeds, cfg: DiffusionConfig) -> DiffusionState:
    seeds = sorted(set(int(v) for v in seeds))
    if not seeds:
        raise ValueError("seed set is empty")
    for v in seeds:
        if not (0 <= v < h.num_nodes):
            raise ValueError(f"seed {v} out of range")
        if h.degrees[v] <= 0:
            raise ValueError(f"seed {v} has zero degree")
    state = DiffusionState(seeds=frozenset(seeds))
    state.seed_volume = float(sum(h.degrees[v] for v in seeds))
    thresh = 1.0 + VIOLATION_GUARD
    for v in seeds:
        d = h.degrees[v]
        state.r[v] = d
        if d > cfg.kappa * d * thresh:
            state.queue.append(v)
            state.in_queue.add(v)
    return state


def node_residual(h: Hypergraph, state: DiffusionState, cfg: DiffusionConfig, i: int) -> float:
    """Recompute r_i from scratch (the incremental r is validated against this)."""
    x = state.x
    xi = x.get(i, 0.0)
    n = h.num_nodes
    acc = 0.0
    for j in h.incident_gadgets[i]:
        c = h.gadget_c[j]
        a = n + 2 * j
        xa = x.get(a, 0.0)
        xb = x.get(a + 1, 0.0)
        if xb > xi:
            acc += c * (xb - xi)
        if xi > xa:
            acc -= c * (xi - xa)
    ind = 1.0 if i in state.seeds else 0.0
    return acc / cfg.gamma + h.degrees[i] * (ind - xi)


def aux_residuals(h: Hypergraph, state: DiffusionState, j: int):
    """(r_a, r_b) of gadget j, recomputed. Assumes x_a >= x_b (maintained)."""
    x = state.x
    a, b = aux_ids(h, j)
    xa = x.get(a, 0.0)
    xb = x.get(b, 0.0)
    c = h.gadget_c[j]
    wab = h.gadget_wab[j]
    ra = -wab * (xa - xb)
    rb = wab * (xa - xb)
    for v in h.gadget_members(j):
        xv = x.get(v, 0.0)
        if xv > xa:
            ra += c * (xv - xa)
        if xb > xv:
            rb -= c * (xb - xv)
    return ra, rb


def _scan_node(h, state, cfg, i):
    """One pass over i's incident gadgets: fresh residual plus push caches.

    Returns (r_i, aux list [(c, x_a, x_b)], (s_a, s_b, a_min, b_min)).
    s_a / s_b are the strictly active arc weights; a_min is the smallest
    x_a >= x_i (non-strict, so a tie disables the fast path), b_min the
    smallest x_b > x_i; both +inf when no candidate exists.
    """
    x = state.x
    xi = x.get(i, 0.0)
    n = h.num_nodes
    acc = 0.0
    s_a = s_b = 0.0
    a_min = b_min = math.inf
    adjacent = []
    for j in h.incident_gadgets[i]:
        c = h.gadget_c[j]
        a = n + 2 * j
        xa = x.get(a, 0.0)
        xb = x.get(a + 1, 0.0)
        adjacent.append((c, xa, xb))
        if xb > xi:
            acc += c * (xb - xi)
            s_b += c
            if xb < b_min:
                b_min = xb
        if xi > xa:
            acc -= c * (xi - xa)
            s_a += c
        elif xa < a_min:
            a_min = xa
    ind = 1.0 if i in state.seeds else 0.0
    ri = acc / cfg.gamma + h.degrees[i] * (ind - xi)
    return ri, adjacent, (s_a, s_b, a_min, b_min)


def _solve_push_amount(cfg, xi, ri, di, adjacent, caches):
    """The unique Delta > 0 with residual(x_i + Delta) = rho*kappa*d_i.

    Fast path: one linear solve, valid while no adjacent auxiliary value is
    crossed or tied. Otherwise walk the breakpoints of the piecewise-linear
    residual; the target is always reached at some t <= 1.
    """
    gamma = cfg.gamma
    target = cfg.rho * cfg.kappa * di
    s_a, s_b, a_min, b_min = caches
    delta = (ri - target) / ((s_a + s_b) / gamma + di)
    if xi + delta <= min(a_min, b_min):
        return delta

    # Right-derivative weight at t = xi: a-side ties included, b-side strict.
    w_active = 0.0
    events = []  # (t, dw): at t the active weight changes by dw
    for c, xa, xb in adjacent:
        if xa <= xi:
            w_active += c
        else:
            events.append((xa, c))
        if xb > xi:
            w_active += c
            events.append((xb, -c))
    events.sort()
    t_cur, f_cur = xi, ri
    k = 0
    while True:
        slope = w_active / gamma + di
        t_next = events[k][0] if k < len(events) else math.inf
        t_star = t_cur + (f_cur - target) / slope
        if t_star <= t_next:
            return t_star - xi
        f_cur -= slope * (t_next - t_cur)
        t_cur = t_next
        while k < len(events) and events[k][0] == t_next:
            w_active += events[k][1]
            k += 1


def hyperpush(h: Hypergraph, state: DiffusionState, cfg: DiffusionConfig, i: int) -> float:
    """Raise x_i so its residual falls to rho*kappa*d_i; returns Delta x_i."""
    di = h.degrees[i]
    ri, adjacent, caches = _scan_node(h, state, cfg, i)
    if ri <= cfg.kappa * di:
        raise ValueError(f"hyperpush on non-violating node {i} (r={ri:g}, kd={cfg.kappa * di:g})")
    return _apply_hyperpush(h, state, cfg, i, ri, di, adjacent, caches)


def _apply_hyperpush(h, state, cfg, i, ri, di, adjacent, caches):
    state.node_caches[i] = caches
    xi = state.x.get(i, 0.0)
    delta = _solve_push_amount(cfg, xi, ri, di, adjacent, caches)
    state.x[i] = xi + delta
    state.r[i] = cfg.rho * cfg.kappa * di
    state.pushes += 1
    state.sum_pushed_degree += di
    return delta


def auxpush(h: Hypergraph, state: DiffusionState, cfg: DiffusionConfig, j: int,
            i: int | None = None, dxi: float | None = None):
    """Restore gadget j's residuals to zero after node i was raised by dxi.

    Returns the nonnegative increments (Delta x_a, Delta x_b). Residuals of
    the gadget's members are bumped by the (nonnegative) amounts induced by
    the auxiliary movement, and members pushed above the violation threshold
    are enqueued. The state is authoritative: residuals are recomputed here,
    so the push is correct even when both perturbation terms are active.
    """
    x = state.x
    a, b = aux_ids(h, j)
    c = h.gadget_c[j]
    wab = h.gadget_wab[j]
    members = h.gadget_members(j)
    state.touched_gadgets.add(j)
    xa0 = x.get(a, 0.0)
    xb0 = x.get(b, 0.0)
    if i is not None and dxi is not None:
        # Nothing moved into the active range: both residuals untouched.
        xi_new = x.get(i, 0.0)
        if xi_new <= xa0 and xb0 <= xi_new - dxi:
            return 0.0, 0.0

    xa, xb = xa0, xb0
    member_x = [(v, x.get(v, 0.0)) for v in members]
    tol = 1e-15 * (1.0 + wab + c * len(members))

    for _round in range(4 * len(members) + 8):
        ra = -wab * (xa - xb)
        rb = wab * (xa - xb)
        for _, xv in member_x:
            if xv > xa:
                ra += c * (xv - xa)
            if xb > xv:
                rb -= c * (xb - xv)
        ra = max(ra, 0.0)
        rb = max(rb, 0.0)
        if ra <= tol and rb <= tol:
            break
        z_a = z_b = 0.0
        xmin_a = xmin_b = math.inf
        for _, xv in member_x:
            if xv > xa:
                z_a += c
                if xv < xmin_a:
                    xmin_a = xv
            if xv <= xb:
                z_b += c
            elif xv < xmin_b:
                xmin_b = xv
        state.gadget_caches[j] = (z_a, z_b, xmin_a, xmin_b)
        det = wab * (z_a + z_b) + z_a * z_b
        if det <= 0:
            break  # both residuals are zero up to rounding (see module tests)
        da = (ra * (wab + z_b) + wab * rb) / det
        db = (wab * ra + (wab + z_a) * rb) / det
        theta = 1.0
        if da > 0 and xa + da > xmin_a:
            theta = min(theta, (xmin_a - xa) / da)
        if db > 0 and xb + db > xmin_b:
            theta = min(theta, (xmin_b - xb) / db)
        xa += theta * da
        xb += theta * db
        if theta == 1.0:
            break
    else:
        raise RuntimeError(f"auxpush on gadget {j} did not settle")

    if xa > 0:
        x[a] = xa
    if xb > 0:
        x[b] = xb
    da_total = xa - xa0
    db_total = xb - xb0
    if da_total > 0 or db_total > 0:
        gamma = cfg.gamma
        thresh = 1.0 + VIOLATION_GUARD
        for v, xv in member_x:
            bump = 0.0
            if xv > xa0:
                bump += c * (min(xv, xa) - xa0)       # (xv-xa0)+ - (xv-xa)+
            if xb > xv:
                bump += c * (xb - max(xv, xb0))       # (xb-xv)+ - (xb0-xv)+
            if bump > 0.0:
                rv = state.r.get(v, 0.0) + bump / gamma
                state.r[v] = rv
                if v not in state.in_queue and rv > cfg.kappa * h.degrees[v] * thresh:
                    state.queue.append(v)
                    state.in_queue.add(v)
    state.aux_pushes += 1
    return da_total, db_total


class _QuadraticKernel:
    """Push kernel used by the shared FIFO driver (p-norm has its own)."""

    @staticmethod
    def scan(h, state, cfg, i):
        return _scan_node(h, state, cfg, i)

    @staticmethod
    def push(h, state, cfg, i, ri, di, adjacent, caches):
        return _apply_hyperpush(h, state, cfg, i, ri, di, adjacent, caches)

    @staticmethod
    def auxpush(h, state, cfg, j, i, dxi):
        return auxpush(h, state, cfg, j, i, dxi)


def _drive(h, state, cfg, kernel, on_event=None):
    """Shared FIFO loop: dequeue, re-check, push, settle incident gadgets."""
    thresh = 1.0 + VIOLATION_GUARD
    queue = state.queue
    while queue:
        i = queue.popleft()
        state.in_queue.discard(i)
        di = h.degrees[i]
        ri, adjacent, caches = kernel.scan(h, state, cfg, i)
        if ri <= cfg.kappa * di * thresh:
            state.r[i] = ri
            continue
        if cfg.max_pushes is not None and state.pushes >= cfg.max_pushes:
            queue.appendleft(i)
            state.in_queue.add(i)
            raise PushLimitError(f"push cap {cfg.max_pushes} reached", state=state)
        dxi = kernel.push(h, state, cfg, i, ri, di, adjacent, caches)
        if on_event is not None:
            on_event("hyperpush", {"node": i, "dx": dxi, "d": di, "r_before": ri})
        for j in h.incident_gadgets[i]:
            da, db = kernel.auxpush(h, state, cfg, j, i, dxi)
            if on_event is not None:
                on_event("auxpush", {"gadget": j, "node": i, "da": da, "db": db})
    return state


def solve(h: Hypergraph, seeds, cfg: DiffusionConfig, on_event=None) -> SolveResult:
    """Run the diffusion to convergence; x restricted to positive original entries."""
    state = init_state(h, seeds, cfg)
    _drive(h, state, cfg, _QuadraticKernel, on_event)
    xv = {v: val for v, val in state.x.items() if v < h.num_nodes and val > 0}
    return SolveResult(x=xv, state=state, converged=True, pushes=state.pushes,
                       sum_pushed_degree=state.sum_pushed_degree,
                       seed_volume=state.seed_volume)


def ledger_bound(cfg: DiffusionConfig, seed_volume: float, delta_max: float, p: float = 2.0) -> float:
    """Upper bound on the pushed-degree ledger sum for a converged run."""
    gk = cfg.gamma * cfg.kappa
    if p == 2.0:
        return (gk + delta_max) * seed_volume / (gk * (1 - cfg.rho))
    q = 1.0 / (p - 1.0)
    return (gk + delta_max) ** q * seed_volume / ((p - 1.0) * (gk * (1 - cfg.rho)) ** q)
