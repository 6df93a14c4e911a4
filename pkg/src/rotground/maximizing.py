"""Maximum cycle means on weighted de Bruijn graphs.

The maximizing value ``max_mu integral of psi`` of a finite-range potential is
the largest mean edge weight over cycles of its de Bruijn graph. It is
computed with Karp's recurrence on the bisimulation quotient of the graph:
merging states with identical futures leaves every cycle mean unchanged and
shrinks structured potentials (for instance ones that only see symbol
classes) by orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .symbolic import CapacityError, PeriodicOrbit, PotentialTable, bisimulation_classes

MAX_QUOTIENT_STATES = 4096
OPTIMAL_EDGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeightedDeBruijn:
    """Edge weights ``weights[u*q + s]`` on the order-``(r-1)`` de Bruijn graph.

    ``partition`` optionally supplies a bisimulation of the states that is
    valid for these weights (e.g. the one of a vector potential the weights
    were contracted from); otherwise the coarsest one is computed.
    """

    q: int
    r: int
    weights: np.ndarray = field(repr=False)
    partition: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != self.q**self.r:
            raise ValueError(f"expected {self.q**self.r} weights")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_potential(cls, table: PotentialTable, direction=None):
        if direction is None:
            direction = np.ones(table.dim)
        return cls(table.q, table.r, table.contract(direction), table.bisimulation)

    @property
    def n_states(self) -> int:
        return self.q ** (self.r - 1)

    @cached_property
    def classes(self) -> np.ndarray:
        if self.partition is not None:
            return np.asarray(self.partition)
        return bisimulation_classes(self.weights.reshape(self.n_states, self.q), self.q)

    @cached_property
    def quotient(self) -> "_Quotient":
        return _Quotient.build(self)


@dataclass
class _Quotient:
    """Quotient multigraph: one edge per (class, symbol)."""

    n: int
    src: np.ndarray
    dst: np.ndarray
    label: np.ndarray
    weight: np.ndarray
    reps: np.ndarray

    @classmethod
    def build(cls, graph: WeightedDeBruijn) -> "_Quotient":
        classes, q, n_states = graph.classes, graph.q, graph.n_states
        n = int(classes.max()) + 1
        _, reps = np.unique(classes, return_index=True)
        edge_codes = reps[:, None] * q + np.arange(q)
        succ = edge_codes % n_states
        return cls(
            n=n,
            src=np.repeat(np.arange(n), q),
            dst=classes[succ].reshape(-1),
            label=np.tile(np.arange(q), n),
            weight=graph.weights[edge_codes].reshape(-1),
            reps=reps,
        )


@dataclass(frozen=True, eq=False)
class MaxMeanResult:
    """Maximum cycle mean with a witness orbit and the optimal edge set.

    ``optimal_edges`` is a boolean mask over length-r words (edges of the
    de Bruijn graph) marking edges that lie on a maximum-mean cycle.
    """

    value: float
    witness: PeriodicOrbit
    optimal_edges: np.ndarray = field(repr=False)
    graph: WeightedDeBruijn = field(repr=False)
    critical_quotient_edges: np.ndarray = field(repr=False)


def _karp_tables(quot: _Quotient, with_pred: bool = True):
    n, src, dst, w = quot.n, quot.src, quot.dst, quot.weight
    order = np.argsort(dst, kind="stable")
    src_o, w_o, dst_o = src[order], w[order], dst[order]
    starts = np.flatnonzero(np.r_[True, dst_o[1:] != dst_o[:-1]])
    seg_id = np.repeat(np.arange(starts.size), np.diff(np.r_[starts, dst_o.size]))

    table = np.empty((n + 1, n))
    pred = np.empty((n + 1, n), dtype=np.int64) if with_pred else None
    table[0] = 0.0
    if with_pred:
        pred[0] = -1
    for k in range(1, n + 1):
        vals = table[k - 1][src_o] + w_o
        best = np.maximum.reduceat(vals, starts)
        table[k] = best
        if with_pred:
            hit = vals == best[seg_id]
            # first maximizing incoming edge per target
            first = np.full(starts.size, vals.size)
            np.minimum.at(first, seg_id[hit], np.flatnonzero(hit))
            pred[k] = order[first]
    return table, pred


def _karp_value(table: np.ndarray) -> tuple[float, int]:
    n = table.shape[1]
    k = np.arange(n)[:, None]
    per_state = ((table[n][None, :] - table[:n]) / (n - k)).min(axis=0)
    v_star = int(np.argmax(per_state))
    return float(per_state[v_star]), v_star


def balancing_gauge(quot: _Quotient) -> tuple[float, np.ndarray]:
    """Maximum cycle mean ``beta`` and a forward potential ``g``.

    ``g(u)`` is the heaviest total of ``w - beta`` over walks leaving ``u``,
    so every edge satisfies ``w - beta - g(src) + g(dst) <= 0`` and every
    state has an edge where equality holds. Exponentiating the reweighted
    edges gives a transfer matrix with entries in ``(0, 1]`` and the same
    Gibbs chain.
    """
    table, _ = _karp_tables(quot, with_pred=False)
    beta, _ = _karp_value(table)
    q = quot.src.size // quot.n
    reduced = (quot.weight - beta).reshape(quot.n, q)
    succ = quot.dst.reshape(quot.n, q)
    walk = np.zeros(quot.n)
    gauge = np.zeros(quot.n)
    for _ in range(quot.n - 1):
        walk = (reduced + walk[succ]).max(axis=1)
        np.maximum(gauge, walk, out=gauge)
    return beta, gauge


def _cycles_on_walk(nodes, edges):
    """Split a walk into the simple cycles it closes (stack decomposition).

    ``edges[i]`` leads from ``nodes[i]`` to ``nodes[i + 1]``.
    """
    stack_nodes, stack_edges, pos, cycles = [nodes[0]], [None], {nodes[0]: 0}, []
    for node, edge in zip(nodes[1:], edges):
        if node in pos:
            i = pos[node]
            cycles.append(stack_edges[i + 1 :] + [edge])
            for v in stack_nodes[i + 1 :]:
                del pos[v]
            del stack_nodes[i + 1 :]
            del stack_edges[i + 1 :]
        else:
            pos[node] = len(stack_nodes)
            stack_nodes.append(node)
            stack_edges.append(edge)
    return cycles


def _strong_components(n, src, dst):
    graph = coo_matrix((np.ones(src.size), (src, dst)), shape=(n, n)).tocsr()
    return connected_components(graph, directed=True, connection="strong")[1]


def _edges_on_cycles(n, src, dst, keep):
    """Among kept edges, those lying on a directed cycle of kept edges."""
    comp = _strong_components(n, src[keep], dst[keep])
    return keep & (comp[src] == comp[dst])


def max_cycle_mean(graph: WeightedDeBruijn, tol: float = OPTIMAL_EDGE_TOL) -> MaxMeanResult:
    """Karp's maximum cycle mean with witness orbit and optimal edges.

    Parameters
    ----------
    graph : WeightedDeBruijn
    tol : float
        Slack band for optimal-edge membership after reweighting by the
        maximum mean.

    Notes
    -----
    With ``D_k(v)`` the heaviest walk of exactly ``k`` edges ending at ``v``,
    the value is ``max_v min_k (D_n(v) - D_k(v)) / (n - k)``. The witness is a
    cycle of the heaviest length-``n`` walk into the maximizing state; ties
    go to the smallest canonical orbit. ``h(v) = max_k (D_k(v) - k*value)`` is
    a potential for the reweighted graph, and optimal edges are the zero-slack
    edges inside strongly connected components of the zero-slack subgraph.
    """
    quot = graph.quotient
    n = quot.n
    if n > MAX_QUOTIENT_STATES:
        raise CapacityError(
            f"bisimulation quotient has {n} states (> {MAX_QUOTIENT_STATES}); "
            "Karp's table would not fit at desk scale"
        )
    table, pred = _karp_tables(quot)
    value, v_star = _karp_value(table)

    # walk back n steps from v_star
    nodes, edges = [v_star], []
    v = v_star
    for step in range(n, 0, -1):
        e = int(pred[step][v])
        edges.append(e)
        v = int(quot.src[e])
        nodes.append(v)
    nodes.reverse()
    edges.reverse()
    cycles = _cycles_on_walk(nodes, edges)

    scale = max(1.0, float(np.abs(quot.weight).max()))
    candidates = []
    for cyc in cycles:
        mean = float(quot.weight[cyc].mean())
        if mean >= value - 1e-12 * scale:
            candidates.append(PeriodicOrbit.from_symbols(quot.label[cyc], graph.q))

    potential_h = (table - np.arange(n + 1)[:, None] * value).max(axis=0)
    slack = potential_h[quot.src] + quot.weight - value - potential_h[quot.dst]
    critical = _edges_on_cycles(n, quot.src, quot.dst, slack >= -tol * scale)

    if not candidates:
        candidates = [_cycle_in_subgraph(quot, critical, graph.q)]
    witness = min(candidates, key=PeriodicOrbit.sort_key)

    # lift to the de Bruijn graph
    classes = graph.classes
    edge_codes = np.arange(graph.q**graph.r)
    state = edge_codes // graph.q
    sym = edge_codes % graph.q
    crit_lookup = critical.reshape(n, graph.q)
    keep = crit_lookup[classes[state], sym]
    succ = edge_codes % graph.n_states
    optimal = _edges_on_cycles(graph.n_states, state, succ, keep)
    return MaxMeanResult(value, witness, optimal, graph, critical)


def _cycle_in_subgraph(quot, mask, q):
    idx = np.flatnonzero(mask)
    out = {}
    for e in idx:
        out.setdefault(int(quot.src[e]), []).append(int(e))
    v = int(quot.src[idx[0]])
    nodes, edges = [], []
    seen = {}
    while v not in seen:
        seen[v] = len(nodes)
        e = out[v][0]
        nodes.append(v)
        edges.append(e)
        v = int(quot.dst[e])
    return PeriodicOrbit.from_symbols(quot.label[edges[seen[v] :]], q)


def support_value(table: PotentialTable, direction) -> float:
    """``max over invariant mu of direction . rv(mu)``: the support function
    of the rotation set at ``direction``."""
    direction = np.asarray(direction, dtype=float).reshape(-1)
    return max_cycle_mean(WeightedDeBruijn.from_potential(table, direction)).value


def critical_entropy(result: MaxMeanResult) -> float:
    """Topological entropy of the subshift carried by the optimal edges.

    The lumped edge-count matrix of the critical quotient edges has the same
    spectral radius as the 0/1 adjacency matrix of the optimal de Bruijn
    edges.
    """
    quot = result.graph.quotient
    crit = result.critical_quotient_edges
    counts = np.zeros((quot.n, quot.n))
    np.add.at(counts, (quot.src[crit], quot.dst[crit]), 1.0)
    rho = float(np.abs(np.linalg.eigvals(counts)).max())
    return float(np.log(rho))
