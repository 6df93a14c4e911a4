"""Zero-temperature limits of equilibrium states in a fixed direction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import Face2, Polygon2, face_of_direction
from .maximizing import WeightedDeBruijn, critical_entropy, max_cycle_mean
from .symbolic import PotentialTable
from .transfer import (
    AnnealingTrace,
    MarkovMeasure,
    TransferConvergenceError,
    anneal_step,
    unit_direction,
)


@dataclass
class AnnealOptions:
    """Geometric schedule ``t_k = t0 * growth**k`` capped at ``t_max``.

    ``t_max`` itself is appended as the last point. A run counts as
    converged after ``streak`` consecutive rotation-vector increments of at
    most ``rv_tol``; it then stops unless ``stop_on_convergence`` is off.
    """

    t0: float = 1.0
    growth: float = 1.5
    t_max: float = 400.0
    rv_tol: float = 1e-9
    streak: int = 3
    edge_tol: float = 1e-12
    cluster_tol: float = 1e-6
    stop_on_convergence: bool = True
    transfer_tol: float = 1e-13
    max_iter: int = 100_000

    def __post_init__(self):
        if self.t0 <= 0 or self.growth <= 1 or self.t_max < self.t0:
            raise ValueError("need t0 > 0, growth > 1 and t_max >= t0")
        for name in ("rv_tol", "edge_tol", "cluster_tol", "transfer_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def schedule(self) -> list[float]:
        ts, t = [], self.t0
        while t < self.t_max:
            ts.append(t)
            t *= self.growth
        ts.append(float(self.t_max))
        return ts


@dataclass(frozen=True)
class ClosedClass:
    states: np.ndarray
    mass: float


@dataclass(frozen=True, eq=False)
class GroundStateReport:
    direction: np.ndarray
    converged: bool
    limit_rv: np.ndarray
    limit_entropy: float
    trace: AnnealingTrace = field(repr=False)
    chain_limit: MarkovMeasure = field(repr=False)
    closed_classes: tuple[ClosedClass, ...] = ()
    accumulation_rvs: tuple[np.ndarray, ...] = ()
    face: Face2 | None = None
    flags: tuple[str, ...] = ()

    @property
    def closed_class_weights(self) -> list[float]:
        return [c.mass for c in self.closed_classes]


def closed_classes(chain: MarkovMeasure, edge_tol: float = 1e-12) -> tuple[ClosedClass, ...]:
    """Closed communicating classes of the transitions ``>= edge_tol``.

    For a range-1 chain the analysis runs on the symbol chain (states are
    symbols, every row equal to the symbol law), so classes name symbols.
    """
    q = chain.q
    if chain.r == 1:
        n = q
        src = np.repeat(np.arange(q), q)
        dst = np.tile(np.arange(q), q)
        prob = np.tile(chain.transition[0], q)
        mass = chain.transition[0]
    else:
        n = chain.n_states
        src = np.repeat(np.arange(n), q)
        dst = chain.successors().reshape(-1)
        prob = chain.transition.reshape(-1)
        mass = chain.stationary
    keep = prob >= edge_tol
    graph = coo_matrix((np.ones(keep.sum()), (src[keep], dst[keep])), shape=(n, n)).tocsr()
    n_comp, comp = connected_components(graph, directed=True, connection="strong")
    leaves = np.zeros(n_comp, dtype=bool)
    leaves[:] = True
    exits = comp[src[keep]] != comp[dst[keep]]
    leaves[np.unique(comp[src[keep]][exits])] = False
    result = []
    for c in np.flatnonzero(leaves):
        states = np.flatnonzero(comp == c)
        result.append(ClosedClass(states, float(mass[states].sum())))
    result.sort(key=lambda cc: int(cc.states[0]))
    return tuple(result)


def _cluster(points, tol):
    centers = []
    for p in points:
        if not any(np.linalg.norm(p - c) <= tol for c in centers):
            centers.append(p)
    return tuple(centers)


def ground_state(
    table: PotentialTable,
    direction,
    opts: AnnealOptions | None = None,
    poly: Polygon2 | None = None,
) -> GroundStateReport:
    """Anneal ``t * direction . Phi`` towards zero temperature.

    Non-convergence is reported (``converged=False`` together with the
    distinct rotation vectors seen over the tail of the run) rather than
    raised; only transfer failures propagate.
    """
    opts = opts or AnnealOptions()
    alpha = unit_direction(direction)
    entries, warm, small, converged = [], None, 0, False
    for t in opts.schedule():
        try:
            entry, warm = anneal_step(table, alpha, t, warm,
                                      tol=opts.transfer_tol, max_iter=opts.max_iter)
        except TransferConvergenceError as exc:
            exc.t = t
            raise
        if entries and np.linalg.norm(entry.rv - entries[-1].rv) <= opts.rv_tol:
            small += 1
        else:
            small = 0
        entries.append(entry)
        if small >= opts.streak:
            converged = True
            if opts.stop_on_convergence:
                break

    trace = AnnealingTrace(alpha, tuple(entries))
    last = entries[-1]
    accumulation = () if converged else _cluster(
        [e.rv for e in entries[-opts.streak - 2:]], opts.cluster_tol)
    flags = tuple(sorted({f for e in entries for f in e.flags}))
    face = face_of_direction(poly, alpha) if (poly is not None and table.dim == 2) else None
    return GroundStateReport(
        direction=alpha,
        converged=converged,
        limit_rv=last.rv,
        limit_entropy=last.entropy,
        trace=trace,
        chain_limit=last.markov,
        closed_classes=closed_classes(last.markov, opts.edge_tol),
        accumulation_rvs=accumulation,
        face=face,
        flags=flags,
    )


def face_entropy_sup(table: PotentialTable, direction) -> float:
    """Topological entropy of the subshift on the maximizing edges of
    ``direction . Phi``: the largest entropy available to measures whose
    rotation vector lies on the face in that direction."""
    alpha = unit_direction(direction)
    return critical_entropy(max_cycle_mean(WeightedDeBruijn.from_potential(table, alpha)))


@dataclass(frozen=True)
class Finding:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""


@dataclass(frozen=True)
class FaceLimitCheck:
    findings: tuple[Finding, ...]
    distances: np.ndarray

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.findings)

    def __getitem__(self, name) -> Finding:
        return next(f for f in self.findings if f.name == name)


def verify_face_limit(
    report: GroundStateReport,
    table: PotentialTable,
    poly: Polygon2 | None = None,
    tol: float = 1e-6,
) -> FaceLimitCheck:
    """Check that the annealed states land on the face in their direction
    with the face's maximal entropy.

    Findings: ``hyperplane`` (final distance to the supporting line),
    ``face`` (limit within ``tol`` of the polygon face, when ``poly`` is
    given) and ``entropy`` (limit entropy against :func:`face_entropy_sup`).
    """
    alpha = report.direction
    graph_result = max_cycle_mean(WeightedDeBruijn.from_potential(table, alpha))
    offset = graph_result.value
    distances = offset - report.trace.rvs @ alpha
    findings = [Finding("hyperplane", bool(distances[-1] <= tol), float(distances[-1]), tol)]
    if poly is not None:
        face = face_of_direction(poly, alpha)
        d = face.distance(report.limit_rv)
        findings.append(Finding("face", d <= tol, d, tol, f"{face.kind} {face.points.tolist()}"))
    h_face = critical_entropy(graph_result)
    gap = abs(report.limit_entropy - h_face)
    findings.append(Finding("entropy", gap <= tol, gap, tol, f"face entropy {h_face:.12g}"))
    return FaceLimitCheck(tuple(findings), distances)
