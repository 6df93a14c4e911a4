"""Planar rotation sets, faces, normal cones and localized entropy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .maximizing import support_value
from .symbolic import PotentialTable, necklace_codes, periodic_block_rvs
from .transfer import ScalarPotential, measure_entropy, measure_integral, solve_transfer

DEDUP_TOL = 1e-12
FACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Polygon2:
    """Convex polygon with counterclockwise vertices.

    ``degenerate`` is set for points and segments (fewer than three
    vertices); a segment is stored as its two endpoints.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) < 3

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edge_normals(self) -> np.ndarray:
        """Outward unit normal of the edge from vertex k to vertex k+1."""
        if self.degenerate:
            raise ValueError("degenerate polygons have no edge normals")
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        n = np.column_stack([d[:, 1], -d[:, 0]])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def support(self, direction) -> float:
        return float((self.vertices @ np.asarray(direction, dtype=float)).max())

    def area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * float(x @ np.roll(y, -1) - y @ np.roll(x, -1))

    def contains(self, point, margin: float = 0.0) -> bool:
        """Point lies inside, at least ``margin`` away from every edge line."""
        if self.degenerate:
            return False
        offsets = (self.edge_normals * self.vertices).sum(axis=1)
        return bool((self.edge_normals @ np.asarray(point, dtype=float) <= offsets - margin).all())

    def vertex_index(self, point, tol: float = FACE_TOL) -> int | None:
        dist = np.linalg.norm(self.vertices - np.asarray(point, dtype=float), axis=1)
        k = int(np.argmin(dist))
        return k if dist[k] <= tol else None


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points, tol: float = DEDUP_TOL) -> Polygon2:
    """Monotone-chain hull; collinear and duplicate points are dropped."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("need at least one point")
    pts = np.unique(pts, axis=0)
    pts = [tuple(p) for p in pts]
    if len(pts) == 1:
        return Polygon2(pts)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= tol:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    # merge near-duplicates left by the tolerance
    merged = []
    for p in hull:
        if not merged or max(abs(p[0] - merged[-1][0]), abs(p[1] - merged[-1][1])) > tol:
            merged.append(p)
    if len(merged) > 1 and max(abs(merged[0][0] - merged[-1][0]),
                               abs(merged[0][1] - merged[-1][1])) <= tol:
        merged.pop()
    return Polygon2(merged)


def rotation_polytope_periodic(table: PotentialTable, max_period: int) -> Polygon2:
    """Hull of the rotation vectors of all orbits of period <= max_period."""
    if table.dim != 2:
        raise ValueError("planar rotation sets need a 2-d potential")
    rvs = [periodic_block_rvs(necklace_codes(table.q, p), p, table)
           for p in range(1, max_period + 1)]
    return convex_hull_2d(np.concatenate(rvs))


@dataclass(frozen=True)
class Face2:
    kind: str  # "vertex" or "edge"
    points: np.ndarray
    direction: np.ndarray

    def distance(self, point) -> float:
        point = np.asarray(point, dtype=float)
        if self.kind == "vertex":
            return float(np.linalg.norm(point - self.points[0]))
        a, b = self.points
        s = np.clip((point - a) @ (b - a) / ((b - a) @ (b - a)), 0.0, 1.0)
        return float(np.linalg.norm(point - (a + s * (b - a))))


def face_of_direction(poly: Polygon2, direction, tol: float = FACE_TOL) -> Face2:
    """Vertex or edge of ``poly`` maximizing ``direction . w``.

    An edge is returned when two adjacent vertices tie within ``tol``.
    """
    alpha = np.asarray(direction, dtype=float)
    alpha = alpha / np.linalg.norm(alpha)
    scores = poly.vertices @ alpha
    best = scores.max()
    top = np.flatnonzero(scores >= best - tol)
    n = len(poly)
    if len(top) == 1 or n == 1:
        return Face2("vertex", poly.vertices[[int(np.argmax(scores))]], alpha)
    if n == 2:
        return Face2("edge", poly.vertices.copy(), alpha)
    k = int(np.argmax(scores))
    prev_k, next_k = (k - 1) % n, (k + 1) % n
    other = next_k if scores[next_k] >= scores[prev_k] else prev_k
    if scores[other] < best - tol:
        return Face2("vertex", poly.vertices[[k]], alpha)
    a, b = (k, other) if other == next_k else (other, k)
    return Face2("edge", poly.vertices[[a, b]], alpha)


@dataclass(frozen=True)
class DirectionSet:
    """Closed arc ``[theta1, theta2]`` of unit directions (radians)."""

    theta1: float
    theta2: float

    @property
    def width(self) -> float:
        return self.theta2 - self.theta1

    def endpoints(self) -> np.ndarray:
        t = np.array([self.theta1, self.theta2])
        return np.column_stack([np.cos(t), np.sin(t)])

    def contains(self, direction, tol: float = 1e-12) -> bool:
        theta = np.arctan2(direction[1], direction[0])
        delta = (theta - self.theta1) % (2 * np.pi)
        return bool(delta <= self.width + tol or delta >= 2 * np.pi - tol)


def direction_set_of_vertex(poly: Polygon2, point, tol: float = FACE_TOL) -> DirectionSet:
    """Outward normals of all supporting lines through a vertex."""
    if poly.degenerate:
        raise ValueError("normal cones are only defined for non-degenerate polygons")
    k = poly.vertex_index(point, tol)
    if k is None:
        raise ValueError(f"{point} is not a vertex of the polygon")
    normals = poly.edge_normals
    n_in, n_out = normals[k - 1], normals[k]
    t1 = float(np.arctan2(n_in[1], n_in[0]))
    t2 = float(np.arctan2(n_out[1], n_out[0]))
    if t2 < t1:
        t2 += 2 * np.pi
    return DirectionSet(t1, t2)


@dataclass
class EntropySearch:
    """Settings for the dual search of :func:`localized_entropy`."""

    tol: float = 1e-8
    max_solves: int = 500
    max_period: int = 8
    interior_margin: float = 1e-9
    transfer_tol: float = 1e-13


@dataclass(frozen=True)
class LocalizedEntropy:
    value: float
    multiplier: np.ndarray
    residual: float
    entropy: float
    solves: int


class OutsideInteriorError(ValueError):
    """The target rotation vector is not interior to the rotation set."""


def _check_interior(table: PotentialTable, w: np.ndarray, opt: EntropySearch):
    m = table.dim
    if m == 1:
        hi = support_value(table, [1.0])
        lo = -support_value(table, [-1.0])
        if not lo + opt.interior_margin < w[0] < hi - opt.interior_margin:
            raise OutsideInteriorError(f"{w[0]} is not inside ({lo}, {hi})")
    elif m == 2:
        poly = rotation_polytope_periodic(table, opt.max_period)
        if not poly.contains(w, opt.interior_margin):
            raise OutsideInteriorError(f"{w} is not interior to the rotation polygon")
    else:
        rng = np.random.default_rng(0)
        dirs = np.vstack([np.eye(m), -np.eye(m), rng.normal(size=(8 * m, m))])
        for d in dirs:
            d = d / np.linalg.norm(d)
            if d @ w >= support_value(table, d) - opt.interior_margin:
                raise OutsideInteriorError(f"{w} is not interior in direction {d}")


def localized_entropy(table: PotentialTable, w, opt: EntropySearch | None = None) -> LocalizedEntropy:
    """Largest entropy of an invariant measure with rotation vector ``w``.

    Minimizes the convex dual ``D(v) = P(v . Phi) - v . w``, whose gradient is
    ``rv(mu_v) - w`` with ``mu_v`` the equilibrium state of ``v . Phi``. Runs
    quasi-Newton descent with step halving from the origin and the axis seeds
    ``+-e_k``, keeping the lowest certified minimum.
    """
    opt = opt or EntropySearch()
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (table.dim,):
        raise ValueError("w must have the potential's dimension")
    _check_interior(table, w, opt)

    solves = 0

    def evaluate(v):
        nonlocal solves
        solves += 1
        sol = solve_transfer(ScalarPotential(table.q, table.r, table.values @ v),
                             tol=opt.transfer_tol, partition=table.bisimulation)
        rv = measure_integral(sol.markov, table)
        return sol.pressure - v @ w, rv - w, sol

    m = table.dim
    seeds = [np.zeros(m)] + [s * e for e in np.eye(m) for s in (1.0, -1.0)]
    best = None
    budget = opt.max_solves // len(seeds)
    for seed in seeds:
        v = seed.copy()
        f, g, sol = evaluate(v)
        hinv = np.eye(m)
        used = 1
        while np.linalg.norm(g) > opt.tol and used < budget:
            step = -hinv @ g
            if step @ g >= 0:
                hinv = np.eye(m)
                step = -g
            s = 1.0
            while used < budget:
                f_new, g_new, sol_new = evaluate(v + s * step)
                used += 1
                if f_new <= f + 1e-4 * s * (step @ g):
                    break
                s *= 0.5
            else:
                break
            dv, dg = s * step, g_new - g
            if dv @ dg > 0:
                rho = 1.0 / (dv @ dg)
                eye = np.eye(m)
                hinv = (eye - rho * np.outer(dv, dg)) @ hinv @ (eye - rho * np.outer(dg, dv)) \
                    + rho * np.outer(dv, dv)
            v, f, g, sol = v + dv, f_new, g_new, sol_new
        residual = float(np.linalg.norm(g))
        if residual <= opt.tol and (best is None or f < best.value):
            best = LocalizedEntropy(float(f), v, residual, measure_entropy(sol.markov), 0)
    if best is None:
        raise RuntimeError(f"dual search did not certify within {opt.max_solves} solves")
    return LocalizedEntropy(best.value, best.multiplier, best.residual, best.entropy, solves)
