"""A two-dimensional potential whose rotation set is an infinite polygon.

The alphabet ``{0, 1, 2, 3}`` is split into the classes ``S1 = {0, 1}`` and
``S2 = {2, 3}``. A sequence is scored by the run of leading symbols from one
class: runs shorter than ``lam`` score ``w0 = (a, 0)``; a run of exactly
``k - 1 >= lam`` symbols from ``S_i`` scores ``v_i(k - lam)``, a point on the
graph of ``ell_i``; infinite runs score ``(0, ell_i(0))``. The rotation set is
the closed hull of ``w0`` and the vertices ``w_i(j)``, which accumulate on the
vertical axis.

The decreasing sequence ``x(k)`` is given through ``log x(k)`` and the curves
``ell_i`` as functions of ``log x`` so that far-out vertices (``x(k)`` below
the double-precision range) stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .symbolic import CapacityError, PotentialTable, Word, digits_of

ALPHABET = 4


def _ell55(log_x):
    return 1.0 / 130.0 - 1.0 / log_x


def _ell56(log_x):
    return -1.0 / log_x


def _neg(f):
    return lambda log_x: -f(log_x)


def _log_x_default(k):
    return 7.0 - 10.0 * np.asarray(k, dtype=float)


@dataclass(frozen=True)
class Example1Params:
    """Parameters of the construction.

    ``log_x(k)`` gives ``log x(k)`` for ``k >= 1`` (vectorized),
    ``ell[i]`` gives ``ell_{i+1}`` as a function of ``log x`` and
    ``ell_zero[i]`` its value at ``x = 0``. ``depth`` is the truncation
    depth (the range of the tabulated potential).
    """

    a: float
    lam: int
    log_x: Callable = field(repr=False)
    ell: tuple = field(repr=False)
    ell_zero: tuple[float, float]
    depth: int = 10
    name: str = "custom"

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("a must be positive")
        if self.lam < 3:
            raise ValueError("lam must be >= 3")
        if self.depth <= self.lam:
            raise ValueError("truncation depth must exceed lam")
        if not np.exp(self.log_x(np.arange(1, 10_001))).sum() < self.a:
            raise ValueError("the run lengths need sum_k x(k) < a")

    def with_depth(self, depth: int) -> "Example1Params":
        return replace(self, depth=depth)

    def x(self, k):
        return np.exp(self.log_x(k))

    def ell_values(self, i: int, k):
        """``ell_i(x(k))``."""
        return self.ell[i - 1](self.log_x(k))

    def v(self, i: int, k):
        """Points ``v_i(k) = (x(k), ell_i(x(k)))``; shape ``(..., 2)``."""
        return np.stack([self.x(k), self.ell_values(i, k)], axis=-1)


def preset(name: str, depth: int = 10) -> Example1Params:
    """Named parameter sets ``"prop55"`` and ``"prop56"``.

    Both use ``x(k) = exp(7 - 10k)``, ``a = exp(-2)``, ``lam = 3`` and
    ``ell_2 = -ell_1``; ``prop55`` takes ``ell_1(x) = 1/130 - 1/ln x`` and
    ``prop56`` takes ``ell_1(x) = -1/ln x``.
    """
    if name == "prop55":
        ell, zero = _ell55, 1.0 / 130.0
    elif name == "prop56":
        ell, zero = _ell56, 0.0
    else:
        raise KeyError(f"unknown preset {name!r} (known: prop55, prop56)")
    return Example1Params(
        a=float(np.exp(-2.0)),
        lam=3,
        log_x=_log_x_default,
        ell=(ell, _neg(ell)),
        ell_zero=(zero, -zero),
        depth=depth,
        name=name,
    )


PRESETS = ("prop55", "prop56")


def base_vertex(p: Example1Params) -> np.ndarray:
    return np.array([p.a, 0.0])


def limit_vertex(i: int, p: Example1Params) -> np.ndarray:
    """``w_i(infinity) = (0, ell_i(0))``."""
    return np.array([0.0, p.ell_zero[i - 1]])


def vertex_formula(i: int, j: int, p: Example1Params) -> np.ndarray:
    """Rotation vector ``w_i(j)`` of the orbit with ``j - 1`` symbols from
    ``S_i`` followed by one from the other class; ``j = lam`` is the special
    three-block vertex."""
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    lam = p.lam
    if j < lam:
        raise ValueError(f"j must be >= lam = {lam}")
    w0 = base_vertex(p)
    if j == lam:
        return (3 * (lam - 1) * w0 + (3 - i) * p.v(i, 1) + p.v(3 - i, 1)) / (3 * lam)
    k = np.arange(1, j - lam + 1)
    return (p.v(i, k).sum(axis=0) + lam * w0) / j


def vertex_sequence(i: int, j_max: int, p: Example1Params) -> tuple[np.ndarray, np.ndarray]:
    """``(j, w_i(j))`` for ``lam < j <= j_max`` via cumulative sums."""
    lam = p.lam
    j = np.arange(lam + 1, j_max + 1)
    sums = np.cumsum(p.v(i, np.arange(1, j_max - lam + 1)), axis=0)
    return j, (sums + lam * base_vertex(p)) / j[:, None]


def vertex_slope(i: int, j, p: Example1Params):
    """Slope of the line through ``w_i(infinity)`` and ``w_i(j)`` (``j > lam``)."""
    j_arr = np.atleast_1d(np.asarray(j))
    if (j_arr <= p.lam).any():
        raise ValueError("slopes are defined for j > lam")
    js, pts = vertex_sequence(i, int(j_arr.max()), p)
    diff = pts[j_arr - p.lam - 1] - limit_vertex(i, p)
    slopes = diff[:, 1] / diff[:, 0]
    return slopes if np.ndim(j) else float(slopes[0])


def _leading_runs(codes: np.ndarray, depth: int):
    """First symbol class and length of the leading same-class run."""
    digits = digits_of(codes, ALPHABET, depth).astype(np.int8)
    cls = digits // 2
    same = cls == cls[:, :1]
    run = np.cumprod(same, axis=1, dtype=np.int8).sum(axis=1)
    return cls[:, 0], run


def example1_potential(p: Example1Params) -> PotentialTable:
    """Depth-``K`` truncation of the construction as a range-``K`` table.

    A word whose leading run of ``S_i`` symbols has length ``L`` gets ``w0``
    if ``L < lam`` and ``v_i(L + 1 - lam)`` if ``lam <= L < K - 1``; runs of
    length ``K - 1`` or more are treated as unresolved and get the limit
    value ``w_i(infinity)``. The table therefore carries exactly the values
    ``v_i(1), ..., v_i(K - 1 - lam)`` of the untruncated potential.
    """
    K = p.depth
    if ALPHABET**K > 2**24:
        raise CapacityError(f"depth {K} exceeds the 4**K <= 2**24 cap")
    first, run = _leading_runs(np.arange(ALPHABET**K, dtype=np.int64), K)
    values = np.tile(base_vertex(p), (ALPHABET**K, 1))
    for i in (1, 2):
        in_class = first == i - 1
        for L in range(p.lam, K - 1):
            values[in_class & (run == L)] = p.v(i, L + 1 - p.lam)
        values[in_class & (run >= K - 1)] = limit_vertex(i, p)
    return PotentialTable(ALPHABET, K, values)


def truncation_bound(p: Example1Params) -> float:
    """Largest distance between a value hidden by the truncation and the
    limit value standing in for it: ``max_i |v_i(K - lam) - w_i(infinity)|``
    (the ``v_i(k)`` approach ``w_i(infinity)`` monotonically)."""
    k = p.depth - p.lam
    return max(float(np.linalg.norm(p.v(i, k) - limit_vertex(i, p))) for i in (1, 2))


def swap_classes(word: Word) -> Word:
    """Symbolwise ``0 <-> 2``, ``1 <-> 3``."""
    if word.q != ALPHABET:
        raise ValueError("class swap is defined on 4 symbols")
    return Word(tuple((s + 2) % 4 for s in word.symbols), word.q)


def swap_permutation(r: int) -> np.ndarray:
    """Code permutation induced by :func:`swap_classes` on length-r words."""
    digits = digits_of(np.arange(ALPHABET**r), ALPHABET, r)
    swapped = (digits + 2) % 4
    return swapped @ (ALPHABET ** np.arange(r - 1, -1, -1))


def check_symmetry(table: PotentialTable) -> bool:
    """True iff ``Phi(swap(w)) = (phi_1(w), -phi_2(w))`` for every word, exactly."""
    if table.q != ALPHABET or table.dim != 2:
        raise ValueError("symmetry check needs a 2-d potential on 4 symbols")
    mirrored = table.values * np.array([1.0, -1.0])
    return bool(np.array_equal(table.values[swap_permutation(table.r)], mirrored))


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    sufficient_condition: bool
    first_failure: tuple[int, int] | None = None  # (i, j)


def sufficient_condition(p: Example1Params) -> bool:
    """``(-1)^i ell_i(x(1)) < (-1)^i (lam + 1) ell_i(x(2))`` for i = 1, 2."""
    ok = True
    for i in (1, 2):
        sign = (-1) ** i
        ok &= bool(sign * p.ell_values(i, 1) < sign * (p.lam + 1) * p.ell_values(i, 2))
    return ok


def check_vertex_monotonicity(p: Example1Params, j_range=(4, 1000)) -> MonotonicityReport:
    """Coordinatewise monotone convergence of the vertex sequences.

    ``w_1(j) - w_1(j+1)`` must be positive in both coordinates and
    ``w_2(j) - w_2(j+1)`` positive in the first, negative in the second,
    for every ``j`` in ``j_range`` (inclusive).
    """
    j_lo, j_hi = j_range
    if j_lo <= p.lam or j_hi > 10**4:
        raise ValueError(f"j_range must lie in [lam + 1, 10**4]")
    failure = None
    for i in (1, 2):
        js, pts = vertex_sequence(i, j_hi + 1, p)
        sel = (js >= j_lo) & (js <= j_hi)
        step = pts[:-1] - pts[1:]
        step = step[sel[:-1]]
        sign = np.array([1.0, 1.0 if i == 1 else -1.0])
        bad = np.flatnonzero(~(step * sign > 0).all(axis=1))
        if bad.size and failure is None:
            failure = (i, int(js[sel][bad[0]]))
    return MonotonicityReport(failure is None, sufficient_condition(p), failure)


def hull_hypotheses(p: Example1Params, terms: int = 10_000) -> dict[str, bool]:
    """The two numerical hypotheses under which the vertex formula describes
    the hull: ``sum_k x(k) < a`` and :func:`sufficient_condition`."""
    total = float(np.exp(p.log_x(np.arange(1, terms + 1))).sum())
    return {"sum_x_below_a": total < p.a, "ell_condition": sufficient_condition(p)}


def predicted_vertices(p: Example1Params, max_period: int) -> dict[str, np.ndarray]:
    """Labelled points expected on the hull of orbits of period <= max_period."""
    pts = {"w(0)": base_vertex(p)}
    for i in (1, 2):
        pts[f"w{i}(inf)"] = limit_vertex(i, p)
        if 3 * p.lam <= max_period:
            pts[f"w{i}({p.lam})"] = vertex_formula(i, p.lam, p)
        for j in range(p.lam + 1, min(max_period, p.depth - 1) + 1):
            pts[f"w{i}({j})"] = vertex_formula(i, j, p)
    return pts
