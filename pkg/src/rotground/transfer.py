"""Transfer matrices, pressure and Gibbs-Markov equilibrium states.

A range-``r`` potential lives on the de Bruijn graph whose states are words
of length ``r - 1`` and whose edges are words of length ``r``. Edge weights
are stored as a ``(Q, q)`` array ``W[u, s]`` for the edge ``u -> (u s)[1:]``
with ``Q = q**(r-1)``; the successor state is ``(u * q + s) % Q``. For
``r = 1`` the graph has a single state carrying ``q`` self-loops.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .maximizing import MAX_QUOTIENT_STATES, WeightedDeBruijn, balancing_gauge
from .symbolic import PotentialTable, bisimulation_classes

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-13
DEFAULT_MAX_ITER = 100_000
_NEGLIGIBLE = 1e-250
_RATE_WINDOW = 100
_SLOW_ITERATIONS = 3000


class TransferConvergenceError(RuntimeError):
    """Power iteration did not reach the requested residual."""

    def __init__(self, message, residual, t=None):
        super().__init__(message)
        self.residual = residual
        self.t = t


@dataclass(frozen=True, eq=False)
class ScalarPotential:
    """Real-valued range-``r`` potential, ``values[code]`` per length-r word."""

    q: int
    r: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != self.q**self.r:
            raise ValueError(f"expected {self.q**self.r} values, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_table(cls, table: PotentialTable, direction=None, scale: float = 1.0):
        """``scale * direction . Phi``; ``direction`` may be omitted when m = 1."""
        if direction is None:
            if table.dim != 1:
                raise ValueError("a direction is required for vector potentials")
            direction = [1.0]
        return cls(table.q, table.r, scale * table.contract(direction))

    @classmethod
    def zero(cls, q: int, r: int = 1):
        return cls(q, r, np.zeros(q**r))

    def __add__(self, other):
        if isinstance(other, ScalarPotential):
            if (other.q, other.r) != (self.q, self.r):
                raise ValueError("potentials live on different graphs")
            return ScalarPotential(self.q, self.r, self.values + other.values)
        return ScalarPotential(self.q, self.r, self.values + float(other))

    def __rmul__(self, s):
        return ScalarPotential(self.q, self.r, float(s) * self.values)

    @property
    def n_states(self) -> int:
        return self.q ** (self.r - 1)


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Stationary Markov chain on de Bruijn states.

    ``transition[u, s]`` is the probability of appending symbol ``s`` in
    state ``u``, i.e. of the edge ``u -> (u*q + s) % Q``; ``stationary`` is
    the invariant distribution on states. The measure of the length-``r``
    cylinder with code ``u*q + s`` is ``stationary[u] * transition[u, s]``.
    """

    q: int
    r: int
    transition: np.ndarray = field(repr=False)
    stationary: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("transition", "stationary"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.transition.shape != (self.n_states, self.q):
            raise ValueError(f"transition must have shape ({self.n_states}, {self.q})")
        if self.stationary.shape != (self.n_states,):
            raise ValueError("stationary vector has the wrong length")

    @property
    def n_states(self) -> int:
        return self.q ** (self.r - 1)

    def successors(self) -> np.ndarray:
        return successor_table(self.q, self.r)

    def cylinder_masses(self) -> np.ndarray:
        """Mass of every length-r cylinder, indexed by word code."""
        return (self.stationary[:, None] * self.transition).reshape(-1)

    def transition_matrix(self) -> np.ndarray:
        """Dense ``Q x Q`` transition matrix (small graphs only)."""
        n = self.n_states
        mat = np.zeros((n, n))
        np.add.at(mat, (np.repeat(np.arange(n), self.q), self.successors().reshape(-1)),
                  self.transition.reshape(-1))
        return mat

    def stationarity_defect(self) -> float:
        pushed = np.zeros(self.n_states)
        np.add.at(pushed, self.successors().reshape(-1), self.cylinder_masses())
        return float(np.abs(pushed - self.stationary).max())

    @classmethod
    def from_transition(cls, q: int, r: int, transition) -> "MarkovMeasure":
        """Build the chain with its stationary law (power iteration on the chain)."""
        transition = np.asarray(transition, dtype=float)
        transition = transition / transition.sum(axis=1, keepdims=True)
        n = q ** (r - 1)
        succ = successor_table(q, r).reshape(-1)
        if n <= 2048:
            mat = np.zeros((n, n))
            np.add.at(mat, (np.repeat(np.arange(n), q), succ), transition.reshape(-1))
            # pi (P - I) = 0 with sum(pi) = 1
            system = np.vstack([mat.T - np.eye(n), np.ones((1, n))])
            rhs = np.zeros(n + 1)
            rhs[-1] = 1.0
            pi = np.linalg.lstsq(system, rhs, rcond=None)[0]
            pi = np.clip(pi, 0.0, None)
            return cls(q, r, transition, pi / pi.sum())
        pi = np.full(n, 1.0 / n)
        for _ in range(100_000):
            new = np.bincount(succ, weights=(pi[:, None] * transition).reshape(-1), minlength=n)
            # lazy step keeps periodic chains convergent
            new = 0.5 * (new + pi)
            new /= new.sum()
            if np.abs(new - pi).max() < 1e-15:
                pi = new
                break
            pi = new
        return cls(q, r, transition, pi)


def successor_table(q: int, r: int) -> np.ndarray:
    n = q ** (r - 1)
    return (np.arange(n, dtype=np.int64)[:, None] * q + np.arange(q)) % n


def _apply_right(weights: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    """``(M x)[u] = sum_s W[u, s] x[succ(u, s)]``."""
    n = weights.shape[0]
    if n == 1:
        return weights.sum(axis=1) * x
    m = n // q
    return (weights.reshape(q, m, q) * x.reshape(1, m, q)).sum(axis=-1).reshape(n)


def _apply_left(weights: np.ndarray, y: np.ndarray, q: int) -> np.ndarray:
    """``(y M)[v] = sum_{u -> v} y[u] W[u, s]``."""
    n = weights.shape[0]
    if n == 1:
        return weights.sum(axis=1) * y
    m = n // q
    return (y.reshape(q, m, 1) * weights.reshape(q, m, q)).sum(axis=0).reshape(n)


@dataclass
class _PowerResult:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int
    shifted: bool


def _power_iteration(apply, n, tol, max_iter, start=None) -> _PowerResult:
    """Power iteration stopped by the Collatz-Wielandt bracket.

    For a nonnegative matrix and a positive vector ``x`` the spectral radius
    lies between the smallest and largest ratio ``(M x)_i / x_i``; the
    iteration stops once that bracket is narrower than ``tol`` relative to
    the estimate. Entries below ``_NEGLIGIBLE`` (underflow debris) are left
    out of the bracket.
    """
    x = np.ones(n) if start is None else np.array(start, dtype=float)
    x /= x.sum()
    shift = 0.0
    residual = np.inf
    checkpoint = np.inf
    for it in range(1, max_iter + 1):
        y = apply(x)
        if shift:
            y = y + shift * x
        lam = y.sum()
        live = x > _NEGLIGIBLE
        ratios = y[live] / x[live]
        residual = (ratios.max() - ratios.min()) / lam + y[~live].sum() / lam
        x = y / lam
        if residual <= tol:
            return _PowerResult(lam - shift, x, residual, it, bool(shift))
        if it % _RATE_WINDOW == 0:
            rate = (residual / checkpoint) ** (1.0 / _RATE_WINDOW) if checkpoint < np.inf else 0.0
            projected = np.log(tol / residual) / np.log(rate) if 0 < rate < 1 else np.inf
            if not shift and (rate >= 1 or projected > _SLOW_ITERATIONS):
                # peripheral spectrum (near-periodic chains): shift by the current estimate
                shift = lam
                log.debug("power iteration slow at residual %.3g; shifting", residual)
            checkpoint = residual
    raise TransferConvergenceError(
        f"power iteration did not converge in {max_iter} steps (residual {residual:.3g})",
        residual,
    )


@dataclass(frozen=True, eq=False)
class TransferSolution:
    """Pressure ``P = shift + log(perron_value)`` with its Perron data.

    The eigenproblem is solved on the bisimulation quotient after a diagonal
    change of gauge, so ``right`` and ``left`` are Perron vectors of the
    balanced operator ``exp(-shift) D^-1 M D`` with ``D = diag(exp(gauge))``.
    The Perron vectors of ``M`` itself are ``right * exp(gauge)`` and
    ``left * exp(-gauge)``, which may over- or underflow at low temperature.
    """

    pressure: float
    shift: float
    perron_value: float
    right: np.ndarray = field(repr=False)
    left: np.ndarray = field(repr=False)
    markov: MarkovMeasure = field(repr=False)
    residual: float = 0.0
    iterations: int = 0
    flags: tuple[str, ...] = ()
    gauge: np.ndarray | None = field(default=None, repr=False)
    quotient_right: np.ndarray | None = field(default=None, repr=False)


GTH_MAX_STATES = 512


def stationary_gth(chain: np.ndarray) -> np.ndarray | None:
    """Stationary law of an irreducible stochastic matrix by the
    Grassmann-Taksar-Heyman elimination (no subtractions, so tiny
    transition probabilities keep full relative accuracy).

    Returns ``None`` when a state cannot reach the lower-numbered ones
    (numerically reducible input).
    """
    a = np.array(chain, dtype=float)
    n = a.shape[0]
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for k in range(n - 1, 0, -1):
            s = a[k, :k].sum()
            if not s > 0:
                return None
            a[:k, k] /= s
            a[:k, :k] += np.outer(a[:k, k], a[k, :k])
        pi = np.zeros(n)
        pi[0] = 1.0
        for k in range(1, n):
            pi[k] = pi[:k] @ a[:k, k]
        pi /= pi.sum()
    return pi if np.isfinite(pi).all() else None


def solve_transfer(
    potential: ScalarPotential,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: TransferSolution | None = None,
    partition: np.ndarray | None = None,
) -> TransferSolution:
    """Pressure and equilibrium Gibbs-Markov measure of a scalar potential.

    Parameters
    ----------
    potential : ScalarPotential
        Finite-range potential ``psi``.
    tol : float
        Width of the Collatz-Wielandt bracket, relative to the Perron value,
        at which the power iteration stops.
    max_iter : int
        Iteration cap per eigenvector.
    warm_start : TransferSolution, optional
        Previous solution on the same graph whose eigenvector seeds the
        iteration (used along annealing schedules).
    partition : ndarray, optional
        Bisimulation of the de Bruijn states valid for ``psi`` (for instance
        ``PotentialTable.bisimulation`` of the table ``psi`` was contracted
        from). Computed when omitted.

    Returns
    -------
    TransferSolution
        ``pressure`` equals ``h(markov) + integral of psi`` up to ``~tol``.

    Notes
    -----
    The Perron problem is lumped onto the bisimulation quotient and
    rebalanced with the max-plus gauge of :func:`balancing_gauge`: entries
    become ``exp(psi - beta - g(u) + g(v)) <= 1`` with ``beta`` the maximum
    cycle mean, which keeps low-temperature solves well scaled. The
    stationary law of the quotient chain comes from GTH elimination and is
    lifted exactly to the de Bruijn states by ``r - 1`` chain steps (the last
    ``r - 1`` symbols emitted from a class-distributed start already have the
    stationary law).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    q, r, n_states = potential.q, potential.r, potential.n_states
    if partition is None:
        partition = bisimulation_classes(potential.values.reshape(n_states, q), q)
    graph = WeightedDeBruijn(q, r, potential.values, partition)
    quot = graph.quotient
    nc = quot.n
    flags: tuple[str, ...] = ()

    if nc <= MAX_QUOTIENT_STATES:
        shift, gauge = balancing_gauge(quot)
    else:
        shift, gauge = float(quot.weight.max()), np.zeros(nc)
        flags += ("unbalanced",)
    succ = quot.dst.reshape(nc, q)
    with np.errstate(under="ignore"):
        weights = np.exp(quot.weight.reshape(nc, q) - shift
                         - gauge[:, None] + gauge[succ])

    start = None
    if warm_start is not None and warm_start.quotient_right is not None \
            and warm_start.quotient_right.shape == (nc,):
        start = warm_start.quotient_right
    right = _power_iteration(lambda x: (weights * x[succ]).sum(axis=1), nc, tol, max_iter, start)
    lam, rvec = right.value, right.vector
    residual, iterations = right.residual, right.iterations
    if right.shifted:
        flags += ("shifted",)

    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        trans = weights * rvec[succ] / (lam * rvec[:, None])
    bad = ~np.isfinite(trans).all(axis=1) | (trans.sum(axis=1) <= 0)
    if bad.any():
        # eigenvector underflow: fall back to the local weights
        trans[bad] = weights[bad]
        flags += ("underflow",)
    trans /= trans.sum(axis=1, keepdims=True)

    pi_q = None
    if nc <= GTH_MAX_STATES:
        dense = np.zeros((nc, nc))
        np.add.at(dense, (quot.src, quot.dst), trans.reshape(-1))
        pi_q = stationary_gth(dense)
    if pi_q is None:
        dst_flat = quot.dst
        left = _power_iteration(
            lambda y: np.bincount(dst_flat, weights=(y[:, None] * weights).reshape(-1),
                                  minlength=nc),
            nc, tol, max_iter)
        residual = max(residual, left.residual)
        iterations += left.iterations
        pi_q = left.vector * rvec
        pi_q /= pi_q.sum()

    classes = np.asarray(partition)
    sizes = np.bincount(classes, minlength=nc)
    full_trans = trans[classes]
    pi = pi_q[classes] / sizes[classes]
    if r > 1:
        state_succ = successor_table(q, r).reshape(-1)
        for _ in range(r - 1):
            pi = np.bincount(state_succ, weights=(pi[:, None] * full_trans).reshape(-1),
                             minlength=n_states)
        pi /= pi.sum()

    markov = MarkovMeasure(q, r, full_trans, pi)
    right_full = rvec[classes]
    with np.errstate(divide="ignore", invalid="ignore"):
        left_full = np.where(right_full > 0, pi / right_full, 0.0)
    return TransferSolution(
        pressure=shift + float(np.log(lam)),
        shift=shift,
        perron_value=float(lam),
        right=right_full,
        left=left_full,
        markov=markov,
        residual=residual,
        iterations=iterations,
        flags=flags,
        gauge=gauge[classes],
        quotient_right=rvec,
    )


def pressure(potential: ScalarPotential, **kwargs) -> float:
    return solve_transfer(potential, **kwargs).pressure


def measure_entropy(measure: MarkovMeasure) -> float:
    """Kolmogorov-Sinai entropy ``-sum_u pi_u sum_s p(u,s) log p(u,s)``."""
    p = measure.transition
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    return float(-(measure.stationary * plogp.sum(axis=1)).sum())


def measure_integral(measure: MarkovMeasure, potential) -> np.ndarray:
    """Integral of a (vector or scalar) potential against the chain.

    A potential reading fewer symbols than the chain's order is extended by
    ignoring trailing symbols; a longer range is a contract violation.
    """
    if isinstance(potential, ScalarPotential):
        values, r = potential.values[:, None], potential.r
    else:
        values, r = potential.values, potential.r
    if potential.q != measure.q:
        raise ValueError("potential and measure use different alphabets")
    if r > measure.r:
        raise ValueError(
            f"potential range {r} exceeds the order of the measure (range {measure.r})"
        )
    values = np.repeat(values, measure.q ** (measure.r - r), axis=0)
    result = measure.cylinder_masses() @ values
    return result[0] if isinstance(potential, ScalarPotential) else result


@dataclass(frozen=True, eq=False)
class AnnealingEntry:
    t: float
    rv: np.ndarray
    entropy: float
    pressure: float
    markov: MarkovMeasure = field(repr=False)
    flags: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class AnnealingTrace:
    """Equilibrium states of ``t * direction . Phi`` along a schedule."""

    direction: np.ndarray
    entries: tuple[AnnealingEntry, ...]

    @property
    def schedule(self) -> np.ndarray:
        return np.array([e.t for e in self.entries])

    @property
    def rvs(self) -> np.ndarray:
        return np.array([e.rv for e in self.entries])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([e.entropy for e in self.entries])

    @property
    def pressures(self) -> np.ndarray:
        return np.array([e.pressure for e in self.entries])


def unit_direction(direction) -> np.ndarray:
    direction = np.asarray(direction, dtype=float).reshape(-1)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ValueError("direction must be non-zero")
    return direction / norm


def anneal_step(table: PotentialTable, direction, t: float, warm=None, **kwargs):
    """Solve one schedule point; returns ``(AnnealingEntry, TransferSolution)``."""
    sol = solve_transfer(ScalarPotential.from_table(table, direction, scale=t),
                         warm_start=warm, partition=table.bisimulation, **kwargs)
    entry = AnnealingEntry(
        t=float(t),
        rv=measure_integral(sol.markov, table),
        entropy=measure_entropy(sol.markov),
        pressure=sol.pressure,
        markov=sol.markov,
        flags=sol.flags,
    )
    return entry, sol


def anneal(table: PotentialTable, direction, schedule, **kwargs) -> AnnealingTrace:
    """Trace the equilibrium states of ``t * direction . Phi`` over ``schedule``.

    ``direction`` is normalized to unit length. Eigenvectors of each solve
    warm-start the next one, which keeps the run deterministic.
    """
    alpha = unit_direction(direction)
    schedule = [float(t) for t in schedule]
    if any(t < 0 for t in schedule) or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing and non-negative")
    entries, warm = [], None
    for t in schedule:
        try:
            entry, warm = anneal_step(table, alpha, t, warm, **kwargs)
        except TransferConvergenceError as exc:
            exc.t = t
            raise
        entries.append(entry)
    return AnnealingTrace(alpha, tuple(entries))
