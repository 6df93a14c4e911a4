"""Words, periodic orbits and finite-range vector potentials on a full shift.

Words over the alphabet ``{0, ..., q-1}`` are encoded as base-``q`` integers
with the first symbol most significant, so lexicographic order on words is
numeric order on codes. A length-``r`` word ``u s`` (``u`` of length ``r-1``)
has code ``code(u) * q + s``; this is what makes de Bruijn transitions O(1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX_WORDS = 2**24
MAX_RANGE = 16


class CapacityError(ValueError):
    """Raised when an enumeration or table would exceed the desk-scale cap."""


def _check_capacity(q: int, r: int) -> None:
    if q < 1 or r < 0:
        raise ValueError(f"invalid alphabet/length ({q}, {r})")
    if r > MAX_RANGE or q**r > MAX_WORDS:
        raise CapacityError(f"q**r = {q}**{r} exceeds the cap of {MAX_WORDS} words")


def digits_of(codes, q: int, length: int) -> np.ndarray:
    """Expand word codes into an ``(n, length)`` array of symbols."""
    codes = np.asarray(codes, dtype=np.int64)
    powers = q ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (codes[..., None] // powers) % q


def code_of(symbols: Sequence[int], q: int) -> int:
    code = 0
    for s in symbols:
        code = code * q + int(s)
    return code


@dataclass(frozen=True)
class Word:
    """A finite word over ``{0, ..., q-1}``."""

    symbols: tuple[int, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if self.q < 1:
            raise ValueError("alphabet size must be positive")
        if len(self.symbols) < 1:
            raise ValueError("words have length >= 1")
        if any(s < 0 or s >= self.q for s in self.symbols):
            raise ValueError(f"symbols {self.symbols} not in [0, {self.q})")

    @classmethod
    def from_code(cls, code: int, q: int, length: int) -> "Word":
        return cls(tuple(digits_of(code, q, length).tolist()), q)

    @classmethod
    def parse(cls, text: str, q: int) -> "Word":
        """Parse a digit string such as ``"0123"``."""
        return cls(tuple(int(c, base=max(q, 2)) for c in text), q)

    @property
    def code(self) -> int:
        return code_of(self.symbols, self.q)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        if self.q <= 10:
            return "".join(str(s) for s in self.symbols)
        return "-".join(str(s) for s in self.symbols)

    def rotate(self, k: int) -> "Word":
        k %= len(self.symbols)
        return Word(self.symbols[k:] + self.symbols[:k], self.q)


def enumerate_words(q: int, r: int) -> list[Word]:
    """All ``q**r`` words of length ``r`` in lexicographic order.

    >>> [str(w) for w in enumerate_words(2, 2)]
    ['00', '01', '10', '11']
    """
    if q < 2 or r < 1:
        raise ValueError("need q >= 2 and r >= 1")
    _check_capacity(q, r)
    return [Word(tuple(row), q) for row in digits_of(np.arange(q**r), q, r).tolist()]


def minimal_period(symbols: Sequence[int]) -> int:
    n = len(symbols)
    for d in range(1, n + 1):
        if n % d == 0 and all(symbols[i] == symbols[i % d] for i in range(n)):
            return d
    return n


@dataclass(frozen=True)
class PeriodicOrbit:
    """The shift orbit of the periodic point ``generator generator ...``.

    The stored generator is the lexicographically least rotation of a block
    of minimal period; use :meth:`from_symbols` to build one from any block.
    """

    generator: Word

    def __post_init__(self):
        syms = self.generator.symbols
        if minimal_period(syms) != len(syms):
            raise ValueError(f"{self.generator} is not of minimal period")
        if min(syms[k:] + syms[:k] for k in range(len(syms))) != syms:
            raise ValueError(f"{self.generator} is not the canonical rotation")

    @classmethod
    def from_symbols(cls, symbols: Iterable[int], q: int) -> "PeriodicOrbit":
        syms = tuple(int(s) for s in symbols)
        syms = syms[: minimal_period(syms)]
        best = min(syms[k:] + syms[:k] for k in range(len(syms)))
        return cls(Word(best, q))

    @property
    def period(self) -> int:
        return len(self.generator)

    @property
    def q(self) -> int:
        return self.generator.q

    def __str__(self) -> str:
        return f"({self.generator})"

    def sort_key(self) -> tuple:
        return (self.period, self.generator.symbols)


def necklace_codes(q: int, p: int) -> np.ndarray:
    """Codes of canonical generators of all orbits of minimal period ``p``."""
    _check_capacity(q, p)
    codes = np.arange(q**p, dtype=np.int64)
    high = q ** (p - 1)
    best = codes.copy()
    aperiodic = np.ones(codes.shape, dtype=bool)
    rot = codes
    for _ in range(1, p):
        rot = (rot % high) * q + rot // high
        np.minimum(best, rot, out=best)
        aperiodic &= rot != codes
    return codes[(best == codes) & aperiodic]


def necklace_count(q: int, p: int) -> int:
    """Number of aperiodic necklaces (Moebius formula)."""

    def mobius(n):
        result, k = 1, 2
        while k * k <= n:
            if n % k == 0:
                n //= k
                if n % k == 0:
                    return 0
                result = -result
            k += 1
        return -result if n > 1 else result

    return sum(mobius(p // d) * q**d for d in range(1, p + 1) if p % d == 0) // p


def enumerate_periodic_orbits(q: int, max_period: int) -> list[PeriodicOrbit]:
    """One canonical representative per orbit of each minimal period <= max_period."""
    _check_capacity(q, max_period)
    orbits = []
    for p in range(1, max_period + 1):
        for row in digits_of(necklace_codes(q, p), q, p).tolist():
            orbits.append(PeriodicOrbit(Word(tuple(row), q)))
    return orbits


def orbit_measure_weights(orbit: PeriodicOrbit) -> list[tuple[Word, float]]:
    """Equidistributed point masses on the cyclic shifts of the generator."""
    p = orbit.period
    return [(orbit.generator.rotate(k), 1.0 / p) for k in range(p)]


@dataclass(frozen=True, eq=False)
class PotentialTable:
    """Vector potential reading the first ``r`` coordinates.

    ``values[code]`` is the vector assigned to the length-``r`` word with the
    given base-``q`` code; ``values`` has shape ``(q**r, m)``.
    """

    q: int
    r: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_capacity(self.q, self.r)
        if self.r < 1:
            raise ValueError("range must be >= 1")
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != self.q**self.r or vals.ndim != 2:
            raise ValueError(
                f"values must have shape ({self.q**self.r}, m), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, q: int, r: int, func) -> "PotentialTable":
        """Tabulate ``func(symbols) -> vector`` over all words of length r."""
        _check_capacity(q, r)
        rows = digits_of(np.arange(q**r), q, r)
        return cls(q, r, np.array([np.atleast_1d(func(tuple(w))) for w in rows.tolist()]))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_states(self) -> int:
        return self.q ** (self.r - 1)

    def __call__(self, word) -> np.ndarray:
        if isinstance(word, Word):
            word = word.symbols
        if len(word) < self.r:
            raise ValueError(f"potential reads {self.r} symbols, got {len(word)}")
        return self.values[code_of(word[: self.r], self.q)]

    def contract(self, direction) -> np.ndarray:
        """Scalar values ``direction . Phi`` per word."""
        direction = np.asarray(direction, dtype=float).reshape(-1)
        if direction.shape[0] != self.dim:
            raise ValueError(f"direction has dim {direction.shape[0]}, potential {self.dim}")
        return self.values @ direction

    def extend(self, r: int) -> "PotentialTable":
        """Same potential viewed as reading ``r >= self.r`` symbols."""
        if r < self.r:
            raise ValueError("cannot shrink the range of a potential")
        return PotentialTable(self.q, r, np.repeat(self.values, self.q ** (r - self.r), axis=0))

    def equals(self, other: "PotentialTable") -> bool:
        return (
            self.q == other.q
            and self.r == other.r
            and np.array_equal(self.values, other.values)
        )

    @cached_property
    def bisimulation(self) -> np.ndarray:
        """Coarsest partition of de Bruijn states with identical futures.

        Two states are merged when, for every appended symbol, the edge
        values coincide and the successor states are again merged. Cycle
        means and Perron values survive the quotient unchanged.
        """
        return bisimulation_classes(self.values.reshape(self.n_states, -1), self.q)


def row_ids(rows: np.ndarray) -> np.ndarray:
    """Integer id per row, equal ids for equal rows (sorted order of rows)."""
    rows = np.asarray(rows)
    order = np.lexsort(rows.T[::-1])
    srt = rows[order]
    new_group = np.r_[False, (srt[1:] != srt[:-1]).any(axis=1)]
    ids = np.empty(rows.shape[0], dtype=np.int64)
    ids[order] = np.cumsum(new_group)
    return ids


def bisimulation_classes(edge_signature: np.ndarray, q: int) -> np.ndarray:
    """Partition refinement on the de Bruijn automaton.

    ``edge_signature`` has one row per state (``q**(r-1)`` rows) holding the
    values of its ``q`` outgoing edges. Returns a class label per state,
    labels numbered by first occurrence in state order.
    """
    n = edge_signature.shape[0]
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    successors = (np.arange(n, dtype=np.int64)[:, None] * q + np.arange(q)) % n
    labels = row_ids(edge_signature)
    n_classes = labels.max() + 1
    while True:
        new = row_ids(np.column_stack([labels, labels[successors]]))
        if new.max() + 1 == n_classes:
            break
        labels, n_classes = new, new.max() + 1
    # renumber by first occurrence for deterministic output
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    relabel = np.empty(n_classes, dtype=np.int64)
    relabel[order] = np.arange(n_classes)
    return relabel[labels]


def periodic_block_rvs(codes: np.ndarray, p: int, potential: PotentialTable) -> np.ndarray:
    """Rotation vectors of the orbits generated by the period-``p`` blocks ``codes``."""
    q, r = potential.q, potential.r
    digits = digits_of(codes, q, p)
    reps = -(-(p + r - 1) // p)
    unrolled = np.tile(digits, (1, reps))[:, : p + r - 1]
    windows = np.zeros((digits.shape[0], p), dtype=np.int64)
    for i in range(r):
        windows = windows * q + unrolled[:, i : i + p]
    return potential.values[windows].mean(axis=1)


def periodic_orbit_rv(orbit: PeriodicOrbit, potential: PotentialTable) -> np.ndarray:
    """Average of the potential over the length-r windows of the periodic word."""
    if orbit.q != potential.q:
        raise ValueError("orbit and potential use different alphabets")
    return periodic_block_rvs(np.array([orbit.generator.code]), orbit.period, potential)[0]
