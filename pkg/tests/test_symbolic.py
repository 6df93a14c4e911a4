import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotground.symbolic import (
    CapacityError,
    PeriodicOrbit,
    PotentialTable,
    Word,
    bisimulation_classes,
    enumerate_periodic_orbits,
    enumerate_words,
    minimal_period,
    necklace_codes,
    necklace_count,
    orbit_measure_weights,
    periodic_orbit_rv,
)


def brute_orbits(q, p):
    """Orbits of minimal period exactly p by rotating every word."""
    found = set()
    for w in itertools.product(range(q), repeat=p):
        if minimal_period(w) == p:
            found.add(min(w[k:] + w[:k] for k in range(p)))
    return found


class TestWords:
    def test_binary_length_one(self):
        assert [str(w) for w in enumerate_words(2, 1)] == ["0", "1"]

    def test_binary_length_two(self):
        assert [str(w) for w in enumerate_words(2, 2)] == ["00", "01", "10", "11"]

    def test_quaternary_length_three(self):
        words = enumerate_words(4, 3)
        assert len(words) == 64
        assert str(words[0]) == "000" and str(words[-1]) == "333"

    def test_code_round_trip(self):
        for w in enumerate_words(3, 4):
            assert Word.from_code(w.code, 3, 4) == w

    def test_invalid_symbol(self):
        with pytest.raises(ValueError):
            Word((0, 2), 2)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            enumerate_words(4, 13)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            enumerate_words(1, 3)


class TestOrbits:
    def test_fixed_points(self):
        assert [str(o) for o in enumerate_periodic_orbits(2, 1)] == ["(0)", "(1)"]

    def test_period_two_adds_01(self):
        assert [str(o) for o in enumerate_periodic_orbits(2, 2)] == ["(0)", "(1)", "(01)"]

    def test_period_four_count(self):
        orbits = [o for o in enumerate_periodic_orbits(2, 4) if o.period == 4]
        assert len(orbits) == 3 == len(brute_orbits(2, 4))

    @pytest.mark.parametrize("q,p", [(2, 5), (2, 6), (3, 4), (4, 3)])
    def test_against_brute_force(self, q, p):
        got = {tuple(w) for w in (np.array(necklace_codes(q, p))[:, None]
                                  // q ** np.arange(p - 1, -1, -1) % q).tolist()}
        assert got == brute_orbits(q, p)
        assert len(got) == necklace_count(q, p)

    @pytest.mark.parametrize("P", range(1, 7))
    def test_periodic_point_count(self, P):
        # sum over periods p | P of p * #orbits(p) counts words w with w^inf of period dividing P
        orbits = enumerate_periodic_orbits(2, P)
        lhs = sum(o.period for o in orbits if P % o.period == 0)
        assert lhs == 2**P

    def test_canonical_generator(self):
        assert str(PeriodicOrbit.from_symbols([1, 0, 1, 0], 2)) == "(01)"
        with pytest.raises(ValueError):
            PeriodicOrbit(Word((1, 0), 2))
        with pytest.raises(ValueError):
            PeriodicOrbit(Word((0, 0), 2))

    def test_weights(self):
        w = dict((str(x), p) for x, p in orbit_measure_weights(PeriodicOrbit.from_symbols([0, 1], 2)))
        assert w == {"01": 0.5, "10": 0.5}
        assert [(str(x), p) for x, p in
                orbit_measure_weights(PeriodicOrbit.from_symbols([0], 2))] == [("0", 1.0)]
        three = orbit_measure_weights(PeriodicOrbit.from_symbols([0, 0, 1], 2))
        assert sorted(str(x) for x, _ in three) == ["001", "010", "100"]
        assert all(p == pytest.approx(1 / 3, abs=1e-15) for _, p in three)

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
    def test_weights_sum_to_one(self, syms):
        o = PeriodicOrbit.from_symbols(syms, 4)
        assert abs(sum(p for _, p in orbit_measure_weights(o)) - 1) <= 1e-15


class TestRotationVectors:
    def test_simplex(self, simplex):
        assert np.allclose(periodic_orbit_rv(PeriodicOrbit.from_symbols([0, 1], 2), simplex), [0.5, 0.5])
        assert np.allclose(periodic_orbit_rv(PeriodicOrbit.from_symbols([0], 2), simplex), [1, 0])

    def test_product_potential(self):
        phi = PotentialTable.from_function(2, 2, lambda w: w[0] * w[1])
        assert periodic_orbit_rv(PeriodicOrbit.from_symbols([0, 1], 2), phi)[0] == 0.0
        assert periodic_orbit_rv(PeriodicOrbit.from_symbols([1], 2), phi)[0] == 1.0

    @given(st.lists(st.integers(0, 2), min_size=1, max_size=9), st.integers(0, 10),
           st.integers(0, 2**31 - 1))
    def test_in_value_box_and_rotation_invariant(self, syms, k, seed):
        rng = np.random.default_rng(seed)
        phi = PotentialTable(3, 2, rng.normal(size=(9, 2)))
        rv = periodic_orbit_rv(PeriodicOrbit.from_symbols(syms, 3), phi)
        rotated = syms[k % len(syms):] + syms[:k % len(syms)]
        assert np.allclose(rv, periodic_orbit_rv(PeriodicOrbit.from_symbols(rotated, 3), phi),
                           atol=1e-14)
        assert (rv >= phi.values.min(axis=0) - 1e-12).all()
        assert (rv <= phi.values.max(axis=0) + 1e-12).all()

    def test_rv_matches_window_average(self):
        rng = np.random.default_rng(3)
        phi = PotentialTable(2, 3, rng.normal(size=(8, 1)))
        syms = [0, 1, 1, 0, 1]
        long = syms * 3
        direct = np.mean([phi(long[i:i + 3]) for i in range(len(syms))], axis=0)
        assert np.allclose(periodic_orbit_rv(PeriodicOrbit.from_symbols(syms, 2), phi), direct)


class TestPotentialTable:
    def test_shape_checked(self):
        with pytest.raises(ValueError):
            PotentialTable(2, 2, np.zeros((3, 1)))
        with pytest.raises(ValueError):
            PotentialTable(2, 1, [[np.nan], [0.0]])

    def test_call_reads_prefix(self):
        phi = PotentialTable.from_function(2, 2, lambda w: 2 * w[0] + w[1])
        assert phi([1, 0, 1])[0] == 2.0
        with pytest.raises(ValueError):
            phi([1])

    def test_extend(self):
        phi = PotentialTable.from_function(3, 1, lambda w: w[0])
        ext = phi.extend(3)
        for w in enumerate_words(3, 3):
            assert ext(w)[0] == phi(w)[0]

    def test_read_only(self):
        phi = PotentialTable(2, 1, [[0.0], [1.0]])
        with pytest.raises(ValueError):
            phi.values[0, 0] = 3.0

    def test_bisimulation_collapses_when_only_last_symbol_matters(self):
        phi = PotentialTable.from_function(2, 4, lambda w: w[-1])
        assert phi.bisimulation.max() == 0
        # reading the first symbol distinguishes every state
        assert len(set(PotentialTable.from_function(2, 4, lambda w: w[0]).bisimulation)) == 8

    def test_bisimulation_respects_futures(self):
        rng = np.random.default_rng(0)
        sig = rng.integers(0, 2, size=(16, 2)).astype(float)
        labels = bisimulation_classes(sig, 2)
        succ = (np.arange(16)[:, None] * 2 + np.arange(2)) % 16
        for a in range(16):
            for b in range(16):
                if labels[a] == labels[b]:
                    assert np.array_equal(sig[a], sig[b])
                    assert np.array_equal(labels[succ[a]], labels[succ[b]])
