import numpy as np
import pytest

from rotground.annealing import (
    AnnealOptions,
    closed_classes,
    face_entropy_sup,
    ground_state,
    verify_face_limit,
)
from rotground.geometry import Polygon2
from rotground.polygon_example import ALPHABET
from rotground.symbolic import PotentialTable, digits_of
from rotground.transfer import MarkovMeasure


@pytest.fixture(scope="module")
def report56(table56):
    return ground_state(table56, [-1, 0], AnnealOptions(stop_on_convergence=False))


@pytest.fixture(scope="module")
def report55(table55):
    return ground_state(table55, [-1, 0])


class TestOptions:
    def test_schedule_ends_at_t_max(self):
        ts = AnnealOptions(t0=1, growth=2, t_max=10).schedule()
        assert ts == [1, 2, 4, 8, 10]

    @pytest.mark.parametrize("kw", [{"growth": 1.0}, {"t0": 0}, {"t_max": 0.5}, {"rv_tol": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            AnnealOptions(**kw)


class TestSmallCases:
    def test_bernoulli(self, bernoulli):
        rep = ground_state(bernoulli, [1.0])
        assert rep.converged
        assert rep.limit_rv[0] == pytest.approx(1, abs=1e-8)
        assert rep.limit_entropy == pytest.approx(0, abs=1e-8)
        assert len(rep.closed_classes) == 1 and rep.closed_classes[0].states.tolist() == [1]
        check = verify_face_limit(rep, bernoulli)
        assert check.passed

    def test_bernoulli_face_is_segment_end(self, bernoulli):
        # embed the one-dimensional potential as a segment in the plane
        planar = PotentialTable(2, 1, [[0.0, 0.0], [1.0, 0.0]])
        rep = ground_state(planar, [1.0, 0.0], poly=Polygon2([[0, 0], [1, 0]]))
        check = verify_face_limit(rep, planar, Polygon2([[0, 0], [1, 0]]))
        assert check.passed and check["face"].value <= 1e-8
        assert rep.face.kind == "vertex" and rep.face.points.tolist() == [[1, 0]]

    @pytest.mark.parametrize("q", [2, 3])
    def test_constant(self, q):
        table = PotentialTable(q, 2, np.tile([0.5, -1.0], (q * q, 1)))
        rep = ground_state(table, [0.3, 0.7])
        assert rep.converged
        assert np.allclose(rep.limit_rv, [0.5, -1.0])
        assert rep.limit_entropy == pytest.approx(np.log(q), abs=1e-12)
        assert face_entropy_sup(table, [0.3, 0.7]) == pytest.approx(np.log(q), abs=1e-12)

    def test_face_entropy_of_fixed_point(self, bernoulli):
        assert face_entropy_sup(bernoulli, [1.0]) == pytest.approx(0, abs=1e-14)

    def test_reports_non_convergence(self):
        table = PotentialTable(2, 2, np.random.default_rng(0).normal(size=(4, 1)))
        rep = ground_state(table, [1.0], AnnealOptions(t0=0.1, growth=2, t_max=0.8))
        assert not rep.converged and len(rep.accumulation_rvs) >= 1

    def test_closed_classes_of_block_chain(self):
        # two absorbing blocks of states reached from a transient state
        trans = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        chain = MarkovMeasure(2, 3, trans, np.array([0.5, 0, 0, 0.5]))
        classes = closed_classes(chain)
        assert [c.states.tolist() for c in classes] == [[0], [3]]
        assert [c.mass for c in classes] == [0.5, 0.5]


class TestPresets:
    def test_face_entropy(self, table56):
        assert face_entropy_sup(table56, [-1, 0]) == pytest.approx(np.log(2), abs=1e-12)

    def test_prop56_limit(self, report56, table56):
        assert np.allclose(report56.limit_rv, 0, atol=1e-6)
        assert report56.limit_entropy == pytest.approx(np.log(2), abs=1e-6)
        assert report56.trace.entries[-1].t == 400
        assert np.allclose(report56.closed_class_weights, [0.5, 0.5], atol=1e-8)

    def test_prop56_classes_are_pure_words(self, report56):
        states = digits_of(np.arange(ALPHABET**9), ALPHABET, 9) // 2
        pure1 = np.flatnonzero((states == 0).all(axis=1))
        pure2 = np.flatnonzero((states == 1).all(axis=1))
        got = sorted(c.states.tolist() for c in report56.closed_classes)
        assert got == sorted([pure1.tolist(), pure2.tolist()])

    def test_prop56_pinned(self, report56):
        assert np.abs(report56.trace.rvs[:, 1]).max() <= 1e-10

    def test_prop56_face_limit(self, report56, table56, poly55):
        check = verify_face_limit(report56, table56)
        assert check.passed
        assert check.distances[-1] <= 1e-6

    def test_prop55_midpoint(self, report55, table55, poly55):
        assert report55.converged
        assert np.allclose(report55.limit_rv, [0, 0], atol=1e-6)
        assert np.abs(report55.trace.rvs[:, 1]).max() <= 1e-10
        check = verify_face_limit(report55, table55, poly55)
        assert check.passed
        assert check["face"].detail.startswith("edge")

    def test_schedules_agree(self, table55, report55):
        other = ground_state(table55, [-1, 0], AnnealOptions(growth=1.7))
        assert other.converged
        assert other.limit_entropy == pytest.approx(report55.limit_entropy, abs=1e-8)
