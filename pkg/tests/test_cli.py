import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotground.cli import main
from rotground.files import (
    PotentialFileError,
    parse_potential,
    potential_to_dict,
    read_potential,
    write_potential,
)
from rotground.polygon_example import predicted_vertices, preset
from rotground.symbolic import PotentialTable

GOLDEN = Path(__file__).parent / "golden"


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out else out), err


@pytest.fixture
def zero_file(tmp_path):
    return write_json(tmp_path / "zero.json", {
        "alphabet_size": 2, "range": 1, "dim": 1, "values": {"0": [0.0], "1": [0.0]}})


class TestPotentialFiles:
    @given(st.integers(0, 2**31 - 1), st.sampled_from([(2, 1), (2, 3), (3, 2), (4, 2)]),
           st.integers(1, 3))
    def test_round_trip_bit_exact(self, seed, graph, m):
        q, r = graph
        rng = np.random.default_rng(seed)
        table = PotentialTable(q, r, rng.normal(size=(q**r, m)) * 10.0 ** rng.integers(-300, 300))
        back = parse_potential(json.dumps(potential_to_dict(table)))
        assert back.equals(table)

    def test_write_read(self, tmp_path):
        table = PotentialTable(3, 2, np.random.default_rng(0).normal(size=(9, 2)))
        write_potential(tmp_path / "p.json", table)
        assert read_potential(tmp_path / "p.json").equals(table)

    def test_missing_word_named(self):
        doc = {"alphabet_size": 2, "range": 2, "dim": 1, "values": {"00": [0], "01": [1], "11": [2]}}
        with pytest.raises(PotentialFileError, match="missing 1 word.*: 10"):
            parse_potential(json.dumps(doc))

    def test_missing_field(self):
        with pytest.raises(PotentialFileError, match="'dim'"):
            parse_potential('{"alphabet_size": 2, "range": 1, "values": {}}')

    def test_syntax_error_has_position(self):
        with pytest.raises(PotentialFileError, match=r"p\.json:2:"):
            parse_potential('{"alphabet_size": 2,\n "range": }', "p.json")

    @pytest.mark.parametrize("bad", [
        {"alphabet_size": 2, "range": 1, "dim": 2, "values": {"0": [0], "1": [1, 2]}},
        {"alphabet_size": 2, "range": 1, "dim": 1, "values": {"0": ["x"], "1": [1]}},
        {"alphabet_size": 2, "range": 1, "dim": 1, "values": {"0": [0], "1": [1], "2": [0]}},
        {"alphabet_size": 1, "range": 1, "dim": 1, "values": {"0": [0]}},
        {"alphabet_size": 2, "range": 0, "dim": 1, "values": {}},
    ])
    def test_rejects(self, bad):
        with pytest.raises(PotentialFileError):
            parse_potential(json.dumps(bad))


class TestPressureCommands:
    def test_zero_potential(self, capsys, zero_file):
        code, rec, _ = run(capsys, "pressure", "--potential", zero_file)
        assert code == 0 and rec["pressure"] == pytest.approx(np.log(2), abs=1e-12)

    def test_bernoulli(self, capsys):
        code, rec, _ = run(capsys, "pressure", "--potential", str(GOLDEN / "bernoulli.json"))
        assert rec["pressure"] == pytest.approx(np.log(1 + np.e), abs=1e-12)
        assert rec["rv"][0] == pytest.approx(np.e / (1 + np.e), abs=1e-12)

    def test_missing_word(self, capsys, tmp_path):
        path = write_json(tmp_path / "bad.json", {
            "alphabet_size": 2, "range": 1, "dim": 1, "values": {"0": [0.0]}})
        code, _, err = run(capsys, "pressure", "--potential", path)
        assert code == 2 and "missing 1 word(s): 1" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "pressure", "--potential", str(tmp_path / "none.json"))
        assert code == 2 and "none.json" in err

    def test_direction_required_for_vectors(self, capsys):
        code, _, err = run(capsys, "pressure", "--potential", str(GOLDEN / "simplex.json"))
        assert code == 2 and "--direction" in err

    def test_signed_direction_and_csv(self, capsys, tmp_path):
        code, rec, _ = run(capsys, "pressure", "--potential", str(GOLDEN / "simplex.json"),
                           "--direction", "-1,0", "--t", "2", "--out", str(tmp_path))
        assert code == 0 and rec["direction"] == [-1.0, 0.0]
        lines = (tmp_path / "pressure.csv").read_text().splitlines()
        assert lines[0].startswith("# rotground-pressure v1")
        assert lines[1] == "t,rv1,rv2,entropy,pressure"

    def test_equilibrium_chain(self, capsys, tmp_path):
        code, rec, _ = run(capsys, "equilibrium", "--potential", str(GOLDEN / "bernoulli.json"),
                           "--out", str(tmp_path))
        assert code == 0
        assert rec["chain"]["1"]["transition"] == pytest.approx(np.e / (1 + np.e))
        assert (tmp_path / "equilibrium.csv").read_text().splitlines()[1] == "word,mass,transition"

    def test_preset_and_file_exclusive(self, capsys, zero_file):
        code, _, _ = run(capsys, "pressure", "--potential", zero_file, "--preset", "prop55")
        assert code == 2

    def test_unknown_preset(self, capsys):
        code, _, err = run(capsys, "pressure", "--preset", "nope", "--direction", "1,0")
        assert code == 2 and "unknown preset" in err

    def test_argparse_errors_exit_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["pressure", "--t", "abc"])
        assert exc.value.code == 2


class TestRotset:
    def test_simplex_golden(self, capsys, tmp_path):
        code, rec, _ = run(capsys, "rotset", "--potential", str(GOLDEN / "simplex.json"),
                           "--max-period", "4", "--out", str(tmp_path))
        assert code == 0 and len(rec["vertices"]) == 2
        assert (tmp_path / "rotset.csv").read_text() == (GOLDEN / "simplex_rotset.csv").read_text()

    def test_constant_is_degenerate(self, capsys, tmp_path):
        path = write_json(tmp_path / "c.json", {
            "alphabet_size": 2, "range": 1, "dim": 2, "values": {"0": [3, 7], "1": [3, 7]}})
        code, rec, _ = run(capsys, "rotset", "--potential", path, "--out", str(tmp_path))
        assert code == 0 and rec["degenerate"] is True
        header = (tmp_path / "rotset.csv").read_text().splitlines()[0]
        assert "degenerate=1" in header and "vertices=1" in header

    def test_preset_labels(self, capsys, tmp_path):
        code, rec, _ = run(capsys, "rotset", "--preset", "prop55", "--max-period", "9",
                           "--out", str(tmp_path), "--svg")
        assert code == 0
        named = predicted_vertices(preset("prop55"), 9)
        for v in rec["vertices"]:
            assert np.allclose([v["x"], v["y"]], named[v["label"]], atol=1e-9)
        assert rec["unmatched_predictions"] == ["w1(3)", "w2(3)"]
        svg = (tmp_path / "rotset.svg").read_text()
        assert svg.startswith("<svg") and "w1(inf)" in svg and "w(0)" in svg

    def test_one_dimensional_rejected(self, capsys):
        code, _, _ = run(capsys, "rotset", "--potential", str(GOLDEN / "bernoulli.json"))
        assert code == 2


class TestAnneal:
    ARGS = ("anneal", "--potential", str(GOLDEN / "bernoulli.json"), "--direction", "1",
            "--t-growth", "2", "--t-max", "256")

    def test_golden_and_deterministic(self, capsys, tmp_path):
        code, rec, _ = run(capsys, *self.ARGS, "--out", str(tmp_path / "a"))
        assert code == 0 and rec["converged"]
        first = (tmp_path / "a" / "anneal.csv").read_bytes()
        assert first == (GOLDEN / "bernoulli_anneal.csv").read_bytes()
        last = first.decode().strip().splitlines()[-1].split(",")
        assert abs(float(last[1]) - 1) <= 1e-8
        code, _, _ = run(capsys, *self.ARGS, "--out", str(tmp_path / "b"))
        assert (tmp_path / "b" / "anneal.csv").read_bytes() == first

    def test_cache_is_advisory(self, capsys, tmp_path):
        out = tmp_path / "c"
        run(capsys, *self.ARGS, "--out", str(out))
        fresh = (out / "anneal.csv").read_bytes()
        code, _, err = run(capsys, *self.ARGS, "--out", str(out))
        assert code == 0 and "cached" in err
        assert (out / "anneal.csv").read_bytes() == fresh
        for f in (out / ".cache").iterdir():
            f.write_text("garbage")
        code, _, err = run(capsys, *self.ARGS, "--out", str(out))
        assert code == 0 and "cached" not in err
        assert (out / "anneal.csv").read_bytes() == fresh

    def test_not_converged_exit_three(self, capsys, tmp_path):
        code, _, err = run(capsys, "anneal", "--potential", str(GOLDEN / "bernoulli.json"),
                           "--t-max", "3", "--out", str(tmp_path))
        assert code == 3 and "not converged" in err
        assert (tmp_path / "report.json").exists()

    def test_bad_schedule(self, capsys):
        code, _, _ = run(capsys, *self.ARGS[:5], "--t-growth", "0.9")
        assert code == 2

    def test_prop56_report(self, capsys, tmp_path):
        code, rec, _ = run(capsys, "anneal", "--preset", "prop56", "--direction", "-1,0",
                           "--out", str(tmp_path), "--svg")
        assert code == 0
        assert np.allclose(rec["closed_class_weights"], [0.5, 0.5], atol=1e-8)
        assert all(c["passed"] for c in rec["checks"].values())
        assert json.loads((tmp_path / "report.json").read_text()) == rec
        assert (tmp_path / "anneal.svg").read_text().count("<polyline") == 1

    def test_prop55_pinned_trajectory(self, capsys, tmp_path):
        code, _, _ = run(capsys, "anneal", "--preset", "prop55", "--direction", "-1,0",
                         "--out", str(tmp_path))
        assert code == 0
        rows = (tmp_path / "anneal.csv").read_text().splitlines()
        assert rows[1] == "t,rv1,rv2,entropy,pressure,distance"
        assert max(abs(float(r.split(",")[2])) for r in rows[2:]) <= 1e-10


class TestLocalizedEntropyCommand:
    @pytest.mark.parametrize("w", [0.25, 0.5, np.e / (1 + np.e)])
    def test_closed_form(self, capsys, w):
        code, rec, _ = run(capsys, "localized-entropy", "--potential",
                           str(GOLDEN / "bernoulli.json"), "--point", repr(w))
        assert code == 0
        assert rec["value"] == pytest.approx(-w * np.log(w) - (1 - w) * np.log(1 - w), abs=1e-7)
        assert rec["residual"] <= 1e-8

    def test_boundary_is_domain_error(self, capsys):
        code, _, err = run(capsys, "localized-entropy", "--potential",
                           str(GOLDEN / "bernoulli.json"), "--point", "1")
        assert code == 2 and "domain error" in err


class TestExample1Command:
    def test_prop55(self, capsys, tmp_path):
        code, rec, _ = run(capsys, "example1", "--preset", "prop55", "--out", str(tmp_path))
        assert code == 0
        assert rec["symmetric"] and rec["monotone"] and all(rec["hypotheses"].values())
        assert np.allclose(rec["vertices"]["w1(4)"], [0.1139482, 0.0852564], atol=1e-7)
        assert rec["slope_exceeds_100"] is False
        assert (tmp_path / "example1.csv").read_text().splitlines()[1] == "label,x,y"
