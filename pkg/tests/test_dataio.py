import json

import numpy as np
import pytest

from gibbsfit.dataio import load_classical, load_quantum, resolve_level
from gibbsfit.errors import DataFormatError
from gibbsfit.state_space import expectation, relative_entropy, uniform_state

WOLF_COUNTS = "data/wolf_counts.csv"
WOLF_OBS = "data/wolf_observables.csv"
QUBIT_JSON = "data/qubit_tilt3.json"


class TestLoadClassical:
    def test_wolf_frequencies(self):
        ds = load_classical(WOLF_COUNTS)
        assert ds.n == 20000
        freq = ds.counts / ds.n
        assert freq[0] == pytest.approx(0.16230, abs=5e-6)
        assert ds.reference.probs == pytest.approx(np.full(6, 1 / 6))

    def test_entropy_reproducible_from_counts(self):
        ds = load_classical(WOLF_COUNTS)
        emp = ds.data.empirical
        s = relative_entropy(emp, ds.reference)
        assert 2 * ds.n * s == pytest.approx(270.7685, abs=1e-3)

    def test_observables_table(self):
        ds = load_classical(WOLF_COUNTS, WOLF_OBS)
        assert set(ds.observables) == {"G1", "G2"}
        g1 = ds.observables["G1"]
        assert g1.diagonal == pytest.approx(np.arange(1, 7) - 3.5)
        emp = ds.data.empirical
        assert expectation(emp, g1) == pytest.approx(0.0983, abs=1e-6)
        assert expectation(emp, ds.observables["G2"]) == pytest.approx(0.1393, abs=1e-6)

    def test_reference_weight_column(self, tmp_path):
        path = tmp_path / "weighted.csv"
        path.write_text("outcome,count,reference_weight\na,10,1\nb,30,3\n")
        ds = load_classical(path)
        assert ds.reference.probs == pytest.approx([0.25, 0.75])

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("outcome,frequency\na,0.5\nb,0.5\n")
        with pytest.raises(DataFormatError):
            load_classical(path)

    def test_rejects_negative_count(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("outcome,count\na,10\nb,-1\n")
        with pytest.raises(DataFormatError):
            load_classical(path)

    def test_rejects_single_outcome(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("outcome,count\na,10\n")
        with pytest.raises(DataFormatError):
            load_classical(path)

    def test_rejects_zero_total(self, tmp_path):
        path = tmp_path / "zero.csv"
        path.write_text("outcome,count\na,0\nb,0\n")
        with pytest.raises(DataFormatError):
            load_classical(path)

    def test_rejects_duplicate_outcome(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("outcome,count\na,5\na,6\n")
        with pytest.raises(DataFormatError):
            load_classical(path)

    def test_rejects_outcome_mismatch_with_observables(self, tmp_path):
        counts = tmp_path / "c.csv"
        counts.write_text("outcome,count\na,5\nb,6\n")
        obs = tmp_path / "o.csv"
        obs.write_text("outcome,E\na,1\nc,2\n")
        with pytest.raises(DataFormatError):
            load_classical(counts, obs)


class TestLoadQuantum:
    def test_qubit_file(self):
        ds = load_quantum(QUBIT_JSON)
        assert ds.dim == 2
        assert np.allclose(ds.reference.matrix, np.eye(2) / 2)
        assert set(ds.observables) == {"X", "Y", "Z"}
        assert ds.n == 20000
        # measured level spans the three Paulis plus identity
        assert ds.levels["F"].dim == 4
        assert ds.levels["ising"].dim == 2

    def test_sample_means_order(self):
        ds = load_quantum(QUBIT_JSON)
        r, tilt = 0.73, np.deg2rad(3.0)
        want = {"X": r * np.sin(tilt), "Y": 0.0, "Z": r * np.cos(tilt)}
        lvl = ds.data.level
        for pos, gen_idx in enumerate(lvl.retained):
            name = ["X", "Y", "Z"][gen_idx]
            assert ds.data.means[pos] == pytest.approx(want[name], abs=1e-12)

    def test_rejects_wrong_format_version(self, tmp_path):
        doc = json.load(open(QUBIT_JSON))
        doc["format_version"] = 2
        path = tmp_path / "v2.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DataFormatError):
            load_quantum(path)

    def test_rejects_non_hermitian_observable(self, tmp_path):
        doc = json.load(open(QUBIT_JSON))
        doc["observables"][0]["re"] = [[0.0, 1.0], [0.3, 0.0]]
        path = tmp_path / "nh.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DataFormatError):
            load_quantum(path)

    def test_rejects_bad_reference(self, tmp_path):
        doc = json.load(open(QUBIT_JSON))
        doc["reference"] = {"re": [[0.9, 0.0], [0.0, 0.9]],
                            "im": [[0.0, 0.0], [0.0, 0.0]]}
        path = tmp_path / "badref.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DataFormatError):
            load_quantum(path)

    def test_rejects_unknown_mean(self, tmp_path):
        doc = json.load(open(QUBIT_JSON))
        doc["sample_means"]["W"] = 0.1
        path = tmp_path / "unknown.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DataFormatError):
            load_quantum(path)

    def test_rejects_missing_key(self, tmp_path):
        doc = json.load(open(QUBIT_JSON))
        del doc["dim"]
        path = tmp_path / "nodim.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DataFormatError):
            load_quantum(path)


class TestResolveLevel:
    def test_named_level(self):
        ds = load_quantum(QUBIT_JSON)
        assert resolve_level(ds, "ising").dim == 2
        assert resolve_level(ds, "O").is_trivial

    def test_observable_list(self):
        ds = load_classical(WOLF_COUNTS, WOLF_OBS)
        lvl = resolve_level(ds, "G1,G2")
        assert lvl.n_params == 2

    def test_unknown_spec_rejected(self):
        ds = load_classical(WOLF_COUNTS)
        with pytest.raises(DataFormatError):
            resolve_level(ds, "nope")
