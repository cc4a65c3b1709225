import json

import numpy as np
import pytest

import causalrefine as cr


def spec22(**kw):
    g = cr.make_polytree(cr.PolytreeSpec(2, 2))
    defaults = dict(graph=g, epochs=10, fpr=0.1, fnr=0.1, path_length=2, seed=3)
    defaults.update(kw)
    return cr.ScenarioSpec(**defaults)


class TestSampleAnomalySet:
    def test_is_root_to_leaf_path(self):
        spec = spec22()
        nodes = cr.sample_anomaly_set(spec, 0)
        assert len(nodes) == 3
        paths = {frozenset(p) for p in cr.enumerate_root_paths(spec.graph, 2)}
        assert nodes in paths

    def test_deterministic(self):
        spec = spec22()
        assert cr.sample_anomaly_set(spec, 4) == cr.sample_anomaly_set(spec, 4)

    def test_uniform_over_paths(self):
        # chi-square at 4 cells stays under 16.27 (p=0.001) for 10^4 draws
        spec = spec22(seed=123)
        paths = [frozenset(p) for p in cr.enumerate_root_paths(spec.graph, 2)]
        counts = {p: 0 for p in paths}
        draws = 10_000
        for epoch in range(draws):
            counts[cr.sample_anomaly_set(spec, epoch)] += 1
        for c in counts.values():
            assert abs(c / draws - 0.25) < 0.02
        chi2 = sum((c - draws / 4) ** 2 / (draws / 4) for c in counts.values())
        assert chi2 < 16.27

    def test_no_such_path(self):
        spec = spec22(path_length=9)
        with pytest.raises(cr.NoSuchPath):
            cr.sample_anomaly_set(spec, 0)


class TestCorruptScores:
    def test_no_corruption(self):
        labels = np.array([1, 0, 1, 0, 0])
        out = cr.corrupt_scores(labels, 0.0, 0.0, np.random.default_rng(0))
        assert np.array_equal(out.values, labels.astype(float))

    def test_certain_flip(self):
        labels = np.array([1, 1, 1, 0])
        out = cr.corrupt_scores(labels, 0.0, 1.0, np.random.default_rng(0))
        assert np.array_equal(out.values[:3], [0, 0, 0])
        assert out.values[3] == 0

    def test_always_binary(self):
        rng = np.random.default_rng(5)
        labels = (rng.random(500) < 0.3).astype(int)
        out = cr.corrupt_scores(labels, 0.37, 0.52, rng)
        assert set(np.unique(out.values)) <= {0.0, 1.0}

    def test_empirical_flip_rates(self):
        # 10^5 coordinates; +-0.005 is ~3.7 binomial sigmas per class
        rng = np.random.default_rng(99)
        labels = (np.arange(100_000) % 2).astype(int)
        out = cr.corrupt_scores(labels, 0.1, 0.1, rng)
        pos = labels == 1
        fnr_hat = np.mean(out.values[pos] == 0)
        fpr_hat = np.mean(out.values[~pos] == 1)
        assert abs(fnr_hat - 0.1) < 0.005
        assert abs(fpr_hat - 0.1) < 0.005

    def test_rejects_non_binary_labels(self):
        with pytest.raises(ValueError):
            cr.corrupt_scores(np.array([0.5]), 0.1, 0.1, np.random.default_rng(0))


class TestGenerate:
    def test_empty(self):
        assert cr.generate(spec22(epochs=0)) == []

    def test_label_count_per_epoch(self):
        g = cr.make_polytree(cr.PolytreeSpec(2, 6))
        spec = cr.ScenarioSpec(graph=g, epochs=50, fpr=0.1, fnr=0.1, path_length=6, seed=1)
        for rec in cr.generate(spec):
            assert rec.labels.sum() == 7
            assert rec.missing_set == frozenset()

    def test_deterministic(self):
        a = cr.generate(spec22(epochs=20))
        b = cr.generate(spec22(epochs=20))
        for ra, rb in zip(a, b):
            assert np.array_equal(ra.labels, rb.labels)
            assert np.array_equal(ra.raw_scores.values, rb.raw_scores.values)

    def test_epoch_streams_independent_of_order(self):
        spec = spec22(epochs=30)
        full = cr.generate(spec)
        # regenerating only epoch 17 must reproduce the same record
        nodes = cr.sample_anomaly_set(spec, 17)
        assert np.flatnonzero(full[17].labels).tolist() == sorted(nodes)

    def test_labels_are_paths(self):
        spec = spec22(epochs=25, fpr=0.3, fnr=0.3)
        paths = {frozenset(p) for p in cr.enumerate_root_paths(spec.graph, 2)}
        for rec in cr.generate(spec):
            assert frozenset(np.flatnonzero(rec.labels)) in paths

    def test_arrays_match_records(self):
        spec = spec22(epochs=15)
        labels, scores = cr.generate_arrays(spec)
        records = cr.generate(spec)
        for epoch, rec in enumerate(records):
            assert np.array_equal(labels[epoch], rec.labels)
            assert np.array_equal(scores[epoch], rec.raw_scores.values)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            spec22(fpr=1.5)
        with pytest.raises(ValueError):
            spec22(epochs=-1)
        with pytest.raises(ValueError):
            spec22(path_length=-2)


class TestScenarioCsv:
    def test_write_and_sidecar(self, tmp_path):
        spec = spec22(epochs=3)
        records = cr.generate(spec)
        out = tmp_path / "scenario.csv"
        cr.write_scenario_csv(spec, records, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "epoch,node_name,label,raw_score"
        assert len(lines) == 1 + 3 * spec.graph.node_count
        sidecar = json.loads((tmp_path / "scenario.csv.spec.json").read_text())
        assert sidecar["epochs"] == 3
        assert sidecar["fpr"] == 0.1
