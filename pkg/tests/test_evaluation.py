"""Tests for anchorcloud.evaluation - metrics, ablation, 2-D embedding export."""

import numpy as np
import pytest

from anchorcloud.classifier import AnchorBank, AnchorProvenance, Prediction, predict_batch
from anchorcloud.descriptor import FeatureVector
from anchorcloud.errors import AlignmentError, ConfigError, InsufficientDataError
from anchorcloud.evaluation import (
    ablate_anchors,
    evaluate,
    export_embedding_2d,
)
from oracles import metrics_oracle


def preds(pairs):
    return [Prediction(sample_id=i, predicted=p, best_distance=0.0) for i, p in pairs]


class TestEvaluate:
    def test_hand_counted_example(self):
        truth = {f"s{i}": t for i, t in enumerate(["A", "A", "B", "B", "B"])}
        report = evaluate(
            preds([(f"s{i}", p) for i, p in enumerate(["A", "B", "B", "B", "A"])]),
            truth,
            ["A", "B"],
        )
        assert report.oacc == pytest.approx(60.0)
        assert report.per_class_acc[0] == pytest.approx(50.0)
        assert report.per_class_acc[1] == pytest.approx(200.0 / 3)
        assert report.macc == pytest.approx(175.0 / 3)
        np.testing.assert_array_equal(report.confusion, [[1, 1], [1, 2]])
        assert report.n_samples == 5

    def test_perfect_predictions(self):
        truth = {f"s{i}": c for i, c in enumerate(["x", "y", "z", "x"])}
        report = evaluate(preds(truth.items()), truth, ["x", "y", "z"])
        assert report.oacc == 100.0
        assert report.macc == 100.0

    def test_reference_per_class_row_reproduces_macc(self):
        # class sizes and correct counts chosen so the per-class recalls hit
        # the reference row (80.0, 40.0, 37.0, 73.3, 73.3, 36.0, 44.2, 49.0,
        # 79.0, 80.0); its mean must land on 59.2 and the overall accuracy
        # on 57.8
        sizes = [50, 100, 100, 86, 86, 100, 86, 100, 100, 100]
        correct = [40, 40, 37, 63, 63, 36, 38, 49, 79, 80]
        categories = [f"c{i}" for i in range(10)]
        truth, predicted = {}, []
        k = 0
        for c, size, good in zip(categories, sizes, correct):
            wrong = categories[(categories.index(c) + 1) % 10]
            for j in range(size):
                truth[f"s{k}"] = c
                predicted.append((f"s{k}", c if j < good else wrong))
                k += 1
        report = evaluate(preds(predicted), truth, categories)
        row = [80.0, 40.0, 37.0, 73.3, 73.3, 36.0, 44.2, 49.0, 79.0, 80.0]
        np.testing.assert_allclose(report.per_class_acc, row, atol=0.05)
        assert abs(report.macc - 59.2) <= 0.05
        assert abs(report.oacc - 57.8) <= 0.05

    def test_matches_counting_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            categories = [f"c{i}" for i in range(int(rng.integers(2, 6)))]
            n = int(rng.integers(1, 60))
            truth = {f"s{i}": categories[rng.integers(len(categories))] for i in range(n)}
            predicted = {f"s{i}": categories[rng.integers(len(categories))] for i in range(n)}
            report = evaluate(preds(predicted.items()), truth, categories)
            oacc, per, macc = metrics_oracle(categories, truth, predicted)
            assert report.oacc == pytest.approx(oacc)
            assert report.macc == pytest.approx(macc)
            for i, c in enumerate(categories):
                if c in per:
                    assert report.per_class_acc[i] == pytest.approx(per[c])
                else:
                    assert np.isnan(report.per_class_acc[i])
            assert report.confusion.sum() == n

    def test_sample_order_irrelevant(self):
        rng = np.random.default_rng(9)
        categories = ["a", "b", "c"]
        truth = {f"s{i}": categories[rng.integers(3)] for i in range(40)}
        predicted = [(f"s{i}", categories[rng.integers(3)]) for i in range(40)]
        r1 = evaluate(preds(predicted), truth, categories)
        shuffled = [predicted[i] for i in rng.permutation(40)]
        r2 = evaluate(preds(shuffled), truth, categories)
        assert r1.oacc == r2.oacc and r1.macc == r2.macc
        np.testing.assert_array_equal(r1.confusion, r2.confusion)

    def test_absent_class_excluded_and_flagged(self):
        truth = {"s0": "a", "s1": "b"}
        report = evaluate(preds([("s0", "a"), ("s1", "a")]), truth, ["a", "b", "c"])
        assert report.absent_categories == ("c",)
        assert np.isnan(report.per_class_acc[2])
        assert report.macc == pytest.approx((100.0 + 0.0) / 2)

    def test_alignment_errors(self):
        truth = {"s0": "a", "s1": "b"}
        with pytest.raises(AlignmentError):  # missing truth id
            evaluate(preds([("s0", "a"), ("sX", "a")]), truth, ["a", "b"])
        with pytest.raises(AlignmentError):  # duplicate prediction id
            evaluate(preds([("s0", "a"), ("s0", "b")]), truth, ["a", "b"])
        with pytest.raises(AlignmentError):  # truth id never predicted
            evaluate(preds([("s0", "a")]), truth, ["a", "b"])
        with pytest.raises(AlignmentError):  # predicted label outside categories
            evaluate(preds([("s0", "zzz"), ("s1", "b")]), truth, ["a", "b"])
        with pytest.raises(AlignmentError):  # truth label outside categories
            evaluate(preds([("s0", "a"), ("s1", "b")]), {"s0": "a", "s1": "qq"}, ["a", "b"])


def tiny_bank_and_tests(rng, n_anchors=5, n_tests=30):
    categories = ["red", "green", "blue"]
    centers = {"red": [1, 0, 0], "green": [0, 1, 0], "blue": [0, 0, 1]}
    anchors = []
    for c in categories:
        anchors.append(
            [
                (
                    FeatureVector(
                        np.asarray(centers[c]) + rng.normal(scale=0.05, size=3),
                        source="test",
                    ),
                    AnchorProvenance(source_file=f"{c}/{j}"),
                )
                for j in range(n_anchors)
            ]
        )
    bank = AnchorBank(categories, anchors)
    features, ids, truth = [], [], {}
    for k in range(n_tests):
        c = categories[k % 3]
        features.append(
            FeatureVector(np.asarray(centers[c]) + rng.normal(scale=0.1, size=3), source="test")
        )
        ids.append(f"t{k}")
        truth[f"t{k}"] = c
    return bank, features, ids, truth


class TestAblateAnchors:
    def test_full_size_degenerate_sweep(self):
        rng = np.random.default_rng(10)
        bank, features, ids, truth = tiny_bank_and_tests(rng)
        result = ablate_anchors(bank, features, ids, truth, counts=[5], trials=4, seed=3)
        full = evaluate(predict_batch(bank, features, ids), truth, bank.categories)
        assert result.mean_oacc[0] == pytest.approx(full.oacc)
        assert result.mean_macc[0] == pytest.approx(full.macc)
        assert result.std_oacc[0] == 0.0
        assert result.std_macc[0] == 0.0

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        bank, features, ids, truth = tiny_bank_and_tests(rng)
        a = ablate_anchors(bank, features, ids, truth, counts=[1, 3, 5], trials=5, seed=42)
        b = ablate_anchors(bank, features, ids, truth, counts=[1, 3, 5], trials=5, seed=42)
        np.testing.assert_array_equal(a.mean_oacc, b.mean_oacc)
        np.testing.assert_array_equal(a.std_macc, b.std_macc)
        assert a.anchor_counts == (1, 3, 5)
        assert a.trials == 5

    def test_count_too_large(self):
        rng = np.random.default_rng(12)
        bank, features, ids, truth = tiny_bank_and_tests(rng)
        with pytest.raises(ConfigError):
            ablate_anchors(bank, features, ids, truth, counts=[6], trials=1, seed=0)


class TestExportEmbedding2d:
    def test_axis_aligned_data(self):
        # sign-symmetric construction: mean exactly zero, covariance exactly
        # diagonal, more variance along x
        base = np.array([[3.0, 1.0], [2.0, 0.5], [4.0, 0.25]])
        data = np.vstack([base * [sx, sy] for sx in (1, -1) for sy in (1, -1)])
        out = export_embedding_2d([FeatureVector(r, source="t") for r in data])
        np.testing.assert_allclose(out.axes[0], [1.0, 0.0], atol=1e-9)
        np.testing.assert_allclose(out.axes[1], [0.0, 1.0], atol=1e-9)
        np.testing.assert_allclose(out.coords[:, 0], data[:, 0], atol=1e-9)

    def test_duplication_preserves_axes(self):
        rng = np.random.default_rng(13)
        data = rng.normal(size=(20, 5)) * [3, 2, 1, 0.5, 0.1]
        features = [FeatureVector(r, source="t") for r in data]
        a = export_embedding_2d(features)
        b = export_embedding_2d(features + features)
        np.testing.assert_allclose(a.axes, b.axes, atol=1e-9)

    def test_rank_one_data(self):
        t = np.linspace(-2, 2, 15)
        direction = np.array([1.0, 2.0, -1.0])
        data = np.outer(t, direction) + [5.0, 1.0, 0.0]
        out = export_embedding_2d([FeatureVector(r, source="t") for r in data])
        assert np.max(np.abs(out.coords[:, 1])) <= 1e-9

    def test_sign_convention(self):
        rng = np.random.default_rng(14)
        data = rng.normal(size=(40, 6))
        out = export_embedding_2d([FeatureVector(r, source="t") for r in data])
        for axis in out.axes:
            assert axis[np.argmax(np.abs(axis))] > 0

    def test_rows_carry_ids_and_labels(self):
        data = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]])
        out = export_embedding_2d(
            [FeatureVector(r, source="t") for r in data],
            ids=["p", "q", "r"],
            labels=["a", "b", "a"],
        )
        rows = out.rows()
        assert [r[0] for r in rows] == ["p", "q", "r"]
        assert [r[1] for r in rows] == ["a", "b", "a"]
        assert all(len(r) == 4 for r in rows)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            export_embedding_2d([FeatureVector(np.ones(3), source="t")])
