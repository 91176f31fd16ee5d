"""Shared fixtures: the synthetic end-to-end benchmark, built once per session."""

import time
from dataclasses import dataclass

import numpy as np
import pytest

from anchorcloud.classifier import AnchorBank, AnchorProvenance, predict_batch
from anchorcloud.descriptor import BuiltinFeaturizer
from anchorcloud.evaluation import EvalReport, evaluate
from anchorcloud.geometry import AugmentConfig, augment
from anchorcloud.shapes import benchmark_clouds

PIPELINE_CFG = AugmentConfig(target_points=1024, rotate=True, seed=7)


def featurize_clouds(clouds, cfg=PIPELINE_CFG, featurizer=None):
    featurizer = featurizer or BuiltinFeaturizer()
    augmented = [
        augment(c, cfg, rng=np.random.default_rng([cfg.seed, i]))
        for i, c in enumerate(clouds)
    ]
    return featurizer(augmented)


def bank_from_clouds(anchors_by_class, cfg=PIPELINE_CFG, featurizer=None):
    featurizer = featurizer or BuiltinFeaturizer()
    entries = []
    for name, clouds in anchors_by_class.items():
        features = featurize_clouds(clouds, cfg, featurizer)
        entries.append(
            [
                (f, AnchorProvenance(source_file=c.id, generator="synthetic", seed=j))
                for j, (f, c) in enumerate(zip(features, clouds))
            ]
        )
    return AnchorBank(list(anchors_by_class), entries)


@dataclass
class Benchmark:
    bank_a: AnchorBank
    bank_b: AnchorBank
    test_ids: list
    truth: dict
    features_rotated: list
    features_aligned: list
    report_rotated: EvalReport
    report_aligned: EvalReport
    e2e_seconds: float


@pytest.fixture(scope="session")
def bench() -> Benchmark:
    """Full-scale synthetic benchmark: 5 shapes, 7 anchors and 50 rotated
    test clouds per class, noise sigma 0.02, everything FPS-downsampled to
    1024 points. The timed section is the canonical end-to-end run: generate,
    build the bank, classify the rotated test set, evaluate.
    """
    start = time.perf_counter()
    anchors, tests_rotated, truth = benchmark_clouds(
        anchors_per_class=7, tests_per_class=50, noise=0.02, rotate_tests=True, seed=0
    )
    bank_a = bank_from_clouds(anchors)
    test_ids = [c.id for c in tests_rotated]
    features_rotated = featurize_clouds(tests_rotated)
    predictions = predict_batch(bank_a, features_rotated, ids=test_ids)
    report_rotated = evaluate(predictions, truth, bank_a.categories)
    e2e_seconds = time.perf_counter() - start

    # aligned twin of the same test set (identical noisy samples, no rotation)
    _, tests_aligned, _ = benchmark_clouds(
        anchors_per_class=0, tests_per_class=50, noise=0.02, rotate_tests=False, seed=0
    )
    features_aligned = featurize_clouds(tests_aligned)
    report_aligned = evaluate(
        predict_batch(bank_a, features_aligned, ids=test_ids), truth, bank_a.categories
    )

    # an independently seeded second anchor set for ensemble checks
    anchors_b, _, _ = benchmark_clouds(
        anchors_per_class=7, tests_per_class=0, noise=0.02, seed=1000
    )
    bank_b = bank_from_clouds(anchors_b)

    return Benchmark(
        bank_a=bank_a,
        bank_b=bank_b,
        test_ids=test_ids,
        truth=truth,
        features_rotated=features_rotated,
        features_aligned=features_aligned,
        report_rotated=report_rotated,
        report_aligned=report_aligned,
        e2e_seconds=e2e_seconds,
    )
