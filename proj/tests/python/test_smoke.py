import math

import numpy as np
import pytest

import scatterhsd as sh


def test_fps_line():
    pts = np.array([[float(i), 0.0, 0.0] for i in range(10)])
    assert sh.fps(pts, 3) == [0, 9, 4]


def test_chamfer_and_nearest_map():
    assert sh.chamfer(np.zeros((1, 3)), np.array([[1.0, 0.0, 0.0]])) == 2.0
    pts = np.random.default_rng(0).uniform(-1, 1, (16, 3))
    assert sh.nearest_map(pts, pts) == list(range(16))
    assert sh.knn(pts, 3, 1) == [3]


def test_shapes_and_scatter():
    dense, labels = sh.gen_shape(6, 1)
    assert dense.shape == (10000, 3)
    assert set(labels) == {0, 1}
    sparse = sh.scatter_sample(dense, 32, 16, 0)
    assert sparse.shape == (512, 3)
    views = sh.multi_view(dense, 64, 8, 3, 5)
    assert len(views) == 3
    assert np.array_equal(views[0], sh.scatter_sample(dense, 64, 8, 5))
    with pytest.raises(ValueError):
        sh.scatter_sample(dense, 200, 100, 0)


def test_mutual_information():
    assert sh.mutual_information([[0], [1]], [0, 1]) == pytest.approx(math.log(2), abs=1e-15)
    codes = sh.bin_activations([0.0, 1.0], 2, 1, 6)
    assert codes[0] != codes[1]


def test_schedule_and_config():
    assert sh.learning_rate(50) == pytest.approx(0.0008, abs=1e-18)
    assert "[train]" in sh.default_config()
    with pytest.raises(ValueError):
        sh.learning_rate(0, ["train.nope=1"])


def test_tiny_training_is_deterministic():
    overrides = [
        "corpus.classes=2", "corpus.per_class=3", "train.epochs=1", "train.batch_size=2",
        "scatter.views=1", "scatter.seeds=16", "model.coarse_points=32", "model.encoder_widths=8,8",
        "model.level_widths=8,8,8", "model.head_dim=8", "train.trace_batch=2",
    ]
    a = sh.train_and_evaluate(overrides)
    b = sh.train_and_evaluate(overrides)
    assert a["checkpoint_hash"] == b["checkpoint_hash"]
    assert 0.0 <= a["oa"] <= 1.0
    assert len(a["per_level"]) == 3
