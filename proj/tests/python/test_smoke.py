import json

import numpy as np
import pytest

import comatcher


def test_version():
    assert comatcher.__version__ == comatcher.version()
    assert comatcher.version().count(".") == 2


def test_scene_shapes():
    scene = comatcher.generate_scene(3, num_sources=2, descriptor_dim=16)
    assert len(scene["images"]) == 3
    for image in scene["images"]:
        n = len(image["labels"])
        assert image["keypoints"].shape == (n, 2)
        assert image["descriptors"].shape == (n, 16)
        assert np.allclose(np.linalg.norm(image["descriptors"], axis=1), 1.0)


def test_scene_rejects_unknown_key():
    with pytest.raises(comatcher.Error, match="unknown-key"):
        comatcher.generate_scene(1, not_a_setting=1)


def test_dual_softmax_matches_numpy():
    rng = np.random.default_rng(0)
    s = rng.normal(size=(5, 7))
    e = np.exp(s)
    expect = e / e.sum(1, keepdims=True) * e / e.sum(0, keepdims=True)
    assert np.allclose(comatcher.dual_softmax(s), expect, atol=1e-12)


def test_filter_matches_identity():
    p = np.eye(4) * 0.9 + 0.01
    matches = comatcher.filter_matches(p, 0.2)
    assert [(u, x) for u, x, _ in matches] == [(0, 0), (1, 1), (2, 2), (3, 3)]


def test_ransac_recovers_homography():
    rng = np.random.default_rng(1)
    h = np.array([[1.1, 0.05, 12.0], [-0.02, 0.95, -7.0], [1e-4, 2e-5, 1.0]])
    src = rng.uniform(0, 640, size=(60, 2))
    dst = np.c_[src, np.ones(60)] @ h.T
    dst = dst[:, :2] / dst[:, 2:]
    est, mask = comatcher.ransac_homography(src, dst, seed=3)
    assert all(mask)
    assert comatcher.corner_error(est, h, 640, 480) < 1e-6


def test_grouping_partition():
    w = np.array([
        [0, 0.5, 0.5, 0],
        [0.5, 0, 0.5, 0],
        [0.5, 0.5, 0, 0.2],
        [0, 0, 0.2, 0],
    ])
    groups = comatcher.group_images(w, 0.1, 0.9, 3)
    assert sorted(v for g in groups for v in g) == [0, 1, 2, 3]


def test_cli_roundtrip(tmp_path):
    out = tmp_path / "scene"
    assert comatcher.run("generate", "--out", out, "--seed", 2) == 0
    features = out / "features.jsonl"
    assert comatcher.run("pipeline", "--features", features, "--matcher",
                         "descriptor", "--out", tmp_path / "run") == 0
    config = json.loads((tmp_path / "run" / "config.json").read_text())
    assert config["command"] == "pipeline"
    assert comatcher.run("pipeline", "--bogus") == 1
