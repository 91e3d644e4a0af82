import numpy as np
import pytest
from hypothesis import given, settings

from biotexture.descriptor import CHANNELS, INDEX_NAMES, ExtractOptions, extract, feature_names
from biotexture.ecosystem import InvalidInputError

from conftest import DIHEDRAL, rgb_images

RAW = ExtractOptions(preprocess_enabled=False)

TOY_EXPECTED = {
    "d_mg": 0.721348,
    "d_mn": 0.1875,
    "d_bp": 0.375,
    "d_sw": 1.094780,
    "e_m": 0.6590474,
    "delta": 1.916667,
    "delta_star": 2.705882,
    "s_pd": 8.117647,
    "d_nn": 2.333333,
    "e_eq": 16.0,
    "e_iq": 1.777778,
    "d_tt": 8.0,
}


def test_feature_names():
    names = feature_names()
    assert len(names) == 56
    assert names[0] == "gray_d_mg"
    assert names[14] == "r_d_mg"
    assert "gray_d_sw" in names and "r_delta_star" in names
    assert names == tuple(f"{c}_{i}" for c in CHANNELS for i in INDEX_NAMES)
    assert feature_names(gray_only=True) == names[:14]


def test_constant_image_conventions():
    vec = extract(np.full((2, 2, 3), 90, dtype=np.uint8), RAW)
    for c in CHANNELS:
        assert vec[f"{c}_d_mg"] == 0
        assert vec[f"{c}_d_mn"] == 0.25
        assert vec[f"{c}_d_bp"] == 1
        assert vec[f"{c}_d_kt"] == 0
        assert vec[f"{c}_e_m"] == 1
        assert vec[f"{c}_d_sw"] == 0
        for t in ("delta", "delta_star", "s_pd", "d_nn", "e_eq", "e_iq", "d_tt"):
            assert vec[f"{c}_{t}"] == 0
    blocks = vec.values.reshape(4, 14)
    assert np.array_equal(blocks[1], blocks[2]) and np.array_equal(blocks[2], blocks[3])


def test_toy_in_every_channel(toy_image):
    rgb = np.repeat(toy_image[..., None], 3, axis=2)
    vec = extract(rgb, RAW)
    for c in CHANNELS:
        for name, value in TOY_EXPECTED.items():
            assert vec[f"{c}_{name}"] == pytest.approx(value, abs=1e-6), (c, name)


def test_undersized_image_rejected():
    with pytest.raises(InvalidInputError):
        extract(np.zeros((1, 8, 3), dtype=np.uint8))


def test_deterministic():
    img = np.random.default_rng(4).integers(0, 256, (33, 21, 3)).astype(np.uint8)
    a, b = extract(img), extract(img.copy())
    assert a.values.tobytes() == b.values.tobytes()


def test_gray_only_prefix():
    img = np.random.default_rng(5).integers(0, 256, (20, 20, 3)).astype(np.uint8)
    for preprocess in (False, True):
        opts = ExtractOptions(preprocess_enabled=preprocess)
        full = extract(img, opts)
        gray = extract(img, ExtractOptions(preprocess_enabled=preprocess, gray_only=True))
        assert len(gray) == 14
        assert np.array_equal(gray.values, full.values[:14])


def test_preprocessing_changes_features():
    img = np.random.default_rng(6).integers(0, 256, (24, 24, 3)).astype(np.uint8)
    assert not np.array_equal(extract(img).values, extract(img, RAW).values)


def test_as_dict_round_trip():
    img = np.random.default_rng(7).integers(0, 256, (8, 8, 3)).astype(np.uint8)
    vec = extract(img)
    d = vec.as_dict()
    assert list(d) == list(feature_names())
    assert all(np.isfinite(list(d.values())))


@given(rgb_images(max_side=12))
@settings(max_examples=40, deadline=None)
def test_dihedral_invariance(img):
    for opts in (RAW, ExtractOptions()):
        base = extract(img, opts).values
        for f in DIHEDRAL.values():
            assert np.array_equal(extract(np.ascontiguousarray(f(img)), opts).values, base)


@given(rgb_images(max_side=12))
@settings(max_examples=30, deadline=None)
def test_permutation_invariance_without_preprocessing(img):
    h, w, _ = img.shape
    perm = np.random.default_rng(h * 31 + w).permutation(h * w)
    shuffled = img.reshape(-1, 3)[perm].reshape(h, w, 3)
    assert np.array_equal(extract(shuffled, RAW).values, extract(img, RAW).values)
