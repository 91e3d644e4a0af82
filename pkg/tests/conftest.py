import sys

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biotexture.ecosystem import SpeciesHistogram

# Toy ecosystem: black 5, gray 5, white 6 individuals.
TOY_PAIRS = [(0, 5), (128, 5), (255, 6)]
STRIP_LEVELS = [6, 75, 117, 141, 230]


@pytest.fixture
def toy_hist():
    return SpeciesHistogram.from_pairs(TOY_PAIRS)


@pytest.fixture
def toy_image():
    pixels = np.array([0] * 5 + [128] * 5 + [255] * 6, dtype=np.uint8)
    return np.random.default_rng(3).permutation(pixels).reshape(4, 4)


@pytest.fixture
def strip_hist():
    return SpeciesHistogram.from_pairs([(v, 1) for v in STRIP_LEVELS])


def gray_images(min_side=1, max_side=12, max_levels=256):
    shapes = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side))
    return shapes.flatmap(
        lambda s: arrays(np.uint8, s, elements=st.integers(0, max_levels - 1))
    )


def rgb_images(min_side=2, max_side=10):
    shapes = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side), st.just(3))
    return shapes.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 255)))


def histograms(max_species=40, max_count=50):
    return st.lists(
        st.tuples(st.integers(0, 255), st.integers(1, max_count)),
        min_size=1,
        max_size=max_species,
        unique_by=lambda p: p[0],
    ).map(SpeciesHistogram.from_pairs)


DIHEDRAL = {
    "rot90": lambda a: np.rot90(a, 1),
    "rot180": lambda a: np.rot90(a, 2),
    "rot270": lambda a: np.rot90(a, 3),
    "flip_h": lambda a: a[:, ::-1],
    "flip_v": lambda a: a[::-1],
    "transpose": lambda a: np.swapaxes(a, 0, 1),
}


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[0][3:])):
            terminalreporter.write_line(line)
