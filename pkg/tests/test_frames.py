import numpy as np
import pytest

from g2kit.errors import PreconditionError
from g2kit.frames import (
    STRUCTURE_CONSTANTS,
    Frame,
    cayley_dickson,
    random_frame,
    random_frames,
    verify_frame,
    verify_frames,
)

E = np.eye(7)


def e(i):
    return E[i - 1]


def test_standard_frame_reproduced():
    f = cayley_dickson(e(1), e(2), e(4))
    assert np.array_equal(f.vectors, np.eye(7))
    assert verify_frame(f) == 0.0
    assert verify_frame(Frame.standard()) == 0.0


def test_other_basis_triple_gives_valid_frame():
    f = cayley_dickson(e(2), e(3), e(5))
    assert verify_frame(f) <= 1e-11
    assert f.gram_error() <= 1e-12


def test_precondition_names_inequality():
    with pytest.raises(PreconditionError, match=r"\|<v4, v3>\|.*<= 1e-10"):
        cayley_dickson(e(1), e(2), e(3))
    with pytest.raises(PreconditionError):
        cayley_dickson(e(1), e(1) + 1e-3 * e(2), e(4))
    with pytest.raises(PreconditionError):
        cayley_dickson(e(1), e(2), 2 * e(4))


def test_one_based_indexing():
    f = cayley_dickson(e(2), e(3), e(5))
    assert np.array_equal(f[1], e(2))
    assert np.array_equal(f[3], e(1))  # e2 x e3 = e1


def test_corruption_detected(rng):
    f = random_frame(rng)
    vs = f.vectors.copy()
    vs[6] *= -1
    assert verify_frame(Frame(vs)) >= 1.0


def test_random_frames_valid(rng):
    frames = random_frames(rng, 1000)
    errs = verify_frames(np.stack([f.vectors for f in frames]))
    assert errs.max() <= 1e-11
    assert max(f.gram_error() for f in frames) <= 1e-12
    dets = np.array([f.determinant() for f in frames])
    assert np.abs(dets - 1).max() <= 1e-10


def test_random_frame_goes_through_constructor(rng):
    f = random_frame(rng)
    assert verify_frame(f) <= 1e-11


def test_structure_constants_antisymmetric():
    assert np.array_equal(STRUCTURE_CONSTANTS, -STRUCTURE_CONSTANTS.transpose(1, 0, 2))
    # every product e_i x e_j (i != j) is a single signed basis vector
    off = ~np.eye(7, dtype=bool)
    assert (np.abs(STRUCTURE_CONSTANTS).sum(axis=2)[off] == 1).all()
