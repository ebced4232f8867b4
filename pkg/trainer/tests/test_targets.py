import numpy as np
import pytest

from dal_trainer.formats import CHANNEL_OFFSETS, MIRROR, in_frame_mask
from dal_trainer.targets import auto_sigma, gaussian_affinities, mask_to_neighbors


class TestMaskToNeighbors:
    def test_constant_mask_all_inframe_one(self):
        t = mask_to_neighbors(np.full((4, 5), 3))
        assert np.all(t.data[t.frame] == 1.0)
        assert np.all(t.data[~t.frame] == 0.0)

    def test_two_pixel_rows_differ(self):
        # one row, two columns, different classes
        t = mask_to_neighbors(np.array([[1, 2]]))
        assert t.data[4, 0, 0] == 0.0  # E of pixel 0
        assert t.data[3, 0, 1] == 0.0  # W of pixel 1
        assert t.frame[4, 0, 0] and t.frame[3, 0, 1]

    def test_checkerboard_2x2(self):
        t = mask_to_neighbors(np.array([[1, 2], [2, 1]]))
        # axis-aligned neighbours differ, diagonal ones agree
        assert t.data[4, 0, 0] == 0.0  # E
        assert t.data[6, 0, 0] == 0.0  # S
        assert t.data[7, 0, 0] == 1.0  # SE
        assert t.data[5, 0, 1] == 1.0  # SW
        assert t.data[6, 0, 1] == 0.0
        assert t.data[4, 1, 0] == 0.0

    def test_mirror_consistency(self):
        rng = np.random.default_rng(5)
        mask = rng.integers(0, 4, size=(6, 7))
        t = mask_to_neighbors(mask)
        for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
            m = MIRROR[c]
            for r in range(6):
                for col in range(7):
                    rr, cc = r + dr, col + dc
                    if 0 <= rr < 6 and 0 <= cc < 7:
                        assert t.data[c, r, col] == t.data[m, rr, cc]

    def test_relabel_invariance(self):
        rng = np.random.default_rng(6)
        mask = rng.integers(0, 5, size=(5, 5))
        remap = np.array([40, 7, 13, 99, 2])
        t1 = mask_to_neighbors(mask)
        t2 = mask_to_neighbors(remap[mask])
        assert np.array_equal(t1.data, t2.data)


class TestGaussianTargets:
    def test_identical_neighbours_score_one(self):
        img = np.full((3, 3, 3), 0.25, dtype=np.float32)
        g = gaussian_affinities(img, sigma=0.5)
        frame = in_frame_mask(3, 3)
        assert np.all(g[frame] == 1.0)
        assert np.all(g[~frame] == 0.0)

    def test_closed_form(self):
        img = np.zeros((1, 2, 3), dtype=np.float32)
        img[0, 1] = 0.1 / np.sqrt(3.0)
        g = gaussian_affinities(img, sigma=0.1)
        assert g[4, 0, 0] == pytest.approx(np.exp(-0.5), rel=1e-6)

    def test_auto_sigma_floor(self):
        assert auto_sigma(np.full((4, 4, 3), 0.7)) == 1e-4

    def test_auto_sigma_single_pair(self):
        img = np.zeros((1, 2, 3), dtype=np.float64)
        img[0, 1] = 1.0
        assert auto_sigma(img) == pytest.approx(np.sqrt(3.0), rel=1e-6)
