import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from s3fse.data import HyperspectralCube, stack_views
from s3fse.exceptions import InvalidInputError
from s3fse.features import (
    DmpSpec,
    FeatureSpec,
    GaborBankSpec,
    closing,
    convolve_reflect,
    differential_profile,
    disk,
    dmp_features,
    extract_views,
    gabor_bank,
    gabor_kernel,
    gabor_responses,
    gabor_texture,
    opening,
    pca_scores,
)

import oracles


def random_cube(rng, bands, h, w):
    return HyperspectralCube(rng.standard_normal((bands, h, w)))


class TestPCA:
    def test_matches_dense_eig(self, rng):
        cube = random_cube(rng, 6, 5, 7)
        scores, vals, vecs = pca_scores(cube, 3)
        X = cube.pixels()
        Xc = X - X.mean(0)
        ev, evec = np.linalg.eig(np.cov(X.T, bias=True))
        order = np.argsort(-ev.real)[:3]
        np.testing.assert_allclose(vals, ev.real[order], rtol=1e-10)
        for j in range(3):
            ref = evec[:, order[j]].real
            assert abs(abs(ref @ vecs[:, j]) - 1) < 1e-10
        np.testing.assert_allclose(scores, Xc @ vecs, atol=1e-12)

    def test_scores_uncorrelated(self, rng):
        scores, vals, _ = pca_scores(random_cube(rng, 5, 6, 6), 4)
        cov = scores.T @ scores / scores.shape[0]
        np.testing.assert_allclose(cov, np.diag(vals), atol=1e-10)

    def test_q_range(self, rng):
        with pytest.raises(InvalidInputError):
            pca_scores(random_cube(rng, 3, 4, 4), 4)


class TestGabor:
    def test_bank_size_and_order(self):
        spec = GaborBankSpec()
        bank = gabor_bank(spec)
        assert len(bank) == spec.n_features == 60
        ref = gabor_kernel(4 * 2 ** 0.5, 2 * np.pi / 12, 0.56 * 4 * 2 ** 0.5, 31)
        np.testing.assert_array_equal(bank[1 * 12 + 2], ref)

    def test_real_part_zero_mean(self):
        for k in gabor_bank(GaborBankSpec(kernel_size=15)):
            assert abs(k.real.sum()) < 1e-10

    def test_flat_field_zero_response(self):
        resp = gabor_responses(np.full((20, 20), 3.7), GaborBankSpec(kernel_size=9, scales=(0, 1)))
        # imaginary part is odd so it cancels too
        assert np.abs(resp).max() < 1e-10

    def test_direct_matches_loop_oracle(self, rng):
        img = rng.standard_normal((9, 11))
        k = gabor_kernel(4.0, np.pi / 3, 2.24, 7)
        for part in (k.real, k.imag):
            np.testing.assert_allclose(convolve_reflect(img, part), oracles.convolve_reflect(img, part),
                                       atol=1e-12)

    def test_impulse_response(self):
        img = np.zeros((15, 15))
        img[7, 7] = 1.0
        k = gabor_kernel(4.0, 0.0, 2.24, 7).real
        out = convolve_reflect(img, k)
        np.testing.assert_allclose(out[4:11, 4:11], k, atol=1e-15)

    def test_fft_matches_direct(self, rng):
        img = rng.standard_normal((40, 40))
        direct = gabor_responses(img, GaborBankSpec(kernel_size=31))
        fft = gabor_responses(img, GaborBankSpec(kernel_size=31, method="fft"))
        np.testing.assert_allclose(fft, direct, atol=1e-6)

    def test_kernel_larger_than_image(self):
        with pytest.raises(InvalidInputError):
            gabor_responses(np.zeros((10, 10)))

    def test_even_kernel_rejected(self):
        with pytest.raises(InvalidInputError):
            GaborBankSpec(kernel_size=8)

    def test_texture_view_shape(self, rng):
        v = gabor_texture(random_cube(rng, 4, 32, 33))
        assert v.values.shape == (32 * 33, 60)
        assert v.columns[13] == "gabor_s1_d1"


class TestMorphology:
    def test_disk(self):
        assert disk(1).sum() == 5
        assert disk(2).sum() == 13
        assert disk(8).shape == (17, 17)

    def test_square_matches_bruteforce(self):
        img = np.zeros((16, 16))
        img[5:11, 5:11] = 1.0
        for r in (2, 4, 6, 8):
            np.testing.assert_array_equal(opening(img, r), oracles.dilate(oracles.erode(img, r), r))
            np.testing.assert_array_equal(closing(img, r), oracles.erode(oracles.dilate(img, r), r))

    def test_small_square_removed(self):
        img = np.zeros((16, 16))
        img[6:9, 6:9] = 5.0
        assert opening(img, 2).max() == 0.0
        op, _ = differential_profile(img, (2, 4, 6, 8))
        np.testing.assert_array_equal(op[0], img)
        np.testing.assert_array_equal(op[0], img - oracles.dilate(oracles.erode(img, 2), 2))
        assert np.all(op[1:] == 0)

    def test_flat_image_zero_profile(self):
        op, cl = differential_profile(np.full((12, 12), 2.5), (2, 4))
        assert not op.any() and not cl.any()

    def test_random_matches_bruteforce(self, rng):
        img = rng.integers(0, 50, size=(12, 13)).astype(float)
        for r in (2, 4):
            np.testing.assert_array_equal(opening(img, r), oracles.dilate(oracles.erode(img, r), r))

    @settings(max_examples=20, deadline=None)
    @given(arrays(np.int64, st.tuples(st.integers(3, 20), st.integers(3, 20)),
                  elements=st.integers(-100, 100)),
           st.sampled_from([1, 2, 3, 4, 6, 8]))
    def test_laws(self, img, r):
        img = img.astype(float)
        op, cl = opening(img, r), closing(img, r)
        assert np.all(op <= img) and np.all(cl >= img)
        np.testing.assert_array_equal(op, -closing(-img, r))
        np.testing.assert_array_equal(opening(op, r), op)
        np.testing.assert_array_equal(closing(cl, r), cl)

    def test_profile_nonnegative_and_shape(self, rng):
        img = rng.standard_normal((20, 20))
        op, cl = differential_profile(img, (2, 4))
        assert op.shape == cl.shape == (2, 20, 20)
        assert op.min() >= 0 and cl.min() >= 0
        np.testing.assert_allclose(op[0], img - opening(img, 2))

    def test_dmp_spec_validation(self):
        with pytest.raises(InvalidInputError):
            DmpSpec(radii=(4, 2))
        with pytest.raises(InvalidInputError):
            DmpSpec(radii=(2, 2))


class TestViews:
    def test_dmp_80(self, rng):
        assert dmp_features(random_cube(rng, 12, 10, 10)).dim == 80

    def test_dmp_needs_bands(self, rng):
        with pytest.raises(InvalidInputError):
            dmp_features(random_cube(rng, 5, 10, 10))

    def test_full_stack_327(self, rng):
        ds = extract_views(random_cube(rng, 187, 32, 32), FeatureSpec())
        assert ds.view_dims == (187, 60, 80)
        assert stack_views(ds).dim == 327
        assert ds.n == 32 * 32

    def test_subset_and_unknown(self, rng):
        cube = random_cube(rng, 12, 10, 10)
        assert extract_views(cube, FeatureSpec(views=("spectral",))).view_dims == (12,)
        with pytest.raises(InvalidInputError):
            extract_views(cube, FeatureSpec(views=("lidar",)))
