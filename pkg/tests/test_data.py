import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from s3fse.data import (
    HyperspectralCube,
    LabelVector,
    MultiViewDataset,
    SplitSpec,
    ViewMatrix,
    normalize_views,
    split_stacked,
    stack_views,
    stratified_split,
    stratified_split_indices,
)
from s3fse.exceptions import InvalidInputError

from conftest import make_views


def ds_from(*arrays, labels=None):
    return MultiViewDataset(tuple(ViewMatrix(f"v{i}", a) for i, a in enumerate(arrays)), labels)


class TestNormalize:
    def test_two_point_column(self):
        out = normalize_views(ds_from(np.array([[1.0], [3.0]])))
        np.testing.assert_array_equal(out.views[0].values.ravel(), [-1.0, 1.0])

    def test_constant_column_maps_to_zero(self):
        out = normalize_views(ds_from(np.array([[5.0], [5.0], [5.0]])))
        np.testing.assert_array_equal(out.views[0].values.ravel(), [0.0, 0.0, 0.0])

    def test_random_view_moments(self, rng):
        X = rng.normal(3.0, 7.0, size=(10, 4))
        Z = normalize_views(ds_from(X)).views[0].values
        # independent recomputation of the moments
        n = Z.shape[0]
        for j in range(4):
            col = [Z[i, j] for i in range(n)]
            mean = sum(col) / n
            var = sum((c - mean) ** 2 for c in col) / n
            assert abs(mean) < 1e-10
            assert abs(var - 1.0) < 1e-10

    def test_idempotent(self, rng):
        ds = make_views(rng, 15, (3, 6))
        once = normalize_views(ds)
        twice = normalize_views(once)
        for a, b in zip(once.views, twice.views):
            np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_needs_two_samples(self):
        with pytest.raises(InvalidInputError):
            normalize_views(ds_from(np.ones((1, 2))))

    def test_preserves_order_and_labels(self, rng):
        labels = LabelVector(np.array([1, 2, 1, 2]), 2)
        ds = ds_from(np.arange(8.0).reshape(4, 2), labels=labels)
        out = normalize_views(ds)
        assert out.labels is labels
        assert np.all(np.diff(out.views[0].values[:, 0]) > 0)


class TestStack:
    def test_concatenation(self):
        out = stack_views(ds_from(np.array([[1.0, 2.0]]), np.array([[3.0]])))
        np.testing.assert_array_equal(out.values, [[1, 2, 3]])

    def test_single_view_identity(self, rng):
        X = rng.standard_normal((5, 3))
        np.testing.assert_array_equal(stack_views(ds_from(X)).values, X)

    def test_hyperspectral_dimensions(self, rng):
        ds = make_views(rng, 2, (187, 60, 80))
        assert stack_views(ds).dim == 327

    def test_mismatched_n(self):
        with pytest.raises(InvalidInputError):
            ds_from(np.ones((2, 1)), np.ones((3, 1)))

    def test_block_slicing_roundtrip(self, rng):
        ds = make_views(rng, 7, (2, 5, 1, 4))
        blocks = split_stacked(stack_views(ds).values, ds.view_dims)
        for v, b in zip(ds.views, blocks):
            np.testing.assert_array_equal(v.values, b)


class TestSplit:
    def test_counts(self, rng):
        labels = LabelVector(np.repeat([1, 2], 50), 2)
        train, test = stratified_split(make_views(rng, 100, (3,), labels), SplitSpec(30, 0))
        assert (train.n, test.n) == (60, 40)
        np.testing.assert_array_equal(train.labels.counts(), [30, 30])

    def test_thirty_per_class_protocol(self, rng):
        labels = LabelVector(np.repeat(np.arange(1, 7), 30), 6)
        train, test = stratified_split(make_views(rng, 180, (2,), labels), SplitSpec(30, 1))
        assert train.n == 180
        assert test.n == 0

    def test_deterministic(self):
        labels = LabelVector(np.repeat([1, 2, 3], [10, 20, 30]), 3)
        a = stratified_split_indices(labels, SplitSpec(5, 42))
        b = stratified_split_indices(labels, SplitSpec(5, 42))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_too_many_per_class(self):
        labels = LabelVector(np.repeat([1, 2], [10, 3]), 2)
        with pytest.raises(InvalidInputError):
            stratified_split_indices(labels, SplitSpec(4, 0))

    def test_invalid_spec(self):
        with pytest.raises(InvalidInputError):
            SplitSpec(0)

    @settings(max_examples=60, deadline=None)
    @given(
        sizes=st.lists(st.integers(1, 12), min_size=1, max_size=5),
        k=st.integers(1, 12),
        seed=st.integers(0, 2**31),
    )
    def test_partition_property(self, sizes, k, seed):
        labels = LabelVector(np.repeat(np.arange(1, len(sizes) + 1), sizes), len(sizes))
        if k > min(sizes):
            with pytest.raises(InvalidInputError):
                stratified_split_indices(labels, SplitSpec(k, seed))
            return
        tr, te = stratified_split_indices(labels, SplitSpec(k, seed))
        both = np.concatenate([tr, te])
        assert len(both) == len(labels)
        assert len(np.unique(both)) == len(labels)
        assert np.all(np.bincount(labels.classes[tr], minlength=len(sizes) + 1)[1:] == k)


class TestTypes:
    def test_label_ids_in_range(self):
        with pytest.raises(InvalidInputError):
            LabelVector(np.array([0, 1]), 1)
        with pytest.raises(InvalidInputError):
            LabelVector(np.array([1, 1]), 2)

    def test_remap_codes(self):
        lv = LabelVector.from_codes([7, 3, 7, 9])
        np.testing.assert_array_equal(lv.classes, [2, 1, 2, 3])
        assert lv.codes == (3, 7, 9)

    def test_view_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            ViewMatrix("x", np.array([[np.nan]]))

    def test_cube_layout(self):
        cube = HyperspectralCube.from_flat(np.arange(8.0), width=2, height=2, bands=2)
        # band-sequential, row-major within band
        np.testing.assert_array_equal(cube.pixels(), [[0, 4], [1, 5], [2, 6], [3, 7]])

    def test_cube_length_check(self):
        with pytest.raises(InvalidInputError):
            HyperspectralCube.from_flat(np.arange(7.0), 2, 2, 2)

    def test_immutability(self, rng):
        v = ViewMatrix("x", rng.standard_normal((3, 2)))
        with pytest.raises(ValueError):
            v.values[0, 0] = 1.0
