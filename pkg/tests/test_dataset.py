import numpy as np
import pytest

from sarlib import (
    Dataset,
    LinearModel,
    LossKind,
    destandardize,
    split_kfold,
    standardize,
)
from sarlib.dataset import TestResult as StatTestResult
from sarlib.errors import BadFoldCount, ConstantColumn
from sarlib.rng import RandomStream


def make_dataset(n=20, p=2, seed=0):
    s = RandomStream(seed)
    x = s.normals(n * p).reshape(n, p) * 3.0 + 1.0
    y = 2.0 * x[:, 0] - 0.5 + s.normals(n)
    return Dataset(predictors=x, response=y)


class TestDatasetInvariants:
    def test_minimum_shape(self):
        with pytest.raises(ValueError):
            Dataset(predictors=np.ones((2, 1)), response=np.ones(2))

    def test_finite_entries_required(self):
        x = np.ones((3, 1))
        x[0, 0] = np.nan
        with pytest.raises(ValueError):
            Dataset(predictors=x, response=np.arange(3.0))

    def test_standardized_flag_checked(self):
        with pytest.raises(ValueError):
            Dataset(
                predictors=np.arange(3.0)[:, None] * 5,
                response=np.arange(3.0),
                standardized=True,
            )

    def test_arrays_are_read_only(self):
        d = make_dataset()
        with pytest.raises(ValueError):
            d.predictors[0, 0] = 1.0


class TestStandardize:
    def test_symmetric_three_points(self):
        d = Dataset(predictors=np.array([[1.0], [2.0], [3.0]]),
                    response=np.array([1.0, 2.0, 3.0]))
        out = standardize(d)
        assert np.allclose(out.predictors[:, 0], [-1.0, 0.0, 1.0])
        assert np.allclose(out.response, [-1.0, 0.0, 1.0])
        assert out.standardized

    def test_unit_moments(self):
        out = standardize(make_dataset(n=50, p=3, seed=1))
        cols = np.column_stack([out.predictors, out.response])
        assert np.allclose(cols.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(cols.std(axis=0, ddof=1), 1.0, atol=1e-12)

    def test_idempotent(self):
        once = standardize(make_dataset(seed=2))
        twice = standardize(once)
        assert np.allclose(once.predictors, twice.predictors, atol=1e-9)
        assert np.allclose(once.response, twice.response, atol=1e-9)

    def test_constant_column_rejected(self):
        d = Dataset(predictors=np.full((5, 1), 5.0), response=np.arange(5.0))
        with pytest.raises(ConstantColumn):
            standardize(d)

    def test_original_untouched(self):
        d = make_dataset(seed=3)
        before = d.predictors.copy()
        standardize(d)
        assert np.array_equal(d.predictors, before)

    def test_round_trip(self):
        for seed in range(10):
            d = make_dataset(n=30, p=2, seed=seed)
            back = destandardize(standardize(d))
            assert np.allclose(back.predictors, d.predictors, atol=1e-9)
            assert np.allclose(back.response, d.response, atol=1e-9)


class TestSplitKfold:
    def test_k_equal_n_gives_singletons(self):
        d = make_dataset(n=10)
        folds = split_kfold(d, 10, seed=4)
        assert len(folds) == 10
        assert all(len(test) == 1 for _, test in folds)

    def test_fold_sizes_pigeonhole(self):
        d = make_dataset(n=10)
        sizes = sorted(len(test) for _, test in split_kfold(d, 3, seed=0))
        assert sizes == [3, 3, 4]

    def test_deterministic(self):
        d = make_dataset(n=17)
        a = split_kfold(d, 5, seed=9)
        b = split_kfold(d, 5, seed=9)
        for (tr1, te1), (tr2, te2) in zip(a, b):
            assert np.array_equal(tr1, tr2) and np.array_equal(te1, te2)

    def test_covers_all_indices_once(self):
        for seed in range(5):
            d = make_dataset(n=23)
            folds = split_kfold(d, 4, seed=seed)
            combined = np.sort(np.concatenate([test for _, test in folds]))
            assert np.array_equal(combined, np.arange(23))
            for train, test in folds:
                assert len(np.intersect1d(train, test)) == 0
                assert len(train) + len(test) == 23

    def test_bad_fold_count(self):
        d = make_dataset(n=10)
        with pytest.raises(BadFoldCount):
            split_kfold(d, 1, seed=0)
        with pytest.raises(BadFoldCount):
            split_kfold(d, 11, seed=0)


class TestSmallTypes:
    def test_model_requires_finite(self):
        with pytest.raises(ValueError):
            LinearModel(slope=np.array([np.inf]), intercept=0.0)

    def test_loss_kind_validation(self):
        with pytest.raises(ValueError):
            LossKind("l1", -1.0)
        with pytest.raises(ValueError):
            LossKind("l2", 0.5)
        assert LossKind.l1(0.3).epsilon == 0.3
        assert not LossKind.l2().is_l1

    def test_test_result_p_value_range(self):
        with pytest.raises(ValueError):
            StatTestResult(statistic=1.0, dof_num=1, dof_den=5, p_value=1.5)
