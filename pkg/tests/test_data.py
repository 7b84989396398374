"""Dataset container, stratified splitting, CSV ingestion, synthetic generator."""

import numpy as np
import pytest

from nestedeval.data import (
    Dataset,
    DegenerateStratificationWarning,
    FoldPlan,
    LoadReport,
    SingleClassWarning,
    load_csv,
    make_synthetic,
    stratified_kfold,
    stratified_split,
)
from nestedeval.errors import DataError


def small_dataset(n=10, p=3, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.zeros(n, dtype=int)
    labels[: n // 2] = 1
    return Dataset(
        features=rng.standard_normal((n, p)),
        labels=labels,
        feature_names=tuple(f"f{j}" for j in range(p)),
        subject_ids=tuple(f"s{i}" for i in range(n)),
    )


class TestDataset:
    def test_arrays_are_immutable(self):
        data = small_dataset()
        with pytest.raises(ValueError):
            data.features[0, 0] = 99.0
        with pytest.raises(ValueError):
            data.labels[0] = 1

    def test_default_provenance_is_raw(self):
        data = small_dataset(p=2)
        assert data.column_provenance == ("raw", "raw")

    def test_shape_properties(self):
        data = small_dataset(n=7, p=4)
        assert data.n_samples == 7
        assert data.n_features == 4

    def test_rejects_duplicate_feature_names(self):
        with pytest.raises(DataError, match="duplicate feature names"):
            Dataset(
                features=np.zeros((2, 2)),
                labels=[0, 1],
                feature_names=("a", "a"),
                subject_ids=("s1", "s2"),
            )

    def test_rejects_duplicate_subject_ids(self):
        with pytest.raises(DataError, match="duplicate subject ids"):
            Dataset(
                features=np.zeros((2, 1)),
                labels=[0, 1],
                feature_names=("a",),
                subject_ids=("s1", "s1"),
            )

    def test_rejects_nonbinary_labels(self):
        with pytest.raises(DataError, match="only 0 and 1"):
            Dataset(
                features=np.zeros((2, 1)),
                labels=[0, 2],
                feature_names=("a",),
                subject_ids=("s1", "s2"),
            )

    def test_rejects_nonfinite_features(self):
        with pytest.raises(DataError, match="non-finite"):
            Dataset(
                features=np.array([[1.0], [np.nan]]),
                labels=[0, 1],
                feature_names=("a",),
                subject_ids=("s1", "s2"),
            )

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(DataError):
            Dataset(
                features=np.zeros((2, 1)),
                labels=[0, 1, 1],
                feature_names=("a",),
                subject_ids=("s1", "s2"),
            )


class TestDatasetView:
    def test_view_selects_rows(self):
        data = small_dataset()
        view = data.view([2, 5, 7])
        assert view.n == 3
        assert np.array_equal(view.X, data.features[[2, 5, 7]])
        assert np.array_equal(view.y, data.labels[[2, 5, 7]])
        assert view.feature_names == data.feature_names

    def test_view_rejects_out_of_range(self):
        data = small_dataset(n=5)
        with pytest.raises(DataError, match="out of range"):
            data.view([0, 5])

    def test_absolute_maps_back(self):
        data = small_dataset()
        view = data.view([4, 8, 1])
        assert np.array_equal(view.absolute([0, 2]), [4, 1])

    def test_full_view_covers_everything(self):
        data = small_dataset(n=6)
        assert np.array_equal(data.full_view().indices, np.arange(6))


class TestStratifiedKFold:
    def test_folds_partition_index_range(self):
        labels = np.r_[np.ones(13, dtype=int), np.zeros(17, dtype=int)]
        plan = stratified_kfold(labels, k=5, seed=3)
        all_test = np.concatenate([te for _, te in plan.folds])
        assert np.array_equal(np.sort(all_test), np.arange(30))
        for train, test in plan.folds:
            assert np.intersect1d(train, test).size == 0
            assert train.size + test.size == 30

    def test_class_balance_within_one(self):
        labels = np.r_[np.ones(40, dtype=int), np.zeros(60, dtype=int)]
        plan = stratified_kfold(labels, k=5, seed=9)
        for _, test in plan.folds:
            assert labels[test].sum() == 8  # 40 positives deal evenly into 5

    def test_uneven_classes_spread_within_one(self):
        labels = np.r_[np.ones(11, dtype=int), np.zeros(19, dtype=int)]
        plan = stratified_kfold(labels, k=4, seed=1)
        pos_counts = [int(labels[te].sum()) for _, te in plan.folds]
        assert max(pos_counts) - min(pos_counts) <= 1
        sizes = [te.size for _, te in plan.folds]
        assert max(sizes) - min(sizes) <= 2  # each class contributes at most 1

    def test_same_seed_same_plan(self):
        labels = np.tile([0, 1], 20)
        a = stratified_kfold(labels, k=4, seed=11)
        b = stratified_kfold(labels, k=4, seed=11)
        for (tr1, te1), (tr2, te2) in zip(a.folds, b.folds):
            assert np.array_equal(tr1, tr2) and np.array_equal(te1, te2)

    def test_different_seed_different_plan(self):
        labels = np.tile([0, 1], 20)
        a = stratified_kfold(labels, k=4, seed=11)
        b = stratified_kfold(labels, k=4, seed=12)
        assert any(
            not np.array_equal(te1, te2)
            for (_, te1), (_, te2) in zip(a.folds, b.folds)
        )

    def test_tiny_class_warns_but_plans(self):
        labels = np.r_[np.ones(2, dtype=int), np.zeros(18, dtype=int)]
        with pytest.warns(DegenerateStratificationWarning):
            plan = stratified_kfold(labels, k=5, seed=0)
        assert plan.k == 5

    def test_invalid_k(self):
        with pytest.raises(DataError):
            stratified_kfold([0, 1, 0, 1], k=1, seed=0)
        with pytest.raises(DataError):
            stratified_kfold([0, 1, 0], k=4, seed=0)


class TestStratifiedSplit:
    def test_split_sizes_exact(self):
        labels = np.r_[np.ones(30, dtype=int), np.zeros(70, dtype=int)]
        train, test = stratified_split(labels, test_fraction=0.2, seed=5)
        assert test.size == 20
        assert train.size == 80
        assert np.intersect1d(train, test).size == 0
        assert np.array_equal(np.sort(np.r_[train, test]), np.arange(100))

    def test_split_is_stratified(self):
        labels = np.r_[np.ones(30, dtype=int), np.zeros(70, dtype=int)]
        _, test = stratified_split(labels, test_fraction=0.2, seed=5)
        assert labels[test].sum() == 6  # 30 * 0.2

    def test_largest_remainder_totals(self):
        # 11 pos, 9 neg, fraction 0.25 -> 5 test rows split 3/2 or 2/3
        labels = np.r_[np.ones(11, dtype=int), np.zeros(9, dtype=int)]
        train, test = stratified_split(labels, test_fraction=0.25, seed=2)
        assert test.size == 5
        assert labels[test].sum() in (2, 3)

    def test_deterministic(self):
        labels = np.tile([0, 1], 25)
        a = stratified_split(labels, 0.2, seed=7)
        b = stratified_split(labels, 0.2, seed=7)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_fraction_bounds(self):
        with pytest.raises(DataError):
            stratified_split([0, 1], 0.0, seed=0)
        with pytest.raises(DataError):
            stratified_split([0, 1], 1.0, seed=0)


class TestFoldPlan:
    def test_k_mismatch_rejected(self):
        folds = ((np.array([0, 1]), np.array([2, 3])),)
        with pytest.raises(DataError, match="k=2"):
            FoldPlan(folds=folds, k=2, seed=0)

    def test_n_samples_sums_test_sets(self):
        labels = np.tile([0, 1], 15)
        plan = stratified_kfold(labels, k=3, seed=0)
        assert plan.n_samples == 30


class TestMakeSynthetic:
    def test_shapes_and_balance(self):
        data = make_synthetic(
            n=120, p=10, n_informative=3, effect_size=1.0, positive_fraction=0.4,
            seed=0,
        )
        assert data.n_samples == 120
        assert data.n_features == 10
        assert data.labels.sum() == 48
        assert len(set(data.subject_ids)) == 120

    def test_informative_columns_carry_signal(self):
        data = make_synthetic(
            n=4000, p=6, n_informative=2, effect_size=1.5, positive_fraction=0.5,
            seed=1,
        )
        pos = data.features[data.labels == 1]
        neg = data.features[data.labels == 0]
        gaps = pos.mean(axis=0) - neg.mean(axis=0)
        assert gaps[0] == pytest.approx(1.5, abs=0.15)
        assert gaps[1] == pytest.approx(1.5, abs=0.15)
        assert np.abs(gaps[2:]).max() < 0.15

    def test_reproducible(self):
        a = make_synthetic(50, 5, 2, 1.0, 0.5, seed=3)
        b = make_synthetic(50, 5, 2, 1.0, 0.5, seed=3)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_argument_validation(self):
        with pytest.raises(DataError):
            make_synthetic(0, 5, 2, 1.0, 0.5, seed=0)
        with pytest.raises(DataError):
            make_synthetic(10, 5, 6, 1.0, 0.5, seed=0)
        with pytest.raises(DataError):
            make_synthetic(10, 5, 2, 1.0, 1.0, seed=0)


class TestLoadCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "input.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_basic_load_and_dichotomize(self, tmp_path):
        path = self.write(
            tmp_path,
            "id,vol_a,vol_b,score\n"
            "s1,1.0,2.0,3.5\n"
            "s2,1.5,2.5,1.0\n"
            "s3,0.5,1.5,3.0\n",
        )
        data, report = load_csv(path, label_column="score", id_column="id")
        assert data.feature_names == ("vol_a", "vol_b")
        # cutoff 3.0 inclusive: 3.5 -> 1, 1.0 -> 0, 3.0 -> 1
        assert data.labels.tolist() == [1, 0, 1]
        assert data.subject_ids == ("s1", "s2", "s3")
        assert report.n_rows_read == 3
        assert report.n_loaded == 3
        assert report.n_rejected == 0

    def test_rejects_bad_rows_with_reasons(self, tmp_path):
        path = self.write(
            tmp_path,
            "id,vol,score\n"
            "s1,1.0,4.0\n"
            "s2,,4.0\n"
            "s3,oops,4.0\n"
            "s4,1.0,bad\n"
            "s1,2.0,1.0\n"
            "s6,1.0\n",
        )
        with pytest.warns(SingleClassWarning):
            data, report = load_csv(path, label_column="score", id_column="id")
        assert data.n_samples == 1
        reasons = report.counts_by_reason()
        assert reasons["missing value in column 'vol'"] == 1
        assert reasons["unparseable value in column 'vol'"] == 1
        assert reasons["unparseable label 'bad'"] == 1
        assert reasons["duplicate subject id"] == 1
        assert reasons["wrong cell count"] == 1

    def test_custom_cutoff(self, tmp_path):
        path = self.write(tmp_path, "id,v,score\ns1,1.0,2.0\ns2,1.0,1.9\n")
        data, _ = load_csv(path, label_column="score", id_column="id", cutoff=2.0)
        assert data.labels.tolist() == [1, 0]

    def test_missing_label_column(self, tmp_path):
        path = self.write(tmp_path, "id,v\ns1,1.0\n")
        with pytest.raises(DataError, match="label column 'score'"):
            load_csv(path, label_column="score", id_column="id")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv", label_column="score")

    def test_all_rows_rejected_is_error(self, tmp_path):
        path = self.write(tmp_path, "id,v,score\ns1,,4.0\ns2,,1.0\n")
        with pytest.raises(DataError, match="all 2 rows rejected"):
            load_csv(path, label_column="score", id_column="id")

    def test_without_id_column_rows_get_names(self, tmp_path):
        path = self.write(tmp_path, "v,score\n1.0,4.0\nbad,1.0\n")
        with pytest.warns(SingleClassWarning):  # only the positive row survives
            data, report = load_csv(path, label_column="score")
        assert data.subject_ids == ("row-0001",)
        assert report.rejections[0][0] == "row-0002"


def test_load_report_to_dict_round_trip():
    report = LoadReport(n_rows_read=5, n_loaded=3)
    report.reject("s1", "missing value in column 'v'")
    report.reject("s2", "missing value in column 'v'")
    payload = report.to_dict()
    assert payload["n_rows_read"] == 5
    assert payload["n_rejected"] == 2
    assert report.counts_by_reason() == {"missing value in column 'v'": 2}
