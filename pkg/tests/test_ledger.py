"""Access-ledger bookkeeping and the leakage audit.

The audit is the load-bearing safety net of the whole package, so these tests
construct contaminated and clean access patterns by hand and check the verdict
classifies each one correctly.
"""

import numpy as np
import pytest

from nestedeval.data import Dataset, FoldPlan, stratified_kfold
from nestedeval.ledger import (
    TEST_STAGE,
    TRAIN_STAGES,
    AccessLedger,
    FoldScope,
    LedgerVerdict,
    ledger_assert_clean,
)


def small_dataset(n=10):
    rng = np.random.default_rng(0)
    labels = np.zeros(n, dtype=int)
    labels[: n // 2] = 1
    return Dataset(
        features=rng.standard_normal((n, 3)),
        labels=labels,
        feature_names=("f0", "f1", "f2"),
        subject_ids=tuple(f"s{i}" for i in range(n)),
    )


def two_fold_plan(n=10):
    # fold 0 tests the first half, fold 1 the second
    idx = np.arange(n)
    folds = (
        (idx[n // 2 :], idx[: n // 2]),
        (idx[: n // 2], idx[n // 2 :]),
    )
    return FoldPlan(folds=folds, k=2, seed=0)


def test_stage_names():
    assert TRAIN_STAGES == ("tuning", "calibration", "threshold_search", "final_fit")
    assert TEST_STAGE == "outer_test_score"


def test_append_rejects_unknown_stage():
    ledger = AccessLedger()
    with pytest.raises(ValueError, match="unknown ledger stage"):
        ledger.append("peeking", 0, 1, [0])


def test_entries_sorted_and_indices_canonical():
    ledger = AccessLedger()
    ledger.append("final_fit", 1, 2, [5, 3, 4])
    ledger.append("tuning", 0, 1, [9, 7])
    entries = ledger.entries
    assert [e.stage for e in entries] == ["tuning", "final_fit"]
    assert entries[1].indices == (3, 4, 5)
    assert len(ledger) == 2


def test_scope_views_log_and_slice():
    data = small_dataset(n=10)
    ledger = AccessLedger()
    scope = FoldScope(ledger, data, fold_id=0)
    view = scope.view([5, 6], "tuning")
    assert view.n == 2
    scope.log([0, 1], "threshold_search")
    entries = ledger.entries
    assert [(e.stage, e.seq) for e in entries] == [
        ("tuning", 1),
        ("threshold_search", 2),
    ]


def test_clean_pattern_passes_audit():
    data = small_dataset(n=10)
    plan = two_fold_plan(10)
    ledger = AccessLedger()
    for fold_id, (train, test) in enumerate(plan.folds):
        scope = FoldScope(ledger, data, fold_id)
        scope.view(train, "tuning")
        scope.view(train, "calibration")
        scope.view(train, "final_fit")
        scope.view(train, "threshold_search")
        scope.view(test, "outer_test_score")
    verdict = ledger_assert_clean(ledger, plan)
    assert verdict.clean
    assert verdict.violations == ()
    assert verdict.ordering_violations == ()
    assert verdict.n_entries == 10
    assert verdict.n_folds == 2


def test_train_stage_touching_test_rows_is_flagged():
    data = small_dataset(n=10)
    plan = two_fold_plan(10)
    ledger = AccessLedger()
    for fold_id, (train, test) in enumerate(plan.folds):
        scope = FoldScope(ledger, data, fold_id)
        if fold_id == 0:
            scope.view(np.r_[train, test[:2]], "tuning")  # contaminate
        else:
            scope.view(train, "tuning")
        scope.view(train, "threshold_search")
        scope.view(test, "outer_test_score")
    verdict = ledger_assert_clean(ledger, plan)
    assert not verdict.clean
    assert set(verdict.violations) == {("tuning", 0, 0), ("tuning", 0, 1)}
    assert verdict.ordering_violations == ()


def test_threshold_after_test_scoring_is_flagged():
    data = small_dataset(n=10)
    plan = two_fold_plan(10)
    ledger = AccessLedger()
    for fold_id, (train, test) in enumerate(plan.folds):
        scope = FoldScope(ledger, data, fold_id)
        scope.view(train, "final_fit")
        scope.view(test, "outer_test_score")
        if fold_id == 1:
            scope.view(train, "threshold_search")  # too late
    verdict = ledger_assert_clean(ledger, plan)
    assert not verdict.clean
    assert verdict.violations == ()
    assert verdict.ordering_violations == (1,)


def test_pooled_selection_violates_every_fold():
    # the classic mistake: one threshold chosen on pooled out-of-fold
    # predictions touches each fold's test rows during threshold_search
    data = small_dataset(n=10)
    plan = two_fold_plan(10)
    ledger = AccessLedger()
    everything = np.arange(10)
    for fold_id, (train, test) in enumerate(plan.folds):
        scope = FoldScope(ledger, data, fold_id)
        scope.view(train, "final_fit")
        scope.log(everything, "threshold_search")
        scope.view(test, "outer_test_score")
    verdict = ledger_assert_clean(ledger, plan)
    assert not verdict.clean
    # each fold is charged for its own 5 test rows
    assert len(verdict.violations) == 10
    assert {f for _, f, _ in verdict.violations} == {0, 1}
    assert {s for s, _, _ in verdict.violations} == {"threshold_search"}


def test_verdict_serialization():
    verdict = LedgerVerdict(
        violations=(("tuning", 0, 3),),
        ordering_violations=(1,),
        n_entries=7,
        n_folds=2,
    )
    payload = verdict.to_dict()
    assert payload["clean"] is False
    assert payload["violations"] == [["tuning", 0, 3]]
    assert payload["ordering_violations"] == [1]


def test_seq_numbers_are_per_fold():
    data = small_dataset(n=10)
    ledger = AccessLedger()
    a = FoldScope(ledger, data, fold_id=0)
    b = FoldScope(ledger, data, fold_id=1)
    a.view([0], "tuning")
    b.view([1], "tuning")
    a.view([2], "final_fit")
    seqs = {(e.fold_id, e.stage): e.seq for e in ledger.entries}
    assert seqs[(0, "tuning")] == 1
    assert seqs[(1, "tuning")] == 1
    assert seqs[(0, "final_fit")] == 2


def test_audit_with_real_kfold_plan():
    labels = np.tile([0, 1], 15)
    plan = stratified_kfold(labels, k=3, seed=4)
    data = small_dataset(n=30)
    ledger = AccessLedger()
    for fold_id, (train, test) in enumerate(plan.folds):
        scope = FoldScope(ledger, data, fold_id)
        scope.view(train, "final_fit")
        scope.view(train, "threshold_search")
        scope.view(test, "outer_test_score")
    assert ledger_assert_clean(ledger, plan).clean
