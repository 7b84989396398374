"""Access ledger: per-stage record of which sample rows each pipeline stage read.

Protocol code never touches the raw feature matrix; it asks a FoldScope for an
index-scoped DatasetView, and the scope logs (stage, fold, indices) to the
ledger. Auditing the ledger against a fold plan then gives a mechanical
leakage check: no tuning/calibration/threshold_search/final_fit entry may
contain that fold's outer-test rows, and a fold's threshold search must be
sequenced before its outer-test scoring.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .data import Dataset, DatasetView, FoldPlan

TRAIN_STAGES = ("tuning", "calibration", "threshold_search", "final_fit")
TEST_STAGE = "outer_test_score"
STAGES = TRAIN_STAGES + (TEST_STAGE,)


@dataclass(frozen=True)
class LedgerEntry:
    stage: str
    fold_id: int
    seq: int
    indices: tuple[int, ...]


class AccessLedger:
    """Append-only record of row accesses, safe for concurrent fold workers.

    ``seq`` numbers are assigned per fold by FoldScope, so the entry order is
    well-defined no matter how folds interleave across workers; ``entries``
    returns them in the canonical (stage, fold, seq) sort.
    """

    def __init__(self):
        self._entries: list[LedgerEntry] = []
        self._lock = threading.Lock()

    def append(self, stage: str, fold_id: int, seq: int, indices) -> LedgerEntry:
        if stage not in STAGES:
            raise ValueError(f"unknown ledger stage {stage!r}; expected one of {STAGES}")
        entry = LedgerEntry(
            stage=stage,
            fold_id=int(fold_id),
            seq=int(seq),
            indices=tuple(int(i) for i in np.sort(np.asarray(indices, dtype=np.intp))),
        )
        with self._lock:
            self._entries.append(entry)
        return entry

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        with self._lock:
            snapshot = list(self._entries)
        order = {stage: rank for rank, stage in enumerate(STAGES)}
        return tuple(
            sorted(snapshot, key=lambda e: (order[e.stage], e.fold_id, e.seq))
        )

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class FoldScope:
    """Hands out ledger-logged views for one outer fold's pipeline stages."""

    def __init__(self, ledger: AccessLedger, dataset: Dataset, fold_id: int):
        self.ledger = ledger
        self.dataset = dataset
        self.fold_id = fold_id
        self._seq = 0

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def view(self, indices, stage: str) -> DatasetView:
        """Log a read of ``indices`` under ``stage`` and return the view."""
        self.ledger.append(stage, self.fold_id, self._next_seq(), indices)
        return self.dataset.view(indices)

    def log(self, indices, stage: str) -> None:
        """Log an information flow that does not need a fresh view (for
        example pooled out-of-fold selection reading every fold's rows)."""
        self.ledger.append(stage, self.fold_id, self._next_seq(), indices)


@dataclass(frozen=True)
class LedgerVerdict:
    """Outcome of auditing a ledger against a fold plan.

    ``violations`` holds (stage, fold_id, row_index) triples where a training
    stage read that fold's outer-test rows. ``ordering_violations`` lists
    folds whose outer-test scoring was sequenced at or before their threshold
    search. Violations are data, not exceptions: biased baseline protocols
    produce them by design.
    """

    violations: tuple[tuple[str, int, int], ...]
    ordering_violations: tuple[int, ...]
    n_entries: int
    n_folds: int

    @property
    def clean(self) -> bool:
        return not self.violations and not self.ordering_violations

    def to_dict(self) -> dict:
        return {
            "clean": self.clean,
            "n_entries": self.n_entries,
            "n_folds": self.n_folds,
            "violations": [list(v) for v in self.violations],
            "ordering_violations": list(self.ordering_violations),
        }


def ledger_assert_clean(ledger: AccessLedger, plan: FoldPlan) -> LedgerVerdict:
    """Audit every fold's entries for outer-test contamination and ordering."""
    entries = ledger.entries
    violations = []
    ordering_violations = []
    for fold_id in range(plan.k):
        test_rows = set(int(i) for i in plan.folds[fold_id][1])
        fold_entries = [e for e in entries if e.fold_id == fold_id]
        for entry in fold_entries:
            if entry.stage in TRAIN_STAGES:
                for idx in entry.indices:
                    if idx in test_rows:
                        violations.append((entry.stage, fold_id, idx))
        threshold_seqs = [e.seq for e in fold_entries if e.stage == "threshold_search"]
        test_seqs = [e.seq for e in fold_entries if e.stage == TEST_STAGE]
        if threshold_seqs and test_seqs and max(threshold_seqs) >= min(test_seqs):
            ordering_violations.append(fold_id)
    return LedgerVerdict(
        violations=tuple(violations),
        ordering_violations=tuple(ordering_violations),
        n_entries=len(entries),
        n_folds=plan.k,
    )
