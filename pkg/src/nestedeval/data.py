"""Dataset container, CSV ingestion, stratified fold planning, synthetic data.

Labels are binary: 0 = low-risk, 1 = elevated-risk. Continuous risk scores are
dichotomized at ingestion (score >= cutoff -> 1). Rows that cannot be parsed
are rejected with a per-row reason, never imputed.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DegenerateStratificationWarning, SingleClassWarning

RAW = "raw"


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with named columns, binary labels, subject ids.

    ``column_provenance`` tags each column ``"raw"`` or
    ``"engineered:<step>"`` so reports can separate original measurements from
    derived composites.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    subject_ids: tuple[str, ...]
    column_provenance: tuple[str, ...] = ()

    def __post_init__(self):
        features = _frozen_array(self.features, np.float64)
        labels = _frozen_array(self.labels, np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        provenance = self.column_provenance or tuple(RAW for _ in self.feature_names)
        object.__setattr__(self, "column_provenance", tuple(provenance))
        self._validate()

    def _validate(self):
        n, p = self.features.shape if self.features.ndim == 2 else (-1, -1)
        if self.features.ndim != 2:
            raise DataError("feature matrix must be 2-dimensional")
        if len(self.feature_names) != p:
            raise DataError(
                f"{len(self.feature_names)} feature names for {p} matrix columns"
            )
        if len(set(self.feature_names)) != p:
            dupes = [k for k, c in Counter(self.feature_names).items() if c > 1]
            raise DataError(f"duplicate feature names: {dupes}")
        if self.labels.shape != (n,):
            raise DataError("labels must be one value per row")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must contain only 0 and 1")
        if len(self.subject_ids) != n:
            raise DataError("subject_ids must be one id per row")
        if len(set(self.subject_ids)) != n:
            dupes = [k for k, c in Counter(self.subject_ids).items() if c > 1]
            raise DataError(f"duplicate subject ids: {dupes}")
        if len(self.column_provenance) != p:
            raise DataError("column_provenance must be one tag per column")
        if not np.isfinite(self.features).all():
            raise DataError("feature matrix contains non-finite entries")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def view(self, indices) -> "DatasetView":
        """Index-scoped view; protocol code receives these, never the matrix."""
        return DatasetView(self, indices)

    def full_view(self) -> "DatasetView":
        return DatasetView(self, np.arange(self.n_samples))


@dataclass(frozen=True)
class DatasetView:
    """A read-only slice of a Dataset addressed by absolute row indices."""

    dataset: Dataset
    indices: np.ndarray

    def __post_init__(self):
        idx = _frozen_array(self.indices, np.intp)
        if idx.ndim != 1:
            raise DataError("view indices must be a flat index vector")
        if idx.size and (idx.min() < 0 or idx.max() >= self.dataset.n_samples):
            raise DataError("view indices out of range")
        object.__setattr__(self, "indices", idx)

    @property
    def X(self) -> np.ndarray:
        return self.dataset.features[self.indices]

    @property
    def y(self) -> np.ndarray:
        return self.dataset.labels[self.indices]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.dataset.feature_names

    @property
    def n(self) -> int:
        return int(self.indices.size)

    def absolute(self, relative_indices) -> np.ndarray:
        """Map view-relative positions back to absolute dataset rows."""
        return self.indices[np.asarray(relative_indices, dtype=np.intp)]


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic (train, test) index assignments for k folds."""

    folds: tuple[tuple[np.ndarray, np.ndarray], ...]
    k: int
    seed: int
    stratified: bool = True

    def __post_init__(self):
        frozen = tuple(
            (_frozen_array(tr, np.intp), _frozen_array(te, np.intp))
            for tr, te in self.folds
        )
        object.__setattr__(self, "folds", frozen)
        if len(frozen) != self.k:
            raise DataError(f"plan has {len(frozen)} folds but k={self.k}")

    @property
    def n_samples(self) -> int:
        return sum(te.size for _, te in self.folds)


def stratified_kfold(labels, k: int, seed: int) -> FoldPlan:
    """Plan k stratified folds whose test sets partition the index range.

    Per class, indices are shuffled by the seeded generator and dealt
    round-robin into the k folds, so every fold's positive proportion is
    within 1/|fold| of the global proportion. A class with fewer members than
    folds triggers a DegenerateStratificationWarning (some folds will not see
    that class) but still yields a valid plan.
    """
    labels = np.asarray(labels)
    n = labels.size
    if not np.isin(labels, (0, 1)).all():
        raise DataError("stratified_kfold requires binary {0,1} labels")
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds the {n} available samples")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.intp)
    degenerate = []
    for cls in (0, 1):  # fixed class order keeps the plan reproducible
        members = np.flatnonzero(labels == cls)
        if 0 < members.size < k:
            degenerate.append(cls)
        dealt = members[rng.permutation(members.size)]
        fold_of[dealt] = np.arange(dealt.size) % k
    if degenerate:
        warnings.warn(
            f"class(es) {degenerate} have fewer than k={k} members; "
            "some folds contain none of them",
            DegenerateStratificationWarning,
            stacklevel=2,
        )

    folds = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        folds.append((train, test))
    return FoldPlan(folds=tuple(folds), k=k, seed=seed, stratified=True)


def stratified_split(labels, test_fraction: float, seed: int):
    """One stratified (train, test) split with |test| = round(n * fraction).

    Per-class test counts follow largest-remainder apportionment so the total
    is exact and each class is represented proportionally.
    """
    labels = np.asarray(labels)
    n = labels.size
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    total_test = int(round(n * test_fraction))
    total_test = min(max(total_test, 1), n - 1)

    class_members = {cls: np.flatnonzero(labels == cls) for cls in (0, 1)}
    quotas = {cls: idx.size * test_fraction for cls, idx in class_members.items()}
    take = {cls: int(math.floor(q)) for cls, q in quotas.items()}
    leftover = total_test - sum(take.values())
    by_remainder = sorted((0, 1), key=lambda c: (take[c] - quotas[c], c))
    for cls in by_remainder[:leftover]:
        take[cls] += 1

    rng = np.random.default_rng(seed)
    test_parts, train_parts = [], []
    for cls in (0, 1):
        members = class_members[cls]
        shuffled = members[rng.permutation(members.size)]
        t = min(take[cls], members.size)
        test_parts.append(shuffled[:t])
        train_parts.append(shuffled[t:])
    test = np.sort(np.concatenate(test_parts))
    train = np.sort(np.concatenate(train_parts))
    return train, test


def make_synthetic(
    n: int,
    p: int,
    n_informative: int,
    effect_size: float,
    positive_fraction: float,
    seed: int,
) -> Dataset:
    """Class-conditional Gaussian generator with a controlled signal level.

    The first ``n_informative`` columns have class means separated by
    ``effect_size`` standard deviations; the rest are pure noise. The positive
    count is forced to round(n * positive_fraction) exactly.
    """
    if n <= 0 or p <= 0:
        raise DataError("n and p must be positive")
    if not 0 <= n_informative <= p:
        raise DataError(f"n_informative must lie in [0, p={p}], got {n_informative}")
    if not 0.0 < positive_fraction < 1.0:
        raise DataError("positive_fraction must lie in (0, 1)")

    rng = np.random.default_rng(seed)
    n_pos = int(round(n * positive_fraction))
    labels = np.zeros(n, dtype=np.int64)
    labels[:n_pos] = 1
    rng.shuffle(labels)
    features = rng.standard_normal((n, p))
    features[labels == 1, :n_informative] += effect_size

    return Dataset(
        features=features,
        labels=labels,
        feature_names=tuple(f"feat_{j:03d}" for j in range(p)),
        subject_ids=tuple(f"synth-{i:04d}" for i in range(n)),
    )


@dataclass
class LoadReport:
    """Ingestion outcome: how many rows survived and why the rest did not."""

    n_rows_read: int = 0
    n_loaded: int = 0
    rejections: list[tuple[str, str]] = field(default_factory=list)

    def reject(self, row_id: str, reason: str):
        self.rejections.append((row_id, reason))

    @property
    def n_rejected(self) -> int:
        return len(self.rejections)

    def counts_by_reason(self) -> dict[str, int]:
        return dict(Counter(reason for _, reason in self.rejections))

    def to_dict(self) -> dict:
        return {
            "n_rows_read": self.n_rows_read,
            "n_loaded": self.n_loaded,
            "n_rejected": self.n_rejected,
            "rejections": [list(r) for r in self.rejections],
        }


def load_csv(
    path,
    label_column: str,
    id_column: str | None = None,
    cutoff: float = 3.0,
) -> tuple[Dataset, LoadReport]:
    """Load a UTF-8 CSV (header row, one subject per row) into a Dataset.

    The label column holds a numeric risk score, dichotomized as
    score >= cutoff -> 1, else 0. All remaining columns (minus the optional id
    column) become features. Rows with missing, unparseable, or non-finite
    cells are rejected and reported, not imputed.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"input file is empty: {path}") from None
        rows = list(reader)

    header = [h.strip() for h in header]
    for required, name in ((label_column, "label"), (id_column, "id")):
        if required is not None and required not in header:
            raise DataError(f"{name} column {required!r} not found in header {header}")
    label_pos = header.index(label_column)
    id_pos = header.index(id_column) if id_column is not None else None
    feature_pos = [
        j for j in range(len(header)) if j not in (label_pos, id_pos)
    ]
    feature_names = tuple(header[j] for j in feature_pos)

    report = LoadReport(n_rows_read=len(rows))
    kept_rows, kept_labels, kept_ids = [], [], []
    seen_ids = set()
    for i, row in enumerate(rows):
        row_id = (
            row[id_pos].strip()
            if id_pos is not None and id_pos < len(row)
            else f"row-{i + 1:04d}"
        )
        if len(row) != len(header):
            report.reject(row_id, "wrong cell count")
            continue
        if id_pos is not None and not row_id:
            report.reject(f"row-{i + 1:04d}", "blank subject id")
            continue
        if row_id in seen_ids:
            report.reject(row_id, "duplicate subject id")
            continue
        try:
            score = float(row[label_pos])
        except ValueError:
            report.reject(row_id, f"unparseable label {row[label_pos]!r}")
            continue
        if not math.isfinite(score):
            report.reject(row_id, "non-finite label")
            continue
        values = np.empty(len(feature_pos))
        bad_reason = None
        for out_j, j in enumerate(feature_pos):
            cell = row[j].strip()
            if not cell:
                bad_reason = f"missing value in column {header[j]!r}"
                break
            try:
                values[out_j] = float(cell)
            except ValueError:
                bad_reason = f"unparseable value in column {header[j]!r}"
                break
            if not math.isfinite(values[out_j]):
                bad_reason = f"non-finite value in column {header[j]!r}"
                break
        if bad_reason is not None:
            report.reject(row_id, bad_reason)
            continue
        seen_ids.add(row_id)
        kept_rows.append(values)
        kept_labels.append(1 if score >= cutoff else 0)
        kept_ids.append(row_id)

    if not kept_rows:
        raise DataError(
            f"all {report.n_rows_read} rows rejected while loading {path}; "
            f"reasons: {report.counts_by_reason()}"
        )
    report.n_loaded = len(kept_rows)
    dataset = Dataset(
        features=np.vstack(kept_rows),
        labels=np.asarray(kept_labels, dtype=np.int64),
        feature_names=feature_names,
        subject_ids=tuple(kept_ids),
    )
    classes = np.unique(dataset.labels)
    if classes.size < 2:
        warnings.warn(
            f"labels contain a single class ({int(classes[0])}) after "
            f"dichotomizing at cutoff {cutoff}; fitting will fail",
            SingleClassWarning,
            stacklevel=2,
        )
    return dataset, report
