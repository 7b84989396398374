"""Morphometric feature engineering over a regional-volume table.

Transforms raw volumes into interpretable composites: TIV fractions,
ventricle-brain and gray/white ratios, a deep-gray composite, bilateral
asymmetry indices, lobar aggregates, and low-order age interactions. No
global standardization is applied anywhere; magnitudes stay biologically
meaningful.

Column-naming contract (bit-exact): fractions get the suffix "_fracs",
asymmetries "_asym", lobar aggregates "_lobe", interactions join their two
parents with "__x__".
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataError
from .registry import (
    BRAIN_TISSUE_CLASSES,
    LOBES,
    VENTRICLE_REGIONS,
    RegionRegistry,
    default_registry,
)
from .seeding import child_seed

STEP_NAMES = (
    "fractions",
    "vbr",
    "gw_ratio",
    "deep_gray",
    "asymmetry",
    "lobar",
    "interactions",
)

LATERAL_VENTRICLES = ("left lateral ventricle", "right lateral ventricle")


@dataclass(frozen=True)
class RegionalVolumeTable:
    """Per-subject regional volumes (mm^3) with TIV and optional age.

    ``unpaired_regions`` lists regions that the registry cannot pair
    bilaterally (unknown to the registry, or present without their partner);
    they stay in the table but are reported rather than silently dropped.
    """

    subject_ids: tuple[str, ...]
    region_names: tuple[str, ...]
    volumes: np.ndarray
    tiv: np.ndarray
    age: np.ndarray | None
    registry: RegionRegistry
    labels: np.ndarray | None = None
    unpaired_regions: tuple[str, ...] = ()

    def __post_init__(self):
        volumes = np.ascontiguousarray(self.volumes, dtype=np.float64)
        tiv = np.ascontiguousarray(self.tiv, dtype=np.float64)
        object.__setattr__(self, "volumes", volumes)
        object.__setattr__(self, "tiv", tiv)
        object.__setattr__(self, "region_names", tuple(self.region_names))
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        if self.age is not None:
            object.__setattr__(
                self, "age", np.ascontiguousarray(self.age, dtype=np.float64)
            )
        if self.labels is not None:
            object.__setattr__(
                self, "labels", np.ascontiguousarray(self.labels, dtype=np.int64)
            )
        n, r = volumes.shape
        if len(self.subject_ids) != n or len(self.region_names) != r:
            raise DataError("volume table shape does not match ids/region names")
        if len(set(self.region_names)) != r:
            raise DataError("duplicate region names in volume table")
        if (volumes < 0).any() or not np.isfinite(volumes).all():
            raise DataError("volumes must be finite and nonnegative")
        if (tiv <= 0).any() or not np.isfinite(tiv).all():
            raise DataError("tiv must be finite and positive")
        object.__setattr__(self, "unpaired_regions", self._find_unpaired())

    def _find_unpaired(self) -> tuple[str, ...]:
        present = set(self.region_names)
        partner_of = {}
        for left, right in self.registry.pairs().values():
            partner_of[left] = right
            partner_of[right] = left
        unpaired = []
        for name in self.region_names:
            if name not in self.registry:
                unpaired.append(name)
            elif name in partner_of and partner_of[name] not in present:
                unpaired.append(name)
        return tuple(unpaired)

    @property
    def n_subjects(self) -> int:
        return self.volumes.shape[0]

    def has_region(self, name: str) -> bool:
        return name in self._region_index()

    def region(self, name: str) -> np.ndarray:
        idx = self._region_index().get(name)
        if idx is None:
            raise ConfigError(f"region {name!r} is not present in the volume table")
        return self.volumes[:, idx]

    def _region_index(self) -> dict[str, int]:
        return {name: j for j, name in enumerate(self.region_names)}

    def sum_regions(self, names) -> np.ndarray:
        out = np.zeros(self.n_subjects)
        for name in names:
            out = out + self.region(name)
        return out

    @classmethod
    def build(
        cls,
        subject_ids,
        region_names,
        volumes,
        tiv,
        age=None,
        labels=None,
        registry: RegionRegistry | None = None,
    ):
        """Construct a table, rejecting subjects with unusable rows.

        Returns (table, rejections) where rejections is a list of
        (subject_id, reason). Rejected subjects are removed from every field.
        """
        registry = registry or default_registry()
        volumes = np.asarray(volumes, dtype=np.float64)
        tiv = np.asarray(tiv, dtype=np.float64)
        subject_ids = list(subject_ids)
        rejections: list[tuple[str, str]] = []
        keep = []
        for i, sid in enumerate(subject_ids):
            row = volumes[i]
            if not np.isfinite(row).all():
                rejections.append((sid, "non-finite volume"))
            elif (row < 0).any():
                rejections.append((sid, "negative volume"))
            elif not np.isfinite(tiv[i]) or tiv[i] <= 0:
                rejections.append((sid, "non-positive tiv"))
            else:
                keep.append(i)
        if not keep:
            raise DataError("all subjects rejected while building the volume table")
        keep = np.asarray(keep, dtype=np.intp)
        return (
            cls(
                subject_ids=tuple(subject_ids[i] for i in keep),
                region_names=tuple(region_names),
                volumes=volumes[keep],
                tiv=tiv[keep],
                age=None if age is None else np.asarray(age, dtype=np.float64)[keep],
                labels=None
                if labels is None
                else np.asarray(labels, dtype=np.int64)[keep],
                registry=registry,
            ),
            rejections,
        )

    @classmethod
    def from_dataset(
        cls,
        dataset: Dataset,
        tiv_column: str,
        age_column: str | None = None,
        registry: RegionRegistry | None = None,
    ):
        """Split a raw Dataset's columns into (regions, tiv, age) and build."""
        names = list(dataset.feature_names)
        for column in (tiv_column, age_column):
            if column is not None and column not in names:
                raise ConfigError(f"column {column!r} not found in dataset features")
        special = {tiv_column, age_column}
        region_names = [n for n in names if n not in special]
        col = {n: j for j, n in enumerate(names)}
        region_idx = [col[n] for n in region_names]
        return cls.build(
            subject_ids=dataset.subject_ids,
            region_names=region_names,
            volumes=dataset.features[:, region_idx],
            tiv=dataset.features[:, col[tiv_column]],
            age=None if age_column is None else dataset.features[:, col[age_column]],
            labels=dataset.labels,
            registry=registry,
        )


@dataclass(frozen=True)
class FeatureRecipe:
    """Which engineering steps to run, in which order, plus raw retention."""

    steps: tuple[str, ...] = STEP_NAMES
    include_raw: bool = True
    registry: RegionRegistry | None = None

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        unknown = [s for s in steps if s not in STEP_NAMES]
        if unknown:
            raise ConfigError(
                f"unknown feature step(s) {unknown}; expected a subset of {STEP_NAMES}"
            )
        if len(set(steps)) != len(steps):
            raise ConfigError("feature steps must not repeat")

    def to_dict(self) -> dict:
        return {"steps": list(self.steps), "include_raw": self.include_raw}


def tiv_fractions(table: RegionalVolumeTable) -> dict[str, np.ndarray]:
    """One dimensionless column per region: volume / TIV, named "<region>_fracs"."""
    return {
        f"{name}_fracs": table.region(name) / table.tiv
        for name in table.region_names
    }


def _require_regions(table: RegionalVolumeTable, names, what: str):
    missing = [n for n in names if not table.has_region(n)]
    if missing:
        raise ConfigError(f"{what} requires region(s) {missing} absent from the table")


def ventricle_brain_ratio(table: RegionalVolumeTable) -> dict[str, np.ndarray]:
    """Ventricular volume over brain-tissue volume (ventricles excluded)."""
    registry = table.registry
    _require_regions(table, VENTRICLE_REGIONS, "ventricle_brain_ratio")
    ventricles = table.sum_regions(VENTRICLE_REGIONS)
    tissue_names = [
        n for n in table.region_names
        if n in registry and registry.info(n).tissue in BRAIN_TISSUE_CLASSES
    ]
    brain = table.sum_regions(tissue_names)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(brain > 0, ventricles / brain, np.nan)
    return {"ventricle_brain_ratio": ratio}


def gray_white_ratio(table: RegionalVolumeTable) -> dict[str, np.ndarray]:
    """Total gray (cortical + deep) volume over total white volume.

    Subjects with zero white total get NaN here and are rejected with a
    reason by build_feature_matrix.
    """
    registry = table.registry
    gray_names = [n for n in table.region_names if n in registry.gray_regions]
    white_names = [n for n in table.region_names if n in registry.white_regions]
    gray = table.sum_regions(gray_names)
    white = table.sum_regions(white_names)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(white > 0, gray / white, np.nan)
    return {"gray_white_ratio": ratio}


def deep_gray_composite(table: RegionalVolumeTable) -> dict[str, np.ndarray]:
    """Sum of the registry's deep-gray members (bilateral)."""
    members = table.registry.deep_gray_regions
    if not members:
        raise ConfigError("registry declares no deep_gray regions")
    _require_regions(table, members, "deep_gray_composite")
    return {"deep_gray": table.sum_regions(members)}


def asymmetry_indices(table: RegionalVolumeTable) -> dict[str, np.ndarray]:
    """(L - R)/(L + R) per registry pair present, named "<pair>_asym".

    The index is 0 where L + R = 0. A pair with exactly one side in the table
    is a configuration error; pairs entirely absent are skipped.
    """
    columns: dict[str, np.ndarray] = {}
    for key, (left_name, right_name) in table.registry.pairs().items():
        have_left = table.has_region(left_name)
        have_right = table.has_region(right_name)
        if not have_left and not have_right:
            continue
        if have_left != have_right:
            present, absent = (
                (left_name, right_name) if have_left else (right_name, left_name)
            )
            raise ConfigError(
                f"asymmetry pair {key!r} has {present!r} but is missing {absent!r}"
            )
        left = table.region(left_name)
        right = table.region(right_name)
        total = left + right
        with np.errstate(divide="ignore", invalid="ignore"):
            asym = np.where(total > 0, (left - right) / total, 0.0)
        columns[f"{key}_asym"] = asym
    return columns


def lobar_aggregates(table: RegionalVolumeTable) -> dict[str, np.ndarray]:
    """Per-hemisphere lobe sums over cortical parcels, named "<hemi>-<lobe>_lobe"."""
    registry = table.registry
    cortical_present = [n for n in table.region_names if n.startswith("ctx-")]
    unmapped = [
        n
        for n in cortical_present
        if n not in registry or registry.info(n).lobe is None
    ]
    if unmapped:
        raise ConfigError(f"cortical label(s) with no lobe mapping: {unmapped}")
    columns: dict[str, np.ndarray] = {}
    for hemi in ("left", "right"):
        for lobe in LOBES:
            members = [
                n
                for n in cortical_present
                if registry.info(n).hemisphere == hemi
                and registry.info(n).lobe == lobe
            ]
            if members:
                columns[f"{hemi}-{lobe}_lobe"] = table.sum_regions(members)
    return columns


def interaction_terms(
    table: RegionalVolumeTable, engineered: dict[str, np.ndarray] | None = None
) -> dict[str, np.ndarray]:
    """Default low-order products: age x VBR and age x lateral-ventricle fraction.

    Skipped with a warning when the table has no age. Column names join the
    parents with "__x__".
    """
    if table.age is None:
        warnings.warn(
            "interactions step skipped: the volume table has no age",
            UserWarning,
            stacklevel=2,
        )
        return {}
    engineered = engineered or {}
    if "ventricle_brain_ratio" in engineered:
        vbr = engineered["ventricle_brain_ratio"]
    else:
        vbr = ventricle_brain_ratio(table)["ventricle_brain_ratio"]
    _require_regions(table, LATERAL_VENTRICLES, "interaction_terms")
    lat_vent_frac = table.sum_regions(LATERAL_VENTRICLES) / table.tiv
    return {
        "age__x__ventricle_brain_ratio": table.age * vbr,
        "age__x__lateral_ventricles_fracs": table.age * lat_vent_frac,
    }


_STEP_FUNCTIONS = {
    "fractions": tiv_fractions,
    "vbr": ventricle_brain_ratio,
    "gw_ratio": gray_white_ratio,
    "deep_gray": deep_gray_composite,
    "asymmetry": asymmetry_indices,
    "lobar": lobar_aggregates,
}


def build_feature_matrix(table: RegionalVolumeTable, recipe: FeatureRecipe):
    """Assemble the engineered Dataset, with NaN-producing subjects rejected.

    Columns are the raw volumes (when include_raw) followed by each enabled
    step's outputs in recipe order; provenance tags each engineered column
    with its step. Returns (dataset, rejections).
    """
    if table.labels is None:
        raise DataError("volume table carries no labels; cannot build a dataset")
    work_table = (
        table
        if recipe.registry is None
        else RegionalVolumeTable(
            subject_ids=table.subject_ids,
            region_names=table.region_names,
            volumes=table.volumes,
            tiv=table.tiv,
            age=table.age,
            registry=recipe.registry,
            labels=table.labels,
        )
    )

    names: list[str] = []
    provenance: list[str] = []
    columns: list[np.ndarray] = []

    def add(name: str, values: np.ndarray, tag: str):
        if name in seen:
            raise ConfigError(f"duplicate output column name {name!r}")
        seen.add(name)
        names.append(name)
        provenance.append(tag)
        columns.append(np.asarray(values, dtype=np.float64))

    seen: set[str] = set()
    if recipe.include_raw:
        for j, name in enumerate(work_table.region_names):
            add(name, work_table.volumes[:, j], "raw")

    engineered_so_far: dict[str, np.ndarray] = {}
    for step in recipe.steps:
        if step == "interactions":
            produced = interaction_terms(work_table, engineered_so_far)
        else:
            produced = _STEP_FUNCTIONS[step](work_table)
        for name, values in produced.items():
            add(name, values, f"engineered:{step}")
            engineered_so_far[name] = values
        if step == "deep_gray" and "fractions" in recipe.steps:
            frac = produced["deep_gray"] / work_table.tiv
            add("deep_gray_fracs", frac, "engineered:deep_gray")
            engineered_so_far["deep_gray_fracs"] = frac

    if not names:
        raise ConfigError("feature recipe produced no columns (empty output)")

    matrix = np.column_stack(columns)
    finite_rows = np.isfinite(matrix).all(axis=1)
    rejections: list[tuple[str, str]] = []
    if not finite_rows.all():
        for i in np.flatnonzero(~finite_rows):
            bad = names[int(np.flatnonzero(~np.isfinite(matrix[i]))[0])]
            rejections.append(
                (work_table.subject_ids[i], f"non-finite value in column {bad!r}")
            )
        matrix = matrix[finite_rows]
    if matrix.shape[0] == 0:
        raise DataError("every subject was rejected during feature engineering")

    keep = np.flatnonzero(finite_rows)
    dataset = Dataset(
        features=matrix,
        labels=work_table.labels[keep],
        feature_names=tuple(names),
        subject_ids=tuple(work_table.subject_ids[i] for i in keep),
        column_provenance=tuple(provenance),
    )
    return dataset, rejections


# plausible mean volumes (mm^3) for the synthetic generator
_BASE_MEANS = {
    "cerebral white matter": 220000.0,
    "cerebellum white matter": 14000.0,
    "cerebellum cortex": 52000.0,
    "thalamus": 7500.0,
    "caudate": 3700.0,
    "putamen": 4900.0,
    "pallidum": 1800.0,
    "hippocampus": 4100.0,
    "amygdala": 1700.0,
    "accumbens area": 620.0,
    "ventral DC": 4000.0,
    "lateral ventricle": 11000.0,
    "inferior lateral ventricle": 450.0,
    "choroid plexus": 800.0,
    "vessel": 60.0,
    "3rd ventricle": 1000.0,
    "4th ventricle": 1600.0,
    "brain-stem": 21000.0,
    "csf": 1400.0,
    "optic chiasm": 180.0,
    "wm hypointensities": 1800.0,
    "cc posterior": 950.0,
    "cc mid posterior": 500.0,
    "cc central": 520.0,
    "cc mid anterior": 540.0,
    "cc anterior": 980.0,
}
_REFERENCE_TIV = 1.45e6


def _plausible_mean(region: str) -> float:
    base = region
    for prefix in ("left ", "right "):
        if base.startswith(prefix):
            base = base[len(prefix):]
    if base in _BASE_MEANS:
        return _BASE_MEANS[base]
    if region.startswith("ctx-"):
        # deterministic per-parcel size factor in [0.55, 1.45]
        label = region.split("-", 2)[2]
        factor = 0.55 + 0.9 * (child_seed(0, "parcel", label) % 1000) / 999.0
        return 6500.0 * factor
    return 1000.0


def make_synthetic_volumes(
    n: int,
    seed: int,
    positive_fraction: float = 0.5,
    atrophy_effect: float = 1.0,
    registry: RegionRegistry | None = None,
) -> RegionalVolumeTable:
    """Plausible-volume synthetic cohort with label-linked atrophy.

    Elevated-risk subjects get enlarged ventricles and mildly reduced
    gray-matter volumes, scaled by ``atrophy_effect`` (0 disables the signal).
    """
    if n <= 0:
        raise DataError("n must be positive")
    if not 0.0 < positive_fraction < 1.0:
        raise DataError("positive_fraction must lie in (0, 1)")
    registry = registry or default_registry()
    rng = np.random.default_rng(seed)

    n_pos = int(round(n * positive_fraction))
    labels = np.zeros(n, dtype=np.int64)
    labels[:n_pos] = 1
    rng.shuffle(labels)

    tiv = np.clip(rng.normal(_REFERENCE_TIV, 1.1e5, size=n), 1.1e6, None)
    regions = registry.regions
    volumes = np.empty((n, len(regions)))
    scale = tiv / _REFERENCE_TIV
    for j, region in enumerate(regions):
        base = _plausible_mean(region)
        jitter = np.exp(rng.normal(0.0, 0.08, size=n))
        vols = base * scale * jitter
        info = registry.info(region)
        if info.tissue == "csf":
            vols = vols * (1.0 + 0.25 * atrophy_effect * labels)
        elif info.tissue in ("gray", "deep_gray"):
            vols = vols * (1.0 - 0.04 * atrophy_effect * labels)
        volumes[:, j] = vols

    age = np.clip(rng.normal(71.0, 7.0, size=n) + 3.0 * labels, 55.0, 92.0)
    table, rejections = RegionalVolumeTable.build(
        subject_ids=[f"vsynth-{i:04d}" for i in range(n)],
        region_names=regions,
        volumes=volumes,
        tiv=tiv,
        age=age,
        labels=labels,
        registry=registry,
    )
    assert not rejections  # generator output is clean by construction
    return table
