"""Region registry: laterality pairs, tissue classes, and the lobe mapping.

The registry is a plain TSV table with columns (region, pair, tissue, lobe);
"-" marks an empty pair or lobe. Tissue classes drive the composite features:
gray/white ratio counts gray + deep_gray against white, the deep-gray
composite sums the deep_gray class, the ventricle-brain ratio divides the
named ventricular regions by all brain-tissue classes (gray, deep_gray,
white, mixed). Subcortical names follow the "left <structure>" convention and
cortical parcels the "ctx-lh-/ctx-rh-<label>" convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError

TISSUE_CLASSES = ("gray", "deep_gray", "white", "csf", "mixed", "other")
BRAIN_TISSUE_CLASSES = ("gray", "deep_gray", "white", "mixed")
LOBES = ("frontal", "parietal", "temporal", "occipital", "cingulate", "insula")

VENTRICLE_REGIONS = (
    "left lateral ventricle",
    "right lateral ventricle",
    "left inferior lateral ventricle",
    "right inferior lateral ventricle",
    "3rd ventricle",
    "4th ventricle",
)

_COLUMNS = ("region", "pair", "tissue", "lobe")


def hemisphere_of(region: str) -> str | None:
    if region.startswith("left ") or region.startswith("ctx-lh-"):
        return "left"
    if region.startswith("right ") or region.startswith("ctx-rh-"):
        return "right"
    return None


@dataclass(frozen=True)
class RegionInfo:
    name: str
    pair: str | None
    tissue: str
    lobe: str | None

    @property
    def hemisphere(self) -> str | None:
        return hemisphere_of(self.name)

    @property
    def is_cortical(self) -> bool:
        return self.name.startswith("ctx-")


class RegionRegistry:
    """Validated collection of RegionInfo rows in file order."""

    def __init__(self, entries: list[RegionInfo]):
        self._by_name: dict[str, RegionInfo] = {}
        for entry in entries:
            if entry.name in self._by_name:
                raise ConfigError(f"registry lists region {entry.name!r} twice")
            if entry.tissue not in TISSUE_CLASSES:
                raise ConfigError(
                    f"registry region {entry.name!r} has unknown tissue class "
                    f"{entry.tissue!r} (expected one of {TISSUE_CLASSES})"
                )
            if entry.lobe is not None and entry.lobe not in LOBES:
                raise ConfigError(
                    f"registry region {entry.name!r} has unknown lobe {entry.lobe!r}"
                )
            if entry.is_cortical and entry.lobe is None:
                raise ConfigError(
                    f"cortical region {entry.name!r} must map to a lobe"
                )
            self._by_name[entry.name] = entry
        self._validate_pairs()

    def _validate_pairs(self):
        groups: dict[str, list[RegionInfo]] = {}
        for entry in self._by_name.values():
            if entry.pair is not None:
                groups.setdefault(entry.pair, []).append(entry)
        self._pairs: dict[str, tuple[str, str]] = {}
        for key, members in groups.items():
            if len(members) != 2:
                raise ConfigError(
                    f"registry pair {key!r} has {len(members)} member(s); expected 2"
                )
            sides = {m.hemisphere: m.name for m in members}
            if set(sides) != {"left", "right"}:
                raise ConfigError(
                    f"registry pair {key!r} must have one left and one right member, "
                    f"got {[m.name for m in members]}"
                )
            self._pairs[key] = (sides["left"], sides["right"])

    def __contains__(self, region: str) -> bool:
        return region in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(self._by_name)

    def info(self, region: str) -> RegionInfo:
        if region not in self._by_name:
            raise ConfigError(f"region {region!r} is not in the registry")
        return self._by_name[region]

    def pairs(self) -> dict[str, tuple[str, str]]:
        """pair key -> (left region, right region), in file order."""
        return dict(self._pairs)

    def members(self, *tissue_classes: str) -> tuple[str, ...]:
        return tuple(
            e.name for e in self._by_name.values() if e.tissue in tissue_classes
        )

    @property
    def gray_regions(self) -> tuple[str, ...]:
        return self.members("gray", "deep_gray")

    @property
    def white_regions(self) -> tuple[str, ...]:
        return self.members("white")

    @property
    def brain_tissue_regions(self) -> tuple[str, ...]:
        return self.members(*BRAIN_TISSUE_CLASSES)

    @property
    def deep_gray_regions(self) -> tuple[str, ...]:
        return self.members("deep_gray")

    @property
    def cortical_regions(self) -> tuple[str, ...]:
        return tuple(e.name for e in self._by_name.values() if e.is_cortical)


def _parse_rows(rows: list[list[str]], source: str) -> RegionRegistry:
    if not rows:
        raise ConfigError(f"registry {source} is empty")
    header = [c.strip() for c in rows[0]]
    if header != list(_COLUMNS):
        raise ConfigError(
            f"registry {source} must have header {list(_COLUMNS)}, got {header}"
        )
    entries = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) == 1 and not row[0].strip():
            continue
        if len(row) != len(_COLUMNS):
            raise ConfigError(
                f"registry {source} line {lineno}: expected {len(_COLUMNS)} "
                f"tab-separated cells, got {len(row)}"
            )
        region, pair, tissue, lobe = (c.strip() for c in row)
        entries.append(
            RegionInfo(
                name=region,
                pair=None if pair in ("", "-") else pair,
                tissue=tissue,
                lobe=None if lobe in ("", "-") else lobe,
            )
        )
    return RegionRegistry(entries)


def load_registry(path) -> RegionRegistry:
    """Load a registry TSV (columns: region, pair, tissue, lobe)."""
    try:
        with open(path, encoding="utf-8") as handle:
            rows = [line.rstrip("\n").split("\t") for line in handle]
    except FileNotFoundError:
        raise ConfigError(f"registry file not found: {path}") from None
    return _parse_rows(rows, str(path))


_DEFAULT: RegionRegistry | None = None


def default_registry() -> RegionRegistry:
    """The packaged 109-region SynthSeg/Desikan-style registry."""
    global _DEFAULT
    if _DEFAULT is None:
        text = (
            resources.files("nestedeval.resources")
            .joinpath("default_registry.tsv")
            .read_text(encoding="utf-8")
        )
        rows = [line.split("\t") for line in text.splitlines()]
        _DEFAULT = _parse_rows(rows, "default_registry.tsv")
    return _DEFAULT
