"""Region registry: packaged table integrity, TSV parsing, validation errors."""

import pytest

from nestedeval.errors import ConfigError
from nestedeval.registry import (
    BRAIN_TISSUE_CLASSES,
    LOBES,
    TISSUE_CLASSES,
    VENTRICLE_REGIONS,
    RegionInfo,
    RegionRegistry,
    default_registry,
    hemisphere_of,
    load_registry,
)


class TestDefaultRegistry:
    def test_region_count(self):
        assert len(default_registry()) == 109

    def test_every_ventricle_region_present(self):
        registry = default_registry()
        for name in VENTRICLE_REGIONS:
            assert name in registry
            assert registry.info(name).tissue == "csf"

    def test_pair_structure(self):
        registry = default_registry()
        pairs = registry.pairs()
        assert len(pairs) == 49
        for key, (left, right) in pairs.items():
            assert hemisphere_of(left) == "left"
            assert hemisphere_of(right) == "right"
            assert registry.info(left).pair == key
            assert registry.info(right).pair == key

    def test_cortical_parcellation(self):
        registry = default_registry()
        cortical = registry.cortical_regions
        assert len(cortical) == 68  # 34 parcels per hemisphere
        for name in cortical:
            info = registry.info(name)
            assert info.is_cortical
            assert info.lobe in LOBES
            assert info.tissue == "gray"

    def test_tissue_partitions(self):
        registry = default_registry()
        assert len(registry.deep_gray_regions) == 10
        assert set(registry.deep_gray_regions) < set(registry.gray_regions)
        assert "left cerebral white matter" in registry.white_regions
        # brain tissue excludes csf
        for name in registry.members("csf"):
            assert name not in registry.brain_tissue_regions

    def test_known_anatomy_spot_checks(self):
        registry = default_registry()
        assert registry.info("left hippocampus").pair == "hippocampus"
        assert registry.info("left thalamus").tissue == "deep_gray"
        assert registry.info("ctx-lh-cuneus").lobe == "occipital"
        assert registry.info("brain-stem").pair is None
        assert "not-a-region" not in registry

    def test_info_unknown_region_raises(self):
        with pytest.raises(ConfigError, match="not in the registry"):
            default_registry().info("left unobtainium")

    def test_registry_is_cached(self):
        assert default_registry() is default_registry()


class TestHemisphereOf:
    def test_prefix_rules(self):
        assert hemisphere_of("left thalamus") == "left"
        assert hemisphere_of("right cerebral white matter") == "right"
        assert hemisphere_of("ctx-lh-precentral") == "left"
        assert hemisphere_of("ctx-rh-precentral") == "right"
        assert hemisphere_of("brain-stem") is None
        assert hemisphere_of("3rd ventricle") is None


def registry_text(rows):
    header = "region\tpair\ttissue\tlobe"
    return "\n".join([header] + rows) + "\n"


class TestLoadRegistry:
    def load(self, tmp_path, rows):
        path = tmp_path / "regions.tsv"
        path.write_text(registry_text(rows), encoding="utf-8")
        return load_registry(path)

    def test_small_valid_file(self, tmp_path):
        registry = self.load(
            tmp_path,
            [
                "left amygdala\tamygdala\tgray\t-",
                "right amygdala\tamygdala\tgray\t-",
                "brain-stem\t-\tmixed\t-",
                "ctx-lh-cuneus\tcuneus\tgray\toccipital",
                "ctx-rh-cuneus\tcuneus\tgray\toccipital",
            ],
        )
        assert len(registry) == 5
        assert registry.pairs()["amygdala"] == ("left amygdala", "right amygdala")
        assert registry.info("brain-stem").lobe is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_registry(tmp_path / "absent.tsv")

    def test_bad_header(self, tmp_path):
        path = tmp_path / "r.tsv"
        path.write_text("name\tpair\ttissue\tlobe\nx\t-\tgray\t-\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="must have header"):
            load_registry(path)

    def test_wrong_cell_count_names_line(self, tmp_path):
        path = tmp_path / "r.tsv"
        path.write_text(registry_text(["brain-stem\t-\tmixed"]), encoding="utf-8")
        with pytest.raises(ConfigError, match="line 2"):
            load_registry(path)

    def test_duplicate_region(self, tmp_path):
        with pytest.raises(ConfigError, match="twice"):
            self.load(tmp_path, ["brain-stem\t-\tmixed\t-", "brain-stem\t-\tmixed\t-"])

    def test_unknown_tissue_class(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown tissue class"):
            self.load(tmp_path, ["brain-stem\t-\tjelly\t-"])

    def test_unknown_lobe(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown lobe"):
            self.load(tmp_path, ["ctx-lh-cuneus\t-\tgray\tlimbic"])

    def test_cortical_region_requires_lobe(self, tmp_path):
        with pytest.raises(ConfigError, match="must map to a lobe"):
            self.load(tmp_path, ["ctx-lh-cuneus\t-\tgray\t-"])

    def test_pair_with_one_member(self, tmp_path):
        with pytest.raises(ConfigError, match="1 member"):
            self.load(tmp_path, ["left amygdala\tamygdala\tgray\t-"])

    def test_pair_needs_left_and_right(self, tmp_path):
        rows = [
            "left amygdala\tamygdala\tgray\t-",
            "3rd ventricle\tamygdala\tcsf\t-",
        ]
        with pytest.raises(ConfigError, match="one left and one right"):
            self.load(tmp_path, rows)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "r.tsv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ConfigError, match="empty"):
            load_registry(path)


class TestConstants:
    def test_class_lists(self):
        assert set(BRAIN_TISSUE_CLASSES) < set(TISSUE_CLASSES)
        assert "csf" not in BRAIN_TISSUE_CLASSES
        assert len(VENTRICLE_REGIONS) == 6

    def test_region_info_properties(self):
        info = RegionInfo(name="ctx-lh-insula", pair="insula", tissue="gray", lobe="insula")
        assert info.is_cortical
        assert info.hemisphere == "left"
        plain = RegionInfo(name="csf", pair=None, tissue="csf", lobe=None)
        assert not plain.is_cortical
        assert plain.hemisphere is None

    def test_direct_construction_validates(self):
        with pytest.raises(ConfigError):
            RegionRegistry([RegionInfo("x", None, "jelly", None)])
