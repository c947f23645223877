from pathlib import Path

import pytest
import yaml

from bband_sim.core import AdoptionScenario, Generation, IncomeGroup
from bband_sim.data_io import load_bundle, save_bundle, validate_axes
from bband_sim.errors import InputValidationError


def rewrite(path: Path, old: str, new: str):
    text = path.read_text()
    assert old in text, f"fixture line {old!r} not found"
    path.write_text(text.replace(old, new))


class TestLoadMiniland:
    def test_fixture_is_valid(self, bundle):
        assert sorted(bundle.countries) == ["MLA", "MLB"]
        assert len(bundle.regions["MLA"]) == 12
        assert len(bundle.regions["MLB"]) == 12
        assert bundle.countries["MLA"].market_share == pytest.approx(1 / 3)
        assert bundle.countries["MLB"].income_group == IncomeGroup.UMC

    def test_mix_years_cover_horizon(self, bundle):
        for iso3 in bundle.countries:
            years = sorted(bundle.energy_mix[iso3])
            assert years == list(range(2023, 2031))

    def test_spectrum_portfolios(self, bundle):
        fs4 = bundle.frequency_set("MLA", Generation.G4)
        assert fs4.total_bandwidth_mhz == 30
        fs5 = bundle.frequency_set("MLB", Generation.G5)
        assert fs5.total_bandwidth_mhz == 50


class TestValidationDiagnostics:
    def test_mix_sum_rejected_with_year(self, miniland_copy):
        rewrite(miniland_copy / "energy_mix.csv", "MLA,2026,coal,0.37", "MLA,2026,coal,0.34")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        messages = [str(d) for d in err.value.diagnostics]
        assert any("MLA/2026" in m and "0.97" in m for m in messages)

    def test_unknown_country_reference_names_both_ids(self, miniland_copy):
        rewrite(miniland_copy / "regions.csv", "MLA-R05,MLA", "MLA-R05,XXX")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        messages = [str(d) for d in err.value.diagnostics]
        assert any("MLA-R05" in m and "XXX" in m for m in messages)

    def test_header_must_match_exactly(self, miniland_copy):
        rewrite(miniland_copy / "countries.csv", "country_iso3,income_group", "iso3,income_group")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        assert any("header" in str(d) for d in err.value.diagnostics)

    def test_negative_quantity_rejected(self, miniland_copy):
        rewrite(miniland_copy / "regions.csv", "MLA-R07,MLA,120000", "MLA-R07,MLA,-5")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        assert any("population" in str(d) for d in err.value.diagnostics)

    def test_collects_all_errors_not_fail_fast(self, miniland_copy):
        rewrite(miniland_copy / "regions.csv", "MLA-R07,MLA,120000", "MLA-R07,MLA,-5")
        rewrite(miniland_copy / "energy_mix.csv", "MLB,2027,coal,0.26", "MLB,2027,coal,0.5")
        rewrite(miniland_copy / "spectrum.csv", "MLB,5G,3500,40", "MLB,5G,3500,-40")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        files = {d.file for d in err.value.diagnostics}
        assert {"regions.csv", "energy_mix.csv", "spectrum.csv"} <= files

    def test_missing_file_reported(self, miniland_copy):
        (miniland_copy / "emission_factors.csv").unlink()
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        assert any("missing" in str(d) for d in err.value.diagnostics)

    def test_duplicate_region_id(self, miniland_copy):
        rewrite(miniland_copy / "regions.csv", "MLA-R12,MLA", "MLA-R11,MLA")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        assert any("duplicate" in str(d) for d in err.value.diagnostics)


class TestValidateAxes:
    def test_defaults_when_omitted(self):
        strategy, scenario = validate_axes({})
        assert scenario.capacities_gb_month == (20.0, 30.0, 40.0)
        assert len(strategy.policies) == 5

    def test_unknown_adoption_listed(self):
        with pytest.raises(InputValidationError) as err:
            validate_axes({"axes": {"adoption": ["medium"]}})
        message = " ".join(str(d) for d in err.value.diagnostics)
        assert "medium" in message
        for valid in ("low", "baseline", "high"):
            assert valid in message

    def test_subset_axes(self):
        strategy, scenario = validate_axes({
            "axes": {"generation": ["4G"], "capacity_gb_month": [30]},
            "horizon": {"start_year": 2024, "end_year": 2028},
        })
        assert [g.value for g in strategy.generations] == ["4G"]
        assert scenario.capacities_gb_month == (30.0,)
        assert scenario.start_year == 2024

    def test_lic_baseline_cagr_default(self, bundle):
        assert bundle.adoption.cagr(IncomeGroup.LIC, AdoptionScenario.BASELINE) == 0.04


class TestRoundTrip:
    def test_save_load_identity(self, bundle, tmp_path):
        data_dir = tmp_path / "data"
        config = tmp_path / "config.yaml"
        save_bundle(bundle, data_dir, config)
        reloaded = load_bundle(data_dir, config)
        assert reloaded == bundle

    def test_double_round_trip_stable(self, bundle, tmp_path):
        save_bundle(bundle, tmp_path / "a", tmp_path / "a.yaml")
        b1 = load_bundle(tmp_path / "a", tmp_path / "a.yaml")
        save_bundle(b1, tmp_path / "b", tmp_path / "b.yaml")
        b2 = load_bundle(tmp_path / "b", tmp_path / "b.yaml")
        assert b1 == b2
        for name in ("regions.csv", "countries.csv", "spectrum.csv", "energy_mix.csv", "emission_factors.csv", "se_table.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestConfigGrammar:
    def test_unknown_section_rejected(self, miniland_dir, tmp_path):
        config = tmp_path / "config.yaml"
        config.write_text(yaml.safe_dump({"axes": {}, "misc": {"x": 1}}))
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_dir, config)
        assert any("misc" in str(d) for d in err.value.diagnostics)

    def test_incomplete_cost_section_rejected(self, miniland_copy):
        rewrite(miniland_copy / "config.yaml", "  core_usd: 10000\n", "")
        with pytest.raises(InputValidationError) as err:
            load_bundle(miniland_copy, miniland_copy / "config.yaml")
        assert any("core_usd" in str(d) for d in err.value.diagnostics)

    def test_empty_config_uses_defaults(self, miniland_dir, tmp_path):
        config = tmp_path / "empty.yaml"
        config.write_text("")
        bundle = load_bundle(miniland_dir, config)
        assert bundle.sim_params.trials == 10_000
        assert bundle.cost_inputs.equipment_usd == 40_000.0
