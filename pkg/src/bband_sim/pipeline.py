"""End-to-end orchestration: demand -> capacity -> sites -> cost -> energy.

Capacity tables are built once per (country, generation) and cached on disk
keyed by a content hash of everything that determines them, because table
construction dominates runtime. The run matrix then executes against the
cached tables with a bounded worker pool; results are sorted by run key
before emission so output never depends on scheduling.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    DecileRecord,
    Generation,
    ScenarioSpec,
    Settlement,
    StrategyBundle,
    build_deciles,
    enumerate_runs,
)
from .cost import (
    DecileCost,
    apply_sharing,
    cross_subsidize,
    decile_components,
    private_cost,
)
from .data_io import InputBundle
from .demand import (
    DemandResult,
    arpu_for_settlement,
    area_demand,
    decile_revenue_pv,
    penetration_series,
    per_user_busy_hour_rate,
)
from .dimensioning import SiteRequirement, required_sites
from .energy import (
    Emissions,
    GridSplit,
    YearEnergy,
    annual_energy,
    apply_renewables_strategy,
    build_schedule,
    cumulate_horizon,
    emissions,
    sharing_energy_divisor,
    split_energy,
)
from .errors import BbandSimError, ValidationError
from .radio import (
    CapacityTable,
    build_capacity_table,
    load_capacity_tables,
    save_capacity_tables,
    table_cache_key,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunResult:
    """One (country, decile, strategy, scenario) outcome row."""

    country_iso3: str
    decile_index: int
    settlement: Settlement
    population: int
    area_km2: float
    strategy: StrategyBundle
    scenario: ScenarioSpec
    demand: DemandResult
    sites: SiteRequirement
    cost: DecileCost
    energy_kwh: float
    on_grid_kwh: float
    off_grid_kwh: float
    emissions: Emissions

    def sort_key(self):
        s, sc = self.strategy, self.scenario
        return (
            self.country_iso3,
            self.decile_index,
            s.generation.value,
            s.backhaul.value,
            s.sharing.value,
            s.policy.value,
            s.energy_strategy.value,
            sc.capacity_gb_month,
            sc.adoption.value,
        )


@dataclass(frozen=True)
class RunFailure:
    strategy: StrategyBundle
    scenario: ScenarioSpec
    error: str


@dataclass(frozen=True)
class PipelineOutput:
    results: list[RunResult]
    failures: list[RunFailure]


def country_deciles(bundle: InputBundle) -> dict[str, list[DecileRecord]]:
    """Density deciles for every country in the bundle."""
    return {
        iso3: build_deciles(list(bundle.regions[iso3]), iso3, bundle.settlement_thresholds)
        for iso3 in sorted(bundle.regions)
    }


def capacity_tables(
    bundle: InputBundle,
    cache_dir: Path | str | None = None,
    jobs: int = 1,
    generations: Sequence[Generation] | None = None,
) -> dict[tuple[str, Generation], CapacityTable]:
    """Build (or load from cache) one capacity table per country and generation."""
    if generations is None:
        generations = bundle.strategy_space.generations
    tables: dict[tuple[str, Generation], CapacityTable] = {}
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
    for iso3 in sorted(bundle.countries):
        for gen in generations:
            freq_set = bundle.frequency_set(iso3, gen)
            key = table_cache_key(bundle.sim_params, bundle.se_table, freq_set, bundle.density_grid)
            cache_file = cache / f"{key}.csv" if cache is not None else None
            if cache_file is not None and cache_file.is_file():
                table = load_capacity_tables(cache_file)[0]
                logger.debug("capacity table cache hit: %s %s", iso3, gen.value)
            else:
                logger.info("building capacity table for %s %s (%s)", iso3, gen.value, freq_set.label)
                table = build_capacity_table(
                    bundle.sim_params, bundle.se_table, freq_set, bundle.density_grid, jobs=jobs
                )
                if cache_file is not None:
                    save_capacity_tables([table], cache_file)
            tables[(iso3, gen)] = table
    return tables


def _decile_demand(
    bundle: InputBundle,
    decile: DecileRecord,
    scenario: ScenarioSpec,
) -> DemandResult:
    country = bundle.countries[decile.country_iso3]
    cagr = bundle.adoption.cagr(country.income_group, scenario.adoption)
    cap = bundle.adoption.penetration_cap
    pen = penetration_series(bundle.adoption.base_cell_penetration, cagr, scenario.n_years, cap)
    sp = penetration_series(bundle.adoption.smartphone_base(decile.settlement), cagr, scenario.n_years, cap)
    rate = per_user_busy_hour_rate(scenario.capacity_gb_month)
    demand = area_demand(decile, pen, sp, rate, country.market_share)
    revenue = decile_revenue_pv(
        decile, pen, sp,
        arpu_for_settlement(country, decile.settlement),
        country.market_share,
        scenario.discount_rate,
    )
    users = max(decile.population * p * s for p, s in zip(pen, sp)) if decile.population else 0.0
    return DemandResult(
        smartphone_users=users,
        busy_hour_rate_mbps=rate,
        area_demand_mbps_km2=demand,
        revenue_pv_usd=revenue,
    )


def _decile_energy(
    bundle: InputBundle,
    decile: DecileRecord,
    sites: SiteRequirement,
    strategy: StrategyBundle,
    scenario: ScenarioSpec,
) -> tuple[float, float, float, Emissions]:
    country = bundle.countries[decile.country_iso3]
    divisor = sharing_energy_divisor(strategy.sharing, decile.settlement, country.n_major_operators)
    grid = apply_renewables_strategy(GridSplit(country.on_grid_share), strategy.energy_strategy)
    builds = build_schedule(sites.new_sites, scenario.n_years)

    per_year: list[YearEnergy] = []
    cumulative_new = 0
    for offset, year in enumerate(scenario.years()):
        cumulative_new += builds[offset]
        energy = annual_energy(decile.existing_sites, cumulative_new, bundle.energy_params, strategy.backhaul)
        energy /= divisor
        on, off = split_energy(energy, grid)
        mix_row = bundle.energy_mix[decile.country_iso3].get(year)
        if mix_row is None:
            raise ValidationError(f"{decile.country_iso3}: no energy mix for year {year}")
        species = emissions(on, off, mix_row, bundle.emission_factors, grid)
        per_year.append(YearEnergy(year, energy, on, off, species))
    totals = cumulate_horizon(per_year)
    return totals.energy_kwh, totals.on_grid_kwh, totals.off_grid_kwh, totals.emissions


def _run_one(
    bundle: InputBundle,
    deciles: dict[str, list[DecileRecord]],
    tables: dict[tuple[str, Generation], CapacityTable],
    strategy: StrategyBundle,
    scenario: ScenarioSpec,
    demand_cache: dict | None = None,
) -> list[RunResult]:
    results: list[RunResult] = []
    for iso3 in sorted(deciles):
        country = bundle.countries[iso3]
        table = tables[(iso3, strategy.generation)]
        mhz_held = bundle.frequency_set(iso3, strategy.generation).total_bandwidth_mhz

        costs: list[DecileCost] = []
        rows: list[tuple[DecileRecord, DemandResult, SiteRequirement]] = []
        for decile in deciles[iso3]:
            cache_key = (iso3, decile.decile_index, strategy.generation,
                         scenario.capacity_gb_month, scenario.adoption)
            if demand_cache is not None and cache_key in demand_cache:
                demand, sites = demand_cache[cache_key]
            else:
                demand = _decile_demand(bundle, decile, scenario)
                sites = required_sites(decile, demand.area_demand_mbps_km2, table)
                if demand_cache is not None:
                    demand_cache[cache_key] = (demand, sites)

            components = decile_components(sites.new_sites, sites.upgraded_sites, strategy.backhaul, bundle.cost_inputs)
            shared = apply_sharing(components, strategy.sharing, country.n_major_operators, decile.settlement)
            costs.append(
                private_cost(
                    shared.total,
                    bundle.cost_inputs,
                    strategy.policy,
                    demand.revenue_pv_usd,
                    spectrum_mhz=mhz_held,
                    population=decile.population,
                    country_iso3=iso3,
                    decile_index=decile.decile_index,
                )
            )
            rows.append((decile, demand, sites))

        costs = cross_subsidize(costs)
        for (decile, demand, sites), cost in zip(rows, costs):
            energy_kwh, on_kwh, off_kwh, species = _decile_energy(bundle, decile, sites, strategy, scenario)
            results.append(
                RunResult(
                    country_iso3=iso3,
                    decile_index=decile.decile_index,
                    settlement=decile.settlement,
                    population=decile.population,
                    area_km2=decile.area_km2,
                    strategy=strategy,
                    scenario=scenario,
                    demand=demand,
                    sites=sites,
                    cost=cost,
                    energy_kwh=energy_kwh,
                    on_grid_kwh=on_kwh,
                    off_grid_kwh=off_kwh,
                    emissions=species,
                )
            )
    return results


def run_pipeline(
    bundle: InputBundle,
    runs: Sequence[tuple[StrategyBundle, ScenarioSpec]] | None = None,
    jobs: int = 1,
    cache_dir: Path | str | None = None,
) -> PipelineOutput:
    """Execute the run matrix and return per-decile results.

    ``runs`` defaults to the full enumeration of the bundle's axes. A
    failing run is recorded with its run key and does not abort the rest.
    Output order is deterministic for a given bundle and seed.
    """
    if runs is None:
        runs = enumerate_runs(bundle.strategy_space, bundle.scenario_space)
    deciles = country_deciles(bundle)
    needed = sorted({strategy.generation for strategy, _ in runs}, key=lambda g: g.value)
    tables = capacity_tables(bundle, cache_dir=cache_dir, jobs=jobs, generations=needed)

    # Demand and dimensioning depend only on (decile, generation, scenario),
    # so they are shared across the sharing/policy/backhaul/energy axes.
    demand_cache: dict = {}
    results: list[RunResult] = []
    failures: list[RunFailure] = []

    def execute(run):
        strategy, scenario = run
        return _run_one(bundle, deciles, tables, strategy, scenario, demand_cache)

    if jobs > 1:
        # Demand cache stays single-threaded to keep the fill deterministic.
        for strategy, scenario in runs:
            for iso3 in sorted(deciles):
                for decile in deciles[iso3]:
                    key = (iso3, decile.decile_index, strategy.generation,
                           scenario.capacity_gb_month, scenario.adoption)
                    if key not in demand_cache:
                        demand = _decile_demand(bundle, decile, scenario)
                        sites = required_sites(
                            decile, demand.area_demand_mbps_km2, tables[(iso3, strategy.generation)]
                        )
                        demand_cache[key] = (demand, sites)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda run: _safe_execute(execute, run), runs))
    else:
        outcomes = [_safe_execute(execute, run) for run in runs]

    for run, outcome in zip(runs, outcomes):
        if isinstance(outcome, str):
            strategy, scenario = run
            failures.append(RunFailure(strategy, scenario, outcome))
            logger.error("run failed (%s, %s): %s", strategy, scenario, outcome)
        else:
            results.extend(outcome)

    results.sort(key=RunResult.sort_key)
    return PipelineOutput(results=results, failures=failures)


def _safe_execute(fn, run):
    try:
        return fn(run)
    except BbandSimError as err:
        return f"{type(err).__name__}: {err}"


# ---------------------------------------------------------------------------
# Emission of result files
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    """Fixed formatting: integers verbatim, floats at 6 significant digits."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


DECILE_COLUMNS = [
    "country_iso3", "decile_index", "settlement", "population", "area_km2",
    "generation", "backhaul", "sharing", "policy", "energy_strategy",
    "capacity_gb_month", "adoption",
    "demand_mbps_km2", "total_sites", "existing_sites", "new_sites",
    "upgraded_sites", "unserviceable",
    "revenue_pv_usd", "network_usd", "administration_usd", "spectrum_usd",
    "tax_usd", "profit_usd", "private_cost_usd", "subsidy_usd",
    "government_cost_usd", "financial_cost_usd",
    "energy_kwh", "on_grid_kwh", "off_grid_kwh",
    "co2_kg", "nox_g", "sox_g", "pm10_g",
]

COUNTRY_COLUMNS = [
    "country_iso3", "generation", "backhaul", "sharing", "policy",
    "energy_strategy", "capacity_gb_month", "adoption",
    "population", "total_sites", "new_sites", "upgraded_sites",
    "unserviceable_deciles",
    "revenue_pv_usd", "network_usd", "administration_usd", "spectrum_usd",
    "tax_usd", "profit_usd", "private_cost_usd", "subsidy_usd",
    "government_cost_usd", "financial_cost_usd",
    "energy_kwh", "on_grid_kwh", "off_grid_kwh",
    "co2_kg", "nox_g", "sox_g", "pm10_g",
]

_SUM_FIELDS = [
    "revenue_pv_usd", "network_usd", "administration_usd", "spectrum_usd",
    "tax_usd", "profit_usd", "private_cost_usd", "subsidy_usd",
    "government_cost_usd", "financial_cost_usd",
    "energy_kwh", "on_grid_kwh", "off_grid_kwh",
    "co2_kg", "nox_g", "sox_g", "pm10_g",
]


def decile_row(r: RunResult) -> dict:
    s, sc, c = r.strategy, r.scenario, r.cost
    return {
        "country_iso3": r.country_iso3,
        "decile_index": r.decile_index,
        "settlement": r.settlement.value,
        "population": r.population,
        "area_km2": r.area_km2,
        "generation": s.generation.value,
        "backhaul": s.backhaul.value,
        "sharing": s.sharing.value,
        "policy": s.policy.value,
        "energy_strategy": s.energy_strategy.value,
        "capacity_gb_month": sc.capacity_gb_month,
        "adoption": sc.adoption.value,
        "demand_mbps_km2": r.demand.area_demand_mbps_km2,
        "total_sites": r.sites.total_sites,
        "existing_sites": r.sites.existing_sites,
        "new_sites": r.sites.new_sites,
        "upgraded_sites": r.sites.upgraded_sites,
        "unserviceable": r.sites.unserviceable,
        "revenue_pv_usd": c.revenue_pv,
        "network_usd": c.network,
        "administration_usd": c.administration,
        "spectrum_usd": c.spectrum,
        "tax_usd": c.tax,
        "profit_usd": c.profit,
        "private_cost_usd": c.private_cost,
        "subsidy_usd": c.subsidy,
        "government_cost_usd": c.government_cost,
        "financial_cost_usd": c.financial_cost,
        "energy_kwh": r.energy_kwh,
        "on_grid_kwh": r.on_grid_kwh,
        "off_grid_kwh": r.off_grid_kwh,
        "co2_kg": r.emissions.co2_kg,
        "nox_g": r.emissions.nox_g,
        "sox_g": r.emissions.sox_g,
        "pm10_g": r.emissions.pm10_g,
    }


def _run_key(r: RunResult):
    s, sc = r.strategy, r.scenario
    return (
        s.generation.value, s.backhaul.value, s.sharing.value, s.policy.value,
        s.energy_strategy.value, sc.capacity_gb_month, sc.adoption.value,
    )


def aggregate_country_rows(results: Sequence[RunResult]) -> list[dict]:
    """Country-level aggregation of the per-decile results, full precision."""
    grouped: dict[tuple, dict] = {}
    for r in results:
        key = (r.country_iso3, *_run_key(r))
        row = grouped.get(key)
        if row is None:
            s, sc = r.strategy, r.scenario
            row = {c: 0 for c in COUNTRY_COLUMNS}
            row.update({
                "country_iso3": r.country_iso3,
                "generation": s.generation.value,
                "backhaul": s.backhaul.value,
                "sharing": s.sharing.value,
                "policy": s.policy.value,
                "energy_strategy": s.energy_strategy.value,
                "capacity_gb_month": sc.capacity_gb_month,
                "adoption": sc.adoption.value,
            })
            for f in _SUM_FIELDS:
                row[f] = 0.0
            grouped[key] = row
        d = decile_row(r)
        row["population"] += d["population"]
        row["total_sites"] += d["total_sites"]
        row["new_sites"] += d["new_sites"]
        row["upgraded_sites"] += d["upgraded_sites"]
        row["unserviceable_deciles"] += 1 if d["unserviceable"] else 0
        for f in _SUM_FIELDS:
            row[f] += d[f]
    return [grouped[k] for k in sorted(grouped)]


def _summary_rows(
    results: Sequence[RunResult],
    group_fields: Sequence[str],
    value_fields: Sequence[str],
    baseline_filter: dict,
) -> list[dict]:
    grouped: dict[tuple, dict] = {}
    for r in results:
        d = decile_row(r)
        if any(d[f] != v for f, v in baseline_filter.items()):
            continue
        key = tuple(d[f] for f in group_fields)
        row = grouped.get(key)
        if row is None:
            row = {f: d[f] for f in group_fields}
            row.update({f: 0.0 for f in value_fields})
            grouped[key] = row
        for f in value_fields:
            row[f] += d[f]
    return [grouped[k] for k in sorted(grouped)]


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict]) -> None:
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    except OSError as err:
        raise OSError(f"cannot write {path}: {err}") from err


def emit_results(results: Sequence[RunResult], out_dir: Path | str) -> list[Path]:
    """Write the decile, country and summary CSVs; returns the paths written.

    Output is byte-stable: rows are fully sorted, floats carry 6 significant
    digits, and re-running with identical inputs rewrites identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=RunResult.sort_key)

    paths = []
    p = out / "results_decile.csv"
    _write_csv(p, DECILE_COLUMNS, (decile_row(r) for r in ordered))
    paths.append(p)

    p = out / "results_country.csv"
    _write_csv(p, COUNTRY_COLUMNS, aggregate_country_rows(ordered))
    paths.append(p)

    cost_energy = ["financial_cost_usd", "energy_kwh", "co2_kg", "nox_g", "sox_g", "pm10_g"]
    summaries = [
        (
            "summary_by_technology.csv",
            ["generation", "backhaul", "capacity_gb_month", "adoption"],
            cost_energy,
            {"sharing": "baseline", "policy": "baseline", "energy_strategy": "baseline"},
        ),
        (
            "summary_by_sharing.csv",
            ["sharing"],
            cost_energy,
            {"policy": "baseline", "energy_strategy": "baseline"},
        ),
        (
            "summary_by_policy.csv",
            ["policy"],
            ["financial_cost_usd", "private_cost_usd", "government_cost_usd", "subsidy_usd"],
            {"sharing": "baseline", "energy_strategy": "baseline"},
        ),
        (
            "summary_emissions.csv",
            ["energy_strategy", "generation", "backhaul"],
            ["energy_kwh", "co2_kg", "nox_g", "sox_g", "pm10_g"],
            {"sharing": "baseline", "policy": "baseline"},
        ),
    ]
    for filename, group_fields, value_fields, baseline in summaries:
        p = out / filename
        _write_csv(p, [*group_fields, *value_fields], _summary_rows(ordered, group_fields, value_fields, baseline))
        paths.append(p)
    return paths
