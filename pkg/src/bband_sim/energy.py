"""Energy and emissions accounting for operating cell sites over the horizon."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .core import Backhaul, EnergyStrategy, Settlement, Sharing
from .errors import ValidationError

HOURS_PER_YEAR = 8760

#: Grid generation sources recognised in the energy mix input.
MIX_SOURCES = ("coal", "gas", "oil", "nuclear", "hydro", "renewables_other")

#: Sources whose operational emissions are treated as negligible.
ZERO_EMISSION_SOURCES = ("nuclear", "hydro", "renewables_other")

DIESEL_SOURCE = "diesel"

MIX_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EnergyParams:
    """Hourly electricity draw per site, plus the backhaul adder."""

    site_kwh_per_hour: float = 0.249
    backhaul_wireless_kwh_per_hour: float = 0.025
    backhaul_fiber_kwh_per_hour: float = 0.010

    def __post_init__(self):
        if not (self.site_kwh_per_hour > 0):
            raise ValidationError("site_kwh_per_hour must be > 0")
        # adders of zero are allowed so a bare site can be modeled
        for name in ("backhaul_wireless_kwh_per_hour", "backhaul_fiber_kwh_per_hour"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")

    def backhaul_kwh_per_hour(self, backhaul: Backhaul) -> float:
        if backhaul == Backhaul.FIBER:
            return self.backhaul_fiber_kwh_per_hour
        return self.backhaul_wireless_kwh_per_hour


@dataclass(frozen=True)
class FactorRow:
    """Per-kWh emission factors for one generation source."""

    co2_kg_kwh: float
    nox_g_kwh: float
    sox_g_kwh: float
    pm10_g_kwh: float

    def __post_init__(self):
        for name in ("co2_kg_kwh", "nox_g_kwh", "sox_g_kwh", "pm10_g_kwh"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")


@dataclass(frozen=True)
class EmissionFactors:
    """Emission factors per grid source plus the off-grid diesel generator row."""

    by_source: Mapping[str, FactorRow]

    def __post_init__(self):
        missing = [s for s in (*MIX_SOURCES, DIESEL_SOURCE) if s not in self.by_source]
        if missing:
            raise ValidationError(f"emission factors missing sources: {missing}")
        for source in ZERO_EMISSION_SOURCES:
            row = self.by_source[source]
            if (row.co2_kg_kwh, row.nox_g_kwh, row.sox_g_kwh, row.pm10_g_kwh) != (0, 0, 0, 0):
                raise ValidationError(f"{source}: operational emission factors must be zero")

    @property
    def diesel(self) -> FactorRow:
        return self.by_source[DIESEL_SOURCE]


@dataclass(frozen=True)
class GridSplit:
    """Share of site energy drawn from the grid, and the off-grid source."""

    on_grid_share: float
    off_grid_source: str = DIESEL_SOURCE  # "diesel" or "renewable"

    def __post_init__(self):
        if not (0 <= self.on_grid_share <= 1):
            raise ValidationError("on_grid_share must be in [0, 1]")
        if self.off_grid_source not in (DIESEL_SOURCE, "renewable"):
            raise ValidationError(f"unknown off_grid_source {self.off_grid_source!r}")


@dataclass(frozen=True)
class Emissions:
    """The four tracked species. CO2 in kg, the others in grams."""

    co2_kg: float = 0.0
    nox_g: float = 0.0
    sox_g: float = 0.0
    pm10_g: float = 0.0

    def __add__(self, other: "Emissions") -> "Emissions":
        return Emissions(
            self.co2_kg + other.co2_kg,
            self.nox_g + other.nox_g,
            self.sox_g + other.sox_g,
            self.pm10_g + other.pm10_g,
        )


@dataclass(frozen=True)
class YearEnergy:
    """One year's energy and emissions for a decile."""

    year: int
    energy_kwh: float
    on_grid_kwh: float
    off_grid_kwh: float
    emissions: Emissions


@dataclass(frozen=True)
class HorizonTotals:
    energy_kwh: float
    on_grid_kwh: float
    off_grid_kwh: float
    emissions: Emissions


def annual_energy(
    existing_sites: int,
    new_cumulative: int,
    params: EnergyParams,
    backhaul: Backhaul,
) -> float:
    """kWh consumed in one year by all sites in operation, backhaul included."""
    if existing_sites < 0 or new_cumulative < 0:
        raise ValidationError("site counts must be >= 0")
    per_site = params.site_kwh_per_hour + params.backhaul_kwh_per_hour(backhaul)
    return (existing_sites + new_cumulative) * per_site * HOURS_PER_YEAR


def split_energy(energy_kwh: float, grid: GridSplit) -> tuple[float, float]:
    """Proportional on/off-grid split; the parts sum back to the total exactly."""
    if energy_kwh < 0:
        raise ValidationError("energy_kwh must be >= 0")
    on = energy_kwh * grid.on_grid_share
    return on, energy_kwh - on


def emissions(
    on_grid_kwh: float,
    off_grid_kwh: float,
    mix_row: Mapping[str, float],
    factors: EmissionFactors,
    grid: GridSplit,
) -> Emissions:
    """Emission species from one year's energy.

    On-grid energy is split across the year's generation mix and each
    source's factors applied; off-grid energy uses the diesel generator row,
    or nothing at all once converted to renewables.
    """
    unknown = [s for s in mix_row if s not in MIX_SOURCES]
    if unknown:
        raise ValidationError(f"unknown mix sources: {unknown}")
    total_share = sum(mix_row.values())
    if abs(total_share - 1.0) > MIX_SUM_TOLERANCE:
        raise ValidationError(f"mix shares sum to {total_share}, expected 1")

    co2 = nox = sox = pm10 = 0.0
    for source, share in mix_row.items():
        row = factors.by_source[source]
        kwh = on_grid_kwh * share
        co2 += kwh * row.co2_kg_kwh
        nox += kwh * row.nox_g_kwh
        sox += kwh * row.sox_g_kwh
        pm10 += kwh * row.pm10_g_kwh
    if grid.off_grid_source == DIESEL_SOURCE:
        row = factors.diesel
        co2 += off_grid_kwh * row.co2_kg_kwh
        nox += off_grid_kwh * row.nox_g_kwh
        sox += off_grid_kwh * row.sox_g_kwh
        pm10 += off_grid_kwh * row.pm10_g_kwh
    return Emissions(co2, nox, sox, pm10)


def apply_renewables_strategy(grid: GridSplit, strategy: EnergyStrategy) -> GridSplit:
    """Swap off-grid diesel generators for renewables when the strategy says so."""
    if strategy == EnergyStrategy.RENEWABLES:
        return replace(grid, off_grid_source="renewable")
    return grid


def sharing_energy_divisor(sharing: Sharing, settlement: Settlement, n_sharers: int) -> float:
    """Operator share of site energy under each sharing model.

    Active sharing runs one set of radio equipment for all sharers, so the
    modeled operator accounts for 1/n of the site energy; the shared rural
    network does the same in rural deciles only. Passive sharing leaves the
    radio equipment duplicated, so energy matches the baseline exactly.
    """
    if n_sharers < 1:
        raise ValidationError("n_sharers must be >= 1")
    if sharing == Sharing.ACTIVE or (sharing == Sharing.SRN and settlement == Settlement.RURAL):
        return float(n_sharers)
    return 1.0


def build_schedule(total_new: int, n_years: int) -> list[int]:
    """Spread new builds uniformly across the horizon, remainder up front."""
    if total_new < 0:
        raise ValidationError("total_new must be >= 0")
    if n_years < 1:
        raise ValidationError("n_years must be >= 1")
    q, r = divmod(total_new, n_years)
    return [q + 1 if t < r else q for t in range(n_years)]


def cumulate_horizon(per_year: Sequence[YearEnergy]) -> HorizonTotals:
    """Sum a contiguous run of per-year results into horizon totals."""
    if not per_year:
        raise ValidationError("no yearly results to cumulate")
    years = [y.year for y in per_year]
    expected = list(range(years[0], years[0] + len(years)))
    if years != expected:
        raise ValidationError(f"years {years} are not contiguous from {years[0]}")
    total = Emissions()
    for y in per_year:
        total = total + y.emissions
    return HorizonTotals(
        energy_kwh=sum(y.energy_kwh for y in per_year),
        on_grid_kwh=sum(y.on_grid_kwh for y in per_year),
        off_grid_kwh=sum(y.off_grid_kwh for y in per_year),
        emissions=total,
    )
