"""Cost side: site pricing, sharing models, policy variants, cross-subsidy."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core import Backhaul, Policy, Settlement, Sharing
from .errors import ValidationError


@dataclass(frozen=True)
class CostInputs:
    """Unit costs and fiscal coefficients. All money in USD.

    These are artifact configuration with documented defaults, not
    published prices; override them from the cost section of the config.
    The spectrum fee is ``coefficient x MHz held x decile population``.
    """

    equipment_usd: float = 40_000.0
    backhaul_wireless_usd: float = 20_000.0
    backhaul_fiber_usd: float = 40_000.0
    civils_usd: float = 30_000.0
    core_usd: float = 10_000.0
    admin_share: float = 0.10
    profit_margin: float = 0.20
    tax_rate_low: float = 0.10
    tax_rate_baseline: float = 0.25
    tax_rate_high: float = 0.40
    spectrum_coef_low_usd_mhz_pop: float = 0.005
    spectrum_coef_baseline_usd_mhz_pop: float = 0.01
    spectrum_coef_high_usd_mhz_pop: float = 0.02

    def __post_init__(self):
        for name in (
            "equipment_usd", "backhaul_wireless_usd", "backhaul_fiber_usd",
            "civils_usd", "core_usd", "admin_share", "profit_margin",
        ):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if not (0 <= self.tax_rate_low <= self.tax_rate_baseline <= self.tax_rate_high):
            raise ValidationError("tax rates must be ordered low <= baseline <= high")
        if not (
            0
            <= self.spectrum_coef_low_usd_mhz_pop
            <= self.spectrum_coef_baseline_usd_mhz_pop
            <= self.spectrum_coef_high_usd_mhz_pop
        ):
            raise ValidationError("spectrum coefficients must be ordered low <= baseline <= high")

    def backhaul_unit_cost(self, backhaul: Backhaul) -> float:
        if backhaul == Backhaul.FIBER:
            return self.backhaul_fiber_usd
        return self.backhaul_wireless_usd

    def tax_rate(self, policy: Policy) -> float:
        if policy == Policy.LOW_TAX:
            return self.tax_rate_low
        if policy == Policy.HIGH_TAX:
            return self.tax_rate_high
        return self.tax_rate_baseline

    def spectrum_coef(self, policy: Policy) -> float:
        if policy == Policy.LOW_SPECTRUM:
            return self.spectrum_coef_low_usd_mhz_pop
        if policy == Policy.HIGH_SPECTRUM:
            return self.spectrum_coef_high_usd_mhz_pop
        return self.spectrum_coef_baseline_usd_mhz_pop


@dataclass(frozen=True)
class CostComponents:
    """Network investment split by asset class, summed over a decile's sites."""

    equipment: float = 0.0
    backhaul: float = 0.0
    civils: float = 0.0
    core: float = 0.0

    @property
    def total(self) -> float:
        return self.equipment + self.backhaul + self.civils + self.core


@dataclass(frozen=True)
class DecileCost:
    """Full cost decomposition of one decile under one strategy."""

    country_iso3: str
    decile_index: int
    network: float
    administration: float
    spectrum: float
    tax: float
    profit: float
    private_cost: float
    revenue_pv: float
    subsidy: float = 0.0

    @property
    def government_cost(self) -> float:
        """State subsidy net of spectrum and tax receipts."""
        return self.subsidy - (self.spectrum + self.tax)

    @property
    def financial_cost(self) -> float:
        return self.private_cost + self.government_cost


def site_network_cost(kind: str, backhaul: Backhaul, costs: CostInputs) -> float:
    """Per-site network investment; upgrades reuse the existing tower (no civils)."""
    if kind not in ("new", "upgrade"):
        raise ValidationError(f"kind must be 'new' or 'upgrade', got {kind!r}")
    total = costs.equipment_usd + costs.backhaul_unit_cost(backhaul) + costs.core_usd
    if kind == "new":
        total += costs.civils_usd
    return total


def decile_components(
    new_sites: int,
    upgraded_sites: int,
    backhaul: Backhaul,
    costs: CostInputs,
) -> CostComponents:
    """Asset-class totals for a decile's new builds plus upgrades."""
    if new_sites < 0 or upgraded_sites < 0:
        raise ValidationError("site counts must be >= 0")
    n = new_sites + upgraded_sites
    return CostComponents(
        equipment=n * costs.equipment_usd,
        backhaul=n * costs.backhaul_unit_cost(backhaul),
        civils=new_sites * costs.civils_usd,
        core=n * costs.core_usd,
    )


def apply_sharing(
    components: CostComponents,
    sharing: Sharing,
    n_sharers: int,
    settlement: Settlement,
) -> CostComponents:
    """Divide shared asset classes by the number of sharing operators.

    Passive sharing splits the civil works; active sharing also splits the
    radio equipment and backhaul. The shared rural network applies the
    active rule in rural deciles only. The core network stays per-operator
    in every model.
    """
    if n_sharers < 1:
        raise ValidationError("n_sharers must be >= 1")
    if sharing == Sharing.BASELINE:
        return components
    if sharing == Sharing.PASSIVE:
        return replace(components, civils=components.civils / n_sharers)
    if sharing == Sharing.ACTIVE or (sharing == Sharing.SRN and settlement == Settlement.RURAL):
        return CostComponents(
            equipment=components.equipment / n_sharers,
            backhaul=components.backhaul / n_sharers,
            civils=components.civils / n_sharers,
            core=components.core,
        )
    return components  # SRN outside rural areas behaves like baseline


def private_cost(
    network: float,
    costs: CostInputs,
    policy: Policy,
    revenue_pv: float,
    spectrum_mhz: float,
    population: int,
    country_iso3: str = "",
    decile_index: int = 0,
) -> DecileCost:
    """Operator-side cost stack for one decile.

    Administration and profit scale with the network investment; tax is
    levied on the revenue present value; the spectrum fee prices the MHz
    held against the decile population at the policy's coefficient.
    """
    if network < 0:
        raise ValidationError("network must be >= 0")
    administration = costs.admin_share * network
    profit = costs.profit_margin * network
    tax = costs.tax_rate(policy) * revenue_pv
    spectrum = costs.spectrum_coef(policy) * spectrum_mhz * population
    total = network + administration + spectrum + tax + profit
    return DecileCost(
        country_iso3=country_iso3,
        decile_index=decile_index,
        network=network,
        administration=administration,
        spectrum=spectrum,
        tax=tax,
        profit=profit,
        private_cost=total,
        revenue_pv=revenue_pv,
    )


def cross_subsidize(decile_costs: list[DecileCost]) -> list[DecileCost]:
    """Reallocate viable deciles' surplus to unviable ones within a country.

    The pooled surplus (revenue above private cost) pays down deficits in
    descending-viability order, most viable deficit first, ties broken by
    decile index; whatever deficit remains becomes the state subsidy.
    Returns new records in the original order.
    """
    if not decile_costs:
        return []
    countries = {c.country_iso3 for c in decile_costs}
    if len(countries) > 1:
        raise ValidationError(f"cross_subsidize spans countries: {sorted(countries)}")

    pool = sum(max(0.0, c.revenue_pv - c.private_cost) for c in decile_costs)
    deficits = {
        i: c.private_cost - c.revenue_pv
        for i, c in enumerate(decile_costs)
        if c.private_cost > c.revenue_pv
    }
    allocation = {i: 0.0 for i in deficits}
    for i in sorted(deficits, key=lambda i: (deficits[i], decile_costs[i].decile_index)):
        grant = min(pool, deficits[i])
        allocation[i] = grant
        pool -= grant

    out = []
    for i, c in enumerate(decile_costs):
        subsidy = deficits[i] - allocation[i] if i in deficits else 0.0
        out.append(replace(c, subsidy=subsidy))
    return out


def financial_cost_total(decile_costs: list[DecileCost]) -> float:
    """Total cost to society: private plus net government cost.

    Spectrum fees and taxes cancel between the operator and government
    sides, so the sum equals network + administration + profit + subsidy.
    """
    return sum(c.private_cost + c.government_cost for c in decile_costs)
