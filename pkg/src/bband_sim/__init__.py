"""Deterministic scenario simulator for universal mobile broadband planning.

Estimates, per country and population-density decile, the financial cost,
energy consumption and operational emissions (2023-2030) of strategies
combining radio generation, backhaul type, infrastructure sharing, fiscal
policy and off-grid energy sourcing.
"""

__version__ = "0.1.0"

from .core import (
    AdoptionScenario,
    Backhaul,
    CountryParams,
    DecileRecord,
    EnergyStrategy,
    Generation,
    IncomeGroup,
    Policy,
    RegionRecord,
    ScenarioSpace,
    ScenarioSpec,
    Settlement,
    Sharing,
    SpectrumHolding,
    StrategyBundle,
    StrategySpace,
    build_deciles,
    classify_settlement,
    enumerate_runs,
)
from .data_io import InputBundle, load_bundle, save_bundle, validate_axes
from .errors import BbandSimError, InputValidationError, MissingDataError, ValidationError
from .pipeline import PipelineOutput, RunResult, emit_results, run_pipeline

__all__ = [
    "AdoptionScenario",
    "Backhaul",
    "BbandSimError",
    "CountryParams",
    "DecileRecord",
    "EnergyStrategy",
    "Generation",
    "IncomeGroup",
    "InputBundle",
    "InputValidationError",
    "MissingDataError",
    "PipelineOutput",
    "Policy",
    "RegionRecord",
    "RunResult",
    "ScenarioSpace",
    "ScenarioSpec",
    "Settlement",
    "Sharing",
    "SpectrumHolding",
    "StrategyBundle",
    "StrategySpace",
    "ValidationError",
    "build_deciles",
    "classify_settlement",
    "emit_results",
    "enumerate_runs",
    "load_bundle",
    "run_pipeline",
    "save_bundle",
    "validate_axes",
]
