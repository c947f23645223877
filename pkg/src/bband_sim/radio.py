"""Monte Carlo link-level simulator producing site-density to capacity tables.

A hypothetical macro site sits at the origin of a hexagonal layout with
inter-site distance ``ISD = sqrt(2 / (sqrt(3) * density))``. Receivers are
dropped uniformly inside the serving hexagon; co-channel interference comes
from rings of neighbouring sites (6k sites at distance k*ISD for ring k).
Propagation is free-space path loss with a lognormally distributed shadow
fading excess (see :func:`shadow_fading_draws`) and a fixed extra loss for
paths beyond the LoS breakpoint. Per-trial
SINR maps through a step lookup table to spectral efficiency; the capacity
credited to a density is the reliability-level (default 10th percentile)
spectral efficiency times bandwidth, sectors and site density, summed over
the carriers in use.

Every (carrier, density) simulation derives its own RNG stream from the seed
and its identifying integers, so tables are bit-identical regardless of how
the work is scheduled across threads.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Generation
from .errors import ValidationError

BOLTZMANN_J_PER_K = 1.380649e-23

#: Density grid (sites/km^2) used when the config does not supply one.
DEFAULT_DENSITY_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SimulationParams:
    """Link budget and Monte Carlo controls for the radio simulation."""

    tx_power_dbm: float = 40.0
    tx_gain_db: float = 16.0
    tx_losses_db: float = 1.0
    rx_gain_db: float = 0.0
    rx_losses_db: float = 4.0
    rx_misc_losses_db: float = 4.0
    tx_height_m: float = 30.0
    rx_height_m: float = 1.5
    sectors_per_site: int = 3
    network_load: float = 1.0
    los_breakpoint_m: float = 500.0
    shadow_mu_db: float = 2.0
    shadow_sigma_db: float = 10.0
    temperature_k: float = 290.0
    noise_figure_db: float = 1.5
    nlos_excess_db: float = 12.0
    min_distance_m: float = 10.0
    reliability: float = 0.90
    trials: int = 10_000
    seed: int = 42
    interferer_rings: int = 1
    mimo_efficiency: float = 0.85

    def __post_init__(self):
        if not (0 < self.reliability < 1):
            raise ValidationError("reliability must be in (0, 1)")
        if self.trials < 100:
            raise ValidationError("trials must be >= 100")
        if self.sectors_per_site < 1:
            raise ValidationError("sectors_per_site must be >= 1")
        if not (0 <= self.network_load <= 1):
            raise ValidationError("network_load must be in [0, 1]")
        if self.interferer_rings < 0:
            raise ValidationError("interferer_rings must be >= 0")
        if not (0 < self.mimo_efficiency <= 1):
            raise ValidationError("mimo_efficiency must be in (0, 1]")


@dataclass(frozen=True)
class Carrier:
    """One frequency carrier: centre frequency and downlink bandwidth."""

    frequency_mhz: float
    bandwidth_mhz: float

    def __post_init__(self):
        if not (self.frequency_mhz > 0 and self.bandwidth_mhz > 0):
            raise ValidationError("carrier frequency and bandwidth must be > 0")


@dataclass(frozen=True)
class FrequencySet:
    """The carriers a generation deploys, e.g. 4G on 800+1800+2500 MHz."""

    generation: Generation
    carriers: tuple[Carrier, ...]

    def __post_init__(self):
        if not self.carriers:
            raise ValidationError("frequency set needs at least one carrier")

    @property
    def label(self) -> str:
        return "+".join(f"{c.frequency_mhz:g}x{c.bandwidth_mhz:g}" for c in self.carriers)

    @property
    def total_bandwidth_mhz(self) -> float:
        return sum(c.bandwidth_mhz for c in self.carriers)


# Spatial multiplexing streams per generation (2x2 vs 4x4 antennas).
MIMO_STREAMS = {Generation.G4: 2, Generation.G5: 4}


@dataclass(frozen=True)
class SpectralEfficiencyTable:
    """Step lookup from SINR to spectral efficiency, per generation.

    ``rows`` maps generation to ordered ``(min_sinr_db, se_bps_hz)`` pairs,
    strictly increasing in both columns. Lookup picks the largest row whose
    threshold the SINR meets; below the lowest row means no service. The
    result is scaled by the generation's MIMO streams times an efficiency
    factor (the table values are single-stream).
    """

    rows: Mapping[Generation, tuple[tuple[float, float], ...]]
    mimo_streams: Mapping[Generation, int] = None
    mimo_efficiency: float = 0.85

    def __post_init__(self):
        if self.mimo_streams is None:
            object.__setattr__(self, "mimo_streams", dict(MIMO_STREAMS))
        for gen, rows in self.rows.items():
            if not rows:
                raise ValidationError(f"SE table for {gen.value} is empty")
            sinrs = [r[0] for r in rows]
            ses = [r[1] for r in rows]
            if any(b <= a for a, b in zip(sinrs, sinrs[1:])):
                raise ValidationError(f"SE table for {gen.value}: min_sinr_db not strictly increasing")
            if any(b <= a for a, b in zip(ses, ses[1:])):
                raise ValidationError(f"SE table for {gen.value}: se_bps_hz not strictly increasing")
            if any(se <= 0 for se in ses):
                raise ValidationError(f"SE table for {gen.value}: se_bps_hz must be > 0")

    def multiplier(self, generation: Generation) -> float:
        return self.mimo_streams[generation] * self.mimo_efficiency


@dataclass(frozen=True)
class CapacityTable:
    """Monotone map from site density to area capacity for one frequency set."""

    generation: Generation
    freq_label: str
    rows: tuple[tuple[float, float], ...]  # (sites/km^2, Mbps/km^2)

    def __post_init__(self):
        if not self.rows:
            raise ValidationError("capacity table has no rows")
        densities = [r[0] for r in self.rows]
        caps = [r[1] for r in self.rows]
        if any(b <= a for a, b in zip(densities, densities[1:])):
            raise ValidationError("capacity table densities must be strictly increasing")
        if any(b < a for a, b in zip(caps, caps[1:])):
            raise ValidationError("capacity table capacities must be monotone non-decreasing")
        if any(d <= 0 for d in densities) or any(c < 0 for c in caps):
            raise ValidationError("capacity table entries must be positive densities, non-negative capacities")

    @property
    def max_density(self) -> float:
        return self.rows[-1][0]

    @property
    def max_capacity(self) -> float:
        return self.rows[-1][1]


def free_space_path_loss(
    distance_km,
    freq_mhz: float,
    los_breakpoint_m: float = 500.0,
    nlos_excess_db: float = 12.0,
    min_distance_m: float = 10.0,
):
    """Free-space path loss in dB, with a fixed NLoS penalty past the breakpoint.

    ``20 log10(d_km) + 20 log10(f_MHz) + 32.44``; distances are clamped to
    ``min_distance_m`` to avoid the origin singularity, and paths strictly
    longer than the breakpoint take ``nlos_excess_db`` extra loss. Accepts
    scalars or arrays.
    """
    if freq_mhz <= 0:
        raise ValidationError("freq_mhz must be > 0")
    d = np.maximum(np.asarray(distance_km, dtype=float), min_distance_m / 1000.0)
    loss = 20.0 * np.log10(d) + 20.0 * np.log10(freq_mhz) + 32.44
    loss = loss + np.where(d * 1000.0 > los_breakpoint_m, nlos_excess_db, 0.0)
    if loss.ndim == 0:
        return float(loss)
    return loss


def received_signal(params: SimulationParams, path_loss_db, shadow_db):
    """Received power in dBm for one path (works elementwise on arrays)."""
    out = (
        params.tx_power_dbm
        + params.tx_gain_db
        - params.tx_losses_db
        - np.asarray(path_loss_db, dtype=float)
        - np.asarray(shadow_db, dtype=float)
        + params.rx_gain_db
        - params.rx_losses_db
        - params.rx_misc_losses_db
    )
    if np.ndim(out) == 0:
        return float(out)
    return out


def noise_floor(params: SimulationParams, bw_hz: float) -> float:
    """Thermal noise power in dBm over ``bw_hz``, including the UE noise figure."""
    if bw_hz <= 0:
        raise ValidationError("bw_hz must be > 0")
    return (
        10.0 * math.log10(BOLTZMANN_J_PER_K * params.temperature_k * 1000.0)
        + params.noise_figure_db
        + 10.0 * math.log10(bw_hz)
    )


def sinr(signal_dbm, interferers_dbm, noise_dbm: float, network_load: float = 1.0):
    """SINR in dB from dBm inputs.

    Powers are summed in the linear domain; interference is scaled by the
    network load (1.0 means all co-channel cells transmit). ``signal_dbm``
    may be an array of trials with ``interferers_dbm`` shaped
    ``(trials, n_interferers)``; an empty interferer list gives the SNR.
    """
    s = np.power(10.0, np.asarray(signal_dbm, dtype=float) / 10.0)
    interferers = np.asarray(interferers_dbm, dtype=float)
    if interferers.size == 0:
        total_i = 0.0
    else:
        total_i = np.power(10.0, interferers / 10.0).sum(axis=-1) * network_load
    n = 10.0 ** (noise_dbm / 10.0)
    out = 10.0 * np.log10(s / (total_i + n))
    if np.ndim(out) == 0:
        return float(out)
    return out


def se_lookup(table: SpectralEfficiencyTable, sinr_db, generation: Generation):
    """Spectral efficiency in bps/Hz for a SINR, including the MIMO multiplier.

    Step function: the largest row whose ``min_sinr_db`` the SINR meets is
    selected; below the lowest row returns 0 (no service); above the top row
    saturates at the top row.
    """
    rows = table.rows[generation]
    mins = np.array([r[0] for r in rows])
    ses = np.array([r[1] for r in rows])
    idx = np.searchsorted(mins, np.asarray(sinr_db, dtype=float), side="right") - 1
    se = np.where(idx < 0, 0.0, ses[np.clip(idx, 0, len(ses) - 1)])
    se = se * table.multiplier(generation)
    if np.ndim(se) == 0:
        return float(se)
    return se


def inter_site_distance_km(site_density: float) -> float:
    """Hexagonal-layout inter-site distance for a given site density."""
    if site_density <= 0:
        raise ValidationError("site_density must be > 0")
    return math.sqrt(2.0 / (math.sqrt(3.0) * site_density))


def _interferer_positions(isd_km: float, rings: int) -> np.ndarray:
    """Co-channel site coordinates: ring k holds 6k sites at distance k*ISD."""
    points = []
    for k in range(1, rings + 1):
        count = 6 * k
        for j in range(count):
            angle = math.radians(30.0) + 2.0 * math.pi * j / count
            points.append((k * isd_km * math.cos(angle), k * isd_km * math.sin(angle)))
    return np.array(points) if points else np.empty((0, 2))


def _sample_hexagon(rng: np.random.Generator, n: int, circumradius_km: float):
    """Uniform points in a regular hexagon centred at the origin."""
    tri = rng.integers(0, 6, n)
    u = rng.random(n)
    v = rng.random(n)
    over = u + v > 1.0
    u[over] = 1.0 - u[over]
    v[over] = 1.0 - v[over]
    a0 = tri * (math.pi / 3.0)
    a1 = a0 + math.pi / 3.0
    x = u * circumradius_km * np.cos(a0) + v * circumradius_km * np.cos(a1)
    y = u * circumradius_km * np.sin(a0) + v * circumradius_km * np.sin(a1)
    return x, y


def shadow_fading_draws(
    rng: np.random.Generator,
    mu_db: float,
    sigma_db: float,
    size,
) -> np.ndarray:
    """Per-path shadow fading excess loss, lognormally distributed in dB.

    ``mu_db`` and ``sigma_db`` are the mean and standard deviation of the
    dB-valued loss; the underlying normal parameters are moment-matched, so
    draws are non-negative with a long right tail (occasional heavy
    blockage) rather than symmetric. ``sigma_db = 0`` degenerates to the
    constant ``mu_db``.
    """
    if sigma_db == 0:
        return np.full(size, float(mu_db))
    if mu_db <= 0:
        raise ValidationError("shadow_mu_db must be > 0 when shadow_sigma_db > 0")
    ratio = sigma_db / mu_db
    sigma_ln = math.sqrt(math.log(1.0 + ratio * ratio))
    mu_ln = math.log(mu_db * mu_db / math.sqrt(mu_db * mu_db + sigma_db * sigma_db))
    return rng.lognormal(mu_ln, sigma_ln, size)


def _carrier_rng(seed: int, generation: Generation, carrier: Carrier, site_density: float) -> np.random.Generator:
    # Stream identity depends only on (seed, generation, carrier, density),
    # never on scheduling order, so parallel table builds are reproducible.
    key = (
        4 if generation == Generation.G4 else 5,
        int(round(carrier.frequency_mhz * 1000.0)),
        int(round(carrier.bandwidth_mhz * 1000.0)),
        int(round(site_density * 1e6)),
    )
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


def simulate_density(
    params: SimulationParams,
    se_table: SpectralEfficiencyTable,
    freq_set: FrequencySet,
    site_density: float,
    receiver_positions: Sequence[tuple[float, float]] | None = None,
) -> float:
    """Area capacity in Mbps/km^2 delivered at ``site_density`` sites/km^2.

    Per carrier, ``params.trials`` receivers are dropped uniformly in the
    serving hexagon (or placed at ``receiver_positions``, a testing hook);
    each trial evaluates the serving path, the interfering ring paths and
    the noise floor, maps SINR to spectral efficiency, and the carrier is
    credited with the reliability-level percentile of that distribution.
    """
    if site_density <= 0:
        raise ValidationError("site_density must be > 0")
    if receiver_positions is None and params.trials < 100:
        raise ValidationError("trials must be >= 100")

    isd = inter_site_distance_km(site_density)
    hex_circumradius = isd / math.sqrt(3.0)
    sites = _interferer_positions(isd, params.interferer_rings)
    dh_km = (params.tx_height_m - params.rx_height_m) / 1000.0
    percentile = (1.0 - params.reliability) * 100.0

    capacity = 0.0
    for carrier in freq_set.carriers:
        rng = _carrier_rng(params.seed, freq_set.generation, carrier, site_density)
        if receiver_positions is None:
            x, y = _sample_hexagon(rng, params.trials, hex_circumradius)
        else:
            pos = np.asarray(receiver_positions, dtype=float)
            x, y = pos[:, 0], pos[:, 1]
        n = len(x)
        shadow_signal = shadow_fading_draws(rng, params.shadow_mu_db, params.shadow_sigma_db, n)
        shadow_interf = shadow_fading_draws(rng, params.shadow_mu_db, params.shadow_sigma_db, (n, len(sites)))

        d_signal = np.sqrt(x**2 + y**2 + dh_km**2)
        pl_signal = free_space_path_loss(
            d_signal, carrier.frequency_mhz,
            params.los_breakpoint_m, params.nlos_excess_db, params.min_distance_m,
        )
        signal = received_signal(params, pl_signal, shadow_signal)

        if len(sites):
            dx = x[:, None] - sites[:, 0][None, :]
            dy = y[:, None] - sites[:, 1][None, :]
            d_interf = np.sqrt(dx**2 + dy**2 + dh_km**2)
            pl_interf = free_space_path_loss(
                d_interf, carrier.frequency_mhz,
                params.los_breakpoint_m, params.nlos_excess_db, params.min_distance_m,
            )
            interferers = received_signal(params, pl_interf, shadow_interf)
        else:
            interferers = np.empty((n, 0))

        noise = noise_floor(params, carrier.bandwidth_mhz * 1e6)
        sinr_db = sinr(signal, interferers, noise, params.network_load)
        se = se_lookup(se_table, sinr_db, freq_set.generation)
        se_reliable = float(np.percentile(se, percentile))
        capacity += se_reliable * carrier.bandwidth_mhz * params.sectors_per_site * site_density
    return capacity


def isotonic_clip(values: Sequence[float]) -> list[float]:
    """Running maximum, removing small Monte Carlo dips from a table column."""
    out: list[float] = []
    best = -math.inf
    for v in values:
        best = max(best, v)
        out.append(best)
    return out


def build_capacity_table(
    params: SimulationParams,
    se_table: SpectralEfficiencyTable,
    freq_set: FrequencySet,
    density_grid: Sequence[float] = DEFAULT_DENSITY_GRID,
    jobs: int = 1,
) -> CapacityTable:
    """Simulate every grid density and assemble a monotone capacity table.

    Grid points run independently (optionally across ``jobs`` threads; the
    per-carrier RNG streams make the result scheduling-invariant), then the
    capacity column is isotonically clipped.
    """
    grid = list(density_grid)
    if len(grid) < 8:
        raise ValidationError("density grid needs at least 8 points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("density grid must be strictly increasing")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(lambda d: simulate_density(params, se_table, freq_set, d), grid))
    else:
        raw = [simulate_density(params, se_table, freq_set, d) for d in grid]

    clipped = isotonic_clip(raw)
    return CapacityTable(
        generation=freq_set.generation,
        freq_label=freq_set.label,
        rows=tuple(zip(grid, clipped)),
    )


def required_density(table: CapacityTable, demand_mbps_km2: float) -> tuple[float, bool]:
    """Smallest site density meeting a traffic demand, from the lookup table.

    Linear interpolation between bracketing rows, anchored at the implicit
    (0 density, 0 capacity) point below the first row. Returns
    ``(density, unserviceable)``; demand above the table maximum returns the
    maximum density with the flag set rather than extrapolating.
    """
    if demand_mbps_km2 < 0:
        raise ValidationError("demand must be >= 0")
    if demand_mbps_km2 == 0:
        return 0.0, False
    if demand_mbps_km2 > table.max_capacity:
        return table.max_density, True

    prev_d, prev_c = 0.0, 0.0
    for d, c in table.rows:
        if c >= demand_mbps_km2:
            if c == prev_c:  # flat zero segment cannot bracket positive demand
                return d, False
            frac = (demand_mbps_km2 - prev_c) / (c - prev_c)
            return prev_d + frac * (d - prev_d), False
        prev_d, prev_c = d, c
    # Unreachable: demand <= max_capacity guarantees a bracketing row.
    raise AssertionError("no bracketing row found")


def table_cache_key(
    params: SimulationParams,
    se_table: SpectralEfficiencyTable,
    freq_set: FrequencySet,
    density_grid: Sequence[float],
) -> str:
    """Content hash identifying a capacity table build, for disk caching."""
    payload = {
        "params": asdict(params),
        "se_rows": {gen.value: list(map(list, rows)) for gen, rows in sorted(se_table.rows.items())},
        "mimo_streams": {gen.value: n for gen, n in sorted(se_table.mimo_streams.items())},
        "mimo_efficiency": se_table.mimo_efficiency,
        "generation": freq_set.generation.value,
        "carriers": [[c.frequency_mhz, c.bandwidth_mhz] for c in freq_set.carriers],
        "grid": list(density_grid),
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


CAPACITY_TABLE_HEADER = ["generation", "freq_set", "site_density", "capacity_mbps_km2"]


def save_capacity_tables(tables: Iterable[CapacityTable], path: Path | str) -> None:
    """Write tables to CSV (``generation,freq_set,site_density,capacity_mbps_km2``)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CAPACITY_TABLE_HEADER)
        for table in tables:
            for density, capacity in table.rows:
                writer.writerow([table.generation.value, table.freq_label, repr(density), repr(capacity)])


def load_capacity_tables(path: Path | str) -> list[CapacityTable]:
    """Read tables written by :func:`save_capacity_tables`."""
    path = Path(path)
    grouped: dict[tuple[str, str], list[tuple[float, float]]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CAPACITY_TABLE_HEADER:
            raise ValidationError(f"{path}: unexpected capacity table header {header}")
        for row in reader:
            gen, label, density, capacity = row
            grouped.setdefault((gen, label), []).append((float(density), float(capacity)))
    return [
        CapacityTable(generation=Generation(gen), freq_label=label, rows=tuple(rows))
        for (gen, label), rows in grouped.items()
    ]
