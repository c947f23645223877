import math

import numpy as np
import pytest

from bband_sim.core import Generation
from bband_sim.errors import ValidationError
from bband_sim.radio import (
    Carrier,
    CapacityTable,
    FrequencySet,
    SimulationParams,
    SpectralEfficiencyTable,
    build_capacity_table,
    free_space_path_loss,
    inter_site_distance_km,
    isotonic_clip,
    load_capacity_tables,
    noise_floor,
    received_signal,
    required_density,
    save_capacity_tables,
    se_lookup,
    shadow_fading_draws,
    simulate_density,
    table_cache_key,
)
from bband_sim.data_io import default_se_table_path, _load_se_table, _Collector


@pytest.fixture(scope="module")
def se_table():
    table = _load_se_table(default_se_table_path(), 0.85, _Collector())
    assert table is not None
    return table


@pytest.fixture(scope="module")
def fast_params():
    return SimulationParams(trials=2000, seed=99)


FS4 = FrequencySet(Generation.G4, (Carrier(800, 10), Carrier(1800, 10), Carrier(2500, 10)))
FS5 = FrequencySet(Generation.G5, (Carrier(700, 10), Carrier(3500, 40)))
GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0)


class TestPathLoss:
    def test_breakpoint_inclusive_los(self):
        # 0.5 km at 3500 MHz sits exactly on the breakpoint: still LoS
        assert free_space_path_loss(0.5, 3500.0) == pytest.approx(97.30, abs=0.01)

    def test_nlos_excess_beyond_breakpoint(self):
        assert free_space_path_loss(1.0, 800.0) == pytest.approx(90.50 + 12.0, abs=0.01)

    def test_doubling_distance_adds_6db(self):
        a = free_space_path_loss(0.1, 800.0)
        b = free_space_path_loss(0.2, 800.0)
        assert b - a == pytest.approx(20.0 * math.log10(2.0), abs=1e-9)

    def test_zero_distance_clamped_to_minimum(self):
        assert free_space_path_loss(0.0, 800.0) == free_space_path_loss(0.01, 800.0)

    def test_vectorized(self):
        out = free_space_path_loss(np.array([0.1, 0.2, 1.0]), 800.0)
        assert out.shape == (3,)
        assert out[2] > out[1] > out[0]

    def test_bad_frequency(self):
        with pytest.raises(ValidationError):
            free_space_path_loss(1.0, 0.0)


class TestReceivedSignal:
    def test_link_budget_sum(self):
        p = SimulationParams()
        got = received_signal(p, path_loss_db=90.5, shadow_db=0.0)
        assert got == pytest.approx(40 + 16 - 1 - 90.5 + 0 - 4 - 4, abs=1e-12)
        assert got == pytest.approx(-43.5, abs=1e-12)

    def test_identity_at_zero_losses(self):
        p = SimulationParams(
            tx_gain_db=0, tx_losses_db=0, rx_gain_db=0, rx_losses_db=0, rx_misc_losses_db=0
        )
        assert received_signal(p, 0.0, 0.0) == p.tx_power_dbm

    def test_shadow_linearity(self):
        p = SimulationParams()
        assert received_signal(p, 90.0, 0.0) - received_signal(p, 90.0, 10.0) == pytest.approx(10.0)


class TestNoiseFloor:
    def test_10_mhz(self):
        assert noise_floor(SimulationParams(), 10e6) == pytest.approx(-102.48, abs=0.05)

    def test_40_mhz(self):
        assert noise_floor(SimulationParams(), 40e6) == pytest.approx(-96.46, abs=0.05)

    def test_quadrupling_bandwidth(self):
        p = SimulationParams()
        delta = noise_floor(p, 40e6) - noise_floor(p, 10e6)
        assert delta == pytest.approx(10.0 * math.log10(4.0), abs=1e-9)

    def test_matches_per_hz_reference(self):
        p = SimulationParams()
        for bw in (1.4e6, 5e6, 10e6, 20e6, 40e6, 100e6):
            reference = -174.0 + p.noise_figure_db + 10.0 * math.log10(bw)
            assert noise_floor(p, bw) == pytest.approx(reference, abs=0.05)


class TestSinr:
    def test_snr_case(self):
        from bband_sim.radio import sinr
        assert sinr(-90.0, [], -100.0) == pytest.approx(10.0, abs=1e-9)

    def test_unity_ratio(self):
        from bband_sim.radio import sinr
        assert sinr(-100.0, [], -100.0) == pytest.approx(0.0, abs=1e-12)

    def test_one_interferer(self):
        from bband_sim.radio import sinr
        assert sinr(-90.0, [-100.0], -100.0) == pytest.approx(6.99, abs=0.01)

    def test_adding_interferer_never_increases(self):
        from bband_sim.radio import sinr
        rng = np.random.default_rng(3)
        for _ in range(200):
            s = rng.uniform(-120, -40)
            base = list(rng.uniform(-130, -60, size=rng.integers(0, 5)))
            extra = base + [float(rng.uniform(-130, -60))]
            assert sinr(s, extra, -100.0) <= sinr(s, base, -100.0)

    def test_sir_bounds_sinr(self):
        from bband_sim.radio import sinr
        interferers = [-95.0, -101.0]
        assert sinr(-90.0, interferers, -300.0) >= sinr(-90.0, interferers, -100.0)

    def test_load_scales_interference(self):
        from bband_sim.radio import sinr
        loaded = sinr(-90.0, [-95.0], -120.0, network_load=1.0)
        idle = sinr(-90.0, [-95.0], -120.0, network_load=0.0)
        assert idle > loaded


class TestSeLookup:
    def test_below_minimum_is_zero(self, se_table):
        assert se_lookup(se_table, -50.0, Generation.G4) == 0.0

    def test_above_maximum_saturates(self, se_table):
        top = se_table.rows[Generation.G4][-1][1] * se_table.multiplier(Generation.G4)
        assert se_lookup(se_table, 60.0, Generation.G4) == pytest.approx(top)

    def test_monotone_at_all_boundaries(self, se_table):
        for gen in Generation:
            for min_sinr, _ in se_table.rows[gen]:
                low = se_lookup(se_table, min_sinr - 0.01, gen)
                at = se_lookup(se_table, min_sinr, gen)
                high = se_lookup(se_table, min_sinr + 0.01, gen)
                assert low <= at <= high

    def test_mimo_multiplier_applied(self, se_table):
        raw = se_table.rows[Generation.G5][0][1]
        got = se_lookup(se_table, se_table.rows[Generation.G5][0][0], Generation.G5)
        assert got == pytest.approx(raw * 4 * 0.85)

    def test_strictly_increasing_rows_enforced(self):
        with pytest.raises(ValidationError):
            SpectralEfficiencyTable(rows={Generation.G4: ((0.0, 1.0), (1.0, 0.5)), Generation.G5: ((0.0, 1.0),)})


class TestShadowFading:
    def test_zero_sigma_is_constant(self):
        rng = np.random.default_rng(0)
        draws = shadow_fading_draws(rng, 2.0, 0.0, 100)
        assert np.all(draws == 2.0)

    def test_moments_match(self):
        rng = np.random.default_rng(1)
        draws = shadow_fading_draws(rng, 2.0, 10.0, 2_000_000)
        assert draws.mean() == pytest.approx(2.0, rel=0.02)
        assert draws.std() == pytest.approx(10.0, rel=0.05)
        assert np.all(draws > 0)

    def test_nonpositive_mean_rejected(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ValidationError):
            shadow_fading_draws(rng, 0.0, 10.0, 10)


class TestSimulateDensity:
    def test_deterministic_stub_closed_form(self):
        # one receiver fixed at the cell edge, no shadow spread: capacity is
        # exactly SE * BW * sectors * density
        params = SimulationParams(shadow_mu_db=0.001, shadow_sigma_db=0.0, trials=2000, seed=1)
        table = SpectralEfficiencyTable(
            rows={Generation.G4: ((-1000.0, 4.0),), Generation.G5: ((-1000.0, 4.0),)},
            mimo_efficiency=0.5,  # 2 streams * 0.5 -> multiplier exactly 1
        )
        fs = FrequencySet(Generation.G4, (Carrier(800.0, 10.0),))
        edge = inter_site_distance_km(1.0) / math.sqrt(3.0)
        got = simulate_density(params, table, fs, 1.0, receiver_positions=[(edge, 0.0)])
        assert got == 4.0 * 10.0 * 3 * 1.0

    def test_same_seed_bit_identical(self, se_table, fast_params):
        a = simulate_density(fast_params, se_table, FS4, 0.5)
        b = simulate_density(fast_params, se_table, FS4, 0.5)
        assert a == b

    def test_validation(self, se_table, fast_params):
        with pytest.raises(ValidationError):
            simulate_density(fast_params, se_table, FS4, 0.0)
        with pytest.raises(ValidationError):
            SimulationParams(trials=50)


@pytest.fixture(scope="module")
def t4(se_table, fast_params):
    return build_capacity_table(fast_params, se_table, FS4, GRID)


@pytest.fixture(scope="module")
def t5(se_table, fast_params):
    return build_capacity_table(fast_params, se_table, FS5, GRID)


class TestCapacityTable:
    def test_shape_and_monotone(self, t4):
        assert len(t4.rows) == len(GRID)
        caps = [c for _, c in t4.rows]
        assert all(b >= a for a, b in zip(caps, caps[1:]))

    def test_doubling_density_never_reduces_capacity(self, t4):
        by_density = dict(t4.rows)
        for d in (0.01, 0.05, 0.1, 0.5, 1.0):
            assert by_density[d * 2] >= by_density[d]

    def test_5g_dominates_4g(self, t4, t5):
        for (_, c4), (_, c5) in zip(t4.rows, t5.rows):
            assert c5 >= c4
        assert t5.max_capacity > t4.max_capacity

    def test_extra_carrier_never_reduces_capacity(self, se_table, fast_params, t4):
        wider = FrequencySet(Generation.G4, (*FS4.carriers, Carrier(2600.0, 10.0)))
        t_wider = build_capacity_table(fast_params, se_table, wider, GRID)
        for (_, base), (_, more) in zip(t4.rows, t_wider.rows):
            assert more >= base

    def test_thread_count_invariance(self, se_table, fast_params, t4):
        threaded = build_capacity_table(fast_params, se_table, FS4, GRID, jobs=4)
        assert threaded.rows == t4.rows

    def test_isotonic_clip(self):
        assert isotonic_clip([10.0, 9.0, 12.0]) == [10.0, 10.0, 12.0]

    def test_grid_validation(self, se_table, fast_params):
        with pytest.raises(ValidationError):
            build_capacity_table(fast_params, se_table, FS4, (0.1, 0.2))
        with pytest.raises(ValidationError):
            build_capacity_table(fast_params, se_table, FS4, (0.1,) * 8)

    def test_csv_round_trip(self, t4, t5, tmp_path):
        path = tmp_path / "tables.csv"
        save_capacity_tables([t4, t5], path)
        loaded = load_capacity_tables(path)
        assert loaded == [t4, t5]

    def test_cache_key_sensitivity(self, se_table, fast_params):
        import dataclasses
        key = table_cache_key(fast_params, se_table, FS4, GRID)
        assert key == table_cache_key(fast_params, se_table, FS4, GRID)
        other_seed = dataclasses.replace(fast_params, seed=1234)
        assert key != table_cache_key(other_seed, se_table, FS4, GRID)
        assert key != table_cache_key(fast_params, se_table, FS5, GRID)
        assert key != table_cache_key(fast_params, se_table, FS4, GRID[:-1] + (4.0,))


class TestRequiredDensity:
    TABLE = CapacityTable(Generation.G4, "800x10", ((0.5, 60.0), (1.0, 120.0)))

    def test_exact_row_hit(self):
        assert required_density(self.TABLE, 60.0) == (0.5, False)

    def test_zero_demand(self):
        assert required_density(self.TABLE, 0.0) == (0.0, False)

    def test_midpoint_interpolation(self):
        density, flag = required_density(self.TABLE, 90.0)
        assert density == pytest.approx(0.75)
        assert not flag

    def test_below_first_row_anchored_at_origin(self):
        density, flag = required_density(self.TABLE, 30.0)
        assert density == pytest.approx(0.25)
        assert not flag

    def test_above_maximum_flags_unserviceable(self):
        density, flag = required_density(self.TABLE, 130.0)
        assert density == 1.0
        assert flag

    def test_round_trip_on_built_table(self, se_table, fast_params):
        table = build_capacity_table(fast_params, se_table, FS4, GRID)
        for d, c in table.rows:
            if c > 0:
                density, flag = required_density(table, c)
                assert not flag
                assert density <= d + 1e-12

    def test_empty_table_rejected(self):
        with pytest.raises(ValidationError):
            CapacityTable(Generation.G4, "x", ())
