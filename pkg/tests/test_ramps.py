"""Ramp construction and adiabatic sweep execution."""

import csv

import numpy as np
import pytest

from rydchain import ed, ramps
from rydchain.couplings import COUPLINGS_48_50, spin_couplings
from rydchain.model import build_chain
from rydchain.ramps import (
    RampSchedule,
    SweepResult,
    SWEEP_COLUMNS,
    _velocity_profile,
    generate_ramp,
    quench_ramp,
    run_sweep,
    static_chain,
    sweep_spec,
    write_sweep_csv,
)


@pytest.fixture(scope="module")
def spec8():
    return sweep_spec(8, d_um=7.0)


@pytest.fixture(scope="module")
def ramp8(spec8):
    # coarse probe is fine: these tests exercise the executor, not the profile
    return generate_ramp(spec8, 24.0 * spec8.j_hz, 1.0, probe_n=6, n_grid=64)


class TestRampSchedule:
    def test_linear_interpolation_between_samples(self):
        r = RampSchedule(times_s=(0.0, 1.0, 3.0), omega_hz=(0.0, 100.0, 300.0))
        assert r.omega_of(0.5) == pytest.approx(50.0)
        assert r.omega_of(2.0) == pytest.approx(200.0)
        assert r.duration_s == 3.0
        assert r.omega_max_hz == 300.0

    def test_rejects_nonzero_start_time(self):
        with pytest.raises(ValueError):
            RampSchedule(times_s=(0.5, 1.0), omega_hz=(0.0, 1.0))

    def test_rejects_non_increasing_times(self):
        with pytest.raises(ValueError):
            RampSchedule(times_s=(0.0, 1.0, 1.0), omega_hz=(0.0, 1.0, 2.0))

    def test_rejects_negative_amplitude(self):
        with pytest.raises(ValueError):
            RampSchedule(times_s=(0.0, 1.0), omega_hz=(0.0, -1.0))

    def test_rejects_nonzero_initial_drive(self):
        with pytest.raises(ValueError):
            RampSchedule(times_s=(0.0, 1.0), omega_hz=(5.0, 10.0))

    def test_rejects_unknown_direction(self):
        with pytest.raises(ValueError):
            RampSchedule(times_s=(0.0, 1.0), omega_hz=(0.0, 1.0), direction="down")

    def test_rejects_cycle_not_returning_to_zero(self):
        with pytest.raises(ValueError):
            RampSchedule(
                times_s=(0.0, 1.0, 2.0), omega_hz=(0.0, 5.0, 5.0), direction="cycle"
            )

    def test_rejects_asymmetric_cycle(self):
        with pytest.raises(ValueError):
            RampSchedule(
                times_s=(0.0, 0.2, 1.8, 2.0),
                omega_hz=(0.0, 5.0, 1.0, 0.0),
                direction="cycle",
            )

    def test_cycle_doubles_and_mirrors(self):
        up = RampSchedule(times_s=(0.0, 0.3, 1.0), omega_hz=(0.0, 4.0, 10.0))
        cyc = up.cycle()
        assert cyc.direction == "cycle"
        assert cyc.duration_s == pytest.approx(2.0)
        t = np.linspace(0.0, 2.0, 41)
        assert np.allclose(cyc.omega_of(t), cyc.omega_of(2.0 - t))
        assert cyc.omega_of(2.0) == 0.0
        assert cyc.omega_of(1.0) == pytest.approx(10.0)
        assert cyc.cycle() is cyc

    def test_rescaled_preserves_shape(self):
        up = RampSchedule(
            times_s=(0.0, 0.3, 1.0), omega_hz=(0.0, 4.0, 10.0),
            floor_velocity_hz_s=2.0,
        )
        slow = up.rescaled(5.0)
        assert slow.duration_s == pytest.approx(5.0)
        t = np.linspace(0.0, 1.0, 17)
        assert np.allclose(slow.omega_of(5.0 * t), up.omega_of(t))
        assert slow.floor_velocity_hz_s == pytest.approx(2.0 / 5.0)
        with pytest.raises(ValueError):
            up.rescaled(0.0)
        with pytest.raises(ValueError):
            quench_ramp(3.0).rescaled(1.0)

    def test_quench_is_zero_duration(self):
        q = quench_ramp(123.0)
        assert q.duration_s == 0.0
        assert q.omega_max_hz == 123.0
        assert q.omega_of(0.0) == 123.0


class TestVelocityProfile:
    def test_flat_magnetization_gives_floor_everywhere(self):
        # deep paramagnet: Mz does not move, dMz/dOmega = 0 at every point
        grid = np.linspace(0.0, 10.0, 21)
        v, floor = _velocity_profile(np.full(21, 0.01), grid, floor_velocity_hz_s=7.0)
        assert floor == 7.0
        assert np.all(v == 7.0)

    def test_slowest_at_peak_susceptibility(self):
        grid = np.linspace(0.0, 10.0, 201)
        mz = np.tanh((5.0 - grid) / 0.8)
        v, _ = _velocity_profile(mz, grid)
        assert abs(grid[np.argmin(v)] - 5.0) < 0.5

    def test_default_floor_is_five_percent_of_mean(self):
        grid = np.linspace(0.0, 10.0, 201)
        mz = np.tanh((5.0 - grid) / 0.8)
        v, floor = _velocity_profile(mz, grid)
        deriv = np.gradient(mz, grid)
        v_raw = 1.0 / np.abs(deriv)
        mean_v = (grid[-1] - grid[0]) / np.sum(np.gradient(grid) / v_raw)
        assert floor == pytest.approx(0.05 * mean_v, rel=1e-12)
        assert np.all(v >= floor)


class TestGenerateRamp:
    def test_endpoints_and_monotonicity(self, spec8, ramp8):
        t = np.asarray(ramp8.times_s)
        w = np.asarray(ramp8.omega_hz)
        assert w[0] == 0.0
        assert w[-1] == pytest.approx(24.0 * spec8.j_hz)
        assert t[0] == 0.0
        assert t[-1] == pytest.approx(1.0)
        assert np.all(np.diff(t) > 0.0)
        assert np.all(np.diff(w) > 0.0)
        assert not ramp8.constant_velocity

    def test_slowest_near_transition(self, spec8):
        # ground-state Mz moves fastest around Omega/J ~ 4.8 for this chain
        ramp = generate_ramp(spec8, 10.0 * spec8.j_hz, 1.0, probe_n=8, n_grid=128)
        t = np.asarray(ramp.times_s)
        w = np.asarray(ramp.omega_hz)
        v = np.diff(w) / np.diff(t)
        w_slowest = w[np.argmin(v)] / spec8.j_hz
        assert 3.5 < w_slowest < 6.0

    def test_constant_velocity_fallback_is_linear(self, spec8):
        ramp = generate_ramp(spec8, 1000.0, 2.0, constant_velocity=True, n_grid=32)
        assert ramp.constant_velocity
        t = np.asarray(ramp.times_s)
        w = np.asarray(ramp.omega_hz)
        assert np.allclose(w, 500.0 * t)

    def test_zero_maximum_gives_silent_ramp(self, spec8):
        ramp = generate_ramp(spec8, 0.0, 1.0, n_grid=16)
        assert ramp.omega_max_hz == 0.0
        assert ramp.constant_velocity

    def test_rejects_bad_arguments(self, spec8):
        with pytest.raises(ValueError):
            generate_ramp(spec8, -1.0, 1.0)
        with pytest.raises(ValueError):
            generate_ramp(spec8, 1.0, 0.0)


class TestSweepSpec:
    def test_operating_point_ratios(self):
        spec = sweep_spec(10, d_um=7.0)
        j = spin_couplings(COUPLINGS_48_50, 7.0).j_hz
        assert spec.j_hz == pytest.approx(j)
        assert spec.jz_hz / spec.j_hz == pytest.approx(-1.6)
        assert spec.dzeta_hz / spec.j_hz == pytest.approx(1.68)
        assert spec.nu_offset_hz == pytest.approx(-2.0 * spec.dzeta_hz)

    def test_static_chain_on_bulk_resonance(self):
        spec = sweep_spec(6, d_um=7.0)
        cs = static_chain(spec, 55.5)
        assert cs.delta_hz == pytest.approx(0.0, abs=1e-9)
        assert cs.delta_edge_hz == pytest.approx(-spec.dzeta_hz)
        assert cs.omega_hz == 55.5
        assert cs.n_sites == 6

    def test_polarized_state_is_drive_off_ground(self):
        spec = sweep_spec(8, d_um=7.0)
        g = ed.ground_state(build_chain(static_chain(spec, 0.0)), method="dense")
        up = ed.product_state(8, "up")
        assert ed.fidelity(g.state, up) == pytest.approx(1.0, abs=1e-12)


def _site_trajectory(n, duration_s, d_um, n_frames=200):
    """Atoms parked exactly on lattice sites: I_b identically one."""
    t = np.linspace(0.0, 1.01 * duration_s, n_frames)
    x = np.tile(d_um * np.arange(n), (n_frames, 1))
    return t, x


class TestRunSweep:
    def test_zero_drive_keeps_polarized_state(self, spec8):
        ramp = generate_ramp(spec8, 0.0, 2.0e-3, n_grid=16)
        res = run_sweep(spec8, ramp, "fixed", checkpoints=9)
        assert np.allclose(res.mz_mean, 1.0, atol=1e-9)
        assert np.allclose(res.fidelity_mean, 1.0, atol=1e-9)

    def test_sudden_quench_overlap(self, spec8):
        w_max = 24.0 * spec8.j_hz
        res = run_sweep(spec8, quench_ramp(w_max), "fixed")
        g = ed.ground_state(build_chain(static_chain(spec8, w_max)), method="dense")
        expected = ed.fidelity(ed.product_state(8, "up"), g.state)
        assert res.fidelity_mean[-1] == pytest.approx(expected, abs=1e-12)
        assert res.mz_mean[-1] == pytest.approx(1.0, abs=1e-12)
        assert len(res.times_s) == 1

    def test_ideal_mode_tracks_ground_state(self, spec8, ramp8):
        res = run_sweep(spec8, ramp8.rescaled(1e-3), "ideal", checkpoints=17)
        assert res.mode == "ideal"
        assert np.all(res.fidelity_mean == 1.0)
        assert res.mz_mean[0] == pytest.approx(1.0, abs=1e-9)
        assert res.mz_mean[-1] < 0.2
        assert res.mx_mean[-1] < -0.9 or res.mx_mean[-1] > 0.9

    def test_slow_fixed_cycle_returns_with_high_fidelity(self, spec8, ramp8):
        cyc = ramp8.cycle().rescaled(20.0 / spec8.j_hz)
        res = run_sweep(spec8, cyc, "fixed")
        assert res.mode == "fixed"
        assert res.n_realizations == 1
        assert res.final_fidelity >= 0.98
        assert res.mz_mean[-1] > 0.97

    def test_cycle_fidelity_non_decreasing_with_duration(self):
        spec = sweep_spec(6, d_um=7.0)
        up = generate_ramp(spec, 24.0 * spec.j_hz, 1.0, probe_n=6, n_grid=48)
        t_base = 6.0 / spec.j_hz
        finals = [
            run_sweep(spec, up.cycle().rescaled(s * t_base), "fixed",
                      checkpoints=33).final_fidelity
            for s in (1.0, 2.0, 4.0)
        ]
        assert finals[1] >= finals[0] - 0.01
        assert finals[2] >= finals[1] - 0.01

    def test_unit_modulation_matches_fixed_exactly(self, spec8, ramp8):
        cyc = ramp8.cycle().rescaled(8.0 / spec8.j_hz)
        fixed = run_sweep(spec8, cyc, "fixed", checkpoints=17)
        traj = _site_trajectory(8, cyc.duration_s, 7.0)
        mot = run_sweep(spec8, cyc, [traj], d_um=7.0, checkpoints=17)
        assert mot.mode == "motional"
        assert np.max(np.abs(mot.fidelity_mean - fixed.fidelity_mean)) < 1e-10
        assert np.max(np.abs(mot.mz_mean - fixed.mz_mean)) < 1e-10

    def test_ensemble_statistics_are_plain_averages(self, spec8, ramp8):
        cyc = ramp8.cycle().rescaled(4.0 / spec8.j_hz)
        rng = np.random.default_rng(11)
        trajs = []
        for _ in range(2):
            t = np.linspace(0.0, 1.01 * cyc.duration_s, 300)
            x = 7.0 * np.arange(8) + 0.08 * np.cos(
                2.0e4 * 2.0 * np.pi * t[:, None] + rng.uniform(0, 2 * np.pi, 8)
            )
            trajs.append((t, x))
        singles = [
            run_sweep(spec8, cyc, [tr], d_um=7.0, checkpoints=9) for tr in trajs
        ]
        both = run_sweep(spec8, cyc, trajs, d_um=7.0, checkpoints=9)
        assert both.n_realizations == 2
        f = np.stack([s.fidelity_mean for s in singles])
        assert np.allclose(both.fidelity_mean, f.mean(axis=0), atol=1e-12)
        assert np.allclose(both.fidelity_std, f.std(axis=0), atol=1e-12)
        m = np.stack([s.mz_mean for s in singles])
        assert np.allclose(both.mz_mean, m.mean(axis=0), atol=1e-12)
        assert len(both.run_final_fidelities) == 2
        assert np.allclose(
            both.run_final_fidelities,
            [s.fidelity_mean[-1] for s in singles],
            atol=1e-12,
        )
        assert both.fidelity_mean[-1] == pytest.approx(
            np.mean(both.run_final_fidelities), abs=1e-12
        )

    def test_md_ensemble_input_path(self, spec8, ramp8):
        from rydchain import evaporation as ev

        n, d = 8, 7.0
        sched = ev.Schedule(
            times_s=(0.0, 1.0),
            l_um=(100.0, 100.0),
            left_height_mhz=(4.0, 4.0),
            right_height_mhz=(4.0, 4.0),
            waist_um=(10.0, 10.0),
            lattice_mhz=(4.0, 4.0),
            lattice_d_um=d,
            phase_bounds_s=(0.1, 0.2, 0.3, 0.4),
        )
        cfg = ev.EvaporationConfig(n_atoms=n, schedule=sched)
        times = np.linspace(0.4, 1.0, 50)
        x = np.tile(d * (np.arange(n) - (n - 1) / 2.0), (len(times), 1))
        ens = ev.TrajectoryEnsemble(
            config=cfg,
            realization_indices=(0,),
            times_s=times,
            x_um=x[:, None, :],
            v_um_s=np.zeros_like(x)[:, None, :],
            alive=np.ones((len(times), 1, n), dtype=bool),
            kinetic_hz=np.zeros((len(times), 1)),
            vdw_hz=np.zeros((len(times), 1)),
            ejections=((),),
            final_t_s=1.0,
            final_x_um=x[-1][None, :],
            final_v_um_s=np.zeros((1, n)),
            final_alive=np.ones((1, n), dtype=bool),
        )
        cyc = ramp8.cycle().rescaled(8.0 / spec8.j_hz)
        fixed = run_sweep(spec8, cyc, "fixed", checkpoints=9)
        mot = run_sweep(spec8, cyc, ens, d_um=d, checkpoints=9)
        assert np.max(np.abs(mot.fidelity_mean - fixed.fidelity_mean)) < 1e-10

    def test_rejects_mismatched_chain_size(self, spec8, ramp8):
        cyc = ramp8.cycle().rescaled(1e-3)
        traj = _site_trajectory(6, cyc.duration_s, 7.0)
        with pytest.raises(ValueError, match="does not match"):
            run_sweep(spec8, cyc, [traj], d_um=7.0)

    def test_rejects_short_trajectory(self, spec8, ramp8):
        cyc = ramp8.cycle().rescaled(1e-3)
        t = np.linspace(0.0, 0.4 * cyc.duration_s, 50)
        x = np.tile(7.0 * np.arange(8), (50, 1))
        with pytest.raises(ValueError, match="cover"):
            run_sweep(spec8, cyc, [(t, x)], d_um=7.0)

    def test_rejects_unknown_mode_and_missing_spacing(self, spec8, ramp8):
        cyc = ramp8.cycle().rescaled(1e-3)
        with pytest.raises(ValueError, match="unknown sweep mode"):
            run_sweep(spec8, cyc, "wobbly")
        with pytest.raises(ValueError, match="d_um"):
            run_sweep(spec8, cyc, [_site_trajectory(8, cyc.duration_s, 7.0)])

    def test_result_validation(self):
        one = np.ones(3)
        with pytest.raises(ValueError, match="fidelity"):
            SweepResult(
                mode="fixed", times_s=one, omega_hz=one, mz_mean=one,
                mz_std=one, mx_mean=one, mx_std=one,
                fidelity_mean=np.array([0.5, 1.2, 0.5]), fidelity_std=one,
                n_realizations=1,
            )
        with pytest.raises(ValueError, match="std"):
            SweepResult(
                mode="fixed", times_s=one, omega_hz=one, mz_mean=one,
                mz_std=-one, mx_mean=one, mx_std=one,
                fidelity_mean=one, fidelity_std=one, n_realizations=1,
            )
        with pytest.raises(ValueError, match="fidelity"):
            SweepResult(
                mode="fixed", times_s=one, omega_hz=one, mz_mean=one,
                mz_std=one, mx_mean=one, mx_std=one,
                fidelity_mean=one, fidelity_std=one, n_realizations=1,
                run_final_fidelities=(0.5, 1.3),
            )


class TestSweepCsv:
    def test_round_trip(self, tmp_path, spec8, ramp8):
        res = run_sweep(spec8, ramp8.rescaled(1e-3), "ideal", checkpoints=9)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(path, res)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == SWEEP_COLUMNS
        assert len(rows) == 1 + 9
        first = rows[1]
        assert float(first[0]) == res.times_s[0]
        assert float(first[2]) == res.mz_mean[0]
        assert first[8] == "ideal"
        last = rows[-1]
        assert float(last[1]) == res.omega_hz[-1]
        assert float(last[6]) == res.fidelity_mean[-1]
