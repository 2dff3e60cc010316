"""Unit tests for the TDOA positioning experiment."""

import math

import numpy as np
import pytest

from hearability.e911 import (
    FCC_P67_M,
    FCC_P90_M,
    E911Config,
    Observations,
    collect_trials,
    default_scenario,
    detected_count,
    fcc_compliance,
    ranging_stddev,
    run_trial,
    solve_tdoa,
    synthesize_observations,
)
from hearability.model import hex_grid_density, effective_density, ShadowingSpec
from hearability.simulate import SimConfig, estimate_pl, sample_ppp, stream

RANGING_AT_UNIT_SINR = 11.6873610268291  # frozen: c/sqrt(8 pi^2 (1e7)^2/12)

NOISELESS = E911Config(bandwidth=math.inf, clock_std=0.0, nlos_mean=0.0)


def square_geometry():
    """Reference BS at the origin plus four corners, strongest first."""
    return np.array(
        [[0.0, 0.0], [500.0, 500.0], [-500.0, 500.0], [500.0, -500.0],
         [-500.0, -500.0]]
    )


def exact_observations(positions: np.ndarray, device: np.ndarray) -> Observations:
    d = np.hypot(positions[:, 0] - device[0], positions[:, 1] - device[1])
    tdoas = d[1:] - d[0]
    cov = np.eye(len(d) - 1)
    return Observations(d, tdoas, cov, 0, np.ones(len(d)), d)


class TestConfig:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError, match="trials"):
            E911Config(trials=50)
        with pytest.raises(ValueError, match="bandwidth"):
            E911Config(bandwidth=0.0)
        with pytest.raises(ValueError, match="min_hearability_grid"):
            E911Config(min_hearability_grid=(3, 4))
        with pytest.raises(ValueError, match="max_bs_per_fix"):
            E911Config(max_bs_per_fix=3)
        with pytest.raises(ValueError, match="expected_bs"):
            E911Config(expected_bs=50)
        with pytest.raises(ValueError, match="pre_sinr_threshold"):
            E911Config(pre_sinr_threshold=0.0)

    def test_default_scenario_wiring(self):
        cfg = E911Config()
        scen = default_scenario(cfg)
        lam = effective_density(
            hex_grid_density(500.0), 3.76, ShadowingSpec(8.0, enabled=True)
        )
        np.testing.assert_allclose(scen.lam, lam, rtol=1e-12)
        np.testing.assert_allclose(scen.lam, 7.4645294e-06, rtol=1e-6)
        gamma = 10.0 ** 0.8
        np.testing.assert_allclose(scen.gamma, gamma, rtol=1e-12)
        # Detection uses the pre-processing SINR, so beta folds the
        # processing gain back in: beta/gamma = pre_sinr_threshold.
        np.testing.assert_allclose(
            scen.beta / scen.gamma, cfg.pre_sinr_threshold, rtol=1e-12
        )
        assert scen.p == scen.q == 1.0 and scen.L == 4


class TestRangingStddev:
    def test_frozen_unit_sinr_value(self):
        np.testing.assert_allclose(
            ranging_stddev(1.0, E911Config()), RANGING_AT_UNIT_SINR, rtol=1e-12
        )

    def test_inline_rederivation(self):
        cfg = E911Config()
        expected = 299792458.0 / math.sqrt(8.0 * math.pi**2 * 1e14 / 12.0)
        np.testing.assert_allclose(ranging_stddev(1.0, cfg), expected, rtol=1e-12)

    def test_scaling_laws(self):
        cfg = E911Config()
        base = ranging_stddev(1.0, cfg)
        np.testing.assert_allclose(ranging_stddev(4.0, cfg), base / 2.0, rtol=1e-12)
        np.testing.assert_allclose(
            ranging_stddev(1.0, cfg.replace(bandwidth=2e7)), base / 2.0, rtol=1e-12
        )

    def test_infinite_bandwidth_is_noiseless(self):
        assert ranging_stddev(1.0, E911Config(bandwidth=math.inf)) == 0.0

    def test_rejects_nonpositive_sinr(self):
        with pytest.raises(ValueError, match="post_sinr"):
            ranging_stddev(0.0, E911Config())


@pytest.fixture()
def one_realization():
    # Index 12 at seed 3 hears 7 BSs, enough for every path below.
    cfg = E911Config()
    scen = default_scenario(cfg)
    sim = SimConfig(realizations=1, seed=3, expected_bs=cfg.expected_bs)
    return cfg, scen, sample_ppp(scen, sim, 12)


class TestSynthesize:
    def test_noiseless_measurements_are_exact(self, one_realization):
        _, scen, real = one_realization
        rng = stream(0, 0, 6)
        obs, positions = synthesize_observations(real, scen, NOISELESS, rng)
        used = len(obs.pseudoranges)
        assert used >= 4
        np.testing.assert_allclose(obs.pseudoranges, real.distances[:used], rtol=1e-12)
        np.testing.assert_allclose(
            obs.tdoas, real.distances[1:used] - real.distances[0], rtol=1e-9
        )
        np.testing.assert_allclose(
            np.hypot(positions[:, 0], positions[:, 1]),
            real.distances[:used],
            rtol=1e-12,
        )
        np.testing.assert_array_equal(obs.covariance, np.eye(used - 1))

    def test_detection_prefix_sets_used_count(self, one_realization):
        cfg, scen, real = one_realization
        rng = stream(0, 0, 6)
        obs, _ = synthesize_observations(real, scen, cfg, rng)
        assert len(obs.pseudoranges) == detected_count(real, scen, cfg)

    def test_bs_cap_limits_fix_size(self, one_realization):
        cfg, scen, real = one_realization
        capped = cfg.replace(max_bs_per_fix=5)
        obs, positions = synthesize_observations(real, scen, capped, stream(0, 0, 6))
        assert len(obs.pseudoranges) <= 5 and len(positions) <= 5

    def test_nlos_bias_statistics(self, one_realization):
        _, scen, real = one_realization
        nlos_only = E911Config(bandwidth=math.inf, clock_std=0.0, nlos_mean=30.0)
        biases = []
        for i in range(300):
            rng = stream(11, i, 6)
            obs, _ = synthesize_observations(real, scen, nlos_only, rng)
            used = len(obs.pseudoranges)
            biases.append(obs.pseudoranges - real.distances[:used])
        pooled = np.concatenate(biases)
        assert np.all(pooled >= 0.0)
        se = 30.0 / math.sqrt(len(pooled))  # exponential: std = mean
        assert abs(pooled.mean() - 30.0) <= 3.0 * se

    def test_covariance_structure(self, one_realization):
        cfg, scen, real = one_realization
        obs, _ = synthesize_observations(real, scen, cfg, stream(0, 0, 6))
        sigma = np.array([ranging_stddev(s, cfg) for s in obs.post_sinrs])
        var = sigma**2 + (cfg.speed_of_light * cfg.clock_std) ** 2
        np.testing.assert_allclose(
            obs.covariance, np.diag(var[1:]) + var[0], rtol=1e-12
        )


class TestSolveTdoa:
    def test_noiseless_point_recovered(self):
        device = np.array([100.0, 50.0])
        positions = square_geometry()
        out = solve_tdoa(exact_observations(positions, device), positions)
        assert out.position is not None
        np.testing.assert_allclose(out.position, device, atol=1e-6)
        assert out.method in ("chan", "gauss-newton")

    def test_degenerate_centroid_point(self):
        # At the centroid the stage-one unknowns vanish; the solver must
        # fall through to the iterative path and still land exactly.
        device = np.array([0.0, 0.0])
        positions = square_geometry()
        out = solve_tdoa(exact_observations(positions, device), positions)
        np.testing.assert_allclose(out.position, device, atol=1e-6)

    def test_translation_and_rotation_equivariance(self):
        device = np.array([120.0, -80.0])
        positions = square_geometry()
        base = solve_tdoa(exact_observations(positions, device), positions)
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])  # 90 degrees
        shift = np.array([1000.0, -300.0])
        moved_pos = positions @ rot.T + shift
        moved_dev = rot @ device + shift
        moved = solve_tdoa(exact_observations(moved_pos, moved_dev), moved_pos)
        np.testing.assert_allclose(
            np.asarray(moved.position), rot @ np.asarray(base.position) + shift,
            atol=1e-6,
        )

    def test_too_few_bs_is_no_fix(self):
        device = np.array([10.0, 10.0])
        positions = square_geometry()[:3]
        out = solve_tdoa(exact_observations(positions, device), positions)
        assert out.position is None and out.method == "none"

    def test_closed_form_tracks_oracle_under_noise(self):
        # Fixed five-BS geometry, 10 m Gaussian pseudorange noise: the
        # production solver must stay within 20% of the median error of
        # a weighted Gauss-Newton oracle started at the truth, on
        # identical draws.
        device = np.array([30.0, -20.0])
        positions = square_geometry()
        d = np.hypot(positions[:, 0] - device[0], positions[:, 1] - device[1])
        cov = np.eye(4) * 100.0 + 100.0
        weight = np.linalg.inv(cov)
        rng = np.random.Generator(np.random.Philox(2024))
        solver_err, oracle_err = [], []
        for _ in range(3000):
            pseudo = d + rng.normal(0.0, 10.0, size=5)
            tdoas = pseudo[1:] - pseudo[0]
            obs = Observations(pseudo, tdoas, cov, 0, np.ones(5), d)
            out = solve_tdoa(obs, positions)
            assert out.position is not None
            solver_err.append(math.hypot(*(np.asarray(out.position) - device)))
            oracle_err.append(
                _oracle_gn_error(tdoas, positions, weight, device)
            )
        ratio = np.median(solver_err) / np.median(oracle_err)
        assert 0.8 <= ratio <= 1.2


def _oracle_gn_error(tdoas, positions, weight, device) -> float:
    """Weighted Gauss-Newton from the true point; reference solver."""
    x = device.astype(float).copy()
    p_ref = positions[0]
    p_others = positions[1:]
    for _ in range(60):
        diff_o = x - p_others
        dist_o = np.hypot(diff_o[:, 0], diff_o[:, 1])
        dist_r = math.hypot(*(x - p_ref))
        res = dist_o - dist_r - tdoas
        jac = diff_o / dist_o[:, None] - (x - p_ref) / dist_r
        step = np.linalg.solve(jac.T @ weight @ jac, -(jac.T @ weight @ res))
        x = x + step
        if np.linalg.norm(step) < 1e-10:
            break
    return math.hypot(*(x - device))


class TestTrials:
    def test_run_trial_deterministic(self):
        cfg = E911Config(trials=100)
        scen = default_scenario(cfg)
        a = run_trial(cfg, scen, seed=5, index=17)
        b = run_trial(cfg, scen, seed=5, index=17)
        assert a == b
        assert a.detected >= 0
        if a.position is not None:
            np.testing.assert_allclose(a.error_m, math.hypot(*a.position), rtol=1e-12)

    def test_collect_trials_worker_invariant(self):
        cfg = E911Config(trials=200)
        serial = collect_trials(cfg, seed=9, workers=1)
        parallel = collect_trials(cfg, seed=9, workers=3)
        np.testing.assert_array_equal(serial, parallel)
        assert serial.shape == (200, 2)
        assert np.all(serial[:, 0] == np.round(serial[:, 0]))

    def test_detection_rate_matches_hearability_model(self):
        # P(detected >= 4) from the positioning path must agree with the
        # plain Monte Carlo P_4 at the same scenario.
        cfg = E911Config(trials=2000)
        scen = default_scenario(cfg)
        trials = collect_trials(cfg, seed=2)
        rate = float((trials[:, 0] >= 4).mean())
        ref = estimate_pl(
            scen, SimConfig(realizations=2000, seed=77, expected_bs=cfg.expected_bs)
        )
        se = math.hypot(ref.stderr, math.sqrt(rate * (1 - rate) / cfg.trials))
        assert abs(rate - ref.estimate) <= 3.0 * se


class TestCompliance:
    def test_table_structure(self):
        cfg = E911Config(trials=2000)
        rows = fcc_compliance(cfg, seed=1)
        assert [r.min_hearability for r in rows] == [4, 5, 6, 7, 8]
        fixes = [r.fixes for r in rows]
        assert all(a >= b for a, b in zip(fixes, fixes[1:]))
        rates = [r.no_fix_rate for r in rows]
        assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
        for r in rows:
            assert r.p67_m <= r.p90_m
            assert r.passes == (r.p67_m <= FCC_P67_M and r.p90_m <= FCC_P90_M)
            np.testing.assert_allclose(r.no_fix_rate, 1.0 - r.fixes / cfg.trials)

    def test_accuracy_improves_with_hearability(self):
        rows = fcc_compliance(E911Config(trials=2000), seed=1)
        p67 = [r.p67_m for r in rows]
        assert all(a >= b - 1e-9 for a, b in zip(p67, p67[1:]))

    def test_nlos_removal_helps(self):
        cfg = E911Config(trials=1000)
        with_nlos = fcc_compliance(cfg, seed=3)
        without = fcc_compliance(cfg.replace(nlos_mean=0.0), seed=3)
        assert without[0].p67_m < with_nlos[0].p67_m
