"""Unit tests for the Monte Carlo truth machinery.

The distribution-law tests condition exactly as the sampling theory
prescribes and turn each conditional law into a pooled uniform sample
via its probability integral transform, checked with Kolmogorov-Smirnov
at fixed seeds.
"""

import math

import numpy as np
import pytest
from scipy import stats

from hearability.analytic import mean_i1, mean_i2
from hearability.model import Realization, Scenario, ShadowingSpec
from hearability.simulate import (
    Deployment,
    SimConfig,
    TruthMode,
    collect_band_cummins,
    collect_margins,
    collect_upsilon,
    estimate_pl,
    estimate_pl_curve,
    estimate_pl_reuse,
    hearability_curve,
    participation_metric,
    reuse_success_curve,
    sample_conditional_bpp,
    sample_hex,
    sample_ppp,
    stream,
)

SCEN = Scenario(lam=1.0, alpha=4.0, p=1.0, q=1.0, beta=0.1, gamma=1.0, L=4)
PARTIAL = SCEN.replace(p=2.0 / 3.0)


def cfg(n: int, seed: int = 0, **kw) -> SimConfig:
    return SimConfig(realizations=n, seed=seed, **kw)


def make_realization(distances, u, K: int = 1, p: float = 1.0, q: float = 1.0,
                     L: int = 1) -> Realization:
    d = np.asarray(distances, dtype=float)
    u = np.asarray(u, dtype=float)
    n = len(d)
    activity = u < np.where(np.arange(n) < L, p, q)
    return Realization(d, activity, np.ones(n, dtype=np.int64), u, float(d.max()) + 1.0)


class TestStream:
    def test_keyed_and_reproducible(self):
        a = stream(7, 3, 1).random(4)
        b = stream(7, 3, 1).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, stream(7, 4, 1).random(4))
        assert not np.array_equal(a, stream(7, 3, 2).random(4))
        assert not np.array_equal(a, stream(8, 3, 1).random(4))


class TestSamplePpp:
    def test_structure(self):
        real = sample_ppp(SCEN, cfg(1, seed=11), 0)
        d = real.distances
        assert np.all(np.diff(d) >= 0.0) and np.all(d > 0.0)
        assert np.all(d <= real.window_radius)
        np.testing.assert_allclose(
            real.window_radius, math.sqrt(1000.0 / math.pi), rtol=1e-12
        )
        assert real.bands.min() == real.bands.max() == 1
        assert len(real.activity) == len(d) == len(real.activity_u)

    def test_reproducible_per_index(self):
        a = sample_ppp(SCEN, cfg(1, seed=11), 5)
        b = sample_ppp(SCEN, cfg(1, seed=11), 5)
        np.testing.assert_array_equal(a.distances, b.distances)
        assert not np.array_equal(
            a.distances, sample_ppp(SCEN, cfg(1, seed=11), 6).distances
        )

    def test_point_count_is_poisson(self):
        counts = [
            len(sample_ppp(SCEN, cfg(1, seed=3, expected_bs=200), i).distances)
            for i in range(400)
        ]
        mean = np.mean(counts)
        # 3 sigma band for the mean of 400 Poisson(200) draws.
        assert abs(mean - 200.0) <= 3.0 * math.sqrt(200.0 / 400.0)

    def test_activity_rates_split_at_L(self):
        near = far = near_n = far_n = 0
        for i in range(300):
            real = sample_ppp(PARTIAL, cfg(1, seed=9, expected_bs=100), i)
            near += int(real.activity[: PARTIAL.L].sum())
            near_n += PARTIAL.L
            far += int(real.activity[PARTIAL.L:].sum())
            far_n += len(real.activity) - PARTIAL.L
        assert abs(near / near_n - PARTIAL.p) <= 3.0 * math.sqrt(0.25 / near_n)
        assert abs(far / far_n - PARTIAL.q) <= 3.0 * math.sqrt(0.25 / far_n)

    def test_band_labels_cover_reuse_factor(self):
        real = sample_ppp(SCEN.replace(K=3), cfg(1, seed=2), 0)
        assert set(np.unique(real.bands)) == {1, 2, 3}

    def test_small_window_rejected(self):
        with pytest.raises(ValueError, match="expected_bs"):
            sample_ppp(SCEN, cfg(1, expected_bs=30), 0)


class TestSampleHex:
    def test_structure_without_shadowing(self):
        config = cfg(1, seed=4, deployment=Deployment.HEX, expected_bs=200)
        real = sample_hex(SCEN, config, 0)
        d = real.distances
        assert len(d) == 200
        assert np.all(np.diff(d) >= 0.0) and np.all(d > 0.0)
        # The device sits inside some cell: its nearest site is at most
        # the cell circumradius away.
        assert d[0] <= 500.0 / math.sqrt(3.0) + 1e-9

    def test_cell_offset_varies_with_index(self):
        config = cfg(1, seed=4, deployment=Deployment.HEX, expected_bs=100)
        a = sample_hex(SCEN, config, 0)
        b = sample_hex(SCEN, config, 1)
        assert not np.array_equal(a.distances, b.distances)

    def test_shadowing_reorders_by_received_power(self):
        config = cfg(
            1, seed=4, deployment=Deployment.HEX, expected_bs=100,
            shadow=ShadowingSpec(sigma_db=8.0, enabled=True),
        )
        real = sample_hex(SCEN, config, 0)
        assert np.all(np.diff(real.distances) >= 0.0)
        # Equivalent distances differ from the geometric ones.
        plain = sample_hex(SCEN, cfg(1, seed=4, deployment=Deployment.HEX,
                                     expected_bs=100), 0)
        assert not np.allclose(real.distances, plain.distances)


class TestSampleConditionalBpp:
    def test_disk_squared_radius_is_uniform(self):
        rng = np.random.Generator(np.random.Philox(1234))
        r = sample_conditional_bpp("disk", 20000, 0.0, 2.0, rng)
        assert stats.kstest((r / 2.0) ** 2, "uniform").pvalue > 0.01

    def test_annulus_respects_bounds(self):
        rng = np.random.Generator(np.random.Philox(99))
        r = sample_conditional_bpp("annulus", 5000, 1.0, 3.0, rng)
        assert r.min() >= 1.0 and r.max() <= 3.0
        v = (r * r - 1.0) / (9.0 - 1.0)
        assert stats.kstest(v, "uniform").pvalue > 0.01

    def test_rejects_bad_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError, match="region"):
            sample_conditional_bpp("square", 10, 0.0, 1.0, rng)
        with pytest.raises(ValueError, match="count"):
            sample_conditional_bpp("disk", -1, 0.0, 1.0, rng)
        with pytest.raises(ValueError, match="outer_radius"):
            sample_conditional_bpp("disk", 10, 0.0, 0.0, rng)
        with pytest.raises(ValueError, match="inner_radius"):
            sample_conditional_bpp("annulus", 10, 5.0, 1.0, rng)


@pytest.fixture(scope="module")
def partial_realizations():
    """Shared small-window draws for the conditional-law tests."""
    config = cfg(4000, seed=21, expected_bs=48)
    return [sample_ppp(PARTIAL, config, i) for i in range(config.realizations)]


class TestConditionalLaws:
    """Probability integral transforms of the conditioned BPP structure."""

    def test_inner_points_uniform_on_disk(self, partial_realizations):
        # Given R_L, the L-1 nearer BSs are i.i.d. uniform on the disk
        # of radius R_L: pooled (r_i / R_L)^2 must be U(0,1).
        L = PARTIAL.L
        pooled = np.concatenate(
            [(r.distances[: L - 1] / r.distances[L - 1]) ** 2
             for r in partial_realizations]
        )
        assert stats.kstest(pooled, "uniform").pvalue > 0.01

    def test_dominant_interferer_law_per_omega(self, partial_realizations):
        # Given Omega = omega actives among the L-1 nearest, the nearest
        # active sits at R1_hat with survival ((R_L^2-r^2)/R_L^2)^omega.
        L = PARTIAL.L
        buckets: dict[int, list[float]] = {1: [], 2: [], 3: []}
        for r in partial_realizations:
            marks = r.activity[: L - 1]
            omega = int(marks.sum())
            if omega == 0:
                continue
            rl = r.distances[L - 1]
            r1 = r.distances[: L - 1][marks].min()
            buckets[omega].append(((rl * rl - r1 * r1) / (rl * rl)) ** omega)
        for omega, values in buckets.items():
            assert len(values) > 300
            assert stats.kstest(np.asarray(values), "uniform").pvalue > 0.01

    def test_outer_points_uniform_on_annulus(self, partial_realizations):
        # Beyond R_L the points are i.i.d. uniform on the annulus up to
        # the window: pooled (r^2-R_L^2)/(W^2-R_L^2) must be U(0,1).
        L = PARTIAL.L
        pooled = []
        for r in partial_realizations[:1500]:
            rl = r.distances[L - 1]
            w = r.window_radius
            outer = r.distances[L:]
            pooled.append((outer * outer - rl * rl) / (w * w - rl * rl))
        pooled = np.concatenate(pooled)
        assert stats.kstest(pooled, "uniform").pvalue > 0.01

    def test_near_interference_mean(self, partial_realizations):
        # The remaining omega-1 actives are uniform on the annulus
        # (R1_hat, R_L); their summed power must match mean_i1 on
        # average.  Restrict to non-degenerate annuli to keep the
        # residual variance tame; the conditional mean is unaffected.
        L = PARTIAL.L
        residuals = []
        for r in partial_realizations:
            marks = r.activity[: L - 1]
            omega = int(marks.sum())
            if omega < 2:
                continue
            rl = r.distances[L - 1]
            actives = r.distances[: L - 1][marks]
            r1 = actives.min()
            if r1 < 0.3 * rl:
                continue
            others = float(np.sum(actives ** -PARTIAL.alpha)) - r1 ** -PARTIAL.alpha
            residuals.append(others - mean_i1(r1, rl, omega, PARTIAL))
        residuals = np.asarray(residuals)
        assert len(residuals) > 1000
        se = residuals.std(ddof=1) / math.sqrt(len(residuals))
        assert abs(residuals.mean()) <= 3.0 * se

    def test_far_interference_mean(self, partial_realizations):
        # Window-truncated far-field mean: the infinite-network formula
        # minus the tail beyond the sampling window.
        L, alpha, q, lam = PARTIAL.L, PARTIAL.alpha, PARTIAL.q, PARTIAL.lam
        residuals = []
        for r in partial_realizations:
            rl = r.distances[L - 1]
            w = r.window_radius
            act = r.activity[L:]
            actual = float(np.sum(r.distances[L:][act] ** -alpha))
            expected = mean_i2(rl, PARTIAL) - (
                2.0 * math.pi * q * lam / (alpha - 2.0) * w ** (2.0 - alpha)
            )
            residuals.append(actual - expected)
        residuals = np.asarray(residuals)
        se = residuals.std(ddof=1) / math.sqrt(len(residuals))
        assert abs(residuals.mean()) <= 3.0 * se


class TestMargins:
    def test_deterministic_and_worker_invariant(self):
        config = cfg(600, seed=31, expected_bs=100)
        serial = collect_margins(SCEN, config, workers=1)
        again = collect_margins(SCEN, config, workers=1)
        parallel = collect_margins(SCEN, config, workers=3)
        np.testing.assert_array_equal(serial, again)
        np.testing.assert_array_equal(serial, parallel)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_joint_equals_last_at_deterministic_marks(self, p):
        scen = SCEN.replace(p=p)
        m = collect_margins(scen, cfg(800, seed=5, expected_bs=100))
        np.testing.assert_array_equal(m[:, 0], m[:, 1])

    def test_joint_close_to_last_in_between(self):
        m = collect_margins(PARTIAL, cfg(20000, seed=5))
        thr = 10.0 ** -1.2
        pj = float((m[:, 0] >= thr).mean())
        pl = float((m[:, 1] >= thr).mean())
        assert pj <= pl + 1e-12  # joint detection is the stricter event
        assert pl - pj < 0.01

    def test_estimate_matches_curve(self):
        config = cfg(2000, seed=8, expected_bs=100)
        curve = estimate_pl_curve(SCEN, config, np.array([0.02, 0.05]))
        for thr, point in zip((0.02, 0.05), curve):
            scen = SCEN.replace(beta=thr, gamma=1.0)
            single = estimate_pl(scen, config)
            assert point.successes == single.successes
            assert point.n == single.n == 2000

    def test_truth_mode_selects_margin(self):
        config = cfg(2000, seed=8, expected_bs=100)
        joint = estimate_pl(PARTIAL.replace(beta=0.05), config)
        last = estimate_pl(
            PARTIAL.replace(beta=0.05),
            cfg(2000, seed=8, expected_bs=100, truth_mode=TruthMode.LAST_BS_ONLY),
        )
        assert last.successes >= joint.successes

    def test_stderr_formula(self):
        est = estimate_pl(SCEN.replace(beta=0.02), cfg(500, seed=8, expected_bs=100))
        mean = est.successes / 500
        np.testing.assert_allclose(est.estimate, mean)
        np.testing.assert_allclose(est.stderr, math.sqrt(mean * (1 - mean) / 500))


class TestParticipationMetric:
    def test_prefix_hand_case(self):
        real = make_realization([1.0, 2.0, 4.0], [0.5, 0.5, 0.5])
        base = SCEN.replace(gamma=1.0)
        # SINRs: 15.06, 0.0623, 0.00368 (alpha=4, all active).
        assert participation_metric(real, base.replace(beta=0.05)) == 2
        assert participation_metric(real, base.replace(beta=0.1)) == 1
        assert participation_metric(real, base.replace(beta=20.0)) == 0
        assert participation_metric(real, base.replace(beta=0.003)) == 3

    def test_lone_bs_with_no_noise_is_always_detected(self):
        real = make_realization([5.0], [0.5])
        assert participation_metric(real, SCEN.replace(beta=100.0)) == 1

    def test_inactive_bs_breaks_prefix(self):
        # Second BS silent (u above q): its SINR check fails only
        # because detection requires participation.
        scen = SCEN.replace(p=0.6, q=0.6, beta=0.001)
        real = make_realization([1.0, 2.0, 4.0], [0.1, 0.9, 0.1],
                                p=0.6, q=0.6, L=scen.L)
        # Prefix stops at the first BS whose SINR fails; an inactive
        # member contributes no interference but cannot be counted.
        assert participation_metric(real, scen) >= 1

    def test_generic_path_agrees_with_fast_path(self):
        # Forcing the generic scan with identical marks per candidate
        # count must reproduce the p==q prefix shortcut.
        rng = np.random.default_rng(17)
        for _ in range(50):
            d = np.sort(rng.uniform(0.3, 6.0, size=12))
            u = rng.random(12)
            scen = SCEN.replace(p=0.7, q=0.7, beta=0.02)
            real = make_realization(d, u, p=0.7, q=0.7, L=scen.L)
            fast = participation_metric(real, scen)
            forced = participation_metric(
                real, scen, independent_u=np.tile(u, (32, 1))
            )
            assert fast == forced

    def test_respects_cap(self):
        d = np.linspace(1.0, 2.0, 10)
        real = make_realization(d, np.full(10, 0.5))
        scen = SCEN.replace(beta=1e-9)
        assert participation_metric(real, scen, cap=4) == 4

    def test_counts_accumulate_across_bands(self):
        # Two far-apart singleton bands, each trivially detectable.
        d = np.array([1.0, 1.5])
        real = Realization(
            d, np.array([True, True]), np.array([1, 2]), np.array([0.5, 0.5]), 10.0
        )
        scen = SCEN.replace(K=2, beta=1e-6)
        assert participation_metric(real, scen) == 2


class TestUpsilonCollection:
    def test_deterministic_and_worker_invariant(self):
        config = cfg(400, seed=13, expected_bs=100)
        serial = collect_upsilon(SCEN.replace(beta=0.02), config)
        parallel = collect_upsilon(SCEN.replace(beta=0.02), config, workers=3)
        np.testing.assert_array_equal(serial, parallel)

    def test_matches_joint_margins_at_full_activity(self):
        # With p == q == 1 and one band, Upsilon >= L iff the joint
        # margin clears beta/gamma: identical success counts.
        scen = SCEN.replace(beta=10.0 ** -1.6)
        config = cfg(3000, seed=19, expected_bs=100)
        from_upsilon = hearability_curve(scen, config, np.array([scen.L]))[0]
        from_margins = estimate_pl(scen, config)
        assert from_upsilon.successes == from_margins.successes

    def test_curve_is_monotone_in_l(self):
        scen = SCEN.replace(beta=0.02)
        curve = hearability_curve(
            scen, cfg(2000, seed=23, expected_bs=100), np.arange(1, 8)
        )
        values = [c.estimate for c in curve]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_independent_redraw_flag_runs(self):
        scen = PARTIAL.replace(q=PARTIAL.p, beta=0.02)
        coupled = collect_upsilon(scen, cfg(300, seed=29, expected_bs=64))
        redrawn = collect_upsilon(
            scen, cfg(300, seed=29, expected_bs=64, coupled_activity=False)
        )
        assert coupled.shape == redrawn.shape
        assert not np.array_equal(coupled, redrawn)


class TestReuseCollection:
    def test_requires_matched_marks(self):
        with pytest.raises(ValueError, match="p = q"):
            collect_band_cummins(SCEN.replace(p=0.5, q=0.75, K=3), cfg(10))

    def test_single_band_equals_plain_estimate(self):
        scen = SCEN.replace(beta=10.0 ** -1.6)
        config = cfg(2000, seed=37, expected_bs=100)
        plain = estimate_pl(scen, config)
        accumulated = estimate_pl_reuse(scen, config)
        assert plain.successes == accumulated.successes

    def test_reuse_curve_matches_pointwise_estimates(self):
        scen = SCEN.replace(K=3)
        config = cfg(1500, seed=41, expected_bs=120)
        thresholds = np.array([0.02, 0.08])
        curve = reuse_success_curve(scen, config, thresholds)
        for thr, point in zip(thresholds, curve):
            single = estimate_pl_reuse(scen.replace(beta=thr), config)
            assert point.successes == single.successes

    def test_worker_invariance(self):
        scen = SCEN.replace(K=3)
        config = cfg(600, seed=43, expected_bs=120)
        a = collect_band_cummins(scen, config, workers=1)
        b = collect_band_cummins(scen, config, workers=3)
        np.testing.assert_array_equal(a, b)

    def test_cummin_shape_and_padding(self):
        scen = SCEN.replace(K=6)
        out = collect_band_cummins(scen, cfg(50, seed=47, upsilon_cap=8), workers=1)
        assert out.shape == (50, 6, 8)
        # Prefix minima never increase along the cap axis.
        finite = np.where(np.isfinite(out), out, np.inf)
        assert np.all(np.diff(np.minimum.accumulate(finite, axis=2), axis=2) <= 0.0)


class TestDensityAndShadowInvariance:
    def test_density_scaling_within_noise(self):
        scen = SCEN.replace(beta=10.0 ** -1.6)
        a = estimate_pl(scen, cfg(4000, seed=51, expected_bs=100))
        b = estimate_pl(scen.replace(lam=10.0), cfg(4000, seed=52, expected_bs=100))
        assert abs(a.estimate - b.estimate) <= 3.0 * math.hypot(a.stderr, b.stderr)

    def test_shadowed_ppp_is_a_density_change(self):
        scen = SCEN.replace(beta=10.0 ** -1.6)
        plain = estimate_pl(scen, cfg(4000, seed=53, expected_bs=100))
        shadowed = estimate_pl(
            scen,
            cfg(4000, seed=54, expected_bs=100,
                shadow=ShadowingSpec(sigma_db=8.0, enabled=True)),
        )
        assert abs(plain.estimate - shadowed.estimate) <= 3.0 * math.hypot(
            plain.stderr, shadowed.stderr
        )
