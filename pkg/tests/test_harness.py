"""Synthetic tasks, pooling, and the experiment drivers."""

import math

import numpy as np
import pytest

from certlab.certify import CertifyConfig
from certlab.distributions import GeneralizedGaussian, RngStream, UniformLinf
from certlab.harness import (
    ConstantClassifier,
    LinearClassifier,
    PrototypeClassifier,
    ResolutionSpec,
    DEFAULT_SWEEP_RESOLUTIONS,
    crossing_scan,
    make_blob_task,
    p1_lower_by_q,
    pool_resolution,
    row_key,
    run_bound_vs_certificate,
    run_dimension_sweep,
    smoothing_for_norm,
)
from certlab.bounds import ratio_gengauss_to_gaussian, ratio_iid_to_gaussian
from certlab.certify import estimate_p1_lower
from certlab.statkernel import std_normal_cdf


class TestClassifiers:
    def test_constant(self):
        h = ConstantClassifier(2, num_classes=4)
        assert list(h.predict(np.zeros((3, 5)))) == [2, 2, 2]

    def test_linear_threshold(self):
        h = LinearClassifier(np.array([1.0, 0.0]), t=0.5)
        points = np.array([[0.4, 9.0], [0.6, -9.0]])
        assert list(h.predict(points)) == [0, 1]

    def test_prototype_nearest(self):
        h = PrototypeClassifier(np.array([[0.0, 0.0], [2.0, 0.0]]))
        points = np.array([[0.4, 0.1], [1.8, -0.2], [1.0, 0.0]])
        assert list(h.predict(points)) == [0, 1, 0]  # midpoint ties to earlier center

    def test_prototype_rejects_duplicate_centers(self):
        with pytest.raises(ValueError):
            PrototypeClassifier(np.zeros((2, 3)))

    def test_blob_task_separation_and_accuracy(self):
        h, points = make_blob_task(24, n_classes=3, separation=5.0, task_seed=9)
        dists = [np.linalg.norm(points[i] - points[j])
                 for i in range(3) for j in range(i + 1, 3)]
        assert min(dists) == pytest.approx(5.0, rel=1e-12)
        assert list(h.predict(points)) == [0, 1, 2]

    def test_linear_p1_matches_closed_form(self):
        # MC estimate of P(w.(x+noise) >= t) against Phi((w.x - t)/(sigma |w|))
        gen = RngStream(60, 0).generator()
        w = gen.standard_normal(12)
        h = LinearClassifier(w, t=-0.8)
        sigma, n = 0.7, 100_000
        x = np.zeros(12)
        expected = std_normal_cdf((x @ w + 0.8) / (sigma * np.linalg.norm(w)))
        lower = estimate_p1_lower(h, x, GeneralizedGaussian.from_sigma(2.0, sigma),
                                  1, n, 0.5, RngStream(61, 0))
        # alpha = 0.5 makes the exact bound track the raw proportion closely
        se = math.sqrt(expected * (1 - expected) / n)
        assert abs(lower - expected) <= 3 * se + 1e-3


class TestPooling:
    def test_constant_image(self):
        spec = ResolutionSpec(4, channels=2)
        x = np.full(spec.d, 3.25)
        pooled, small = pool_resolution(x, spec, 2)
        assert small == ResolutionSpec(2, channels=2)
        assert np.allclose(pooled, 3.25)

    def test_block_mean_example(self):
        spec = ResolutionSpec(2, channels=1)
        pooled, small = pool_resolution(np.array([1.0, 3.0, 5.0, 7.0]), spec, 2)
        assert small.d == 1
        assert pooled[0] == pytest.approx(4.0)

    def test_pooled_noise_variance(self):
        spec = ResolutionSpec(4, channels=1)
        n, sigma, k = 100_000, 1.0, 2
        noise = RngStream(62, 0).generator().normal(0.0, sigma, size=(n, spec.d))
        pooled = np.stack([pool_resolution(row, spec, k)[0] for row in noise[:2000]])
        var = pooled.var()
        target = sigma**2 / k**2
        stderr = target * math.sqrt(2.0 / pooled.size)
        assert abs(var - target) <= 4 * stderr

    def test_indivisible_side_rejected(self):
        with pytest.raises(ValueError):
            pool_resolution(np.zeros(3 * 9), ResolutionSpec(3, 3), 2)

    def test_default_sweep_dimensions(self):
        assert [spec.d for spec in DEFAULT_SWEEP_RESOLUTIONS] == [192, 768, 3072]


class TestCrossingScan:
    def test_crossing_in_expected_window(self):
        crossing = crossing_scan(1e-4)
        assert 0.95 < crossing < 0.999

    def test_ordering_below_crossing(self):
        assert ratio_gengauss_to_gaussian(0.9) > ratio_iid_to_gaussian(0.9)

    def test_monotone_once_crossed(self):
        crossing = crossing_scan(1e-4)
        grid = np.arange(crossing, 1 - 1e-6, 1e-4)
        assert all(ratio_gengauss_to_gaussian(float(p)) < ratio_iid_to_gaussian(float(p))
                   for p in grid)

    def test_step_validated(self):
        with pytest.raises(ValueError):
            crossing_scan(0.01)


class TestSmoothingForNorm:
    def test_q_equals_p(self):
        dist = smoothing_for_norm(4.0, 0.5)
        assert isinstance(dist, GeneralizedGaussian) and dist.q == 4.0
        assert dist.sigma == pytest.approx(0.5, rel=1e-12)

    def test_infinity_maps_to_box(self):
        dist = smoothing_for_norm(math.inf, 0.5)
        assert isinstance(dist, UniformLinf)
        assert dist.sigma == pytest.approx(0.5, rel=1e-12)


class TestBoundVsCertificate:
    def test_high_p1_prefers_gengauss_bound(self):
        # constant classifier: p1_lower = alpha^(1/n) = 0.9965..., above the
        # ratio crossing, so the chernoff-style bound is the tighter one
        rows = run_bound_vs_certificate(np.zeros((1, 32)), ConstantClassifier(0),
                                        sigma=0.5, p_list=[4.0, math.inf],
                                        config=CertifyConfig(50, 2000, 0.001, 3))
        assert len(rows) == 2
        for row in rows:
            assert not row["abstain"]
            assert row["p1_lower"] > 0.995
            assert row["tighter_bound_id"] == "gengauss"
            assert row["ratio"] > 1.0
            assert row["gaussian_radius"] <= min(row["iid_bound"], row["gengauss_bound"])

    def test_moderate_p1_prefers_iid_bound(self):
        h, points = make_blob_task(48, separation=2.0, task_seed=4)
        rows = run_bound_vs_certificate(points[:1], h, sigma=1.0, p_list=[2.0],
                                        config=CertifyConfig(100, 20_000, 0.001, 5))
        row = rows[0]
        assert not row["abstain"]
        assert row["p1_lower"] < 0.99
        assert row["tighter_bound_id"] == "iid"

    def test_abstain_rows_have_empty_fields(self):
        h, points = make_blob_task(16, separation=0.1, task_seed=4)
        rows = run_bound_vs_certificate(points[:1], h, sigma=1.0, p_list=[2.0],
                                        config=CertifyConfig(100, 200, 0.001, 6))
        assert rows[0]["abstain"] is True
        assert rows[0]["iid_bound"] is None and rows[0]["gaussian_radius"] is None

    def test_q_list_must_align(self):
        with pytest.raises(ValueError):
            run_bound_vs_certificate(np.zeros((1, 8)), ConstantClassifier(0), 0.5,
                                     [2.0, 4.0], CertifyConfig(10, 100, 0.01, 0),
                                     q_list=[2.0])

    def test_done_keys_skip_rows(self):
        config = CertifyConfig(10, 200, 0.01, 1)
        rows = run_bound_vs_certificate(np.zeros((1, 8)), ConstantClassifier(0), 0.5,
                                        [2.0, 4.0], config)
        done = {row_key(rows[0], ("point_id", "q", "p"))}
        remaining = run_bound_vs_certificate(np.zeros((1, 8)), ConstantClassifier(0), 0.5,
                                             [2.0, 4.0], config, done_keys=done)
        assert len(remaining) == len(rows) - 1


class TestDimensionSweep:
    def _run(self, p_list):
        specs = [ResolutionSpec(8), ResolutionSpec(16), ResolutionSpec(32)]
        factory = lambda d: (ConstantClassifier(0), np.zeros(d))
        return run_dimension_sweep(specs, 0.25, p_list,
                                   CertifyConfig(20, 2000, 0.001, 7),
                                   classifier_factory=factory)

    def test_constant_p1_makes_measured_match_projected(self):
        rows = self._run([2.0, math.inf])
        for row in rows:
            assert row["radius"] == pytest.approx(row["projected_radius"], rel=1e-12)

    def test_p2_projection_flat(self):
        rows = [r for r in self._run([2.0]) if r["p"] == 2.0]
        values = {r["projected_radius"] for r in rows}
        assert max(values) == pytest.approx(min(values), rel=1e-12)

    def test_inf_projection_shrinks_4x(self):
        rows = {r["d"]: r for r in self._run([math.inf])}
        assert rows[192]["projected_radius"] / rows[3072]["projected_radius"] == \
            pytest.approx(4.0, rel=1e-12)

    def test_anchor_is_smallest_dimension(self):
        rows = self._run([2.0])
        assert {r["anchor_d"] for r in rows} == {192}


class TestP1AcrossShapes:
    def test_shape_has_small_effect_on_p1(self):
        h, points = make_blob_task(192, separation=2.2, task_seed=12)
        rows = p1_lower_by_q(h, points[0], sigma=1.0, q_list=[1, 2, 4, 8],
                             config=CertifyConfig(100, 20_000, 0.001, 9))
        assert len(rows) == 4
        values = [r["p1_lower"] for r in rows]
        spread = max(values) - min(values)
        joint_se = math.sqrt(sum(r["stderr"] ** 2 for r in rows) / len(rows))
        assert spread < 5 * joint_se
