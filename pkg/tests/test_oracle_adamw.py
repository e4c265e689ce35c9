"""Reference AdamW semantics and the update-combination reconstruction."""

import math

import numpy as np
import pytest

from lrdual import (
    DivergenceError,
    DomainError,
    NonFiniteGradientError,
    ScheduleKind,
    ScheduleSpec,
    ValidationError,
    coefficients_at,
)
from lrdual.oracle import (
    AdamWConfig,
    AdamWState,
    QuadraticProblem,
    adamw_step,
    reconstruct_from_updates,
    train,
)


def spec_of(kind="linear", total=50, warmup=5, peak=0.1, ratio=0.0):
    return ScheduleSpec(
        kind=ScheduleKind(kind),
        total_steps=total,
        peak_base_lr=peak,
        warmup_steps=warmup,
        decay_ratio=ratio,
    )


class TestAdamWStep:
    def test_first_step_moves_against_gradient_sign(self):
        config = AdamWConfig(weight_decay=0.0, epsilon=1e-12)
        state = AdamWState.initial(np.zeros(3))
        new = adamw_step(state, np.array([3.7, -2.2, 0.5]), lr=0.01, config=config)
        np.testing.assert_allclose(new.theta, [-0.01, 0.01, -0.01], rtol=1e-9)
        assert new.step == 1

    def test_zero_lr_freezes_parameters(self):
        config = AdamWConfig(weight_decay=0.1)
        state = AdamWState.initial(np.array([1.0, -2.0]))
        new = adamw_step(state, np.array([5.0, 5.0]), lr=0.0, config=config)
        np.testing.assert_array_equal(new.theta, state.theta)
        assert new.m[0] != 0.0  # moments still advance

    def test_two_steps_match_hand_unrolled_recurrence(self):
        # oracle: the definitional recurrence evaluated inline
        beta1, beta2, eps, lr, wd = 0.9, 0.999, 1e-8, 0.1, 0.0
        g1 = g2 = 1.0
        m1 = (1 - beta1) * g1
        v1 = (1 - beta2) * g1 * g1
        u1 = (m1 / (1 - beta1)) / (math.sqrt(v1 / (1 - beta2)) + eps)
        th1 = (1 - lr * wd) * 0.0 - lr * u1
        m2 = beta1 * m1 + (1 - beta1) * g2
        v2 = beta2 * v1 + (1 - beta2) * g2 * g2
        u2 = (m2 / (1 - beta1**2)) / (math.sqrt(v2 / (1 - beta2**2)) + eps)
        th2 = (1 - lr * wd) * th1 - lr * u2

        config = AdamWConfig(weight_decay=wd, beta1=beta1, beta2=beta2, epsilon=eps)
        state = AdamWState.initial(np.zeros(1))
        state = adamw_step(state, np.array([g1]), lr, config)
        assert state.theta[0] == pytest.approx(th1, rel=1e-15)
        state = adamw_step(state, np.array([g2]), lr, config)
        assert state.theta[0] == pytest.approx(th2, rel=1e-15)

    def test_non_finite_gradient_poisons(self):
        state = AdamWState.initial(np.zeros(2))
        with pytest.raises(NonFiniteGradientError):
            adamw_step(state, np.array([1.0, np.nan]), 0.1, AdamWConfig())

    def test_negative_lr_rejected(self):
        state = AdamWState.initial(np.zeros(1))
        with pytest.raises(DomainError):
            adamw_step(state, np.ones(1), -0.1, AdamWConfig())

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            AdamWConfig(beta1=1.0)
        with pytest.raises(ValidationError):
            AdamWConfig(beta2=-0.1)
        with pytest.raises(ValidationError):
            AdamWConfig(epsilon=0.0)
        with pytest.raises(ValidationError):
            AdamWConfig(weight_decay=-0.5)


class TestTrain:
    def test_noiseless_descent(self):
        problem = QuadraticProblem(dim=1, curvature=1.0, noise_var=0.0, theta0_dist_sq=4.0)
        trace = train(problem, spec_of(total=200, warmup=20), AdamWConfig(), seed=0)
        optimum = problem.theta_star()
        start = np.linalg.norm(trace.thetas[0] - optimum)
        final = np.linalg.norm(trace.thetas[-1] - optimum)
        assert final < start

    def test_identical_seeds_bit_identical(self):
        problem = QuadraticProblem(dim=4, curvature=1.0, noise_var=0.5, theta0_dist_sq=1.0)
        spec = spec_of(total=100, warmup=10)
        a = train(problem, spec, AdamWConfig(), seed=7)
        b = train(problem, spec, AdamWConfig(), seed=7)
        assert np.array_equal(a.thetas, b.thetas)
        assert np.array_equal(a.updates, b.updates)
        c = train(problem, spec, AdamWConfig(), seed=8)
        assert not np.array_equal(a.thetas, c.thetas)

    def test_per_coordinate_curvature(self):
        problem = QuadraticProblem(
            dim=3, curvature=np.array([0.5, 1.0, 2.0]), noise_var=0.0,
            theta0_dist_sq=3.0,
        )
        trace = train(problem, spec_of(total=300, warmup=30), AdamWConfig(), seed=0)
        optimum = problem.theta_star()
        gaps = np.abs(trace.thetas[-1] - optimum)
        assert np.all(gaps < np.abs(trace.thetas[0] - optimum))

    def test_scripted_stream_shape_checked(self):
        with pytest.raises(ValidationError):
            train(np.zeros((7, 2)), spec_of(total=50, warmup=5), AdamWConfig())

    def test_divergence_reports_first_bad_step(self):
        # lr * wd > 2 flips the decay factor below -1 and the iterate blows up
        spec = spec_of(kind="constant", total=5000, warmup=0, peak=50.0)
        problem = QuadraticProblem(dim=1, curvature=1.0, noise_var=0.0, theta0_dist_sq=1.0)
        with pytest.raises(DivergenceError) as err:
            train(problem, spec, AdamWConfig(weight_decay=0.1), seed=0)
        assert err.value.step >= 1

    def test_zero_weight_decay_trace_has_no_updates(self):
        problem = QuadraticProblem(dim=2, curvature=1.0, noise_var=0.0, theta0_dist_sq=1.0)
        trace = train(problem, spec_of(total=20, warmup=2), AdamWConfig(weight_decay=0.0))
        assert trace.updates is None
        with pytest.raises(DomainError):
            trace.smoothing()
        with pytest.raises(DomainError):
            reconstruct_from_updates(trace, None)


class TestReconstruction:
    def _trace(self, total=2000, dim=10, wd=0.1, noise=0.3, seed=3):
        problem = QuadraticProblem(
            dim=dim, curvature=1.0, noise_var=noise, theta0_dist_sq=float(dim)
        )
        spec = spec_of(total=total, warmup=total // 10)
        return train(problem, spec, AdamWConfig(weight_decay=wd), seed=seed)

    def test_duality_identity_2000_steps(self):
        trace = self._trace()
        coeffs = coefficients_at(trace.smoothing())
        _, rel = reconstruct_from_updates(trace, coeffs)
        assert rel < 1e-9

    def test_single_step_trace(self):
        trace = self._trace(total=1, dim=2, noise=0.0)
        coeffs = coefficients_at(trace.smoothing())
        _, rel = reconstruct_from_updates(trace, coeffs)
        assert rel < 1e-12

    def test_truncated_top_mass_reconstruction(self):
        trace = self._trace(total=1500)
        coeffs = coefficients_at(trace.smoothing())
        c = coeffs.c.copy()
        order = np.argsort(c)[::-1]
        keep_mass = np.cumsum(c[order])
        cutoff = int(np.searchsorted(keep_mass, 1.0 - 1e-12) + 1)
        mask = np.zeros_like(c, dtype=bool)
        mask[order[:cutoff]] = True
        truncated = type(coeffs)(t=coeffs.t, log_c=np.where(mask, coeffs.log_c, -np.inf))
        _, rel = reconstruct_from_updates(trace, truncated)
        assert rel < 1e-9

    def test_length_mismatch_rejected(self):
        trace = self._trace(total=50)
        short = coefficients_at(
            type(trace.smoothing())(trace.smoothing().alphas[:-1])
        )
        with pytest.raises(ValidationError):
            reconstruct_from_updates(trace, short)
