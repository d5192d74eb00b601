import time

import numpy as np
import pytest
from pydantic import ValidationError

from core.deps import get_rng
from core.exceptions import InputError
from api.v1.hankel.schema import make_shape
from api.v1.irls.domain import (
    IrlsDomain,
    apply_weight,
    build_weight_operator,
    dense_weight_matrix,
    epsilon_update,
    irls_solve,
    logdet_surrogate,
    objective,
)
from api.v1.irls.repository import IrlsRepository
from api.v1.irls.schema import ScaledIdentityWeight, SolverConfig
from api.v1.spectral.domain import SpectralDomain
from api.v1.spectral.schema import SamplingOperator


def completion_problem(seed, n, r, m):
    spectral = SpectralDomain(get_rng(seed))
    _, x = spectral.random_instance(r, n)
    Phi = spectral.random_mask(n, m)
    return x, Phi, Phi.apply(x)


def assert_non_increasing(history, slack=1e-9):
    for before, after in zip(history, history[1:]):
        assert after <= before + slack * abs(before)


class TestSolverConfig:
    def test_defaults_from_settings(self):
        config = SolverConfig(R=2)
        assert config.lambda_mode == "exact"
        assert config.decay_alpha == 0.9
        assert config.tol == 1e-6
        assert config.max_outer == 500
        assert config.initial_weight == "inverse_eps2"

    def test_fixed_needs_lambda(self):
        with pytest.raises(ValidationError):
            SolverConfig(R=2, lambda_mode="fixed")

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_decay_alpha_range(self, alpha):
        with pytest.raises(ValidationError):
            SolverConfig(R=2, decay_alpha=alpha)


class TestLogdetSurrogate:
    def test_zero_generator(self):
        assert logdet_surrogate(np.zeros(3), make_shape(3, 2), 1.0) == 0.0

    def test_small_eps(self):
        assert logdet_surrogate([1, 2, 3], make_shape(3, 2), 1e-8) == pytest.approx(0.0, abs=1e-10)

    def test_unit_eps(self):
        value = logdet_surrogate([1, 2, 3], make_shape(3, 2), 1.0)
        expected = np.log(10 + 4 * np.sqrt(5)) + np.log(10 - 4 * np.sqrt(5))
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(2.9957, abs=1e-4)

    def test_eps_must_be_positive(self):
        with pytest.raises(InputError):
            logdet_surrogate([1, 2, 3], make_shape(3, 2), 0.0)


class TestObjective:
    def test_feasible_without_penalty(self, complex_normal):
        z = complex_normal(9)
        Phi = SamplingOperator(n=9, indices=[0, 3, 8])
        assert objective(z, 0.5, 0.0, Phi, Phi.apply(z), make_shape(9)) == 0.0

    def test_zero(self):
        Phi = SamplingOperator.identity(5)
        assert objective(np.zeros(5), 1.0, 1.0, Phi, np.zeros(5), make_shape(5)) == 0.0

    def test_decomposition(self, complex_normal):
        shape = make_shape(11)
        z, y = complex_normal(11), complex_normal(4)
        Phi = SamplingOperator(n=11, indices=[1, 2, 7, 10])
        value = objective(z, 0.3, 2.5, Phi, y, shape)
        expected = 2.5 * logdet_surrogate(z, shape, 0.3) + np.linalg.norm(Phi.apply(z) - y) ** 2
        assert value == pytest.approx(expected, rel=1e-12)

    def test_negative_lambda(self):
        with pytest.raises(InputError):
            objective(np.zeros(3), 1.0, -1.0, SamplingOperator.identity(3), np.zeros(3), make_shape(3))


class TestEpsilonUpdate:
    def test_first_iteration(self):
        assert epsilon_update(1.0, np.zeros(1), np.array([0.5]), 0.9, 1) == 1.0

    def test_third_iteration(self):
        value = epsilon_update(1.0, np.zeros(1), np.array([0.5]), 0.9, 3)
        assert value == pytest.approx(0.5 + 0.9 ** 9)
        assert value == pytest.approx(0.88742, abs=1e-5)

    def test_stalled_iterate_decays(self):
        z = np.ones(4)
        values = [epsilon_update(1.0, z, z, 0.9, k) for k in range(1, 30)]
        assert values[-1] == pytest.approx(0.9 ** (29 * 29))
        assert all(after < before for before, after in zip(values[3:], values[4:]))

    def test_k_must_be_positive(self):
        with pytest.raises(InputError):
            epsilon_update(1.0, np.zeros(1), np.zeros(1), 0.9, 0)


class TestWeightOperator:
    def test_zero_generator(self, rng, complex_normal):
        shape = make_shape(9, 5)
        W = build_weight_operator(np.zeros(9), shape, 2, 0.7, rng)
        v = complex_normal(9)
        np.testing.assert_allclose(apply_weight(W, v), 2 / 0.49 * shape.w * v, rtol=1e-12)

    def test_dense_zero_generator(self):
        shape = make_shape(7, 3)
        np.testing.assert_allclose(dense_weight_matrix(np.zeros(7), shape, 1, 2.0), 0.5 * np.diag(shape.w), atol=1e-14)

    def test_n9_d1_5_matches_dense(self, rng, complex_normal):
        shape = make_shape(9, 5)
        z, v = complex_normal(9), complex_normal(9)
        W = build_weight_operator(z, shape, 2, 0.8, rng)
        expected = dense_weight_matrix(z, shape, 2, 0.8) @ v
        assert np.linalg.norm(apply_weight(W, v) - expected) <= 1e-8 * np.linalg.norm(expected)

    def test_matches_dense_on_random_instances(self, rng, complex_normal):
        for _ in range(100):
            d = int(rng.integers(2, 11))
            other = int(rng.integers(d, 400 // d + 1))
            d1, d2 = (d, other) if rng.random() < 0.5 else (other, d)
            shape = make_shape(d1 + d2 - 1, d1)
            R = int(rng.integers(1, d))
            z, v = complex_normal(shape.n), complex_normal(shape.n)
            sigma = np.linalg.norm(z) * np.sqrt(d)
            eps = float(sigma * rng.uniform(0.2, 1.0))
            W = build_weight_operator(z, shape, R, eps, rng)
            expected = dense_weight_matrix(z, shape, R, eps) @ v
            assert np.linalg.norm(apply_weight(W, v) - expected) <= 1e-8 * np.linalg.norm(expected)

    def test_hermitian_positive(self, rng, complex_normal):
        shape = make_shape(30)
        W = build_weight_operator(complex_normal(30), shape, 3, 0.5, rng)
        u, v = complex_normal(30), complex_normal(30)
        assert np.vdot(u, apply_weight(W, v)) == pytest.approx(np.conj(np.vdot(v, apply_weight(W, u))), rel=1e-10)
        quadratic = np.vdot(v, apply_weight(W, v))
        assert quadratic.real > 0 and abs(quadratic.imag) <= 1e-10 * quadratic.real

    def test_linear(self, rng, complex_normal):
        shape = make_shape(25)
        W = build_weight_operator(complex_normal(25), shape, 2, 0.4, rng)
        u, v = complex_normal(25), complex_normal(25)
        a, b = 1.5 - 0.5j, -2.0 + 1j
        combined = apply_weight(W, a * v + b * u)
        separate = a * apply_weight(W, v) + b * apply_weight(W, u)
        assert np.linalg.norm(combined - separate) <= 1e-10 * np.linalg.norm(separate)

    def test_dense_oracle_structure(self, complex_normal):
        shape = make_shape(11, 4)
        D = dense_weight_matrix(complex_normal(11), shape, 2, 0.3)
        np.testing.assert_allclose(D, D.conj().T, atol=1e-12 * np.abs(D).max())
        assert np.all(np.linalg.eigvalsh(D) > 0)

    def test_dense_oracle_guard(self):
        with pytest.raises(InputError):
            dense_weight_matrix(np.zeros(41), make_shape(41), 2, 1.0)

    def test_scaled_identity(self, complex_normal):
        v = complex_normal(6)
        np.testing.assert_allclose(apply_weight(ScaledIdentityWeight(scale=3.0, n=6), v), 3.0 * v)

    def test_length_mismatch(self, rng):
        W = build_weight_operator(np.ones(9), make_shape(9), 1, 1.0, rng)
        with pytest.raises(InputError):
            apply_weight(W, np.ones(8))

    @pytest.mark.slow
    def test_near_linear_scaling(self, rng, complex_normal):
        timings = []
        for n in (1024, 2048, 4096):
            shape = make_shape(n)
            W = build_weight_operator(complex_normal(n), shape, 10, 1.0, rng)
            v = complex_normal(n)
            apply_weight(W, v)
            best = np.inf
            for _ in range(7):
                start = time.perf_counter()
                for _ in range(20):
                    apply_weight(W, v)
                best = min(best, time.perf_counter() - start)
            timings.append(best)
        assert timings[1] / timings[0] <= 2.8
        assert timings[2] / timings[1] <= 2.8


class TestQuadraticStep:
    def test_normal_equations(self, rng, complex_normal):
        shape = make_shape(21)
        config = SolverConfig(R=2, lambda_mode="fixed", lam=0.05)
        domain = IrlsDomain(shape, config)
        W = build_weight_operator(complex_normal(21), shape, 2, 0.5, rng)
        Phi = SamplingOperator(n=21, indices=np.arange(0, 21, 2))
        y = complex_normal(Phi.m)
        z, result = domain.solve_quadratic_step(W, Phi, y, 0.05, np.zeros(21), 1e-10, 500)
        assert result.converged
        rhs = Phi.adjoint(y) / 0.1
        residual = apply_weight(W, z) + Phi.mask * z / 0.1 - rhs
        assert np.linalg.norm(residual) <= 10 * 1e-10 * np.linalg.norm(rhs)

    def test_exact_keeps_observations(self, rng, complex_normal):
        shape = make_shape(15)
        domain = IrlsDomain(shape, SolverConfig(R=2))
        W = build_weight_operator(complex_normal(15), shape, 2, 0.5, rng)
        Phi = SamplingOperator(n=15, indices=[0, 4, 5, 11])
        y = complex_normal(4)
        z, _ = domain.solve_quadratic_step(W, Phi, y, None, np.zeros(15), 1e-10, 200)
        assert np.array_equal(Phi.apply(z), y)


class TestIrlsSolve:
    def test_full_mask_returns_data(self, rng):
        _, x = SpectralDomain(rng).random_instance(3, 31)
        Phi = SamplingOperator.identity(31)
        report = irls_solve(Phi, x, make_shape(31), SolverConfig(R=3))
        np.testing.assert_array_equal(report.z_hat, x)
        assert report.converged and report.outer_iters == 1

    def test_zero_data(self):
        Phi = SamplingOperator(n=11, indices=[1, 5])
        report = irls_solve(Phi, np.zeros(2), make_shape(11), SolverConfig(R=1))
        assert report.converged and not np.any(report.z_hat)

    def test_rank_must_be_below_d(self):
        with pytest.raises(InputError):
            IrlsDomain(make_shape(9), SolverConfig(R=5))

    def test_data_length_mismatch(self):
        Phi = SamplingOperator(n=11, indices=[1, 5])
        with pytest.raises(InputError):
            irls_solve(Phi, np.ones(3), make_shape(11), SolverConfig(R=1))

    def test_completion(self):
        successes = 0
        for seed in range(3):
            x, Phi, y = completion_problem(seed, 41, 2, 24)
            report = irls_solve(Phi, y, make_shape(41), SolverConfig(R=2, seed=seed))
            assert np.array_equal(Phi.apply(report.z_hat), y)
            assert report.cg_iters_total == sum(report.cg_iters_history)
            successes += np.linalg.norm(report.z_hat - x) / np.linalg.norm(x) < 1e-3
        assert successes >= 2

    def test_histories(self):
        x, Phi, y = completion_problem(11, 31, 2, 20)
        report = irls_solve(Phi, y, make_shape(31), SolverConfig(R=2, max_outer=40))
        k = report.outer_iters
        assert len(report.objective_history) == len(report.eps_history) == len(report.iterate_change_history) == k
        assert all(after <= before for before, after in zip(report.eps_history, report.eps_history[1:]))
        assert all(lam is None for lam in report.lambda_history)
        assert not report.objective_is_approximate

    def test_noiseless_denoising_is_fixed_point(self, two_tone):
        _, x = two_tone
        report = irls_solve(SamplingOperator.identity(64), x, make_shape(64), SolverConfig(R=2, lambda_mode="adaptive"))
        assert np.linalg.norm(report.z_hat - x) <= 1e-6 * np.linalg.norm(x)

    def test_eps2_initial_weight(self):
        x, Phi, y = completion_problem(7, 31, 2, 20)
        config = SolverConfig(R=2, max_outer=30, initial_weight="eps2")
        report = irls_solve(Phi, y, make_shape(31), config)
        assert np.array_equal(Phi.apply(report.z_hat), y)
        assert np.all(np.isfinite(report.z_hat))

    def test_seeded_runs_repeat(self):
        x, Phi, y = completion_problem(5, 31, 2, 18)
        config = SolverConfig(R=2, max_outer=20, seed=3)
        first = irls_solve(Phi, y, make_shape(31), config)
        second = irls_solve(Phi, y, make_shape(31), config)
        np.testing.assert_array_equal(first.z_hat, second.z_hat)
        assert first.objective_history == second.objective_history

    def test_convergence_needs_a_tight_inner_solve(self):
        x, Phi, y = completion_problem(4, 31, 1, 16)
        # loose inner tolerances leave the warm start untouched
        config = SolverConfig(R=1, max_outer=400, cg_tol_factor=1e6)
        report = irls_solve(Phi, y, make_shape(31), config)
        assert 0 in report.cg_iters_history
        assert report.converged
        assert np.linalg.norm(report.z_hat - x) / np.linalg.norm(x) < 1e-3

    def test_zero_change_under_loose_tolerance_is_not_convergence(self):
        x, Phi, y = completion_problem(6, 41, 2, 24)
        config = SolverConfig(R=2, max_outer=3, cg_tol_factor=1e6)
        report = irls_solve(Phi, y, make_shape(41), config)
        assert report.cg_iters_history[2] == 0
        assert not report.converged

    def test_adaptive_lambda_is_held(self, two_tone):
        _, x = two_tone
        noisy, _ = SpectralDomain(get_rng(8)).add_noise(x, 10.0)
        report = irls_solve(SamplingOperator.identity(64), noisy, make_shape(64),
                            SolverConfig(R=2, lambda_mode="adaptive", max_outer=60))
        assert len(set(report.lambda_history)) == 1
        assert report.lambda_history[0] > 1e-3
        assert_non_increasing(report.objective_history)

    def test_denoising_moves_toward_the_signal(self, two_tone):
        _, x = two_tone
        for seed in range(3):
            noisy, _ = SpectralDomain(get_rng(seed, 10)).add_noise(x, 10.0)
            report = irls_solve(SamplingOperator.identity(64), noisy, make_shape(64),
                                SolverConfig(R=2, lambda_mode="adaptive", max_outer=200))
            assert np.linalg.norm(report.z_hat - x) < 0.7 * np.linalg.norm(noisy - x)

    def test_fixed_lambda_objective_non_increasing(self):
        for seed in range(4):
            rng = get_rng(seed, 99)
            n = int(rng.integers(12, 40))
            r = int(rng.integers(1, 3))
            x, Phi, y = completion_problem(seed, n, r, n if seed % 2 else max(2 * r + 2, n // 2 + 2))
            if Phi.m == n:
                y = SpectralDomain(rng).add_noise(y, 15.0)[0]
            config = SolverConfig(
                R=r, lambda_mode="fixed", lam=float(rng.uniform(0.01, 1.0)),
                max_outer=30, cg_tol=1e-12, seed=seed,
            )
            report = irls_solve(Phi, y, make_shape(n), config)
            assert_non_increasing(report.objective_history)

    @pytest.mark.slow
    def test_fixed_lambda_monotonicity_at_scale(self):
        for seed in range(200):
            rng = get_rng(seed, 2024)
            n = int(rng.integers(10, 128))
            d = make_shape(n).d
            r = int(rng.integers(1, min(6, d)))
            denoising = bool(rng.random() < 0.5)
            m = n if denoising else int(rng.integers(min(n, 2 * r + 2), n + 1))
            x, Phi, y = completion_problem(seed, n, r, m)
            if denoising:
                y = SpectralDomain(rng).add_noise(y, float(rng.uniform(5.0, 30.0)))[0]
            config = SolverConfig(
                R=r, lambda_mode="fixed", lam=float(10 ** rng.uniform(-3, 0)),
                max_outer=50, cg_tol=1e-12, seed=seed,
            )
            report = irls_solve(Phi, y, make_shape(n), config)
            assert_non_increasing(report.objective_history)


class TestIrlsRepository:
    def test_report_csv(self, tmp_path):
        x, Phi, y = completion_problem(2, 21, 1, 12)
        report = irls_solve(Phi, y, make_shape(21), SolverConfig(R=1, max_outer=15))
        repository = IrlsRepository()
        path = str(tmp_path / "report.csv")
        text = repository.write_report(path, report)
        assert text.splitlines()[0] == "iter,objective,eps,change"
        frame = repository.read_report(path)
        assert frame["iter"].tolist() == list(range(1, report.outer_iters + 1))
        np.testing.assert_array_equal(frame["eps"].to_numpy(), report.eps_history)
