"""Generator construction, matrix exponential, and its reverse pass."""

import numpy as np
import pytest

from firstphoton.errors import NumericalError
from firstphoton.linalg import (
    ExpmConfig,
    UnitaryTransform,
    build_generator,
    expm,
    expm_vjp,
    expm_with_cache,
    real_block_expm,
    unitarity_defect,
    weight_gradient,
)


def random_anti_hermitian(rng, dim, scale=1.0):
    w = scale * rng.standard_normal((dim, dim))
    return build_generator(w)


def taylor_reference(matrix, order=40):
    """Independent reference: plain term-by-term Taylor sum, no squaring."""
    result = np.eye(matrix.shape[0], dtype=complex)
    term = np.eye(matrix.shape[0], dtype=complex)
    for p in range(1, order + 1):
        term = term @ matrix / p
        result = result + term
    return result


class TestBuildGenerator:
    def test_zero_weights(self):
        np.testing.assert_array_equal(build_generator(np.zeros((3, 3))), np.zeros((3, 3), dtype=complex))

    def test_symmetric_weights_give_purely_imaginary(self):
        rng = np.random.default_rng(0)
        w = rng.standard_normal((4, 4))
        w = (w + w.T) / 2
        generator = build_generator(w)
        np.testing.assert_allclose(generator.real, 0.0, atol=1e-15)
        np.testing.assert_allclose(generator.imag, 2 * w, atol=1e-15)

    def test_matches_elementwise_recomputation(self):
        rng = np.random.default_rng(1)
        w = rng.standard_normal((5, 5))
        generator = build_generator(w)
        for j in range(5):
            for k in range(5):
                expected = (w[j, k] - w[k, j]) + 1j * (w[j, k] + w[k, j])
                assert generator[j, k] == pytest.approx(expected, abs=1e-15)

    def test_anti_hermitian_by_construction(self):
        rng = np.random.default_rng(2)
        generator = build_generator(rng.standard_normal((6, 6)))
        assert np.max(np.abs(generator + generator.conj().T)) <= 1e-14

    def test_rejects_non_finite(self):
        w = np.zeros((2, 2))
        w[0, 1] = np.nan
        with pytest.raises(ValueError):
            build_generator(w)


class TestExpm:
    def test_zero_is_identity(self):
        u = expm(np.zeros((4, 4), dtype=complex))
        np.testing.assert_array_equal(u.matrix, np.eye(4))

    def test_diagonal_closed_form(self):
        thetas = np.array([0.3, -1.2, 2.5, 0.0, 4.0])
        u = expm(np.diag(1j * thetas))
        np.testing.assert_allclose(u.matrix, np.diag(np.exp(1j * thetas)), atol=1e-12)

    def test_matches_high_order_taylor_reference(self):
        rng = np.random.default_rng(3)
        generator = random_anti_hermitian(rng, 6, scale=0.1)
        assert 0.3 < np.linalg.norm(generator, 2) < 2.0
        u = expm(generator)
        np.testing.assert_allclose(u.matrix, taylor_reference(generator), atol=1e-11)

    def test_unitarity_on_random_generators(self):
        rng = np.random.default_rng(4)
        for dim in (2, 7, 16, 33):
            generator = random_anti_hermitian(rng, dim, scale=1.0 / np.sqrt(dim))
            assert unitarity_defect(expm(generator).matrix) <= 1e-10

    def test_group_property_halving(self):
        rng = np.random.default_rng(5)
        generator = random_anti_hermitian(rng, 5, scale=0.4)
        whole = expm(generator).matrix
        half = expm(generator / 2).matrix
        np.testing.assert_allclose(whole, half @ half, atol=1e-9)

    def test_determinant_on_unit_circle(self):
        rng = np.random.default_rng(6)
        for dim in (2, 4, 8):
            u = expm(random_anti_hermitian(rng, dim, scale=0.5))
            assert abs(abs(np.linalg.det(u.matrix)) - 1.0) <= 1e-8

    def test_insufficient_budget_raises(self):
        rng = np.random.default_rng(7)
        generator = random_anti_hermitian(rng, 6, scale=40.0)
        with pytest.raises(NumericalError, match="squarings"):
            expm(generator, ExpmConfig(squarings=0, taylor_order=2))

    def test_rejects_non_anti_hermitian(self):
        with pytest.raises(ValueError, match="anti-Hermitian"):
            expm(np.eye(3, dtype=complex))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExpmConfig(squarings=-1)
        with pytest.raises(ValueError):
            ExpmConfig(squarings=33)
        with pytest.raises(ValueError):
            ExpmConfig(taylor_order=1)

    def test_unitary_transform_rejects_garbage(self):
        with pytest.raises(NumericalError, match="defect"):
            UnitaryTransform(matrix=np.ones((3, 3), dtype=complex))


def composite_loss(weights, cotangent, cfg):
    """Scalar L(W) = Re(sum(conj(G) * expm(generator(W)))) for gradient checks."""
    u, _ = expm_with_cache(build_generator(weights), cfg)
    return float(np.real(np.sum(np.conj(cotangent) * u)))


def composite_gradient(weights, cotangent, cfg):
    generator = build_generator(weights)
    _, cache = expm_with_cache(generator, cfg)
    return weight_gradient(expm_vjp(generator, cotangent, cfg, cache=cache))


class TestExpmVjp:
    cfg = ExpmConfig()

    def test_zero_upstream_gives_zero(self):
        rng = np.random.default_rng(8)
        generator = random_anti_hermitian(rng, 4)
        grad = expm_vjp(generator, np.zeros((4, 4), dtype=complex), self.cfg)
        np.testing.assert_array_equal(grad, np.zeros((4, 4), dtype=complex))

    def test_scalar_chain_rule(self):
        # recover d(e^{i theta})/d theta = i e^{i theta} from two pullbacks:
        # upstream 1 gives d Re(U)/d theta, upstream i gives d Im(U)/d theta
        theta = 0.83
        generator = np.array([[1j * theta]])
        _, cache = expm_with_cache(generator, self.cfg)
        g_re = expm_vjp(generator, np.array([[1.0 + 0j]]), self.cfg, cache=cache)
        g_im = expm_vjp(generator, np.array([[1j]]), self.cfg, cache=cache)
        derivative = np.imag(g_re[0, 0]) + 1j * np.imag(g_im[0, 0])
        assert derivative == pytest.approx(1j * np.exp(1j * theta), abs=1e-12)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(9)
        weights = 0.3 * rng.standard_normal((5, 5))
        cotangent = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        grad = composite_gradient(weights, cotangent, self.cfg)
        step = 1e-5
        for j in range(5):
            for k in range(5):
                plus = weights.copy()
                plus[j, k] += step
                minus = weights.copy()
                minus[j, k] -= step
                fd = (composite_loss(plus, cotangent, self.cfg) - composite_loss(minus, cotangent, self.cfg)) / (
                    2 * step
                )
                assert abs(grad[j, k] - fd) <= 1e-5 * max(1.0, abs(fd))

    def test_cache_config_mismatch_rejected(self):
        rng = np.random.default_rng(10)
        generator = random_anti_hermitian(rng, 3)
        _, cache = expm_with_cache(generator, ExpmConfig(squarings=8, taylor_order=10))
        with pytest.raises(ValueError, match="cache"):
            expm_vjp(generator, np.eye(3, dtype=complex), ExpmConfig(squarings=6, taylor_order=10), cache=cache)

    def test_cache_generator_mismatch_rejected(self):
        rng = np.random.default_rng(11)
        generator = random_anti_hermitian(rng, 3)
        _, cache = expm_with_cache(generator, self.cfg)
        with pytest.raises(ValueError, match="cache"):
            expm_vjp(2 * generator, np.eye(3, dtype=complex), self.cfg, cache=cache)


class TestWeightGradient:
    def test_zero_cotangent(self):
        np.testing.assert_array_equal(weight_gradient(np.zeros((3, 3), dtype=complex)), np.zeros((3, 3)))

    def test_two_by_two_hand_expansion(self):
        g = np.array([[1 + 2j, 3 - 1j], [-2 + 0.5j, 0.25j]])
        grad = weight_gradient(g)
        for j in range(2):
            for k in range(2):
                expected = g[j, k].real + g[j, k].imag - g[k, j].real + g[k, j].imag
                assert grad[j, k] == pytest.approx(expected, abs=1e-15)

    def test_norm_style_composite_loss_matches_finite_differences(self):
        # L(W) = || expm(generator(W)) v - w ||^2 pulls a data-dependent
        # cotangent through the whole chain
        rng = np.random.default_rng(12)
        weights = 0.2 * rng.standard_normal((4, 4))
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        target = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        cfg = ExpmConfig()

        def scalar_loss(wx):
            u, _ = expm_with_cache(build_generator(wx), cfg)
            residual = u @ v - target
            return float(np.sum(np.abs(residual) ** 2))

        generator = build_generator(weights)
        u, cache = expm_with_cache(generator, cfg)
        residual = u @ v - target
        upstream = np.outer(2.0 * residual, np.conj(v))  # cotangent of U
        grad = weight_gradient(expm_vjp(generator, upstream, cfg, cache=cache))

        step = 1e-5
        for j in range(4):
            for k in range(4):
                plus = weights.copy()
                plus[j, k] += step
                minus = weights.copy()
                minus[j, k] -= step
                fd = (scalar_loss(plus) - scalar_loss(minus)) / (2 * step)
                assert abs(grad[j, k] - fd) <= 1e-5 * max(1.0, abs(fd))


class TestRealBlockOracle:
    def test_matches_complex_pipeline(self):
        rng = np.random.default_rng(13)
        weights = 0.4 * rng.standard_normal((4, 4))
        complex_u = expm(build_generator(weights)).matrix
        block_u = real_block_expm(weights)
        assert np.max(np.abs(complex_u - block_u)) <= 1e-11

    def test_norm_preservation(self):
        rng = np.random.default_rng(14)
        u = expm(random_anti_hermitian(rng, 10, scale=0.3)).matrix
        for _ in range(20):
            v = rng.standard_normal(10) + 1j * rng.standard_normal(10)
            v /= np.linalg.norm(v)
            assert abs(np.linalg.norm(u @ v) - 1.0) <= 1e-10
