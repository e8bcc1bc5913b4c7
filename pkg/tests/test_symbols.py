import numpy as np
import pytest

from hartree_spectrum import (
    HamiltonianOracle,
    KernelOracle,
    SymbolModel,
    as_phase_point,
    gaussian_kernel,
    make_magnetic_oscillator_3d,
    make_oscillator_1d,
    symplectic_form,
)
from hartree_spectrum.symbols import fd_directional, fd_gradient, fd_jacobian

from conftest import quadratic_model


def test_symplectic_form_convention():
    J = symplectic_form(2)
    expected = np.block([[np.zeros((2, 2)), -np.eye(2)],
                         [np.eye(2), np.zeros((2, 2))]])
    assert np.array_equal(J, expected)
    assert np.array_equal(J @ J, -np.eye(4))


class TestPhasePoint:
    def test_accepts_lists(self):
        z = as_phase_point([1.0, 2.0], n=1)
        assert z.dtype == float and z.shape == (2,)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="length"):
            as_phase_point([1.0, 2.0, 3.0], n=2)

    def test_rejects_odd_length(self):
        with pytest.raises(ValueError, match="even"):
            as_phase_point([1.0, 2.0, 3.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            as_phase_point([np.nan, 0.0], n=1)

    def test_rejects_matrix(self):
        with pytest.raises(ValueError, match="1-d"):
            as_phase_point(np.zeros((2, 2)))


class TestCombinedSymbol:
    def test_origin_value_vanishes_without_kernel(self, osc1d_linear):
        assert osc1d_linear.energy([0.0, 0.0]) == 0.0

    def test_origin_value_is_kernel_strength(self):
        model = make_oscillator_1d(m=1, k=1, V0=0.1, gamma=1,
                                   kappa_tilde=1.0, hbar=1)
        assert model.energy([0.0, 0.0]) == pytest.approx(0.1, abs=0)

    def test_3d_kinetic_term(self, magnetic3d_linear):
        z = np.array([1.0, 0, 0, 0, 0, 0])
        assert magnetic3d_linear.energy(z) == pytest.approx(0.5, rel=1e-14)

    def test_gradient_vanishes_at_origin_3d(self, magnetic3d):
        assert np.array_equal(magnetic3d.gradient(np.zeros(6)), np.zeros(6))

    def test_gradient_1d_position_component(self, osc1d_attractive):
        # The kernel gradient cancels on the diagonal, only k x survives.
        grad = osc1d_attractive.gradient([0.0, 0.3])
        assert grad == pytest.approx([0.0, 0.3], abs=1e-15)

    def test_hessian_1d_shifted_stiffness(self, osc1d_repulsive):
        hess = osc1d_repulsive.hessian([0.0, 0.0])
        assert hess == pytest.approx(np.diag([1.0, 0.81]), abs=1e-14)

    def test_hessian_3d_blocks(self, magnetic3d):
        m = magnetic3d
        hess = m.hessian(np.zeros(6))
        eta_wnl2 = m.eta * m.omega_nl**2
        assert np.allclose(hess[:3, :3], np.eye(3) / m.m, atol=1e-14)
        assert np.allclose(
            hess[3:, 3:],
            np.diag([m.m * (m.omega_a**2 - eta_wnl2)] * 2
                    + [m.m * (m.omega_0**2 - eta_wnl2)]),
            atol=1e-14,
        )
        cross = np.zeros((3, 3))
        cross[0, 1] = m.omega_H / 2
        cross[1, 0] = -m.omega_H / 2
        assert np.allclose(hess[:3, 3:], cross, atol=1e-14)

    def test_hessian_exactly_symmetric(self, magnetic3d):
        rng = np.random.default_rng(3)
        for _ in range(5):
            hess = magnetic3d.hessian(rng.uniform(-1, 1, 6))
            assert np.array_equal(hess, hess.T)


class TestCurvature:
    def test_collapses_to_hessian_without_coupling(self, osc1d_linear):
        z = np.array([0.3, -0.2])
        assert np.allclose(osc1d_linear.curvature(z),
                           np.diag([1.0, 1.0]), atol=1e-14)

    def test_1d_double_shift(self, osc1d_repulsive):
        # Both restricted kernel Hessians contribute -V0/gamma^2.
        cur = osc1d_repulsive.curvature([0.0, 0.0])
        assert cur == pytest.approx(np.diag([1.0, 1.0 - 2 * 0.19]), abs=1e-14)

    def test_momentum_block_unchanged_3d(self, magnetic3d):
        cur = magnetic3d.curvature(np.zeros(6))
        assert np.allclose(cur[:3, :3], np.eye(3), atol=1e-14)

    def test_3d_explicit_blocks(self, magnetic3d):
        m = magnetic3d
        cur = m.curvature(np.zeros(6))
        eta_wnl2 = m.eta * m.omega_nl**2
        expected = m.hessian(np.zeros(6)).copy()
        expected[3:, 3:] -= m.m * eta_wnl2 * np.eye(3)
        assert np.max(np.abs(cur - expected)) <= 1e-12

    def test_matches_first_slot_finite_difference(self, osc1d_attractive):
        model = osc1d_attractive
        rng = np.random.default_rng(11)
        for _ in range(3):
            z = rng.uniform(-1, 1, 2)

            def first_slot(u, w=z):
                return (model.hamiltonian.hessian(u)
                        + model.kappa_tilde * (model.kernel.hessian_zz(u, w)
                                               + model.kernel.hessian_ww(u, w)))

            d = rng.uniform(-1, 1, 2)
            approx = fd_directional(first_slot, z, d)
            exact = model.curvature_derivative(z, d)
            assert np.max(np.abs(exact - approx)) <= 1e-5 * max(
                1.0, np.max(np.abs(exact)))


class TestDirectionalThird:
    def test_zero_for_quadratic_uncoupled(self):
        model = quadratic_model([1.0, 2.0, 0.5, 3.0])
        rng = np.random.default_rng(0)
        d = rng.normal(size=4)
        assert np.array_equal(model.curvature_derivative(rng.normal(size=4), d),
                              np.zeros((4, 4)))

    def test_zero_at_kernel_center(self, osc1d_attractive):
        out = osc1d_attractive.curvature_derivative(np.zeros(2), [1.0, 1.0])
        assert np.allclose(out, 0.0, atol=1e-14)

    def test_complex_linearity(self, osc1d_attractive):
        z = np.array([0.1, 0.7])
        d = np.array([0.3, -0.4])
        real_part = osc1d_attractive.curvature_derivative(z, d)
        rotated = osc1d_attractive.curvature_derivative(z, 1j * d)
        assert np.allclose(rotated, 1j * real_part, atol=1e-14)
        mixed = osc1d_attractive.curvature_derivative(z, (1 + 2j) * d)
        assert np.allclose(mixed, (1 + 2j) * real_part, atol=1e-13)


class TestGaussianKernel:
    def test_diagonal_gradient_vanishes(self):
        kernel = gaussian_kernel(0.7, 1.3, 2)
        rng = np.random.default_rng(5)
        for _ in range(5):
            z = rng.uniform(-2, 2, 4)
            assert np.array_equal(kernel.gradient_w(z, z), np.zeros(4))
            assert np.array_equal(kernel.gradient_z(z, z), np.zeros(4))

    def test_cross_hessian_is_minus_direct(self):
        kernel = gaussian_kernel(-0.4, 0.9, 1)
        z = np.array([0.0, 0.8])
        w = np.array([0.0, 0.1])
        assert np.allclose(kernel.hessian_zw(z, w),
                           -kernel.hessian_zz(z, w), atol=1e-14)

    def test_off_diagonal_derivatives_match_finite_difference(self):
        kernel = gaussian_kernel(0.5, 1.1, 1)
        rng = np.random.default_rng(8)
        for _ in range(5):
            z = rng.uniform(-1, 1, 2)
            w = rng.uniform(-1, 1, 2)
            num = fd_gradient(lambda u: kernel.value(u, w), z)
            assert np.allclose(kernel.gradient_z(z, w), num, atol=1e-9)
            num = fd_gradient(lambda u: kernel.value(z, u), w)
            assert np.allclose(kernel.gradient_w(z, w), num, atol=1e-9)
            num = fd_jacobian(lambda u: kernel.gradient_z(u, w), z)
            assert np.allclose(kernel.hessian_zz(z, w), num, atol=1e-9)
            num = fd_jacobian(lambda u: kernel.gradient_z(z, u), w)
            assert np.allclose(kernel.hessian_zw(z, w), num, atol=1e-9)
            d = rng.uniform(-1, 1, 2)
            num = fd_directional(lambda u: kernel.hessian_zz(u, w), z, d)
            assert np.allclose(kernel.third_zz(z, w, d), num, atol=1e-8)
            num = fd_directional(lambda u: kernel.hessian_ww(u, w), z, d)
            assert np.allclose(kernel.third_ww(z, w, d), num, atol=1e-8)

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            gaussian_kernel(1.0, 0.0, 1)


@pytest.mark.parametrize("fixture", ["osc1d_attractive", "magnetic3d"])
def test_analytic_vs_finite_difference_probes(fixture, request):
    """Analytic oracles agree with central differences at 20 random points."""
    model = request.getfixturevalue(fixture)
    dim = 2 * model.n
    rng = np.random.default_rng(42)
    for _ in range(20):
        z = rng.uniform(-1.5, 1.5, dim)
        grad = model.gradient(z)
        # The restricted value works as the gradient oracle here because the
        # kernel's diagonal second-slot gradient vanishes identically.
        num = fd_gradient(model.energy, z)
        assert np.max(np.abs(grad - num)) <= 1e-6 * max(1.0, np.max(np.abs(grad)))

        hess = model.hessian(z)
        num = fd_jacobian(
            lambda u, w=z: model.hamiltonian.gradient(u)
            + model.kappa_tilde * model.kernel.gradient_z(u, w),
            z,
        )
        assert np.max(np.abs(hess - num)) <= 1e-6 * max(1.0, np.max(np.abs(hess)))


def test_derivative_mode_reporting(osc1d_attractive):
    assert osc1d_attractive.derivative_mode == "analytic"
    bare = SymbolModel(
        1, 1.0, 0.5,
        HamiltonianOracle(lambda z: 0.5 * float(z @ z)),
        KernelOracle(lambda z, w: float(np.exp(-(z[1] - w[1]) ** 2))),
    )
    assert bare.derivative_mode == "finite-difference"


def test_value_only_oracles_fall_back(osc1d_attractive):
    """A value-only model reproduces the analytic gradient and Hessian."""
    exact = osc1d_attractive
    bare = SymbolModel(
        1, 1.0, exact.kappa_tilde,
        HamiltonianOracle(exact.hamiltonian.value),
        KernelOracle(exact.kernel.value),
    )
    z = np.array([0.2, -0.6])
    assert np.allclose(bare.gradient(z), exact.gradient(z), atol=1e-8)
    assert np.allclose(bare.hessian(z), exact.hessian(z), atol=1e-5)


class TestConstructors:
    def test_derived_frequencies(self):
        model = make_magnetic_oscillator_3d(m=1, k=1, H=2, e=1, c=1, V0=0,
                                            gamma=1, kappa_tilde=0, hbar=1)
        assert model.omega_H == pytest.approx(2.0)
        assert model.omega_0 == pytest.approx(1.0)
        assert model.omega_a == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_zero_kernel_strength(self):
        model = make_oscillator_1d(m=1, k=1, V0=0.0, gamma=1,
                                   kappa_tilde=2.0, hbar=1)
        assert model.omega_nl == 0.0
        assert model.eta == 0.0

    def test_coupling_sign(self):
        model = make_oscillator_1d(m=1, k=1, V0=-0.19, gamma=1,
                                   kappa_tilde=1.0, hbar=1)
        assert model.omega_nl**2 == pytest.approx(0.19, rel=1e-15)
        assert model.eta == -1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"m": 0.0}, {"k": -1.0}, {"gamma": 0.0}, {"hbar": 0.0},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        base = dict(m=1.0, k=1.0, V0=0.1, gamma=1.0, kappa_tilde=1.0, hbar=1.0)
        base.update(kwargs)
        with pytest.raises(ValueError):
            make_oscillator_1d(**base)

    def test_model_is_reusable_across_calls(self, magnetic3d):
        # Oracle calls are pure: repeated evaluation is bitwise identical.
        z = np.array([0.3, -0.1, 0.2, 0.5, 0.0, -0.7])
        first = magnetic3d.curvature(z)
        second = magnetic3d.curvature(z)
        assert np.array_equal(first, second)
