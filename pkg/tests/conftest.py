import numpy as np
import pytest

from hartree_spectrum import (
    HamiltonianOracle,
    SymbolModel,
    gaussian_kernel,
    make_magnetic_oscillator_3d,
    make_oscillator_1d,
)


@pytest.fixture
def osc1d_attractive():
    """1-d oscillator, eta = -1 (kappa V0 = -0.19), unit everything else."""
    return make_oscillator_1d(m=1.0, k=1.0, V0=-0.19, gamma=1.0,
                              kappa_tilde=1.0, hbar=1.0)


@pytest.fixture
def osc1d_repulsive():
    """1-d oscillator, eta = +1 (kappa V0 = +0.19)."""
    return make_oscillator_1d(m=1.0, k=1.0, V0=0.19, gamma=1.0,
                              kappa_tilde=1.0, hbar=1.0)


@pytest.fixture
def osc1d_linear():
    """1-d oscillator with the kernel switched off."""
    return make_oscillator_1d(m=1.0, k=1.0, V0=0.0, gamma=1.0,
                              kappa_tilde=0.0, hbar=1.0)


@pytest.fixture
def magnetic3d():
    """3-d magnetic oscillator, omega_H = 2, eta omega_nl^2 = -0.3."""
    return make_magnetic_oscillator_3d(m=1.0, k=1.0, H=2.0, e=1.0, c=1.0,
                                       V0=-0.3, gamma=1.0, kappa_tilde=1.0,
                                       hbar=1.0)


@pytest.fixture
def magnetic3d_linear():
    """3-d magnetic oscillator with the kernel switched off."""
    return make_magnetic_oscillator_3d(m=1.0, k=1.0, H=2.0, e=1.0, c=1.0,
                                       V0=0.0, gamma=1.0, kappa_tilde=0.0,
                                       hbar=1.0)


def quadratic_model(stiffness, kappa_tilde=0.0, V0=0.0, gamma=1.0, hbar=1.0):
    """Custom model with H(z) = z . diag(stiffness) z / 2 and a Gaussian kernel."""
    stiffness = np.asarray(stiffness, dtype=float)
    n = stiffness.size // 2
    quad = np.diag(stiffness)

    def value(z):
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ quad @ z)

    oracle = HamiltonianOracle(
        value,
        gradient=lambda z: quad @ np.asarray(z, dtype=float),
        hessian=lambda z: quad,
        third=lambda z, d: np.zeros((2 * n, 2 * n)),
    )
    return SymbolModel(n, hbar, kappa_tilde, oracle,
                       gaussian_kernel(V0, gamma, n), label="quadratic")


def ritz_frequencies(model):
    """Shifted transverse pair and axial frequency of the 3-d model."""
    eta_wnl2 = model.eta * model.omega_nl**2
    omega_bar = np.sqrt(model.omega_a**2 - eta_wnl2)
    return (omega_bar + 0.5 * model.omega_H,
            omega_bar - 0.5 * model.omega_H,
            np.sqrt(model.omega_0**2 - eta_wnl2))


def align_phase(vec, reference):
    """Rotate ``vec`` by a unit phase so it best matches ``reference``."""
    overlap = np.vdot(vec, reference)
    if abs(overlap) == 0:
        return vec
    return vec * (overlap / abs(overlap))
