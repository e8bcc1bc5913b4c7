"""Phase-space symbol models for Hartree-type operators.

A model couples a one-point Hamiltonian symbol H(z) with a two-point
interaction kernel V(z, w) through an effective coupling ``kappa_tilde``
(the bare coupling times the squared norm of the state, treated here as a
single scalar).  Everything downstream (rest points, normal modes, spectra,
moment dynamics) consumes the model only through the derivative oracles
defined in this module.

Conventions
-----------
* A phase point is a real vector of length 2n ordered ``(p_1..p_n,
  x_1..x_n)``: momenta first, then positions.
* The symplectic form is ``J = [[0, -I], [I, 0]]`` in that ordering.
* Derivatives of the combined symbol ``H(z) + kappa_tilde * V(z, w)`` are
  always taken in the first slot before the diagonal restriction ``w = z``
  is applied.  For a translation-invariant kernel such as the built-in
  Gaussian this makes the restricted gradient coincide with the gradient
  of H alone.
* Directional third derivatives accept complex directions; they are the
  complex-linear extension ``D_d = D_Re(d) + i D_Im(d)`` of the real
  directional derivative.

Oracles may omit analytic derivatives; missing ones fall back to central
finite differences of the next lower derivative.  The fallback is accurate
to roughly 1e-10 relative when the lower derivative is analytic and
degrades when stacked, so supplying analytic gradients is worthwhile for
anything beyond quick experiments.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "symplectic_form",
    "as_phase_point",
    "fd_gradient",
    "fd_jacobian",
    "fd_directional",
    "HamiltonianOracle",
    "KernelOracle",
    "gaussian_kernel",
    "SymbolModel",
    "GaussianOscillatorModel",
    "make_oscillator_1d",
    "make_magnetic_oscillator_3d",
]

_EPS = np.finfo(float).eps
# Truncation/round-off balance for a central difference of a smooth,
# exactly-evaluated quantity.
_FD_STEP = _EPS ** (1.0 / 3.0)

_SYMMETRY_RTOL = 1e-12


def symplectic_form(n: int) -> np.ndarray:
    """Standard symplectic matrix J for n degrees of freedom, (p, x) order."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def as_phase_point(z, n: int | None = None) -> np.ndarray:
    """Validate and return ``z`` as a finite real vector of even length.

    If ``n`` is given the length must be exactly ``2 n``.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError(f"phase point must be a 1-d vector, got shape {z.shape}")
    if n is not None and z.size != 2 * n:
        raise ValueError(f"phase point must have length {2 * n}, got {z.size}")
    if n is None and z.size % 2 != 0:
        raise ValueError(f"phase point must have even length, got {z.size}")
    if not np.all(np.isfinite(z)):
        raise ValueError("phase point has non-finite entries")
    return z


def _step(z: np.ndarray) -> float:
    return _FD_STEP * max(1.0, float(np.max(np.abs(z))))


def fd_gradient(func, z: np.ndarray) -> np.ndarray:
    """Central-difference gradient of a scalar function of one vector."""
    z = np.asarray(z, dtype=float)
    h = _step(z)
    grad = np.empty(z.size)
    for i in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[i] += h
        zm[i] -= h
        grad[i] = (func(zp) - func(zm)) / (2.0 * h)
    return grad


def fd_jacobian(func, z: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of a vector function; rows index outputs."""
    z = np.asarray(z, dtype=float)
    h = _step(z)
    cols = []
    for i in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[i] += h
        zm[i] -= h
        cols.append((np.asarray(func(zp)) - np.asarray(func(zm))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def fd_directional(func, z: np.ndarray, d: np.ndarray):
    """Central-difference directional derivative along a real direction d.

    ``func`` may return a scalar, vector or matrix; the step is scaled so
    the probe displacement stays near the nominal finite-difference step
    while the derivative remains linear in the magnitude of ``d``.
    """
    z = np.asarray(z, dtype=float)
    d = np.asarray(d, dtype=float)
    scale = float(np.max(np.abs(d)))
    if scale == 0.0:
        probe = np.asarray(func(z))
        return np.zeros_like(probe)
    eps = _step(z) / scale
    fp = np.asarray(func(z + eps * d))
    fm = np.asarray(func(z - eps * d))
    return (fp - fm) / (2.0 * eps)


def _symmetrized(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    scale = max(1.0, float(np.max(np.abs(mat))))
    asym = float(np.max(np.abs(mat - mat.T)))
    if asym > _SYMMETRY_RTOL * scale:
        raise ValueError(
            f"{what} is not symmetric (relative asymmetry {asym / scale:.3e})"
        )
    return 0.5 * (mat + mat.T)


class HamiltonianOracle:
    """Scalar symbol H(z) with derivatives up to a directional third order.

    Parameters
    ----------
    value : callable
        z -> float.
    gradient : callable, optional
        z -> (2n,) array.  Falls back to finite differences of ``value``.
    hessian : callable, optional
        z -> (2n, 2n) symmetric array.  Falls back to finite differences
        of ``gradient``.
    third : callable, optional
        (z, d) -> (2n, 2n) array, the derivative of the Hessian along the
        real direction d.  Falls back to finite differences of ``hessian``.
    """

    def __init__(self, value, gradient=None, hessian=None, third=None):
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self._third = third

    @property
    def is_analytic(self) -> bool:
        return None not in (self._gradient, self._hessian, self._third)

    def value(self, z) -> float:
        return float(self._value(z))

    def gradient(self, z) -> np.ndarray:
        if self._gradient is not None:
            return np.asarray(self._gradient(z), dtype=float)
        return fd_gradient(self._value, z)

    def hessian(self, z) -> np.ndarray:
        if self._hessian is not None:
            return _symmetrized(self._hessian(z), "Hamiltonian Hessian")
        mat = fd_jacobian(self.gradient, z)
        return 0.5 * (mat + mat.T)

    def third(self, z, d) -> np.ndarray:
        """Directional derivative of the Hessian along the real direction d."""
        if self._third is not None:
            return np.asarray(self._third(z, d), dtype=float)
        return fd_directional(self.hessian, z, d)


class KernelOracle:
    """Two-point symbol V(z, w) with derivatives in both slots.

    All third-order entries are directional derivatives in the first slot
    (z) at fixed w, matching how the dynamics and frequency corrections
    consume them.  Any derivative left as None falls back to central
    finite differences of the next lower one.
    """

    def __init__(
        self,
        value,
        gradient_z=None,
        gradient_w=None,
        hessian_zz=None,
        hessian_ww=None,
        hessian_zw=None,
        third_zz=None,
        third_ww=None,
        third_zw=None,
    ):
        self._value = value
        self._gradient_z = gradient_z
        self._gradient_w = gradient_w
        self._hessian_zz = hessian_zz
        self._hessian_ww = hessian_ww
        self._hessian_zw = hessian_zw
        self._third_zz = third_zz
        self._third_ww = third_ww
        self._third_zw = third_zw

    @property
    def is_analytic(self) -> bool:
        return None not in (
            self._gradient_z,
            self._gradient_w,
            self._hessian_zz,
            self._hessian_ww,
            self._hessian_zw,
            self._third_zz,
            self._third_ww,
            self._third_zw,
        )

    def value(self, z, w) -> float:
        return float(self._value(z, w))

    def gradient_z(self, z, w) -> np.ndarray:
        if self._gradient_z is not None:
            return np.asarray(self._gradient_z(z, w), dtype=float)
        return fd_gradient(lambda u: self._value(u, w), z)

    def gradient_w(self, z, w) -> np.ndarray:
        if self._gradient_w is not None:
            return np.asarray(self._gradient_w(z, w), dtype=float)
        return fd_gradient(lambda u: self._value(z, u), w)

    def hessian_zz(self, z, w) -> np.ndarray:
        if self._hessian_zz is not None:
            return _symmetrized(self._hessian_zz(z, w), "kernel z-Hessian")
        mat = fd_jacobian(lambda u: self.gradient_z(u, w), z)
        return 0.5 * (mat + mat.T)

    def hessian_ww(self, z, w) -> np.ndarray:
        if self._hessian_ww is not None:
            return _symmetrized(self._hessian_ww(z, w), "kernel w-Hessian")
        mat = fd_jacobian(lambda u: self.gradient_w(z, u), w)
        return 0.5 * (mat + mat.T)

    def hessian_zw(self, z, w) -> np.ndarray:
        """Mixed second derivative, rows indexing z and columns w."""
        if self._hessian_zw is not None:
            return np.asarray(self._hessian_zw(z, w), dtype=float)
        return fd_jacobian(lambda u: self.gradient_z(z, u), w)

    def third_zz(self, z, w, d) -> np.ndarray:
        if self._third_zz is not None:
            return np.asarray(self._third_zz(z, w, d), dtype=float)
        return fd_directional(lambda u: self.hessian_zz(u, w), z, d)

    def third_ww(self, z, w, d) -> np.ndarray:
        if self._third_ww is not None:
            return np.asarray(self._third_ww(z, w, d), dtype=float)
        return fd_directional(lambda u: self.hessian_ww(u, w), z, d)

    def third_zw(self, z, w, d) -> np.ndarray:
        if self._third_zw is not None:
            return np.asarray(self._third_zw(z, w, d), dtype=float)
        return fd_directional(lambda u: self.hessian_zw(u, w), z, d)


def gaussian_kernel(V0: float, gamma: float, n: int) -> KernelOracle:
    """Translation-invariant Gaussian kernel ``V0 exp(-|x - y|^2 / 2 gamma^2)``.

    The kernel depends on positions only, so all momentum derivatives
    vanish, the restricted gradient ``V_w(z, z)`` is identically zero, and
    the restricted second derivatives are the constant ``-V0 / gamma^2``
    on the position diagonal.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g2 = gamma * gamma

    def _split(z, w):
        x = np.asarray(z, dtype=float)[n:]
        y = np.asarray(w, dtype=float)[n:]
        u = x - y
        return u, V0 * math.exp(-float(u @ u) / (2.0 * g2))

    def value(z, w):
        _, g = _split(z, w)
        return g

    def gradient_z(z, w):
        u, g = _split(z, w)
        out = np.zeros(2 * n)
        out[n:] = -(g / g2) * u
        return out

    def gradient_w(z, w):
        return -gradient_z(z, w)

    def _position_hessian(u, g):
        return g * (np.outer(u, u) / (g2 * g2) - np.eye(n) / g2)

    def hessian_zz(z, w):
        u, g = _split(z, w)
        out = np.zeros((2 * n, 2 * n))
        out[n:, n:] = _position_hessian(u, g)
        return out

    hessian_ww = hessian_zz

    def hessian_zw(z, w):
        u, g = _split(z, w)
        out = np.zeros((2 * n, 2 * n))
        out[n:, n:] = -_position_hessian(u, g)
        return out

    def _position_third(u, g, dx):
        # d/dx along dx of the position Hessian block.
        core = np.outer(u, u) / (g2 * g2) - np.eye(n) / g2
        mixed = (np.outer(dx, u) + np.outer(u, dx)) / (g2 * g2)
        return g * (mixed - (float(u @ dx) / g2) * core)

    def third_zz(z, w, d):
        u, g = _split(z, w)
        dx = np.asarray(d, dtype=float)[n:]
        out = np.zeros((2 * n, 2 * n))
        out[n:, n:] = _position_third(u, g, dx)
        return out

    third_ww = third_zz

    def third_zw(z, w, d):
        return -third_zz(z, w, d)

    return KernelOracle(
        value,
        gradient_z=gradient_z,
        gradient_w=gradient_w,
        hessian_zz=hessian_zz,
        hessian_ww=hessian_ww,
        hessian_zw=hessian_zw,
        third_zz=third_zz,
        third_ww=third_ww,
        third_zw=third_zw,
    )


class SymbolModel:
    """A Hartree-type model behind a uniform derivative-oracle interface.

    The combined symbol is ``H(z) + kappa_tilde * V(z, w)``; the methods
    below return its diagonal restrictions and the curvature objects the
    moment dynamics needs.  Instances are immutable after construction and
    all oracle calls are pure, so a model can be shared across threads.

    Parameters
    ----------
    n : int
        Degrees of freedom; phase points have length 2n.
    hbar : float
        Semiclassical parameter, strictly positive.
    kappa_tilde : float
        Effective coupling in front of the kernel.
    hamiltonian : HamiltonianOracle
    kernel : KernelOracle
    label : str
        Short name used in reports and CLI output.
    """

    def __init__(self, n, hbar, kappa_tilde, hamiltonian, kernel, label="custom"):
        if n < 1:
            raise ValueError("n must be a positive integer")
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        self.n = int(n)
        self.hbar = float(hbar)
        self.kappa_tilde = float(kappa_tilde)
        self.hamiltonian = hamiltonian
        self.kernel = kernel
        self.label = label

    @property
    def derivative_mode(self) -> str:
        if self.hamiltonian.is_analytic and self.kernel.is_analytic:
            return "analytic"
        return "finite-difference"

    def _point(self, z) -> np.ndarray:
        return as_phase_point(z, self.n)

    def energy(self, z) -> float:
        """Combined symbol on the diagonal, H(z) + kappa_tilde V(z, z)."""
        z = self._point(z)
        out = self.hamiltonian.value(z)
        if self.kappa_tilde != 0.0:
            out += self.kappa_tilde * self.kernel.value(z, z)
        return out

    def gradient(self, z) -> np.ndarray:
        """First-slot gradient of the combined symbol restricted to w = z."""
        z = self._point(z)
        out = self.hamiltonian.gradient(z)
        if self.kappa_tilde != 0.0:
            out = out + self.kappa_tilde * self.kernel.gradient_z(z, z)
        return out

    def kernel_gradient_w(self, z) -> np.ndarray:
        """Second-slot kernel gradient V_w(z, z); zero for even kernels."""
        z = self._point(z)
        return self.kernel.gradient_w(z, z)

    def hessian(self, z) -> np.ndarray:
        """First-slot Hessian of the combined symbol restricted to w = z."""
        z = self._point(z)
        out = self.hamiltonian.hessian(z)
        if self.kappa_tilde != 0.0:
            out = out + self.kappa_tilde * self.kernel.hessian_zz(z, z)
        return out

    def kernel_hessian_ww(self, z) -> np.ndarray:
        z = self._point(z)
        return self.kernel.hessian_ww(z, z)

    def curvature(self, z) -> np.ndarray:
        """Moment-coupling curvature: the Hessian plus the w-Hessian of V.

        This is the matrix whose trace against the second moments drives
        both the mean-point correction and the frequency shifts.
        """
        z = self._point(z)
        out = self.hamiltonian.hessian(z)
        if self.kappa_tilde != 0.0:
            out = out + self.kappa_tilde * (
                self.kernel.hessian_zz(z, z) + self.kernel.hessian_ww(z, z)
            )
        return out

    def curvature_derivative(self, z, d) -> np.ndarray:
        """Directional derivative of the curvature along d, complex-linear.

        The derivative acts on the first slot before the diagonal
        restriction; complex directions combine the two real directional
        derivatives as ``D_Re(d) + i D_Im(d)``.
        """
        z = self._point(z)
        d = np.asarray(d)
        if d.shape != (2 * self.n,):
            raise ValueError(f"direction must have length {2 * self.n}")
        if np.iscomplexobj(d):
            out = self._real_curvature_derivative(z, d.real).astype(complex)
            if np.any(d.imag):
                out += 1j * self._real_curvature_derivative(z, d.imag)
            return out
        return self._real_curvature_derivative(z, d.astype(float))

    def _real_curvature_derivative(self, z, d):
        out = self.hamiltonian.third(z, d)
        if self.kappa_tilde != 0.0:
            out = out + self.kappa_tilde * (
                self.kernel.third_zz(z, z, d) + self.kernel.third_ww(z, z, d)
            )
        return out


class GaussianOscillatorModel(SymbolModel):
    """Built-in oscillator model with a Gaussian interaction kernel.

    Exposes the derived frequencies used throughout the closed-form
    results: cyclotron ``omega_H``, oscillator ``omega_0``, nonlinear
    ``omega_nl``, shifted ``omega_a``, and the coupling sign ``eta``.
    """

    def __init__(self, *, n, m, k, field=0.0, charge=1.0, light_speed=1.0,
                 V0=0.0, gamma=1.0, kappa_tilde=0.0, hbar=1.0, label=""):
        if m <= 0 or k <= 0:
            raise ValueError("m and k must be positive")
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        self.m = float(m)
        self.k = float(k)
        self.field = float(field)
        self.charge = float(charge)
        self.light_speed = float(light_speed)
        self.V0 = float(V0)
        self.gamma = float(gamma)

        self.omega_H = self.charge * self.field / (self.m * self.light_speed)
        self.omega_0 = math.sqrt(self.k / self.m)
        self.omega_nl = math.sqrt(abs(kappa_tilde * V0) / (self.m * gamma * gamma))
        self.omega_a = self.omega_0 * math.sqrt(
            1.0 + (self.omega_H / (2.0 * self.omega_0)) ** 2
        )
        self.eta = float(np.sign(kappa_tilde * V0))

        hess = self._quadratic_matrix(n)

        def value(z):
            z = np.asarray(z, dtype=float)
            return 0.5 * float(z @ hess @ z)

        def gradient(z):
            return hess @ np.asarray(z, dtype=float)

        def hessian(z):
            return hess

        def third(z, d):
            return np.zeros((2 * n, 2 * n))

        super().__init__(
            n,
            hbar,
            kappa_tilde,
            HamiltonianOracle(value, gradient, hessian, third),
            gaussian_kernel(self.V0, self.gamma, n),
            label=label,
        )

    def _quadratic_matrix(self, n):
        hess = np.zeros((2 * n, 2 * n))
        hess[:n, :n] = np.eye(n) / self.m
        if n == 1:
            hess[1, 1] = self.k
            return hess
        # Transverse directions feel the shifted frequency, the field axis
        # keeps the bare one; the momentum/position cross block carries the
        # cyclotron rotation.
        stiff = [self.m * self.omega_a**2] * (n - 1) + [self.m * self.omega_0**2]
        hess[n:, n:] = np.diag(stiff)
        hess[0, n + 1] = self.omega_H / 2.0
        hess[1, n] = -self.omega_H / 2.0
        hess[n + 1, 0] = self.omega_H / 2.0
        hess[n, 1] = -self.omega_H / 2.0
        return hess

    def params(self) -> dict:
        out = {
            "kind": self.label,
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "V0": self.V0,
            "gamma": self.gamma,
            "kappa_tilde": self.kappa_tilde,
            "hbar": self.hbar,
        }
        if self.n == 3:
            out.update({"H": self.field, "e": self.charge, "c": self.light_speed})
        return out


def make_oscillator_1d(m, k, V0, gamma, kappa_tilde, hbar) -> GaussianOscillatorModel:
    """One-dimensional oscillator with a Gaussian self-interaction."""
    return GaussianOscillatorModel(
        n=1, m=m, k=k, V0=V0, gamma=gamma,
        kappa_tilde=kappa_tilde, hbar=hbar, label="oscillator_1d",
    )


def make_magnetic_oscillator_3d(
    m, k, H, e, c, V0, gamma, kappa_tilde, hbar
) -> GaussianOscillatorModel:
    """Charged 3-d oscillator in a constant axial magnetic field H.

    The quadratic part combines an isotropic oscillator of stiffness k with
    the cyclotron rotation omega_H = e H / (m c) about the third axis; the
    self-interaction is the Gaussian kernel of width gamma and strength V0.
    """
    return GaussianOscillatorModel(
        n=3, m=m, k=k, field=H, charge=e, light_speed=c, V0=V0, gamma=gamma,
        kappa_tilde=kappa_tilde, hbar=hbar, label="magnetic_oscillator_3d",
    )
