"""Energy-level asymptotics from a rest point and its mode set.

The level table is equidistant to leading order: a constant term (the
combined symbol at the rest point) plus hbar times corrected frequencies
contracted with the occupation multi-index shifted by 1/2.  The
corrections to the bare mode frequencies come in two parts, a quadratic
one from the kernel curvature in the second slot and a cubic one that
couples the kernel gradient to directional third derivatives; both vanish
as the coupling goes to zero, so the linear-theory oscillator levels are
recovered exactly in that limit.

Angle brackets in the formulas are bilinear (no conjugation is applied by
the pairing itself); conjugated mode vectors appear explicitly where
needed.  All outputs here are order-hbar asymptotics: the neglected
remainder is o(hbar) and no computable bound for it is provided.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NormalizationError
from .modes import ModeSet
from .symbols import GaussianOscillatorModel, SymbolModel, as_phase_point, symplectic_form

__all__ = [
    "CorrectedFrequencies",
    "SpectrumTable",
    "StationaryMoments",
    "corrected_frequencies",
    "ground_energy",
    "energy_levels",
    "stationary_moments",
    "moments_from_mode_matrix",
    "transition_frequency",
    "uncertainty_margin",
    "closed_form_spectrum_1d",
    "closed_form_spectrum_3d",
]


@dataclass(frozen=True)
class CorrectedFrequencies:
    """Mode frequencies with their nonlinear level-spacing corrections.

    ``base`` holds the bare frequencies Omega_k, ``quadratic`` the kernel
    curvature shifts and ``cubic`` the third-derivative shifts; the level
    spacing is their sum ``omega_tilde``.  Mean-value dynamics still runs
    at the bare frequencies, which is what makes the quantization relation
    between levels, transition frequencies and the accumulated action
    close (the action terms absorb the difference).
    """

    base: np.ndarray
    quadratic: np.ndarray
    cubic: np.ndarray

    @property
    def n(self) -> int:
        return self.base.size

    @property
    def omega_tilde(self) -> np.ndarray:
        return self.base + self.quadratic + self.cubic


@dataclass(frozen=True)
class SpectrumTable:
    """Energy levels indexed by occupation multi-index.

    ``entries`` is lexicographically ordered in nu.  ``principal`` is the
    constant term (combined symbol at the rest point) and ``ground`` the
    nu = 0 level.
    """

    entries: tuple
    ground: float
    principal: float

    def level(self, nu) -> float:
        nu = tuple(int(v) for v in np.atleast_1d(nu))
        for key, value in self.entries:
            if key == nu:
                return value
        raise KeyError(f"multi-index {nu} not in table")

    def to_dict(self) -> dict:
        return {
            "ground": self.ground,
            "principal": self.principal,
            "levels": [{"nu": list(nu), "E": e} for nu, e in self.entries],
        }


@dataclass(frozen=True)
class StationaryMoments:
    """Second moments of a stationary level, with per-mode occupations."""

    delta2: np.ndarray
    occupations: np.ndarray


def _check_nu(nu, n: int) -> np.ndarray:
    nu = np.atleast_1d(np.asarray(nu, dtype=int))
    if nu.size != n:
        raise ValueError(f"multi-index must have length {n}, got {nu.size}")
    if np.any(nu < 0):
        raise ValueError("multi-index components must be non-negative")
    return nu


def corrected_frequencies(
    model: SymbolModel, z0, modes: ModeSet
) -> CorrectedFrequencies:
    """Shift each bare frequency by the nonlinear kernel corrections.

    The quadratic shift is (kappa/2) <f_k*, V_ww f_k>.  The cubic shift is

        Re sum_j (kappa / 2 Omega_j) <V_w, f_k>
            <f_k*, d/dz> <f_j*, [hess(z, w) + kappa V_ww(z, w)] f_j>,

    with the directional derivative taken in the first slot before the
    diagonal restriction; it vanishes identically when the restricted
    kernel gradient is zero, as for any even translation-invariant kernel.
    """
    z0 = as_phase_point(z0, model.n)
    omegas = np.asarray(modes.omegas, dtype=float)
    if np.any(omegas <= 0):
        raise ValueError("all mode frequencies must be positive")
    n = modes.n
    kappa = model.kappa_tilde
    quadratic = np.zeros(n)
    cubic = np.zeros(n)
    if kappa != 0.0:
        vww = model.kernel_hessian_ww(z0)
        for k in range(n):
            f = modes.vectors[:, k]
            quadratic[k] = 0.5 * kappa * np.real(f.conj() @ vww @ f)
        vw = model.kernel_gradient_w(z0)
        if np.any(vw):
            inv_omega = 1.0 / omegas
            for k in range(n):
                f = modes.vectors[:, k]
                overlap = complex(vw @ f)
                curv = model.curvature_derivative(z0, f.conj())
                total = 0.0 + 0.0j
                for j in range(n):
                    g = modes.vectors[:, j]
                    total += (
                        0.5 * kappa * inv_omega[j] * overlap * (g.conj() @ curv @ g)
                    )
                cubic[k] = total.real
    return CorrectedFrequencies(base=omegas, quadratic=quadratic, cubic=cubic)


def ground_energy(model: SymbolModel, z0, corrected: CorrectedFrequencies) -> float:
    """Constant term plus half the sum of the corrected frequencies."""
    z0 = as_phase_point(z0, model.n)
    return model.energy(z0) + 0.5 * model.hbar * float(np.sum(corrected.omega_tilde))


def _normalize_nu_max(nu_max, n: int) -> tuple:
    nu_max = np.atleast_1d(np.asarray(nu_max, dtype=int))
    if nu_max.size == 1 and n > 1:
        nu_max = np.full(n, nu_max[0])
    if nu_max.size != n:
        raise ValueError(f"nu_max must have length {n}")
    if np.any(nu_max < 0):
        raise ValueError("nu_max components must be non-negative")
    return tuple(int(v) for v in nu_max)


def _assemble_table(constant, hbar, omega_tilde, nu_max) -> SpectrumTable:
    n = len(omega_tilde)
    ground = constant + 0.5 * hbar * float(np.sum(omega_tilde))
    entries = []
    for nu in itertools.product(*(range(m + 1) for m in nu_max)):
        offset = float(np.dot(nu, omega_tilde))
        entries.append((nu, ground + hbar * offset))
    return SpectrumTable(entries=tuple(entries), ground=ground, principal=constant)


def energy_levels(
    model: SymbolModel, z0, corrected: CorrectedFrequencies, nu_max
) -> SpectrumTable:
    """Tabulate levels for every multi-index componentwise below nu_max.

    Levels are built as ground + hbar <nu, omega_tilde>, which keeps the
    table equidistant by construction and exactly linear in hbar relative
    to the constant term.
    """
    z0 = as_phase_point(z0, model.n)
    nu_max = _normalize_nu_max(nu_max, corrected.n)
    return _assemble_table(
        model.energy(z0), model.hbar, corrected.omega_tilde, nu_max
    )


def moments_from_mode_matrix(modes: ModeSet, occupation: np.ndarray) -> np.ndarray:
    """Real second-moment matrix from a real symmetric occupation matrix.

    Builds sum_jl Re(f_j f_l^+) D_jl through the full mode matrix, checks
    that the imaginary residue is at rounding scale and returns the real
    part.  A residue above tolerance means the mode pairing is broken.
    """
    occupation = np.asarray(occupation, dtype=float)
    n = modes.n
    if occupation.shape != (n, n):
        raise ValueError(f"occupation matrix must be {n} x {n}")
    if not np.allclose(occupation, occupation.T, rtol=0, atol=1e-13):
        raise ValueError("occupation matrix must be symmetric")
    a = modes.mode_matrix(0.0)
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = 0.5 * occupation
    block[n:, n:] = 0.5 * occupation
    full = a @ block @ a.conj().T
    scale = max(1.0, float(np.max(np.abs(full))))
    residual = float(np.max(np.abs(full.imag)))
    if residual > 1e-12 * scale:
        raise NormalizationError(
            f"second moments came out complex (residual {residual:.3e}); "
            "mode normalization is broken"
        )
    return full.real


def stationary_moments(modes: ModeSet, nu, hbar: float) -> StationaryMoments:
    """Second moments of the stationary level nu.

    Each mode carries occupation hbar (nu_k + 1/2); the minimum-uncertainty
    choice at nu = 0 saturates the positivity of delta2 + (i hbar / 2) J.
    """
    nu = _check_nu(nu, modes.n)
    occupations = hbar * (nu + 0.5)
    delta2 = moments_from_mode_matrix(modes, np.diag(occupations))
    return StationaryMoments(delta2=delta2, occupations=occupations)


def transition_frequency(corrected: CorrectedFrequencies, nu, nu_prime) -> float:
    """Mean-value transition frequency <nu - nu', Omega> at the bare modes.

    Antisymmetric under swapping the multi-indices.  The bare frequencies
    appear here (not the corrected ones): the accumulated action makes up
    the difference in the quantization relation.
    """
    nu = _check_nu(nu, corrected.n)
    nu_prime = _check_nu(nu_prime, corrected.n)
    return float((nu - nu_prime) @ corrected.base)


def uncertainty_margin(delta2: np.ndarray, hbar: float) -> float:
    """Minimum eigenvalue of the Hermitian matrix delta2 + (i hbar / 2) J.

    Non-negative (to rounding) for moments of an admissible state; zero
    for minimum-uncertainty states.
    """
    delta2 = np.asarray(delta2, dtype=float)
    n = delta2.shape[0] // 2
    herm = delta2 + 0.5j * hbar * symplectic_form(n)
    return float(np.min(np.linalg.eigvalsh(herm)))


def _gate_ellipticity(model: GaussianOscillatorModel):
    eta_wnl2 = model.eta * model.omega_nl**2
    if model.omega_0**2 <= eta_wnl2 or model.omega_a**2 <= eta_wnl2:
        raise ValueError(
            "ellipticity violated: the nonlinear shift exceeds the "
            "oscillator stiffness"
        )


def closed_form_spectrum_1d(model: GaussianOscillatorModel, nu_max) -> SpectrumTable:
    """Printed-formula levels for the 1-d Gaussian oscillator.

    Used as a test oracle against the generic pipeline.  The constant term
    is the combined symbol at the origin, kappa_tilde * V0.
    """
    if model.n != 1:
        raise ValueError("closed_form_spectrum_1d expects a 1-d model")
    _gate_ellipticity(model)
    eta_wnl2 = model.eta * model.omega_nl**2
    omega_s = np.sqrt(model.omega_0**2 - eta_wnl2)
    shifted = omega_s - eta_wnl2 / (2.0 * omega_s)
    constant = model.kappa_tilde * model.V0
    nu_max = _normalize_nu_max(nu_max, 1)
    return _assemble_table(constant, model.hbar, np.array([shifted]), nu_max)


def closed_form_spectrum_3d(model: GaussianOscillatorModel, nu_max) -> SpectrumTable:
    """Printed-formula levels for the magnetic 3-d Gaussian oscillator.

    The three mode frequencies are the shifted transverse pair
    omega_+/- = sqrt(omega_a^2 - eta omega_nl^2) +/- omega_H / 2 and the
    axial omega_s = sqrt(omega_0^2 - eta omega_nl^2); their level-spacing
    corrections are -eta omega_nl^2 / (omega_+ + omega_-) for the
    transverse pair and -eta omega_nl^2 / (2 omega_s) for the axial mode.
    Modes are reindexed ascending in the bare frequency so tables compare
    entrywise with the generic pipeline.
    """
    if model.n != 3:
        raise ValueError("closed_form_spectrum_3d expects a 3-d model")
    _gate_ellipticity(model)
    eta_wnl2 = model.eta * model.omega_nl**2
    omega_bar = np.sqrt(model.omega_a**2 - eta_wnl2)
    omega_p = omega_bar + 0.5 * model.omega_H
    omega_m = omega_bar - 0.5 * model.omega_H
    omega_s = np.sqrt(model.omega_0**2 - eta_wnl2)
    if omega_m <= 0:
        raise ValueError("ellipticity violated: omega_- is not positive")
    pairs = sorted(
        [
            (omega_p, omega_p - eta_wnl2 / (omega_p + omega_m)),
            (omega_m, omega_m - eta_wnl2 / (omega_p + omega_m)),
            (omega_s, omega_s - eta_wnl2 / (2.0 * omega_s)),
        ]
    )
    shifted = np.array([corr for _, corr in pairs])
    constant = model.kappa_tilde * model.V0
    nu_max = _normalize_nu_max(nu_max, 3)
    return _assemble_table(constant, model.hbar, shifted, nu_max)
