"""Normal modes of the linearized dynamics at a rest point.

The stability matrix J @ hessian(z0) of an elliptic rest point has purely
imaginary eigenvalues that come in conjugate pairs +/- i Omega_k.  Each
positive branch supplies one mode vector f_k; the mode set is normalized
so the skew products satisfy

    {f_k, f_l} = 0,   {f_k*, f_l*} = 0,   {f_k*, f_l} = -2 i delta_kl,

where {v, u} = <v, J^T u> is the bilinear (unconjugated) symplectic
product; conjugates enter only by passing conjugated vectors.  The
oscillatory solutions a_k(t) = exp(i Omega_k t) f_k built from these modes
propagate both the first-order mean correction and the second moments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateModesError, EllipticityError, NormalizationError
from .symbols import SymbolModel, as_phase_point, symplectic_form

__all__ = ["skew_product", "ModeSet", "solve_modes"]


def skew_product(v, u) -> complex:
    """Symplectic bilinear product {v, u} = <v, J^T u>.

    With v = (W_a, Y_a) and u = (W_b, Y_b) split into momentum and
    position halves this equals W_a . Y_b - Y_a . W_b.  No complex
    conjugation is applied.
    """
    v = np.asarray(v)
    u = np.asarray(u)
    if v.shape != u.shape or v.ndim != 1 or v.size % 2 != 0:
        raise ValueError("skew_product expects two equal-length 2n vectors")
    n = v.size // 2
    return complex(v[:n] @ u[n:] - v[n:] @ u[:n])


@dataclass(frozen=True)
class ModeSet:
    """Frequencies and normalized mode vectors at a rest point.

    Attributes
    ----------
    omegas : ndarray, shape (n,)
        Positive frequencies sorted ascending; the sort order defines the
        mode index used everywhere downstream.
    vectors : ndarray, shape (2n, n), complex
        Columns are the mode vectors f_k, normalized to {f_k*, f_k} = -2i
        with the largest-modulus component made real and positive.
    pairing_tolerance : float
        Relative tolerance (times the Hessian norm) used for the
        ellipticity and degeneracy gates.
    eigen_residual : float
        Max over modes of |J hess f - i Omega f|.
    normalization_residual : float
        Max deviation of the full skew-product table from its target.
    """

    omegas: np.ndarray
    vectors: np.ndarray
    pairing_tolerance: float
    eigen_residual: float
    normalization_residual: float

    @property
    def n(self) -> int:
        return self.omegas.size

    def floquet(self, k: int, t: float) -> np.ndarray:
        """Oscillatory solution a_k(t) = exp(i Omega_k t) f_k (k is 0-based)."""
        if not 0 <= k < self.n:
            raise IndexError(f"mode index {k} out of range for n={self.n}")
        return np.exp(1j * self.omegas[k] * t) * self.vectors[:, k]

    def mode_matrix(self, t: float = 0.0) -> np.ndarray:
        """Matrix A(t) with columns (a_1(t)..a_n(t), a_1*(t)..a_n*(t))."""
        phases = np.exp(1j * self.omegas * t)
        a = self.vectors * phases
        return np.hstack([a, a.conj()])

    def propagator(self, t: float) -> np.ndarray:
        """Real linearized flow U(t) = A(t) A(0)^{-1}, with U(0) = I."""
        u = self.mode_matrix(t) @ np.linalg.inv(self.mode_matrix(0.0))
        return u.real

    def with_phases(self, phases) -> "ModeSet":
        """Copy with each mode vector multiplied by a unit complex phase."""
        phases = np.asarray(phases, dtype=complex)
        return replace(self, vectors=self.vectors * phases)


def _skew_table(matrix: np.ndarray) -> np.ndarray:
    """All pairwise skew products of the columns of a 2n x 2n matrix."""
    n = matrix.shape[0] // 2
    J = symplectic_form(n)
    return matrix.T @ J.T @ matrix


def solve_modes(model: SymbolModel, z0, pairing_tol: float = 1e-8) -> ModeSet:
    """Solve the linearized-mode eigenproblem J hess(z0) f = i Omega f.

    Parameters
    ----------
    model : SymbolModel
    z0 : array_like
        A verified rest point.
    pairing_tol : float
        Relative gate (times the Hessian norm) for both the allowed real
        part of the eigenvalues and the minimum frequency separation.

    Raises
    ------
    EllipticityError
        If any eigenvalue has a real part beyond the gate ("rest point not
        elliptic") or a mode has a negative symplectic signature and thus
        cannot satisfy the normalization with a positive frequency.
    DegenerateModesError
        If two frequencies coincide within the gate.
    NormalizationError
        If a skew product that should set the normalization is below
        rounding scale, signalling a defective pairing.
    """
    z0 = as_phase_point(z0, model.n)
    n = model.n
    hess = model.hessian(z0)
    scale = float(np.linalg.norm(hess, 2))
    gate = pairing_tol * max(scale, np.finfo(float).tiny)

    stability = symplectic_form(n) @ hess
    eigvals, eigvecs = np.linalg.eig(stability)

    worst_real = float(np.max(np.abs(eigvals.real)))
    if worst_real > gate:
        raise EllipticityError(
            f"rest point not elliptic: eigenvalue real part {worst_real:.3e} "
            f"exceeds gate {gate:.3e}"
        )

    positive = np.flatnonzero(eigvals.imag > gate)
    if positive.size != n:
        raise DegenerateModesError(
            f"expected {n} positive-frequency eigenvalues, found {positive.size}"
        )
    order = positive[np.argsort(eigvals.imag[positive])]
    omegas = eigvals.imag[order]
    if np.min(np.diff(omegas, prepend=0.0)) <= gate:
        raise DegenerateModesError(
            "mode frequencies are degenerate within the pairing tolerance: "
            + np.array2string(omegas, precision=12)
        )

    vectors = np.empty((2 * n, n), dtype=complex)
    for col, idx in enumerate(order):
        vec = eigvecs[:, idx]
        sigma = skew_product(vec.conj(), vec).imag
        if abs(sigma) <= 1e-12 * float(np.abs(vec) @ np.abs(vec)):
            # Defective pairing; the conjugate vector is the only other
            # candidate in this eigenplane.
            vec = vec.conj()
            sigma = skew_product(vec.conj(), vec).imag
            if abs(sigma) <= 1e-12 * float(np.abs(vec) @ np.abs(vec)):
                raise NormalizationError(
                    f"mode {col}: skew product vanishes, cannot normalize"
                )
        if sigma > 0:
            # The positive-frequency branch carries the wrong signature;
            # the conjugate branch would normalize but has Omega < 0.
            raise EllipticityError(
                f"mode {col}: negative symplectic signature, "
                "normalization incompatible with a positive frequency"
            )
        vec = vec * np.sqrt(2.0 / (-sigma))
        pivot = int(np.argmax(np.abs(vec)))
        vec = vec * (vec[pivot].conjugate() / abs(vec[pivot]))
        vectors[:, col] = vec

    eigen_residual = 0.0
    for k in range(n):
        res = stability @ vectors[:, k] - 1j * omegas[k] * vectors[:, k]
        eigen_residual = max(eigen_residual, float(np.max(np.abs(res))))

    table = _skew_table(np.hstack([vectors, vectors.conj()]))
    target = np.zeros((2 * n, 2 * n), dtype=complex)
    target[:n, n:] = 2j * np.eye(n)
    target[n:, :n] = -2j * np.eye(n)
    normalization_residual = float(np.max(np.abs(table - target)))

    return ModeSet(
        omegas=omegas,
        vectors=vectors,
        pairing_tolerance=pairing_tol,
        eigen_residual=eigen_residual,
        normalization_residual=normalization_residual,
    )
