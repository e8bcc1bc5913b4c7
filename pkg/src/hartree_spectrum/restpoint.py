"""Rest points of the principal moment system.

A rest point is a zero of the restricted gradient of the combined symbol,
i.e. an equilibrium of the mean-point equation of motion.  The solver is a
damped Newton iteration on that gradient with the restricted Hessian as
Jacobian; the damping safeguards against bad initial guesses, since the
models of interest are typically convex near the equilibrium but nothing
forces the caller to start there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SingularJacobianError
from .symbols import SymbolModel, as_phase_point

__all__ = ["RestPoint", "find_rest_point", "verify_rest_point"]

_MAX_HALVINGS = 30
_COND_LIMIT = 1.0 / np.finfo(float).eps


@dataclass(frozen=True)
class RestPoint:
    """A converged equilibrium of the mean-point dynamics.

    Attributes
    ----------
    z0 : ndarray
        The phase point, ordered (p, x).
    residual : float
        Max-norm of the restricted gradient at z0.
    energy : float
        Combined symbol value at z0 (the constant term of the spectrum).
    iterations : int
        Newton steps actually taken.
    """

    z0: np.ndarray
    residual: float
    energy: float
    iterations: int


def find_rest_point(
    model: SymbolModel,
    guess=None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> RestPoint:
    """Solve gradient(z) = 0 by damped Newton iteration from ``guess``.

    Parameters
    ----------
    model : SymbolModel
    guess : array_like, optional
        Starting point; defaults to the origin.
    tol : float
        Absolute tolerance on the max-norm of the gradient.
    max_iter : int
        Maximum Newton steps.

    Raises
    ------
    SingularJacobianError
        If the Hessian condition number exceeds 1/eps at an iterate.
    ConvergenceError
        If the residual is still above ``tol`` after ``max_iter`` steps or
        the line search stagnates; carries the last iterate and residual.

    Notes
    -----
    When several rest points exist the iteration converges to one
    determined by the guess; enumerating basins is the caller's concern.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if guess is None:
        guess = np.zeros(2 * model.n)
    z = as_phase_point(guess, model.n).copy()

    grad = model.gradient(z)
    residual = float(np.max(np.abs(grad)))
    merit = float(grad @ grad)

    for iteration in range(max_iter):
        if residual <= tol:
            return RestPoint(z, residual, model.energy(z), iteration)

        hess = model.hessian(z)
        if np.linalg.cond(hess) > _COND_LIMIT:
            raise SingularJacobianError(
                f"Hessian numerically singular at iterate {iteration}",
                last_iterate=z,
                residual=residual,
            )
        step = np.linalg.solve(hess, -grad)

        alpha = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            trial = z + alpha * step
            trial_grad = model.gradient(trial)
            trial_merit = float(trial_grad @ trial_grad)
            if trial_merit < merit:
                break
            alpha *= 0.5
        else:
            raise ConvergenceError(
                "line search stagnated: no descent along the Newton step",
                last_iterate=z,
                residual=residual,
            )

        z, grad, merit = trial, trial_grad, trial_merit
        residual = float(np.max(np.abs(grad)))

    if residual <= tol:
        return RestPoint(z, residual, model.energy(z), max_iter)
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {residual:.3e})",
        last_iterate=z,
        residual=residual,
    )


def verify_rest_point(model: SymbolModel, z0, tol: float = 1e-12) -> bool:
    """True iff the gradient max-norm at z0 is within ``tol``."""
    grad = model.gradient(as_phase_point(z0, model.n))
    return bool(np.max(np.abs(grad)) <= tol)
