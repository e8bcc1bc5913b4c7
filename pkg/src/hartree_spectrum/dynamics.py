"""Time integration of the finite moment systems and their diagnostics.

Three integration modes are provided:

``order0``
    The mean point alone, z' = J grad(z).  Second moments ride along as a
    constant block so diagnostics and export stay uniform.
``order2``
    Mean point coupled to second moments: the mean feels the trace of the
    third derivatives against the moments, the moments evolve linearly
    along the mean.
``split``
    The small-dispersion expansion: the mean point is integrated at
    leading order, the second moments along it, and the first-order mean
    correction z1 is driven by the moment-trace forcing.  When a mode set
    is supplied the oscillatory basis is integrated too, so symplectic
    drift can be monitored.

The integrator is a fixed-step classical Runge-Kutta scheme; every step is
recorded.  Positivity of delta2 + (i hbar / 2) J is checked each step and
integration aborts when the margin drops below -1e-6 hbar, which signals
an invalid initial state or a step size far too large.

The accumulated action along a split trajectory uses the generalized
integrand <P, X'> minus the combined symbol, minus the kernel-gradient
coupling to hbar z1, minus half the coupling times the trace of the
kernel w-Hessian against the moments.  For a stationary state this makes
the quantization relation between levels, bare transition frequencies and
the action rates close identically.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import NormalizationError, PositivityError
from .modes import ModeSet, skew_product
from .spectrum import stationary_moments, uncertainty_margin
from .symbols import SymbolModel, as_phase_point, symplectic_form

__all__ = [
    "MomentState",
    "Trajectory",
    "rhs_order0",
    "rhs_order2",
    "forcing",
    "max_frequency",
    "default_timestep",
    "integrate",
    "propagate_moments",
    "reconstruct_z1",
    "stationary_z1",
    "action_series",
    "gaussian_initial_moments",
    "extract_trajectory_frequencies",
    "write_trajectory_csv",
]

INTEGRATION_MODES = ("order0", "order2", "split")

_ABORT_MARGIN = 1e-6
_ASYM_RTOL = 1e-12


@dataclass(frozen=True)
class MomentState:
    """Mean phase point plus symmetric second-moment matrix.

    ``z1`` is the optional first-order mean correction used by the split
    mode; it defaults to zero there and is ignored elsewhere.
    """

    z: np.ndarray
    delta2: np.ndarray
    z1: np.ndarray | None = None


@dataclass(frozen=True)
class Trajectory:
    """Recorded run of one of the moment systems.

    Arrays are congruent along the leading (time) axis.  ``z1``, ``action``
    and ``skew_drift`` are None outside split mode (``skew_drift`` also
    when no mode set was supplied for tracking).
    """

    times: np.ndarray
    z: np.ndarray
    delta2: np.ndarray
    z1: np.ndarray | None
    action: np.ndarray | None
    positivity_margin: np.ndarray
    skew_drift: np.ndarray | None
    mode: str
    hbar: float

    @property
    def final_state(self) -> MomentState:
        z1 = None if self.z1 is None else self.z1[-1]
        return MomentState(self.z[-1], self.delta2[-1], z1)


def rhs_order0(model: SymbolModel, z) -> np.ndarray:
    """Mean-point velocity J grad(z) of the principal system."""
    z = as_phase_point(z, model.n)
    return symplectic_form(model.n) @ model.gradient(z)


def forcing(model: SymbolModel, z, delta2) -> np.ndarray:
    """Moment-trace forcing of the first-order mean correction.

    (1 / 2 hbar) J times the gradient (in the first slot, before the
    diagonal restriction) of Tr[curvature(z, w) delta2], assembled from 2n
    coordinate directional derivatives of the curvature.  The moments are
    O(hbar), so the result is O(1).
    """
    z = as_phase_point(z, model.n)
    delta2 = np.asarray(delta2, dtype=float)
    dim = 2 * model.n
    grad = np.empty(dim)
    direction = np.zeros(dim)
    for i in range(dim):
        direction[i] = 1.0
        grad[i] = float(np.sum(model.curvature_derivative(z, direction) * delta2))
        direction[i] = 0.0
    return (0.5 / model.hbar) * (symplectic_form(model.n) @ grad)


def _moment_rhs(stability: np.ndarray, hess: np.ndarray, J: np.ndarray,
                delta2: np.ndarray) -> np.ndarray:
    """Symmetrized right-hand side J hess delta2 - delta2 hess J."""
    raw = stability @ delta2 - delta2 @ (hess @ J)
    scale = max(1.0, float(np.max(np.abs(raw))))
    asym = float(np.max(np.abs(raw - raw.T)))
    if asym > _ASYM_RTOL * scale:
        raise NormalizationError(
            f"moment update asymmetry {asym / scale:.3e} above rounding scale"
        )
    return 0.5 * (raw + raw.T)


def rhs_order2(model: SymbolModel, state: MomentState):
    """Coupled rates (z', delta2') of the second-order system.

    The mean-point rate is J grad(z) plus hbar times the moment-trace
    forcing; for a quadratic Hamiltonian with zero coupling the extra term
    vanishes and the rate reduces to the principal one exactly.
    """
    z = as_phase_point(state.z, model.n)
    delta2 = np.asarray(state.delta2, dtype=float)
    J = symplectic_form(model.n)
    hess = model.hessian(z)
    zdot = J @ model.gradient(z) + model.hbar * forcing(model, z, delta2)
    ddot = _moment_rhs(J @ hess, hess, J, delta2)
    return zdot, ddot


def max_frequency(model: SymbolModel, z) -> float:
    """Largest eigenfrequency magnitude of the linearization at z."""
    z = as_phase_point(z, model.n)
    eigs = np.linalg.eigvals(symplectic_form(model.n) @ model.hessian(z))
    return float(np.max(np.abs(eigs)))


def default_timestep(model: SymbolModel, z) -> float:
    """Step rule 1e-2 over the largest local eigenfrequency."""
    top = max_frequency(model, z)
    return 1e-2 / top if top > 0 else 1e-2


def _rk4(fun, y: np.ndarray, h: float) -> np.ndarray:
    k1 = fun(y)
    k2 = fun(y + 0.5 * h * k1)
    k3 = fun(y + 0.5 * h * k2)
    k4 = fun(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    model: SymbolModel,
    initial: MomentState,
    t_final: float,
    dt: float | None = None,
    mode: str = "order2",
    modes: ModeSet | None = None,
) -> Trajectory:
    """Integrate one of the moment systems with fixed-step Runge-Kutta.

    Parameters
    ----------
    model : SymbolModel
    initial : MomentState
        Starting mean point and moments (and z1 for split mode, default
        zero).  The moment matrix is symmetrized on entry and must satisfy
        the uncertainty positivity gate.
    t_final : float
        Final time, strictly positive.  The step is adjusted to land on it
        exactly, keeping the grid uniform.
    dt : float, optional
        Step size; defaults to the 1e-2-per-frequency rule at the initial
        point.
    mode : {"order0", "order2", "split"}
    modes : ModeSet, optional
        In split mode, seeds the oscillatory basis A(t) so symplectic
        drift is tracked; ignored otherwise.

    Raises
    ------
    PositivityError
        When the uncertainty margin drops below -1e-6 hbar at any recorded
        step (including the initial one).
    """
    if mode not in INTEGRATION_MODES:
        raise ValueError(f"mode must be one of {INTEGRATION_MODES}")
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    if dt is None:
        dt = default_timestep(model, initial.z)
    if dt <= 0:
        raise ValueError("dt must be positive")

    n = model.n
    dim = 2 * n
    J = symplectic_form(n)
    z0 = as_phase_point(initial.z, n).copy()
    delta2 = np.asarray(initial.delta2, dtype=float)
    if delta2.shape != (dim, dim):
        raise ValueError(f"delta2 must be {dim} x {dim}")
    delta2 = 0.5 * (delta2 + delta2.T)

    n_steps = max(1, int(round(t_final / dt)))
    h = t_final / n_steps
    times = h * np.arange(n_steps + 1)

    track = mode == "split" and modes is not None
    a0 = modes.mode_matrix(0.0) if track else None
    g0 = (a0.T @ J.T @ a0) if track else None

    z_hist = np.empty((n_steps + 1, dim))
    d_hist = np.empty((n_steps + 1, dim, dim))
    z1_hist = np.empty((n_steps + 1, dim)) if mode == "split" else None
    margin_hist = np.empty(n_steps + 1)
    drift_hist = np.empty(n_steps + 1) if track else None

    mat = dim * dim

    if mode == "order0":
        def fun(y):
            return J @ model.gradient(y)

        state = z0.copy()
    elif mode == "order2":
        def fun(y):
            z = y[:dim]
            d2 = y[dim:].reshape(dim, dim)
            hess = model.hessian(z)
            zdot = J @ model.gradient(z) + model.hbar * forcing(model, z, d2)
            ddot = _moment_rhs(J @ hess, hess, J, d2)
            return np.concatenate([zdot, ddot.ravel()])

        state = np.concatenate([z0, delta2.ravel()])
    else:
        z1_init = (
            np.zeros(dim) if initial.z1 is None else as_phase_point(initial.z1, n)
        )

        def fun(y):
            z = y[:dim]
            z1 = y[dim:2 * dim]
            d2 = y[2 * dim:2 * dim + mat].reshape(dim, dim)
            hess = model.hessian(z)
            stab = J @ hess
            zdot = J @ model.gradient(z)
            z1dot = stab @ z1 + forcing(model, z, d2)
            ddot = _moment_rhs(stab, hess, J, d2)
            parts = [zdot, z1dot, ddot.ravel()]
            if track:
                re = y[2 * dim + mat:2 * dim + 2 * mat].reshape(dim, dim)
                im = y[2 * dim + 2 * mat:].reshape(dim, dim)
                parts.append((stab @ re).ravel())
                parts.append((stab @ im).ravel())
            return np.concatenate(parts)

        pieces = [z0, z1_init, delta2.ravel()]
        if track:
            pieces.append(a0.real.ravel())
            pieces.append(a0.imag.ravel())
        state = np.concatenate(pieces)

    def unpack(y):
        if mode == "order0":
            return y, delta2, None, None
        if mode == "order2":
            return y[:dim], y[dim:].reshape(dim, dim), None, None
        z = y[:dim]
        z1 = y[dim:2 * dim]
        d2 = y[2 * dim:2 * dim + mat].reshape(dim, dim)
        a = None
        if track:
            re = y[2 * dim + mat:2 * dim + 2 * mat].reshape(dim, dim)
            im = y[2 * dim + 2 * mat:].reshape(dim, dim)
            a = re + 1j * im
        return z, z1, d2, a

    def record(idx, t, y):
        if mode == "order0":
            z, d2, z1, a = y, delta2, None, None
        elif mode == "order2":
            z, d2, z1, a = y[:dim], y[dim:].reshape(dim, dim), None, None
        else:
            z, z1, d2, a = unpack(y)
        z_hist[idx] = z
        d_hist[idx] = d2
        if z1_hist is not None:
            z1_hist[idx] = z1
        margin = uncertainty_margin(d2, model.hbar)
        margin_hist[idx] = margin
        if track:
            table = a.T @ J.T @ a
            drift_hist[idx] = float(np.max(np.abs(table - g0)))
        if margin < -_ABORT_MARGIN * model.hbar:
            raise PositivityError(
                f"uncertainty positivity lost at t={t:.6g} "
                f"(margin {margin:.3e}); reduce the step or fix the "
                "initial moments",
                time=t,
                margin=margin,
            )

    record(0, 0.0, state)
    for step in range(1, n_steps + 1):
        state = _rk4(fun, state, h)
        record(step, times[step], state)

    traj = Trajectory(
        times=times,
        z=z_hist,
        delta2=d_hist,
        z1=z1_hist,
        action=None,
        positivity_margin=margin_hist,
        skew_drift=drift_hist,
        mode=mode,
        hbar=model.hbar,
    )
    if mode == "split":
        traj = Trajectory(
            times=times,
            z=z_hist,
            delta2=d_hist,
            z1=z1_hist,
            action=action_series(model, traj),
            positivity_margin=margin_hist,
            skew_drift=drift_hist,
            mode=mode,
            hbar=model.hbar,
        )
    return traj


def propagate_moments(modes: ModeSet, delta2_0, t: float) -> np.ndarray:
    """Closed-form moment propagation U(t) delta2(0) U(t)^T at a rest point.

    U(t) is the real linearized flow reconstructed from the oscillatory
    basis; this is the mode-decomposition form of the general solution of
    the linear moment equation.
    """
    u = modes.propagator(t)
    delta2_0 = np.asarray(delta2_0, dtype=float)
    return u @ delta2_0 @ u.T


def _cumtrapz(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    out = np.zeros(values.shape[0], dtype=values.dtype)
    if values.ndim == 1:
        increments = 0.5 * np.diff(times) * (values[1:] + values[:-1])
    else:
        increments = 0.5 * np.diff(times)[:, None] * (values[1:] + values[:-1])
    out[1:] = np.cumsum(increments, axis=0)
    return out


def reconstruct_z1(
    modes: ModeSet, times, forcing_history, b0=None
) -> np.ndarray:
    """First-order mean correction from mode quadratures at a rest point.

    Solves z1' = J hess z1 + F by expanding over the oscillatory basis:
    the coefficient of each mode is b0_k minus 1/(2i) times the running
    trapezoidal quadrature of {a_k*(t), F(t)}, and

        z1(t) = sum_k [b_k(t) a_k(t) + conj(b_k(t) a_k(t))].

    ``forcing_history`` must be sampled on the same grid as ``times``.
    The result is real by construction; a residue above 1e-10 raises.
    """
    times = np.asarray(times, dtype=float)
    F = np.asarray(forcing_history, dtype=float)
    n = modes.n
    dim = 2 * n
    if F.shape != (times.size, dim):
        raise ValueError("forcing_history must have shape (len(times), 2n)")
    if b0 is None:
        b0 = np.zeros(n, dtype=complex)
    b0 = np.asarray(b0, dtype=complex)
    if b0.shape != (n,):
        raise ValueError(f"b_constants must have length {n}")

    phases = np.exp(1j * np.outer(times, modes.omegas))  # (m, n)
    a = phases[:, None, :] * modes.vectors[None, :, :]   # (m, 2n, n)
    a_conj = a.conj()
    integrand = np.einsum("tik,ti->tk", a_conj[:, :n, :], F[:, n:]) - np.einsum(
        "tik,ti->tk", a_conj[:, n:, :], F[:, :n]
    )
    b = b0[None, :] - _cumtrapz(integrand, times) / 2j
    z1 = np.einsum("tk,tik->ti", b, a)
    z1 = z1 + z1.conj()
    residual = float(np.max(np.abs(z1.imag)))
    if residual > 1e-10 * max(1.0, float(np.max(np.abs(z1.real)))):
        raise NormalizationError(
            f"reconstructed z1 is complex (residual {residual:.3e})"
        )
    return z1.real


def stationary_z1(model: SymbolModel, z0, modes: ModeSet, nu) -> np.ndarray:
    """Time-independent first-order mean correction of a stationary level.

    With stationary moments the forcing F is constant and the correction
    solves J hess z1 = -F, i.e. in mode components

        z1 = - sum_k Re[{f_k*, F} f_k] / Omega_k.
    """
    z0 = as_phase_point(z0, model.n)
    delta2 = stationary_moments(modes, nu, model.hbar).delta2
    fvec = forcing(model, z0, delta2)
    out = np.zeros(2 * model.n)
    for k in range(modes.n):
        f = modes.vectors[:, k]
        coef = skew_product(f.conj(), fvec)
        out -= np.real(coef * f) / modes.omegas[k]
    return out


def action_series(model: SymbolModel, trajectory: Trajectory) -> np.ndarray:
    """Accumulated generalized action along a split trajectory.

    Trapezoidal quadrature of

        <P, X'> - energy(z) - hbar kappa <V_w(z, z), z1>
                - (kappa / 2) Tr[V_ww(z, z) delta2]

    with the mean velocity evaluated from the principal equation rather
    than by differencing the stored samples.
    """
    if trajectory.z1 is None:
        raise ValueError("action requires a split-mode trajectory carrying z1")
    kappa = model.kappa_tilde
    hbar = model.hbar
    n = model.n
    m = trajectory.times.size
    integrand = np.empty(m)
    for i in range(m):
        z = trajectory.z[i]
        zdot = rhs_order0(model, z)
        value = float(z[:n] @ zdot[n:]) - model.energy(z)
        if kappa != 0.0:
            vw = model.kernel_gradient_w(z)
            vww = model.kernel_hessian_ww(z)
            value -= hbar * kappa * float(vw @ trajectory.z1[i])
            value -= 0.5 * kappa * float(np.sum(vww * trajectory.delta2[i]))
        integrand[i] = value
    return _cumtrapz(integrand, trajectory.times)


def gaussian_initial_moments(width, hbar: float) -> np.ndarray:
    """Second moments of a Gaussian packet with amplitude exp(-<xi, A xi>/2).

    The scaled-coordinate width matrix A must be symmetric positive
    definite; positions then carry (hbar/2) A^{-1}, momenta (hbar/2) A and
    the cross block vanishes.  These moments saturate the uncertainty
    bound, and they scale linearly in hbar as second moments of a
    concentrated packet must.
    """
    width = np.atleast_1d(np.asarray(width, dtype=float))
    if width.ndim == 1:
        width = np.diag(width)
    if width.shape[0] != width.shape[1]:
        raise ValueError("width matrix must be square")
    if not np.allclose(width, width.T, rtol=0, atol=1e-12):
        raise ValueError("width matrix must be symmetric")
    eigs = np.linalg.eigvalsh(width)
    if np.min(eigs) <= 0:
        raise ValueError("width matrix must be positive definite")
    n = width.shape[0]
    delta2 = np.zeros((2 * n, 2 * n))
    delta2[:n, :n] = 0.5 * hbar * width
    delta2[n:, n:] = 0.5 * hbar * np.linalg.inv(width)
    return delta2


def extract_trajectory_frequencies(
    trajectory: Trajectory, component, threshold: float = 0.1
):
    """Dominant oscillation frequencies of one scalar trajectory series.

    Parameters
    ----------
    trajectory : Trajectory
        Must carry a uniform grid of at least 1024 samples.
    component : callable or array_like
        Either a callable mapping the trajectory to a scalar series, or
        the series itself.
    threshold : float
        Peaks below this fraction of the strongest nonzero-frequency
        amplitude are dropped.

    Returns
    -------
    list of (omega, amplitude)
        Local spectral maxima, ascending in angular frequency omega.
    """
    times = trajectory.times
    if times.size < 1024:
        raise ValueError("frequency extraction needs at least 1024 samples")
    steps = np.diff(times)
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise ValueError("frequency extraction needs a uniform time grid")
    series = np.asarray(component(trajectory) if callable(component) else component,
                        dtype=float)
    if series.shape != times.shape:
        raise ValueError("series length must match the time grid")

    amp = np.abs(np.fft.rfft(series - np.mean(series))) * (2.0 / times.size)
    omega = 2.0 * math.pi * np.fft.rfftfreq(times.size, dt)
    if amp.size < 3:
        return []
    floor = threshold * float(np.max(amp[1:]))
    peaks = []
    for i in range(1, amp.size - 1):
        if amp[i] >= floor and amp[i] > amp[i - 1] and amp[i] >= amp[i + 1]:
            peaks.append((float(omega[i]), float(amp[i])))
    return peaks


def _csv_columns(trajectory: Trajectory):
    n = trajectory.z.shape[1] // 2
    names = ["t"]
    names += [f"p{i + 1}" for i in range(n)] + [f"x{i + 1}" for i in range(n)]
    upper = [(i, j) for i in range(2 * n) for j in range(i, 2 * n)]
    names += [f"D2_{i + 1}_{j + 1}" for i, j in upper]
    if trajectory.z1 is not None:
        names += [f"z1_{i + 1}" for i in range(2 * n)]
    if trajectory.action is not None:
        names.append("action")
    names.append("positivity_margin")
    if trajectory.skew_drift is not None:
        names.append("skew_drift")
    return names, upper


def write_trajectory_csv(trajectory: Trajectory, target) -> None:
    """Write a trajectory as CSV with 17-significant-digit floats.

    ``target`` may be a path or a text file object.  Columns: time, mean
    point, upper triangle of delta2, then z1, action, positivity margin
    and skew drift where present.
    """
    names, upper = _csv_columns(trajectory)

    def fmt(x):
        return format(float(x), ".17g")

    def dump(stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(names)
        for i in range(trajectory.times.size):
            row = [fmt(trajectory.times[i])]
            row += [fmt(v) for v in trajectory.z[i]]
            row += [fmt(trajectory.delta2[i][a, b]) for a, b in upper]
            if trajectory.z1 is not None:
                row += [fmt(v) for v in trajectory.z1[i]]
            if trajectory.action is not None:
                row.append(fmt(trajectory.action[i]))
            row.append(fmt(trajectory.positivity_margin[i]))
            if trajectory.skew_drift is not None:
                row.append(fmt(trajectory.skew_drift[i]))
            writer.writerow(row)

    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="") as stream:
            dump(stream)
    elif isinstance(target, io.TextIOBase) or hasattr(target, "write"):
        dump(target)
    else:
        raise TypeError("target must be a path or a writable text stream")
