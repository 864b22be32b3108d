"""Time evolution of the survival amplitude ``A_0(t)``.

Three independent routes:

* ``evolve_spectral``: biorthogonal eigen-expansion of the reduced Hamiltonian;
* ``evolve_reduced_ode``: adaptive Runge-Kutta integration of ``i dpsi/dt = H psi``;
* ``evolve_full_model``: exact unitary evolution of the explicit Hermitian
  model with a discretized real continuum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ParameterError, ValidityHorizonError
from .model import EffectiveHamiltonian, FullModel
from .spectral import Spectrum

__all__ = [
    "Trajectory",
    "time_grid",
    "evolve_spectral",
    "evolve_reduced_ode",
    "evolve_full_model",
    "survival_probability",
]

METHODS = ("spectral", "ode", "full", "external")
_CHUNK = 512


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Survival amplitude on a time grid.

    ``norms`` (``||psi(t)||``) and ``amplitudes`` (rows are ``psi(t)``) are
    filled only when the propagator was asked for the full state.
    """

    times: np.ndarray
    a0: np.ndarray
    method: str
    params_hash: Optional[str] = None
    norms: Optional[np.ndarray] = None
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown trajectory method {self.method!r}")
        if self.times.shape != self.a0.shape:
            raise ParameterError("times and a0 must have the same shape")

    @property
    def p0(self) -> np.ndarray:
        return survival_probability(self)


def survival_probability(traj: Trajectory) -> np.ndarray:
    return np.abs(traj.a0) ** 2


def time_grid(t_max: float, n_points: int = 2000, spacing: str = "linear", t_min: Optional[float] = None) -> np.ndarray:
    """Output grid starting at ``t = 0``.

    ``spacing="log"`` puts ``n_points - 1`` geometric points on
    ``[t_min, t_max]`` (default ``t_min = t_max * 1e-4``) after the origin.
    """
    if t_max <= 0 or n_points < 2:
        raise ParameterError("need t_max > 0 and at least two points")
    if spacing == "linear":
        return np.linspace(0.0, t_max, n_points)
    if spacing == "log":
        t_min = t_max * 1e-4 if t_min is None else t_min
        if not 0 < t_min < t_max:
            raise ParameterError("log spacing needs 0 < t_min < t_max")
        return np.concatenate(([0.0], np.geomspace(t_min, t_max, n_points - 1)))
    raise ParameterError(f"unknown spacing {spacing!r}")


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ParameterError("times must be a non-empty 1-d array")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise ParameterError("times must be non-negative and sorted")
    return t


def _params_hash(obj) -> Optional[str]:
    params = getattr(obj, "params", None)
    return params.digest() if params is not None else None


def evolve_spectral(spec: Spectrum, times, full_state: bool = False) -> Trajectory:
    """``A_0(t) = sum_n C_n w_n exp(-i lambda_n t)``."""
    t = _check_times(times)
    if spec.defective.any() and not spec.least_squares:
        raise ParameterError("spectrum has defective pairs and no least-squares coefficients")
    lam = spec.eigenvalues
    weights = spec.weights
    a0 = np.empty(t.size, dtype=complex)
    amps = np.empty((t.size, lam.size), dtype=complex) if full_state else None
    for lo in range(0, t.size, _CHUNK):
        phase = np.exp(-1j * np.outer(t[lo : lo + _CHUNK], lam))
        a0[lo : lo + _CHUNK] = phase @ weights
        if full_state:
            amps[lo : lo + _CHUNK] = (phase * spec.coefficients) @ spec.right_vectors.T
    norms = np.linalg.norm(amps, axis=1) if full_state else None
    return Trajectory(t, a0, "spectral", _params_hash(spec), norms, amps)


def evolve_reduced_ode(
    h: EffectiveHamiltonian,
    times,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    full_state: bool = False,
    method: str = "DOP853",
) -> Trajectory:
    """Integrate ``dpsi/dt = -i H psi`` from ``psi(0) = e_0``.

    Uses an explicit embedded Runge-Kutta pair with adaptive steps; values on
    the requested grid come from the scheme's dense output. The superradiant
    eigenvalue (``|Im lambda|`` up to ``N gamma``) limits the stable step.
    """
    t = _check_times(times)
    for name, tol in (("rtol", rtol), ("atol", atol)):
        if not 1e-12 <= tol <= 1e-4:
            raise ParameterError(f"{name}={tol} outside [1e-12, 1e-4]")
    matrix = np.asarray(getattr(h, "matrix", h))
    dim = matrix.shape[0]
    stiffness = float(-np.trace(matrix).imag)
    op = -1j * matrix

    def rhs(_t, y):
        return op @ y

    y0 = np.zeros(dim, dtype=complex)
    y0[0] = 1.0
    if t[-1] == 0:
        states = np.tile(y0, (t.size, 1))
    else:
        sol = solve_ivp(rhs, (0.0, t[-1]), y0, method=method, t_eval=t, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise IntegrationError(
                f"integration failed at t={sol.t[-1] if sol.t.size else 0.0}: {sol.message}; "
                f"largest decay rate is at most N*gamma = {stiffness:.4g}",
                stiffness,
            )
        states = sol.y.T
    norms = np.linalg.norm(states, axis=1)
    return Trajectory(
        t,
        states[:, 0].copy(),
        "ode",
        _params_hash(h),
        norms,
        states if full_state else None,
    )


def evolve_full_model(fm: FullModel, times, full_state: bool = False) -> Trajectory:
    """Exact unitary evolution of the Hermitian model via ``eigh``.

    Only the single-state row of the eigenvector matrix enters ``A_0``; with
    ``full_state`` the whole state is reconstructed (costly for large ``M``).
    """
    t = _check_times(times)
    if t[-1] >= fm.validity_horizon:
        raise ValidityHorizonError(
            f"t={t[-1]} beyond the validity horizon {fm.validity_horizon:.6g} "
            f"(recurrence time {fm.recurrence_time:.6g})",
            fm.recurrence_time,
        )
    energies, vecs = scipy.linalg.eigh(fm.matrix, driver="evr")
    first = vecs[0]
    weights = first * first
    a0 = np.empty(t.size, dtype=complex)
    amps = np.empty((t.size, fm.dim), dtype=complex) if full_state else None
    for lo in range(0, t.size, _CHUNK):
        phase = np.exp(-1j * np.outer(t[lo : lo + _CHUNK], energies))
        a0[lo : lo + _CHUNK] = phase @ weights
        if full_state:
            amps[lo : lo + _CHUNK] = (phase * first) @ vecs.T
    if full_state:
        norms = np.linalg.norm(amps, axis=1)
    else:
        # |exp(-iEt)| = 1, so the norm is that of the initial expansion
        norms = np.full(t.size, np.sqrt(np.sum(weights)))
    return Trajectory(t, a0, "full", _params_hash(fm), norms, amps)
