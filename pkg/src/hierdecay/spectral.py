"""Spectral structure of the reduced Hamiltonian.

The reduced Hamiltonian is complex symmetric (``H == H.T``), so left
eigenvectors are transposes of right ones and the natural pairing is the
unconjugated bilinear form ``x.T @ y``. With right eigenvectors normalized to
``V_n.T @ V_n = 1`` the initial state decomposes as ``e_0 = sum_n C_n V_n``
with ``C_n = w_n = V_n[0]``, and the survival amplitude is
``A_0(t) = sum_n w_n**2 exp(-i lambda_n t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import (
    NumericalError,
    ParameterError,
    PoleProximityError,
    SecularConvergenceError,
)
from .model import EffectiveHamiltonian, ModelParams

__all__ = [
    "Spectrum",
    "SpecialStates",
    "ThreeLevelReduction",
    "eigendecompose",
    "secular_function",
    "secular_roots",
    "match_roots",
    "eigenvector_from_eigenvalue",
    "identify_special_states",
    "reduce_three_level",
]

BILINEAR_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
DEFAULT_MAX_DIM = 5001


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition of a reduced Hamiltonian.

    ``right_vectors[:, n]`` is ``V_n``. ``bilinear_norms`` holds ``V_n.T V_n``
    of the unit-2-norm vectors returned by the eigensolver, i.e. before the
    bilinear rescaling; ``defective`` flags the pairs where it vanished.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    coefficients: np.ndarray
    overlaps: np.ndarray
    bilinear_norms: np.ndarray
    defective: np.ndarray
    least_squares: bool = False
    params: Optional[ModelParams] = None

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def weights(self) -> np.ndarray:
        """Contribution ``C_n * w_n`` of each eigenvector to ``A_0``."""
        return self.coefficients * self.overlaps

    def reconstruction_error(self) -> float:
        e0 = np.zeros(self.size, dtype=complex)
        e0[0] = 1.0
        return float(np.max(np.abs(self.right_vectors @ self.coefficients - e0)))


def eigendecompose(h, max_dim: int = DEFAULT_MAX_DIM) -> Spectrum:
    """Dense diagonalization with bilinear normalization of the eigenvectors.

    ``h`` is an :class:`EffectiveHamiltonian` or a square complex symmetric
    array. Pairs with ``|V.T V| <= 1e-10`` (or clustered eigenvalues whose
    vectors are not bilinearly orthogonal) switch the coefficient vector to a
    least-squares solve of ``sum_n C_n V_n = e_0``.
    """
    matrix = np.asarray(getattr(h, "matrix", h))
    params = getattr(h, "params", None)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {matrix.shape}")
    dim = matrix.shape[0]
    if dim > max_dim:
        raise ParameterError(f"dimension {dim} exceeds the dense cap {max_dim}")

    lam, vecs = scipy.linalg.eig(matrix)
    s = np.einsum("ij,ij->j", vecs, vecs)
    defective = np.abs(s) <= BILINEAR_TOL
    scale = np.where(defective, 1.0, np.sqrt(np.where(defective, 1.0, s)))
    vecs = vecs / scale
    overlaps = vecs[0].copy()
    coefficients = np.where(defective, 0.0, overlaps)

    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    lsq = bool(defective.any())
    if not lsq:
        lsq = np.max(np.abs(vecs @ coefficients - e0)) > RECONSTRUCTION_TOL
    if lsq:
        coefficients = np.linalg.lstsq(vecs, e0, rcond=None)[0]

    return Spectrum(
        eigenvalues=lam,
        right_vectors=vecs,
        coefficients=coefficients,
        overlaps=overlaps,
        bilinear_norms=s,
        defective=defective,
        least_squares=lsq,
        params=params,
    )


# -- secular equation -------------------------------------------------------


def _resolvent_sums(lam, energies, u):
    """G = sum 1/(l-E), F = sum u/(l-E), S = sum u^2/(l-E) and their derivatives."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    r = 1.0 / (lam[:, None] - energies[None, :])
    r2 = r * r
    g, f, s = r.sum(1), r @ u, r @ (u * u)
    dg, df, ds = -r2.sum(1), -(r2 @ u), -(r2 @ (u * u))
    return g, f, s, dg, df, ds


def secular_function(lam, energies, u, gamma):
    """``g(l) = det(l - H) / prod(l - E_mu)`` and its derivative.

    Expanding the Schur complement of the PC block gives
    ``g = (1 + i gamma G)(l - S) + i gamma F^2``; away from the poles its
    zeros are exactly the roots of ``sum u^2/(l-E) - i gamma Sigma_1 sum u/(l-E) = l``.
    """
    g, f, s, dg, df, ds = _resolvent_sums(lam, energies, u)
    ig = 1j * gamma
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    val = (1 + ig * g) * (lam - s) + ig * f * f
    der = ig * dg * (lam - s) + (1 + ig * g) * (1 - ds) + 2 * ig * f * df
    return val, der


def _hermitian_roots(energies, u):
    """Real roots of ``l - sum u^2/(l - E) = 0`` by bracketing between poles."""
    n = energies.size
    radius = float(np.sum(np.abs(u))) + float(np.max(np.abs(energies))) + 1.0

    def f(x):
        return x - np.sum(u * u / (x - energies))

    roots, brackets = [], []
    edges = np.concatenate(([energies[0] - radius], energies, [energies[-1] + radius]))
    for k in range(n + 1):
        lo, hi = edges[k], edges[k + 1]
        brackets.append((float(lo), float(hi)))
        eps = 1e-13 * max(1.0, abs(lo), abs(hi))
        a = lo + eps if k > 0 else lo
        b = hi - eps if k < n else hi
        # f -> -inf just right of a pole and +inf just left of one, unless u_mu == 0
        if f(a) * f(b) > 0:
            roots.append(0.5 * (lo + hi))
        else:
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return np.array(roots), brackets


def secular_roots(
    params: ModelParams,
    couplings,
    tol: float = 1e-13,
    max_iter: int = 500,
) -> np.ndarray:
    """All ``N+1`` roots of the exact eigenvalue equation (constant gamma).

    Roots of the Hermitian problem (``gamma = 0``) are bracketed between
    consecutive levels and refined with Brent's method. For ``gamma > 0`` they
    seed a simultaneous Aberth iteration on ``prod(l - E) * g(l)``, which keeps
    the iterates apart so that every root is found once. Roots are returned
    in the order of their seed brackets.
    """
    energies = params.energies()
    u = np.asarray(couplings, dtype=float)
    n = energies.size
    if u.shape != (n,):
        raise ParameterError(f"expected {n} couplings, got shape {u.shape}")
    if n > 1 and np.min(np.diff(energies)) <= 0:
        raise ParameterError("secular roots need distinct PC levels (D > 0); use reduce_three_level for D = 0")

    seeds, brackets = _hermitian_roots(energies, u)
    gamma = params.gamma
    if gamma == 0:
        return seeds.astype(complex)

    # distinct, slightly damped starting points
    jitter = 1e-3 * max(params.spacing, 1e-3 * gamma, 1e-12)
    z = seeds.astype(complex) - 1j * (jitter + gamma * 1e-3 * np.linspace(0.5, 1.5, n + 1))
    converged = np.zeros(n + 1, dtype=bool)
    for _ in range(max_iter):
        val, der = secular_function(z, energies, u, gamma)
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = der / val + np.sum(1.0 / (z[:, None] - energies[None, :]), axis=1)
            ratio = 1.0 / logd
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inter = 1.0 / diff
            np.fill_diagonal(inter, 0.0)
            step = ratio / (1.0 - ratio * inter.sum(1))
        step = np.where(np.isfinite(step), step, 0.0)
        step[val == 0] = 0.0
        z = z - step
        converged = np.abs(step) <= tol * np.maximum(1.0, np.abs(z))
        if converged.all():
            break

    # one Newton polish on g itself
    val, der = secular_function(z, energies, u, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        polish = np.where(der != 0, val / der, 0.0)
    ok = np.isfinite(polish) & (np.abs(polish) < 1e-8 * np.maximum(1.0, np.abs(z)))
    z = np.where(ok, z - polish, z)
    converged &= np.isfinite(z)
    if not converged.all():
        bad = np.flatnonzero(~converged)
        raise SecularConvergenceError(
            f"{bad.size} secular roots did not converge in {max_iter} iterations",
            z,
            bad,
            [brackets[i] for i in bad],
        )
    return z


def match_roots(reference: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Index of the nearest candidate for each reference root.

    Raises :class:`NumericalError` if two references pick the same candidate.
    """
    reference = np.asarray(reference)
    candidates = np.asarray(candidates)
    idx = np.argmin(np.abs(reference[:, None] - candidates[None, :]), axis=1)
    if np.unique(idx).size != idx.size:
        raise NumericalError("nearest-neighbour root matching is not one-to-one")
    return idx


def eigenvector_from_eigenvalue(lam: complex, params: ModelParams, couplings) -> np.ndarray:
    """Closed-form right eigenvector ``|0> + sum (u - i gamma Sigma_1)/(l - E) |mu>``.

    Not normalized; the single-state component is 1.
    """
    energies = params.energies()
    u = np.asarray(couplings, dtype=float)
    dist = np.abs(lam - energies)
    mu = int(np.argmin(dist))
    if dist[mu] < 1e-12:
        raise PoleProximityError(
            f"eigenvalue {lam} coincides with PC level mu={mu + 1} (E={energies[mu]})", mu + 1
        )
    r = 1.0 / (lam - energies)
    sigma1 = np.sum(u * r) / (1j * params.gamma * np.sum(r) + 1)
    return np.concatenate(([1.0 + 0j], (u - 1j * params.gamma * sigma1) * r))


# -- special states -----------------------------------------------------------


@dataclass(frozen=True)
class SpecialStates:
    dicke_index: Optional[int] = None
    zeno_index: Optional[int] = None
    residual_weight_bound: float = float("nan")
    diagnostic: str = ""


DICKE_FRACTION = 0.5
ZENO_WEIGHT = 0.9
ZENO_GAMMA_OVER_D = 10.0


def identify_special_states(spec: Spectrum, params: ModelParams) -> SpecialStates:
    """Locate the superradiant (Dicke) and the slow dominant (Zeno) eigenvector.

    Dicke: most negative ``Im lambda`` if below ``-0.5 N gamma``.
    Zeno: largest ``|C w|`` among the rest, if above 0.9, for constant
    couplings with ``gamma >= 10 d``.
    """
    n, gamma, d = params.n_levels, params.gamma, params.spacing
    if gamma == 0:
        return SpecialStates(diagnostic="Hermitian limit (gamma = 0): no Dicke/Zeno split")
    lam = spec.eigenvalues
    weights = np.abs(spec.weights)

    dicke = int(np.argmin(lam.imag))
    if lam[dicke].imag >= -DICKE_FRACTION * n * gamma:
        return SpecialStates(
            diagnostic=f"no eigenvalue below -{DICKE_FRACTION}*N*gamma (min Im = {lam[dicke].imag:.4g})"
        )

    notes = []
    zeno = None
    if params.coupling.is_random:
        notes.append("random couplings: Zeno state not defined")
    elif d > 0 and gamma < ZENO_GAMMA_OVER_D * d:
        notes.append(f"gamma/d = {gamma / d:.3g} < {ZENO_GAMMA_OVER_D}: not in the Zeno regime")
    else:
        masked = weights.copy()
        masked[dicke] = -np.inf
        cand = int(np.argmax(masked))
        if masked[cand] > ZENO_WEIGHT:
            zeno = cand
        else:
            notes.append(f"largest non-Dicke weight {masked[cand]:.3g} <= {ZENO_WEIGHT}")

    keep = np.ones(lam.size, dtype=bool)
    keep[dicke] = False
    if zeno is not None:
        keep[zeno] = False
    return SpecialStates(dicke, zeno, float(weights[keep].sum()), "; ".join(notes))


# -- degenerate band ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ThreeLevelReduction:
    """Hamiltonian of the ``D = 0`` problem on ``|0>, |W2>, |W3>``.

    When all couplings are proportional to the uniform vector, ``|W2>`` does
    not exist and the matrix is the 2x2 block on ``|0>, |W3>``.
    """

    u1: float
    u2: float
    c: float
    matrix: np.ndarray
    eigenvalues: np.ndarray

    @property
    def reduced_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def slow_pair(self) -> np.ndarray:
        """The two eigenvalues with the smallest decay rate, ordered by real part."""
        order = np.argsort(-self.eigenvalues.imag)[:2]
        pair = self.eigenvalues[order]
        return pair[np.argsort(pair.real)]

    @property
    def slow_decay_rate(self) -> float:
        return float(-self.slow_pair.imag.mean())

    def basis(self, n: int, couplings) -> np.ndarray:
        """Columns ``|0>, |W2>, |W3>`` embedded in the ``(N+1)``-dimensional space."""
        u = np.asarray(couplings, dtype=float)
        w3 = np.full(n, 1 / math.sqrt(n))
        w1 = u / self.u2
        cols = [np.eye(n + 1)[:, 0]]
        if self.reduced_dim == 3:
            w2 = w1 - w3 * (w1 @ w3)
            cols.append(np.concatenate(([0.0], w2 / np.linalg.norm(w2))))
        cols.append(np.concatenate(([0.0], w3)))
        return np.column_stack(cols)


def reduce_three_level(couplings, gamma: float, n: Optional[int] = None) -> ThreeLevelReduction:
    """Project the degenerate-band Hamiltonian onto ``|0>, |W2>, |W3>``.

    ``U1 = sum u``, ``U2 = sqrt(sum u^2)``, ``c = U1/(U2 sqrt(N))``; the
    matrix is ``[[0, U2 sqrt(1-c^2), c U2], [U2 sqrt(1-c^2), 0, 0],
    [c U2, 0, -i gamma N]]``. The remaining ``N-2`` eigenvalues of the full
    problem are exactly zero and carry no single-state weight.
    """
    u = np.asarray(couplings, dtype=float)
    n = u.size if n is None else int(n)
    if u.shape != (n,):
        raise ParameterError(f"expected {n} couplings, got shape {u.shape}")
    u1 = float(u.sum())
    u2 = float(np.linalg.norm(u))
    if u2 == 0:
        raise ParameterError("all couplings vanish")
    c = float(np.clip(u1 / (u2 * math.sqrt(n)), -1.0, 1.0))
    s = math.sqrt(max(0.0, 1 - c * c))
    # rounding in c leaves s ~ sqrt(eps) for uniform couplings
    if s <= 1e-7:
        m = np.array([[0, c * u2], [c * u2, -1j * gamma * n]], dtype=complex)
    else:
        m = np.array(
            [
                [0, u2 * s, c * u2],
                [u2 * s, 0, 0],
                [c * u2, 0, -1j * gamma * n],
            ],
            dtype=complex,
        )
    return ThreeLevelReduction(u1, u2, c, m, np.linalg.eigvals(m))
