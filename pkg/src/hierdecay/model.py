"""Model definition: parameters, couplings and Hamiltonians.

The system is a single state ``|0>`` (energy 0) coupled with real elements
``u_mu`` to ``N`` equally spaced pseudo-continuum (PC) levels of bandwidth ``D``.
Every PC level couples with the same element ``v`` to a broad real continuum
(RC). Two Hamiltonians are built:

* the reduced, complex symmetric ``(N+1) x (N+1)`` matrix in which the RC has
  been eliminated into the all-to-all block ``-i*gamma``;
* the explicit Hermitian model with ``M`` discretized RC levels, used as an
  oracle for the elimination.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .errors import ParameterError, ValidityHorizonError

__all__ = [
    "CouplingSpec",
    "ModelParams",
    "EffectiveHamiltonian",
    "FullModel",
    "sample_couplings",
    "build_reduced_hamiltonian",
    "build_full_model",
    "microscopic_to_effective",
]

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class CouplingSpec:
    """Coupling between ``|0>`` and the PC levels.

    ``kind="constant"`` uses ``u`` for every level. ``kind="random"`` draws
    i.i.d. couplings with standard deviation ``u`` from a zero-mean uniform
    (half-width ``u*sqrt(3)``) or Gaussian distribution.
    """

    kind: Literal["constant", "random"] = "constant"
    u: float = 0.1
    distribution: Literal["uniform", "gaussian"] = "uniform"

    def __post_init__(self):
        if self.kind not in ("constant", "random"):
            raise ParameterError(f"unknown coupling kind {self.kind!r}")
        if self.distribution not in ("uniform", "gaussian"):
            raise ParameterError(f"unknown coupling distribution {self.distribution!r}")
        if not math.isfinite(self.u):
            raise ParameterError("coupling must be finite")
        if self.kind == "random" and self.u <= 0:
            raise ParameterError(f"random coupling needs a positive standard deviation, got {self.u}")

    @classmethod
    def constant(cls, u: float) -> "CouplingSpec":
        return cls("constant", float(u))

    @classmethod
    def random(cls, std: float, distribution: str = "uniform") -> "CouplingSpec":
        return cls("random", float(std), distribution)

    @property
    def is_random(self) -> bool:
        return self.kind == "random"


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the hierarchical decay model.

    Parameters
    ----------
    n_levels : number ``N`` of PC levels (>= 1)
    bandwidth : PC bandwidth ``D`` (>= 0); ``D = 0`` is the degenerate case
    gamma : effective width ``gamma = pi v^2 nu_c`` (>= 0)
    coupling : :class:`CouplingSpec`
    grid_offset : shift of the PC grid relative to ``E_0 = 0``
    seed : unsigned 64-bit seed for random couplings
    """

    n_levels: int
    bandwidth: float
    gamma: float
    coupling: CouplingSpec = field(default_factory=CouplingSpec)
    grid_offset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n_levels, bool) or int(self.n_levels) != self.n_levels:
            raise ParameterError(f"n_levels must be an integer, got {self.n_levels!r}")
        if self.n_levels < 1:
            raise ParameterError(f"n_levels must be >= 1, got {self.n_levels}")
        for name in ("bandwidth", "gamma", "grid_offset"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.bandwidth < 0:
            raise ParameterError(f"bandwidth must be >= 0, got {self.bandwidth}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _U64_MAX:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.coupling, CouplingSpec):
            raise ParameterError("coupling must be a CouplingSpec")
        object.__setattr__(self, "n_levels", int(self.n_levels))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def spacing(self) -> float:
        """Level spacing ``d = D/(N-1)``; zero when ``D = 0`` or ``N = 1``."""
        if self.n_levels == 1 or self.bandwidth == 0:
            return 0.0
        return self.bandwidth / (self.n_levels - 1)

    def energies(self) -> np.ndarray:
        mu = np.arange(self.n_levels, dtype=float)
        return -self.bandwidth / 2 + mu * self.spacing + self.grid_offset

    @property
    def u_bar(self) -> float:
        """Typical coupling: the constant value or the standard deviation."""
        return abs(self.coupling.u)

    @property
    def u0(self) -> float:
        """Collective coupling scale ``u_bar * sqrt(N)``."""
        return self.u_bar * math.sqrt(self.n_levels)

    def with_seed(self, seed: int) -> "ModelParams":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        data = dict(data)
        coupling = data.pop("coupling", {})
        if isinstance(coupling, dict):
            coupling = CouplingSpec(**coupling)
        return cls(coupling=coupling, **data)

    def digest(self) -> str:
        """Stable SHA-256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def sample_couplings(spec: CouplingSpec, n: int, seed: int) -> np.ndarray:
    """Draw the ``n`` couplings ``u_mu``; deterministic in ``(spec, n, seed)``."""
    if n < 1:
        raise ParameterError(f"need at least one coupling, got n={n}")
    if spec.kind == "constant":
        return np.full(n, float(spec.u))
    rng = np.random.default_rng(int(seed))
    if spec.distribution == "uniform":
        half = spec.u * math.sqrt(3.0)
        return rng.uniform(-half, half, size=n)
    return rng.normal(0.0, spec.u, size=n)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _resolve_couplings(params: ModelParams, couplings) -> np.ndarray:
    if couplings is None:
        return sample_couplings(params.coupling, params.n_levels, params.seed)
    u = np.asarray(couplings, dtype=float).copy()
    if u.shape != (params.n_levels,):
        raise ParameterError(f"expected {params.n_levels} couplings, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ParameterError("couplings must be finite")
    return u


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """Reduced non-Hermitian Hamiltonian; index 0 is the single state."""

    matrix: np.ndarray
    couplings: np.ndarray
    params: ModelParams

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def energies(self) -> np.ndarray:
        return self.params.energies()

    def expected_trace(self) -> complex:
        return complex(self.energies.sum(), -self.params.n_levels * self.params.gamma)


def build_reduced_hamiltonian(params: ModelParams, couplings=None) -> EffectiveHamiltonian:
    """Assemble ``H = sum E|mu><mu| + u_mu(|0><mu| + h.c.) - i gamma sum |mu><nu|``.

    ``couplings`` overrides the sampled vector (useful for hand-built cases).
    """
    u = _resolve_couplings(params, couplings)
    n = params.n_levels
    h = np.empty((n + 1, n + 1), dtype=complex)
    h[0, 0] = 0.0
    h[0, 1:] = u
    h[1:, 0] = u
    h[1:, 1:] = -1j * params.gamma
    idx = np.arange(1, n + 1)
    h[idx, idx] = params.energies() - 1j * params.gamma
    return EffectiveHamiltonian(_frozen(h), _frozen(u), params)


@dataclass(frozen=True, eq=False)
class FullModel:
    """Explicit Hermitian model: single state, PC levels and ``M`` RC levels.

    Basis order is ``[|0>, |1>..|N>, |k=1>..|k=M>]``.
    """

    matrix: np.ndarray
    couplings: np.ndarray
    rc_levels: np.ndarray
    rc_coupling: float
    rc_bandwidth: float
    params: ModelParams

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def m_levels(self) -> int:
        return self.rc_levels.size

    @property
    def rc_spacing(self) -> float:
        return self.rc_bandwidth / (self.m_levels - 1)

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi / self.rc_spacing

    @property
    def validity_horizon(self) -> float:
        return 0.5 * self.recurrence_time


def build_full_model(
    params: ModelParams,
    m_levels: int,
    rc_bandwidth: float,
    t_max: Optional[float] = None,
    couplings=None,
) -> FullModel:
    """Build the Hermitian model with a uniformly discretized real continuum.

    The RC coupling is ``v = sqrt(gamma * W / (pi * M))`` so that
    ``pi v^2 nu_c = gamma`` with ``nu_c = M / W``. Results are trusted only
    for ``t < pi / d_RC`` (half the recurrence time); passing ``t_max``
    checks that up front.
    """
    u = _resolve_couplings(params, couplings)
    n = params.n_levels
    m = int(m_levels)
    if m < 2:
        raise ParameterError("the real continuum needs at least two levels")
    if m < 10 * n:
        raise ParameterError(f"m_levels={m} is not much larger than n_levels={n} (need >= {10 * n})")
    scale = max(params.bandwidth, params.gamma, float(np.linalg.norm(u)))
    if rc_bandwidth < 10 * scale:
        raise ParameterError(
            f"rc_bandwidth={rc_bandwidth} too narrow: need >= 10*max(D, gamma, u_bar*sqrt(N)) = {10 * scale:.6g}"
        )
    d_rc = rc_bandwidth / (m - 1)
    recurrence = 2 * math.pi / d_rc
    if t_max is not None and t_max >= 0.5 * recurrence:
        raise ValidityHorizonError(
            f"t_max={t_max} reaches the validity horizon {0.5 * recurrence:.6g} "
            f"(recurrence time 2*pi/d_RC = {recurrence:.6g}); increase m_levels",
            recurrence,
        )
    v = math.sqrt(params.gamma * rc_bandwidth / (math.pi * m))
    rc = -rc_bandwidth / 2 + np.arange(m) * d_rc

    dim = 1 + n + m
    h = np.zeros((dim, dim))
    h[0, 1 : n + 1] = u
    h[1 : n + 1, 0] = u
    pc = np.arange(1, n + 1)
    h[pc, pc] = params.energies()
    ks = np.arange(n + 1, dim)
    h[ks, ks] = rc
    h[1 : n + 1, n + 1 :] = v
    h[n + 1 :, 1 : n + 1] = v
    return FullModel(_frozen(h), _frozen(u), _frozen(rc), v, float(rc_bandwidth), params)


def microscopic_to_effective(u0: float, gamma0: float, n: int, s: int) -> tuple[float, float]:
    """Map site-level couplings to the typical elements of the reduced model.

    Returns ``(u_bar, gamma) = (u0 / sqrt(n), gamma0 * sqrt(s) / n)`` where ``s``
    is the number of sites coupled to the single state. Whether the width
    should scale with the number of lead-coupled sites instead is not settled;
    the relation is applied as written.
    """
    if n < 1 or s < 1 or s > n:
        raise ParameterError(f"need 1 <= s <= n, got n={n}, s={s}")
    return u0 / math.sqrt(n), gamma0 * math.sqrt(s) / n
