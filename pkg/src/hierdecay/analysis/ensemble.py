"""Seeded disorder ensembles of survival probabilities."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..dynamics import evolve_reduced_ode, evolve_spectral
from ..errors import EnsembleError, HierDecayError, ParameterError
from ..model import ModelParams, build_reduced_hamiltonian
from ..spectral import eigendecompose

__all__ = [
    "RunningMoments",
    "EnsembleStats",
    "realization_seed",
    "realization_params",
    "default_window",
    "run_ensemble",
    "WORKERS_ENV",
    "SEED_RULE",
]

WORKERS_ENV = "HIERDECAY_WORKERS"
SEED_RULE = "numpy.SeedSequence(entropy=base_seed, spawn_key=(index,)).generate_state(2, uint32) -> (hi << 32) | lo"


def realization_seed(base_seed: int, index: int) -> int:
    """64-bit seed of realization ``index``; independent of execution order."""
    lo, hi = np.random.SeedSequence(int(base_seed), spawn_key=(int(index),)).generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def realization_params(params: ModelParams, index: int) -> ModelParams:
    return params.with_seed(realization_seed(params.seed, index))


class RunningMoments:
    """Count, mean and sum of squared deviations of array-valued samples.

    ``push`` is Welford's update; ``merge`` combines two partial results
    (Chan et al.), so partitions can be reduced in any grouping.
    """

    def __init__(self, shape):
        self.count = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def push(self, x):
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        out = RunningMoments(self.mean.shape)
        n = self.count + other.count
        if n == 0:
            return out
        delta = other.mean - self.mean
        out.count = n
        out.mean = self.mean + delta * (other.count / n)
        out.m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        return out

    @property
    def variance(self):
        if self.count < 2:
            return np.zeros_like(self.m2)
        return np.maximum(self.m2 / (self.count - 1), 0.0)


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    times: np.ndarray
    mean_p0: np.ndarray
    var_p0: np.ndarray
    n_realizations: int
    fluct_rms: Optional[float]
    window: Optional[tuple]
    base_seed: int
    seeds: tuple = ()
    seed_rule: str = SEED_RULE

    def summary(self) -> dict:
        return {
            "n_realizations": self.n_realizations,
            "fluct_rms": self.fluct_rms,
            "window": list(self.window) if self.window else None,
            "base_seed": self.base_seed,
            "seed_rule": self.seed_rule,
            "seeds": list(self.seeds),
        }


def default_window(params: ModelParams, times) -> Optional[tuple]:
    """Late-time window ``[5/D, 0.8/d]`` clipped to the grid, or None."""
    D, d = params.bandwidth, params.spacing
    if D <= 0 or d <= 0:
        return None
    t1, t2 = 5.0 / D, min(0.8 / d, float(times[-1]))
    return (t1, t2) if t1 < t2 else None


def _worker_count(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def _propagate(params: ModelParams, times, method: str, rtol: float, atol: float) -> np.ndarray:
    h = build_reduced_hamiltonian(params)
    if method == "spectral":
        traj = evolve_spectral(eigendecompose(h), times)
    elif method == "ode":
        traj = evolve_reduced_ode(h, times, rtol=rtol, atol=atol)
    else:
        raise ParameterError(f"ensemble method must be 'spectral' or 'ode', got {method!r}")
    return traj.p0


def run_ensemble(
    params: ModelParams,
    n_realizations: int,
    times,
    method: str = "spectral",
    workers: Optional[int] = None,
    window: Optional[Sequence[float]] = None,
    seeds: Optional[Sequence[int]] = None,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> EnsembleStats:
    """Mean and variance of ``p0(t)`` over disorder realizations.

    Realization ``i`` uses :func:`realization_seed` ``(params.seed, i)`` unless
    ``seeds`` lists them explicitly. Results are accumulated in index order,
    so statistics are bit-identical for any worker count (``workers`` or the
    ``HIERDECAY_WORKERS`` environment variable).
    """
    if n_realizations < 2:
        raise ParameterError(f"an ensemble needs at least 2 realizations, got {n_realizations}")
    times = np.asarray(times, dtype=float)
    if seeds is None:
        seeds = [realization_seed(params.seed, i) for i in range(n_realizations)]
    elif len(seeds) != n_realizations:
        raise ParameterError("len(seeds) must equal n_realizations")
    seeds = tuple(int(s) for s in seeds)

    def job(i):
        try:
            return _propagate(params.with_seed(seeds[i]), times, method, rtol, atol)
        except ParameterError:
            raise
        except (HierDecayError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise EnsembleError(f"realization {i} (seed {seeds[i]}) failed: {exc}", seeds[i], i) from exc

    moments = RunningMoments(times.shape)
    n_workers = _worker_count(workers)
    if n_workers == 1:
        for i in range(n_realizations):
            moments.push(job(i))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for p0 in pool.map(job, range(n_realizations)):
                moments.push(p0)

    if window is None:
        window = default_window(params, times)
    fluct = None
    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        if mask.any():
            fluct = float(np.sqrt(np.mean(moments.variance[mask])))
        window = (float(window[0]), float(window[1]))
    return EnsembleStats(
        times=times,
        mean_p0=moments.mean,
        var_p0=moments.variance,
        n_realizations=n_realizations,
        fluct_rms=fluct,
        window=window,
        base_seed=params.seed,
        seeds=seeds,
    )
