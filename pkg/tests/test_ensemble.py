import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hierdecay import CouplingSpec, ModelParams
from hierdecay.analysis import RunningMoments, realization_params, realization_seed, run_ensemble
from hierdecay.analysis import ensemble as ensemble_mod
from hierdecay.errors import EnsembleError, NumericalError, ParameterError

SMALL = ModelParams(11, 1.0, 0.5, CouplingSpec.random(0.2), seed=42)
TIMES = np.linspace(0, 40, 81)


def test_identical_seeds_have_zero_variance():
    stats = run_ensemble(SMALL, 2, TIMES, seeds=[7, 7])
    assert np.all(stats.var_p0 == 0)


def test_worker_count_does_not_change_results(monkeypatch):
    one = run_ensemble(SMALL, 24, TIMES, workers=1)
    eight = run_ensemble(SMALL, 24, TIMES, workers=8)
    assert np.array_equal(one.mean_p0, eight.mean_p0)
    assert np.array_equal(one.var_p0, eight.var_p0)
    assert one.seeds == eight.seeds
    monkeypatch.setenv("HIERDECAY_WORKERS", "4")
    env = run_ensemble(SMALL, 24, TIMES)
    assert np.array_equal(one.var_p0, env.var_p0)


def test_seed_rule():
    seeds = [realization_seed(42, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert all(0 <= s < 2**64 for s in seeds)
    assert realization_seed(42, 3) == seeds[3]
    assert realization_params(SMALL, 3).seed == seeds[3]
    assert realization_seed(43, 0) != seeds[0]


def test_matches_direct_statistics():
    stats = run_ensemble(SMALL, 10, TIMES)
    from hierdecay import build_reduced_hamiltonian, eigendecompose, evolve_spectral

    p = np.array([evolve_spectral(eigendecompose(build_reduced_hamiltonian(SMALL.with_seed(s))), TIMES).p0 for s in stats.seeds])
    np.testing.assert_allclose(stats.mean_p0, p.mean(axis=0), atol=1e-14)
    np.testing.assert_allclose(stats.var_p0, p.var(axis=0, ddof=1), atol=1e-14)
    assert stats.window == (5.0, 8.0)
    mask = (TIMES >= 5) & (TIMES <= 8)
    assert stats.fluct_rms == pytest.approx(np.sqrt(np.mean(p.var(axis=0, ddof=1)[mask])), rel=1e-12)


def test_ode_method_agrees():
    a = run_ensemble(SMALL, 3, TIMES, method="spectral")
    b = run_ensemble(SMALL, 3, TIMES, method="ode")
    np.testing.assert_allclose(a.mean_p0, b.mean_p0, atol=1e-7)


def test_needs_two_realizations():
    with pytest.raises(ParameterError):
        run_ensemble(SMALL, 1, TIMES)


def test_failure_reports_seed(monkeypatch):
    seeds = [realization_seed(SMALL.seed, i) for i in range(4)]
    real = ensemble_mod._propagate

    def flaky(params, *args):
        if params.seed == seeds[2]:
            raise NumericalError("boom")
        return real(params, *args)

    monkeypatch.setattr(ensemble_mod, "_propagate", flaky)
    with pytest.raises(EnsembleError) as info:
        run_ensemble(SMALL, 4, TIMES)
    assert info.value.seed == seeds[2] and info.value.index == 2
    assert str(seeds[2]) in str(info.value)


@settings(max_examples=50, deadline=None)
@given(
    data=arrays(np.float64, st.tuples(st.integers(2, 40), st.just(3)), elements=st.floats(-1e3, 1e3)),
    split=st.integers(0, 40),
)
def test_running_moments_merge(data, split):
    split = min(split, data.shape[0])
    whole, left, right = RunningMoments(3), RunningMoments(3), RunningMoments(3)
    for i, row in enumerate(data):
        whole.push(row)
        (left if i < split else right).push(row)
    merged = left.merge(right)
    scale = 1 + np.max(np.abs(data)) ** 2
    assert merged.count == whole.count
    np.testing.assert_allclose(merged.mean, data.mean(axis=0), atol=1e-9 * scale)
    np.testing.assert_allclose(whole.variance, data.var(axis=0, ddof=1), atol=1e-9 * scale)
    np.testing.assert_allclose(merged.variance, whole.variance, atol=1e-9 * scale)
    assert np.all(merged.variance >= 0)


def test_variance_of_mean_scales_inversely_with_n():
    # spread of mean_p0 across independent base seeds at n = 50 and n = 200
    n_bases = 60
    t = TIMES[::8]
    spread = {}
    for n in (50, 200):
        means = np.array([run_ensemble(SMALL.with_seed(1000 + b), n, t).mean_p0 for b in range(n_bases)])
        spread[n] = means.var(axis=0, ddof=1)[1:]
    ratio = np.mean(spread[50]) / np.mean(spread[200])
    assert 2.5 < ratio < 6.0
