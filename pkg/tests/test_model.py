import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hierdecay import (
    CouplingSpec,
    ModelParams,
    build_full_model,
    build_reduced_hamiltonian,
    microscopic_to_effective,
    sample_couplings,
)
from hierdecay.errors import ParameterError, ValidityHorizonError


def test_two_level_matrix():
    p = ModelParams(1, 0.0, 0.2, CouplingSpec.constant(0.5))
    h = build_reduced_hamiltonian(p)
    np.testing.assert_array_equal(h.matrix, np.array([[0, 0.5], [0.5, -0.2j]]))


def test_grid_and_trace(zeno_params):
    h = build_reduced_hamiltonian(zeno_params)
    assert zeno_params.spacing == pytest.approx(0.01, rel=1e-15)
    e = zeno_params.energies()
    assert e[0] == -0.5 and e[-1] == pytest.approx(0.5, abs=1e-15)
    assert e[50] == 0.0
    tr = np.trace(h.matrix)
    assert tr.imag == pytest.approx(-101.0, rel=1e-15)
    assert abs(tr.real) < 1e-13


def test_entries(zeno_params):
    h = build_reduced_hamiltonian(zeno_params).matrix
    assert h[0, 0] == 0
    np.testing.assert_array_equal(h[0, 1:], 0.1)
    np.testing.assert_array_equal(h[1:, 0], 0.1)
    off = h[1:, 1:] - np.diag(np.diag(h[1:, 1:]))
    assert np.all(off[~np.eye(101, dtype=bool)] == -1j)


def test_matrix_is_read_only(zeno_params):
    h = build_reduced_hamiltonian(zeno_params)
    with pytest.raises(ValueError):
        h.matrix[0, 0] = 1.0


params_strategy = st.builds(
    ModelParams,
    n_levels=st.integers(1, 40),
    bandwidth=st.floats(0, 5),
    gamma=st.floats(0, 5),
    coupling=st.one_of(
        st.builds(CouplingSpec.constant, st.floats(-1, 1)),
        st.builds(CouplingSpec.random, st.floats(1e-3, 1), st.sampled_from(["uniform", "gaussian"])),
    ),
    grid_offset=st.floats(-1, 1),
    seed=st.integers(0, 2**64 - 1),
)


@settings(max_examples=60, deadline=None)
@given(params_strategy)
def test_reduced_hamiltonian_invariants(p):
    h = build_reduced_hamiltonian(p)
    m = h.matrix
    assert np.max(np.abs(m - m.T)) == 0
    tr = np.trace(m)
    expected = h.expected_trace()
    assert abs(tr - expected) <= 1e-12 * max(1.0, abs(expected))
    again = build_reduced_hamiltonian(p)
    assert np.array_equal(m, again.matrix)
    assert np.all(np.isreal(h.couplings))


def test_symmetric_grid_real_trace_vanishes():
    p = ModelParams(21, 2.0, 0.5, CouplingSpec.random(0.1), seed=3)
    assert abs(np.trace(build_reduced_hamiltonian(p).matrix).real) < 1e-14


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_levels=0, bandwidth=1.0, gamma=1.0),
        dict(n_levels=5, bandwidth=-1.0, gamma=1.0),
        dict(n_levels=5, bandwidth=1.0, gamma=-0.1),
        dict(n_levels=5, bandwidth=1.0, gamma=0.1, seed=-1),
        dict(n_levels=5, bandwidth=1.0, gamma=0.1, seed=2**64),
    ],
)
def test_parameter_validation(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(**kwargs)


def test_degenerate_spacing_is_zero():
    p = ModelParams(7, 0.0, 0.1)
    assert p.spacing == 0.0
    np.testing.assert_array_equal(p.energies(), 0.0)


def test_constant_couplings():
    np.testing.assert_array_equal(sample_couplings(CouplingSpec.constant(0.1), 3, seed=9), [0.1, 0.1, 0.1])


def test_uniform_sample_std_converges():
    u = sample_couplings(CouplingSpec.random(0.1, "uniform"), 10**6, seed=12345)
    assert 0.0995 <= u.std() <= 0.1005
    assert np.max(np.abs(u)) <= 0.1 * math.sqrt(3)


def test_gaussian_sample_std_converges():
    u = sample_couplings(CouplingSpec.random(0.1, "gaussian"), 10**6, seed=7)
    assert 0.0995 <= u.std() <= 0.1005


def test_sampling_is_deterministic():
    spec = CouplingSpec.random(0.3)
    a = sample_couplings(spec, 50, seed=2**63 + 11)
    b = sample_couplings(spec, 50, seed=2**63 + 11)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_couplings(spec, 50, seed=2**63 + 12))


def test_random_spec_rejects_nonpositive_std():
    with pytest.raises(ParameterError):
        CouplingSpec.random(0.0)
    with pytest.raises(ParameterError):
        CouplingSpec.random(-0.1)


def test_explicit_couplings_override():
    p = ModelParams(2, 0.0, 0.0)
    h = build_reduced_hamiltonian(p, couplings=[0.1, -0.1])
    np.testing.assert_array_equal(h.matrix[0, 1:], [0.1, -0.1])
    with pytest.raises(ParameterError):
        build_reduced_hamiltonian(p, couplings=[0.1])


def test_digest_is_stable():
    a = ModelParams(5, 1.0, 0.2, CouplingSpec.random(0.1), seed=4)
    b = ModelParams.from_dict(a.to_dict())
    assert a == b and a.digest() == b.digest()
    assert a.digest() != a.with_seed(5).digest()


class TestFullModel:
    def test_rc_discretization(self, zeno_params):
        fm = build_full_model(zeno_params, 4001, 40.0)
        assert fm.rc_coupling == pytest.approx(0.056411907307025195, rel=1e-14)
        assert fm.rc_spacing == pytest.approx(0.01, rel=1e-14)
        assert fm.recurrence_time == pytest.approx(628.31853071795865, rel=1e-14)
        assert fm.dim == 1 + 101 + 4001
        # pi v^2 nu_c with nu_c = M / W reproduces gamma
        assert math.pi * fm.rc_coupling**2 * 4001 / 40.0 == pytest.approx(1.0, rel=1e-14)

    def test_hermitian_and_structure(self):
        p = ModelParams(5, 1.0, 0.3, CouplingSpec.random(0.1), seed=1)
        fm = build_full_model(p, 60, 20.0)
        m = fm.matrix
        assert np.array_equal(m, m.conj().T)
        np.testing.assert_array_equal(m[1:6, 6:], fm.rc_coupling)
        np.testing.assert_array_equal(m[0, 6:], 0.0)
        np.testing.assert_array_equal(m[6:, 6:], np.diag(fm.rc_levels))

    def test_gamma_zero_decouples(self):
        p = ModelParams(5, 1.0, 0.0, CouplingSpec.constant(0.1))
        fm = build_full_model(p, 60, 20.0)
        assert fm.rc_coupling == 0.0
        assert np.all(fm.matrix[1:6, 6:] == 0)

    def test_rejects_narrow_continuum(self, zeno_params):
        with pytest.raises(ParameterError, match="too narrow"):
            build_full_model(zeno_params, 4001, 5.0)

    def test_rejects_small_m(self, zeno_params):
        with pytest.raises(ParameterError):
            build_full_model(zeno_params, 500, 40.0)

    def test_validity_horizon_names_recurrence(self, zeno_params):
        with pytest.raises(ValidityHorizonError, match="recurrence time") as info:
            build_full_model(zeno_params, 4001, 40.0, t_max=400.0)
        assert info.value.recurrence_time == pytest.approx(628.3185307179587)


class TestMicroscopic:
    def test_values(self):
        u_bar, gamma = microscopic_to_effective(1.0, 1.0, 100, 4)
        assert u_bar == pytest.approx(0.1, rel=1e-15)
        assert gamma == pytest.approx(0.02, rel=1e-15)

    def test_single_site(self):
        assert microscopic_to_effective(0.7, 0.3, 1, 1) == (0.7, 0.3)

    @pytest.mark.parametrize("n,s", [(0, 1), (5, 0), (5, 6)])
    def test_preconditions(self, n, s):
        with pytest.raises(ParameterError):
            microscopic_to_effective(1.0, 1.0, n, s)
