"""Quantum decay of a single state through a pseudo continuum into a real continuum."""

from .model import (
    CouplingSpec,
    EffectiveHamiltonian,
    FullModel,
    ModelParams,
    build_full_model,
    build_reduced_hamiltonian,
    microscopic_to_effective,
    sample_couplings,
)
from .spectral import (
    Spectrum,
    eigendecompose,
    eigenvector_from_eigenvalue,
    identify_special_states,
    reduce_three_level,
    secular_roots,
)
from .dynamics import (
    Trajectory,
    evolve_full_model,
    evolve_reduced_ode,
    evolve_spectral,
    survival_probability,
    time_grid,
)

__version__ = "0.1.0"
