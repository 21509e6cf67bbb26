"""Long-time averaged Loschmidt echo after sudden quenches.

Numerics for the Aubry-Andre chain, the transverse-field Ising chain and the
Haldane model: spectral long-time averages, rate functions, their second
derivatives, topological invariants and the small-quench link to the
fidelity susceptibility.
"""

__version__ = "0.1.0"

from .aa import AAParams, aa_ground_state, aa_quench_average, build_aa_hamiltonian
from .echo import (
    OverlapDistribution,
    loschmidt_amplitude,
    overlap_distribution,
    rate_function,
    spectral_average,
    spectral_deficit,
    time_average_echo,
)
from .errors import ConsistencyError, DegenerateError, DomainError, QuenchEchoError, ValidationError
from .fidelity import (
    PerturbationSplit,
    chi_delta_numeric,
    chi_delta_pert,
    fidelity,
    fidelity_susceptibility_pert,
)
from .haldane import GEOMETRY, HaldaneParams, chern_number, chi_lambda, haldane_bloch, haldane_rate
from .ising import IsingParams, ising_rate_closed, ising_rate_discrete, ising_vk, winding_number
from .linalg import (
    HermitianMatrix,
    SpectralDecomposition,
    TwoBandState,
    eig_hermitian,
    eig_two_level,
    periodic_trapezoid,
)
from .sweep import SweepConfig, SweepResult, run_fidelity_compare, run_scaling, run_sweep
