"""Two-species integrable spin-cluster models: operators, spectra, Bethe ansatz.

The package builds the long-range cluster Hamiltonian of two spin species
as explicit dense operators, certifies its integrability numerically
(Yang-Baxter, exchange relations, commuting charges), solves the Bethe
equations sector by sector, and validates every claimed eigenpair against
an exact-diagonalization oracle.
"""

from .bethe import (
    BetheRootSet,
    BlockLevel,
    EigenpairReport,
    SolverConfig,
    VacuumData,
    apply_transfer,
    bae_jacobian,
    bae_residual,
    bethe_multiplet_levels,
    bethe_vector,
    conjugation_defect,
    eigenvalue_polynomial,
    energy,
    expand_multiplets,
    polynomial_root_candidates,
    relative_bae_residual,
    singular_flags,
    solve_bae,
    spin_multiplicities,
    su2_symmetric,
    transfer_eigenvalue,
    vacuum_data,
    verify_eigenpair,
)
from .config import RunConfig, load_config
from .core import (
    AuxBlock,
    ChargeSet,
    ModelSpec,
    aux_product,
    charges,
    lax_a,
    lax_b,
    monodromy,
    r_matrix,
    rll_residual,
    transfer,
    ybe_residual,
)
from .errors import (
    ConfigError,
    ConstraintError,
    DimensionCapError,
    EmbeddingError,
    HermiticityError,
    InternalConsistencyError,
    InvalidSpinError,
    LaxConstraintError,
    NotBlockDiagonalError,
    OffShellError,
    PoleError,
    ShapeError,
    SpinClusterError,
)
from .model import (
    CouplingSet,
    FitResult,
    InteractionGraph,
    build_hamiltonian,
    couplings_from_spec,
    fit_parameters,
    hamiltonian_from_charges,
    interaction_graph,
    to_dot,
)
from .oracle import (
    MatchReport,
    Sector,
    Spectrum,
    exact_spectrum,
    group_degenerate,
    match_spectra,
    sector_decompose,
    sector_spectrum,
    sz_sector_indices,
)
from .spins import (
    DEFAULT_DIMENSION_CAP,
    SiteList,
    embed,
    site_sm,
    site_sp,
    site_sz,
    species_sum,
    spin_matrices,
    total_spin_squared,
    total_sz,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
