"""Bell functionals tailored to pairs of rank-one projective measurements."""

from ._backend import BACKEND
from .bases import (
    BasisPair,
    OverlapMatrix,
    PreprocessReport,
    Unistochasticity,
    basis_pair_from_overlap_blocks,
    conj_overlap_3,
    is_unistochastic_3x3,
    mub_overlap,
    mub_pair,
    odd_counterexample,
    overlap_of,
    pair_from_unitary,
    preprocess,
    qubit_mub_blocks,
)
from .errors import DomainError
from .functional import (
    Behavior,
    BellFunctional,
    QuantumRealization,
    Scenario,
    born_behavior,
    evaluate_behavior,
    evaluate_n_realization,
    evaluate_realization,
    functional_from_overlap,
    n_functional,
)
from .localvalue import (
    LocalValueReport,
    g_min,
    g_of_n,
    local_value,
    local_value_oracle,
    lower_bound,
    mub_local_value,
    nu_threshold,
    s_tau,
    simplex_extremals,
)
from .realization import (
    canonical,
    certification_completeness_check,
    certify_measurements,
    exceptional_block_state,
    extract_state,
    extraction_isometries,
    isotropic_realization,
)
from .search import SearchConfig, SearchResult, compare_families, minimize_local_value, perturb_unitary

__version__ = "0.1.0"
