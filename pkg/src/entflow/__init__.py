"""Optimal conversion probabilities, intermediate states and survival along paths of entangled pure states."""

from .bipartite import (
    SchmidtVector,
    in_interval,
    is_intermediate,
    lattice_join,
    lattice_meet,
    locc_possible,
    majorizes,
    max_prob,
    monotone_E,
    osbp_direct_possible,
)
from .errors import EntflowError
from .fourqubit import GammaVector, accessible_region, locc_feasible, no_intermediate_witness, norm_measure
from .multipartite import (
    GenericStateDescriptor,
    LocalPSDOperator,
    ProductState,
    is_intermediate_generic,
    make_diag_interp_path,
    make_sampled_path,
    make_sequential_twofold_path,
    max_prob_generic,
    min_ratio_over_products,
    monotone_Ex,
    path_optimality_defect,
    qutrit_counterexample_path,
    reconstruct_G_from_fingerprint,
    sufficient_conditions_check,
)
from .paths import BipartitePath, path_from_json
from .protocols import (
    chi_max,
    chi_min,
    emit_measurement_operators,
    least_entangled_path,
    most_entangled_path,
    straight_path,
    xi_state,
    zeta_eta,
)
from .spectra import eig_hermitian, inv_sqrt, lambda_max, relative_eig_max, tensor_lambda_max
from .survival import (
    certify_twofold_optimal,
    cumulative_hazard,
    hazard,
    hazard_analytic,
    interconversion_distance,
    pairwise_prob,
    path_length,
    path_probability,
    product_integral,
)

__version__ = "0.1.0"
