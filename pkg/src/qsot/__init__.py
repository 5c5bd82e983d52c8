"""Block operator algebras, channels, and canonical states over time."""

from .algebra import (
    DEFAULT_ATOL,
    AlgebraShape,
    AlgebraElement,
    FactoredElement,
    tensor_shape,
    product_shape,
    tensor_elements,
    tensor_many,
    partial_trace,
    spectrum,
    max_abs_diff,
    identity_element,
    zero_element,
    basis_element,
    from_hs,
    classical_state,
    delta_state,
    random_element,
    random_hermitian,
    random_state,
    random_faithful_state,
    random_virtual_state,
    haar_unitary,
)
from .chanmap import (
    LinearOperatorMap,
    Chain,
    identity_map,
    map_from_action,
    compose,
    tensor_maps,
    ad_unitary,
    decoherence_map,
    classical_channel,
    trace_functional,
    trace_map,
    is_tp,
    is_hp,
    is_cp,
    is_cptp,
    classify_map,
    random_cptp,
    random_hptp,
    map_max_diff,
)
from .broadcast import (
    mu_map,
    mu_tilde_map,
    swap_element,
    broadcast_map,
    broadcast_anticommutator,
    classical_broadcast,
    check_broadcast_axioms,
)
from .bloom import (
    bloom_step,
    bloom_apply,
    bloom1,
    bloom_chain_recursive,
    bloom_chain_closed,
    ParenTree,
    all_parenthesizations,
    right_comb,
    left_comb,
    catalan,
    bloom_tree,
)
from .sot import (
    StateOverTime,
    star,
    marginal,
    verify_marginals,
    verify_propagator,
    spectrum_report,
)
from .covariance import (
    StarIsomorphism,
    identity_iso,
    random_iso,
    tensor_iso,
    check_star_isomorphism,
    conjugate_chain,
    check_broadcast_covariance,
    check_bloom_covariance,
    check_chain_covariance,
)
from .bayes import (
    gamma_swap,
    check_swap_naturality,
    solve_bayes,
    verify_bayes,
    check_bayes_covariance,
)
from .dynamics import (
    evolution_unitary,
    unitary_chain,
    transform_hamiltonian,
)

__version__ = "0.1.0"
