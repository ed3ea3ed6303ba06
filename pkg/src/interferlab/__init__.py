"""Operational-theory simulations: paths, phases, interference, and kick-back.

States are real coefficient vectors over a fixed operator basis, effects are
covectors, transformations matrices; probabilities come from plain dot
products.  A quantum and a classical backend share the interface, so every
experiment here runs on both wherever that makes sense.
"""

from .core import (
    CLASSICAL,
    EPS_EQ,
    EPS_NORM,
    EPS_PSD,
    QUANTUM,
    Effect,
    InfeasibleError,
    Measurement,
    StateVector,
    SystemMismatchError,
    SystemType,
    Transformation,
    ValidationError,
    apply,
    basis_effect,
    basis_state,
    channel_from_matrix,
    classical_system,
    compose_seq,
    composite_system,
    density_matrix,
    distinguishing_measurement,
    dynamically_faithful_state,
    effect_from_matrix,
    effect_matrix,
    effects_close,
    haar_unitary,
    hermitian_basis,
    identity_transformation,
    ket_state,
    marginalize,
    maximally_mixed,
    pair,
    partial_pair,
    permutation_transformation,
    phase_unitary,
    projector_effect,
    quantum_system,
    random_effect,
    random_reversible,
    random_state,
    random_unitary,
    state_from_density,
    states_close,
    tensor_effects,
    tensor_states,
    tensor_transformations,
    transform_effect,
    transform_operator,
    transformations_close,
    unit_effect,
    unitary_channel,
)
from .paths import (
    DETECT_TOL,
    NotAPhaseError,
    Path,
    PathExperiment,
    PathRankError,
    SupportSet,
    basis_experiment,
    detection_order,
    effect_support_equals,
    enumerate_classical_phases,
    is_n_undetectable,
    is_phase,
    is_superposition,
    make_experiment,
    phase_relative_angles,
    search_detecting_effect,
    state_support_equals,
    support_of_effect,
    support_of_state,
)
from .interference import (
    ABSENCE_THRESHOLD,
    PRESENCE_THRESHOLD,
    VERDICT_ABSENT,
    VERDICT_INCONCLUSIVE,
    VERDICT_PRESENT,
    EffectChoice,
    InterferencePattern,
    SorkinReport,
    SorkinSample,
    SorkinWitness,
    filter_choice,
    filtered_effect,
    interference_pattern_sweep,
    masked_effect,
    pattern,
    second_order_witness,
    sorkin_residual,
    third_order_scan_quantum,
)
from .control import (
    KICKBACK_TOL,
    ControlledTransformation,
    KickbackResult,
    ParticleClass,
    anyonic_exchange_unitary,
    build_controlled,
    classify_particle,
    common_fixed_state,
    control_target_swap_check,
    exchange_experiment,
    extract_kickback,
    multi_path_permutation_experiment,
    realize_phase_as_kickback,
    superposition_preservation_report,
    swap_exchange_unitary,
    verify_control_contract,
    verify_superposition_preservation,
)
from .oracle import (
    DECISION_TOL,
    DecisionFunction,
    OracleInstance,
    ParityResult,
    build_oracle,
    deutsch_parity,
    kickback_signature,
    pairwise_parity,
    run_deutsch,
    run_pairwise,
)
from .serialize import (
    complex_matrix_from_dict,
    complex_matrix_to_dict,
    effect_from_dict,
    effect_to_dict,
    experiment_from_dict,
    experiment_to_dict,
    load_schema,
    state_from_dict,
    state_to_dict,
    system_from_dict,
    system_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSICAL",
    "EPS_EQ",
    "EPS_NORM",
    "EPS_PSD",
    "QUANTUM",
    "Effect",
    "InfeasibleError",
    "Measurement",
    "StateVector",
    "SystemMismatchError",
    "SystemType",
    "Transformation",
    "ValidationError",
    "apply",
    "basis_effect",
    "basis_state",
    "channel_from_matrix",
    "classical_system",
    "compose_seq",
    "composite_system",
    "density_matrix",
    "distinguishing_measurement",
    "dynamically_faithful_state",
    "effect_from_matrix",
    "effect_matrix",
    "effects_close",
    "haar_unitary",
    "hermitian_basis",
    "identity_transformation",
    "ket_state",
    "marginalize",
    "maximally_mixed",
    "pair",
    "partial_pair",
    "permutation_transformation",
    "phase_unitary",
    "projector_effect",
    "quantum_system",
    "random_effect",
    "random_reversible",
    "random_state",
    "random_unitary",
    "state_from_density",
    "states_close",
    "tensor_effects",
    "tensor_states",
    "tensor_transformations",
    "transform_effect",
    "transform_operator",
    "transformations_close",
    "unit_effect",
    "unitary_channel",
    "DETECT_TOL",
    "NotAPhaseError",
    "Path",
    "PathExperiment",
    "PathRankError",
    "SupportSet",
    "basis_experiment",
    "detection_order",
    "effect_support_equals",
    "enumerate_classical_phases",
    "is_n_undetectable",
    "is_phase",
    "is_superposition",
    "make_experiment",
    "phase_relative_angles",
    "search_detecting_effect",
    "state_support_equals",
    "support_of_effect",
    "support_of_state",
    "ABSENCE_THRESHOLD",
    "PRESENCE_THRESHOLD",
    "VERDICT_ABSENT",
    "VERDICT_INCONCLUSIVE",
    "VERDICT_PRESENT",
    "EffectChoice",
    "InterferencePattern",
    "SorkinReport",
    "SorkinSample",
    "SorkinWitness",
    "filter_choice",
    "filtered_effect",
    "interference_pattern_sweep",
    "masked_effect",
    "pattern",
    "second_order_witness",
    "sorkin_residual",
    "third_order_scan_quantum",
    "KICKBACK_TOL",
    "ControlledTransformation",
    "KickbackResult",
    "ParticleClass",
    "anyonic_exchange_unitary",
    "build_controlled",
    "classify_particle",
    "common_fixed_state",
    "control_target_swap_check",
    "exchange_experiment",
    "extract_kickback",
    "multi_path_permutation_experiment",
    "realize_phase_as_kickback",
    "superposition_preservation_report",
    "swap_exchange_unitary",
    "verify_control_contract",
    "verify_superposition_preservation",
    "DECISION_TOL",
    "DecisionFunction",
    "OracleInstance",
    "ParityResult",
    "build_oracle",
    "deutsch_parity",
    "kickback_signature",
    "pairwise_parity",
    "run_deutsch",
    "run_pairwise",
    "complex_matrix_from_dict",
    "complex_matrix_to_dict",
    "effect_from_dict",
    "effect_to_dict",
    "experiment_from_dict",
    "experiment_to_dict",
    "load_schema",
    "state_from_dict",
    "state_to_dict",
    "system_from_dict",
    "system_to_dict",
    "__version__",
]
