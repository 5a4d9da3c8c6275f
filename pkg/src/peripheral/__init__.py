"""Asymptotic structure of finite-dimensional quantum channels.

The attractor subspace of a channel (span of its peripheral eigenvectors)
decomposes into blocks ``B(C^{d_k}) (x) rho_k`` that the channel permutes and
rotates unitarily.  This package computes that structure, builds channels
with a prescribed one, and checks the related identities numerically.
"""

from .channel import (
    Channel,
    GKLSGenerator,
    adjoint,
    apply,
    choi_to_kraus,
    compose,
    is_cptp,
    markovian_channel,
    power,
    random_gkls_generator,
    to_choi,
    to_superop,
    zoo,
)
from .divisibility import (
    ClassificationReport,
    classify,
    markovian_permutation_check,
    root_asymptotics_witness,
    root_relations_check,
)
from .linalg import DEFAULT_TOL, BranchAmbiguityError, Subspace, Tolerances
from .recovery import (
    HalfProductContext,
    asymptotic_adjoint_half,
    asymptotic_adjoint_hs,
    eigvec_correspondence_check,
    half_inner,
    hs_unitarity_report,
    petz_recovery,
    verify_recovery_on_attractor,
)
from .spectral import (
    DefectivePeripheralError,
    attractor_basis,
    cesaro_oracle,
    fix_basis,
    fixed_point_projection,
    peripheral_channel,
    peripheral_data,
    peripheral_projection,
    spectrum,
    spectrum_report,
)
from .structure import (
    AttractorDecomposition,
    Block,
    CyclicDecomposition,
    DecompositionError,
    apply_asymptotic,
    coarse_grained_unitary,
    compare_decompositions,
    cyclic_normalize,
    induced_faithful,
    max_rank_fixed_state,
    star_product,
    support_space,
    verify_decomposition,
    wolf_decompose,
)
from .unfold import (
    BlockSpec,
    UnfoldSpec,
    UnfoldSpecError,
    phi0_map,
    pinching_channel,
    random_spec,
    sink_map,
    spec_decomposition,
    unfold,
    verify_unfold,
)

__all__ = [
    "Channel", "GKLSGenerator", "adjoint", "apply", "choi_to_kraus", "compose", "is_cptp",
    "markovian_channel", "power", "random_gkls_generator", "to_choi", "to_superop", "zoo",
    "ClassificationReport", "classify", "markovian_permutation_check",
    "root_asymptotics_witness", "root_relations_check", "DEFAULT_TOL",
    "BranchAmbiguityError", "Subspace", "Tolerances", "HalfProductContext",
    "asymptotic_adjoint_half", "asymptotic_adjoint_hs", "eigvec_correspondence_check",
    "half_inner", "hs_unitarity_report", "petz_recovery", "verify_recovery_on_attractor",
    "DefectivePeripheralError", "attractor_basis", "cesaro_oracle", "fix_basis",
    "fixed_point_projection", "peripheral_channel", "peripheral_data",
    "peripheral_projection", "spectrum", "spectrum_report", "AttractorDecomposition",
    "Block", "CyclicDecomposition", "DecompositionError", "apply_asymptotic",
    "coarse_grained_unitary", "compare_decompositions", "cyclic_normalize",
    "induced_faithful", "max_rank_fixed_state", "star_product", "support_space",
    "verify_decomposition", "wolf_decompose", "BlockSpec", "UnfoldSpec", "UnfoldSpecError",
    "phi0_map", "pinching_channel", "random_spec", "sink_map", "spec_decomposition",
    "unfold", "verify_unfold",
]

__version__ = "0.1.0"
