"""Reliability analysis of Gaussian subspace classification under model
mismatch: error bounds, low-noise expansions, condition checkers, Monte
Carlo simulation and a training-set-size phase-transition harness."""

from .bounds import (
    AlphaPolicy,
    BoundCurvePoint,
    PairGeometry,
    alpha_max,
    all_pair_geometries,
    k_ij_matrix,
    l0_ij_matrix,
    l_ij_matrix,
    pair_geometry,
    sigma_ij,
    theorem1_bound,
    theorem1_pair_bound,
)
from .classifier import (
    DiscriminantCache,
    ErrorEstimate,
    classify,
    discriminant,
    monte_carlo_error,
)
from .expansion import (
    ConditionReport,
    ExpansionReport,
    RotationCheck,
    Verdict,
    check_conditions,
    check_corollary1,
    check_corollary2,
    check_corollary3,
    d_exponent,
    expand,
    expansion_constant,
    rotation_mismatch_check,
)
from .experiments import (
    NamedInstance,
    PhaseCell,
    catalog,
    db_to_sigma2,
    fit_decay_exponent,
    gen_synthetic,
    phase_transition,
    resolve_catalog,
    sigma2_to_db,
    sweep_noise,
)
from .model import (
    ClassModel,
    ProblemInstance,
    estimate_from_samples,
    from_covariance,
    instance_from_dict,
    instance_to_dict,
    load_dataset_csv,
    load_instance,
    make_stream,
    model_from_basis,
    sample,
    sample_batch,
    save_dataset_csv,
    save_instance,
)
from .numlin import (
    SpectralDecomposition,
    Svd,
    is_pd,
    logdet_pd,
    min_eig_sym,
    orthonormal_complement,
    pdet,
    rank_with_tol,
    read_matrix_csv,
    svd,
    sym_eig,
    write_matrix_csv,
)
from .subspace import (
    PrincipalAngles,
    Subspace,
    complement_within,
    d_max,
    d_min,
    intersect,
    intersect_with_kernel,
    mismatch_geometry,
    pair_decomposition,
    principal_angles,
)

__version__ = "0.1.0"
