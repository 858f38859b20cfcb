"""Numerical laboratory for approximate pairing-preserving maps.

Layers, bottom up: finite-dimensional block algebras (`algebra`), the
standard module over one (`modules`), control functions and their decay
conditions (`control`), candidate map synthesis and certification
(`mapgen`), the scaling-limit stability pipeline and its estimator
(`stability`), recomputation-based verification (`verify`), and the
config/experiment/report/CLI glue around them.
"""

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    ElementFlags,
    SpectralData,
    abs_elem,
    classify,
    distance,
    op_norm,
    polar_normal,
    pos_sqrt,
    random_element,
    random_hermitian,
    random_normal_element,
    random_positive,
    random_unitary,
    spectral_decomp_normal,
)
from .config import ExperimentConfig, config_from_dict, load_config
from .control import (
    DecayReport,
    PowerControl,
    TableControl,
    check_decay_conditions,
    suggest_c,
)
from .exceptions import (
    CannotCertifyError,
    ConfigError,
    DescriptorMismatch,
    NoAccumulationPointError,
    NotAbelianError,
    NotNormalError,
    NotPositiveError,
    UnsupportedRegimeError,
)
from .experiment import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_INCOMPLETE,
    EXIT_OK,
    ExperimentOutcome,
    run_experiment,
)
from .mapgen import (
    ApproxMap,
    Certificate,
    ExactSolution,
    PhaseRule,
    assemble_approximate_map,
    make_exact_solution,
    make_perturbation,
)
from .modules import (
    ModuleDescriptor,
    ModuleElement,
    distance_mod,
    inner,
    norm_mod,
    polarize,
    random_module_element,
    right_act,
    wigner_defect,
)
from .stability import (
    FLimit,
    ScaledIterates,
    StabilityParams,
    StabilityResult,
    WignerStabilizer,
    construct_F,
    construct_I,
    extract_limit,
    iterate_scaled,
)
from .verify import (
    CheckRecord,
    VerificationReport,
    build_point_rows,
    check_approx_wigner,
    check_exact_wigner,
    check_limit_gates,
    check_orthogonality,
    check_polarization,
    check_quadratic_envelope,
    check_stability_conclusions,
    run_algebra_checks,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraDescriptor", "AlgebraElement", "ElementFlags", "SpectralData",
    "abs_elem", "classify", "distance", "op_norm", "polar_normal",
    "pos_sqrt", "random_element", "random_hermitian",
    "random_normal_element", "random_positive", "random_unitary",
    "spectral_decomp_normal",
    "ModuleDescriptor", "ModuleElement", "distance_mod", "inner",
    "norm_mod", "polarize", "random_module_element", "right_act",
    "wigner_defect",
    "PowerControl", "TableControl", "DecayReport",
    "check_decay_conditions", "suggest_c",
    "PhaseRule", "ExactSolution", "ApproxMap", "Certificate",
    "make_exact_solution", "make_perturbation", "assemble_approximate_map",
    "StabilityParams", "ScaledIterates", "FLimit", "StabilityResult",
    "WignerStabilizer", "iterate_scaled", "extract_limit", "construct_F",
    "construct_I",
    "CheckRecord", "VerificationReport", "check_approx_wigner",
    "check_stability_conclusions", "check_limit_gates",
    "check_orthogonality", "check_exact_wigner", "check_polarization",
    "check_quadratic_envelope", "build_point_rows", "run_algebra_checks",
    "ExperimentConfig", "config_from_dict", "load_config",
    "ExperimentOutcome", "run_experiment",
    "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_CONFIG", "EXIT_INCOMPLETE",
    "DescriptorMismatch", "NotPositiveError", "NotNormalError",
    "NotAbelianError", "UnsupportedRegimeError", "CannotCertifyError",
    "NoAccumulationPointError", "ConfigError",
    "__version__",
]
