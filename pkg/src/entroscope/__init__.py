"""Entropy of automaton languages and certified drops under forbidden factors."""

__version__ = "0.1.0"

from .census import (
    EntropyEstimate,
    GapReport,
    NondeterministicWindow,
    NotStronglyConnected,
    WordCensus,
    count_words,
    determinize,
    entropy_from_counts,
    entropy_gap_report,
    spectral_entropy_finite,
)
from .chain import (
    CertificateInputs,
    GapCertificate,
    HarmonicVector,
    RhoEstimate,
    StepDistribution,
    WeightedChain,
    certified_gap_bound,
    entropy_from_rho,
    h_transform,
    harmonic_vector,
    initial_distribution,
    k_step_restricted_rowsum_check,
    n_step_vector,
    probability_table,
    resolve_certificate,
    rho_estimate,
    step,
    transform_identity_check,
    uniform_weights,
    validate,
)
from .factors import (
    DensenessCertificate,
    FactorAutomaton,
    ForbiddenSet,
    ForbiddenWordError,
    build_factor_automaton,
    certify_denseness,
    estimate_denseness_constant,
    product_graph,
)
from .graphs import (
    DEFAULT_BUDGET,
    Declared,
    Edge,
    ExpansionBudgetExceeded,
    GraphFormatError,
    LabelledGraph,
    Window,
    check_deterministic,
    check_fully_deterministic,
    check_uniform_connectedness,
    explicit_graph,
    forward_ball,
    forward_distance,
    full_window,
    load_graph_json,
    parse_graph_document,
    vertex_key,
)
from .schreier import (
    ActionSpec,
    builtin_family,
    family_names,
    growth_sensitivity_report,
    schreier_graph,
    word_problem_census,
)
