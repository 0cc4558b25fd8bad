"""Causal models over stochastically triggered processes.

Bipartite event graphs where processes occur according to which trigger
events happened, then emit subsets of their effect events, with exact
joint inference, Bayes-net import, and guided table elicitation.
"""

from .algebra import (
    SynergySpec,
    eval_synergy,
    expand_synergy,
    noisy_or,
    pair_composition_prob,
    single_effect_prob,
    validate_synergy,
)
from .dgraph import DiscreteBayesNet, import_dgraph, import_dgraph_doc, net_from_doc
from .elicitation import (
    ElicitationSession,
    LegalRange,
    MarginalSequence,
    commit,
    commit_conditional,
    complete,
    counting_order,
    default_current,
    is_legal_order,
    next_range,
    session_from_doc,
    session_to_constraints,
    session_to_doc,
    start_session,
    synergy_param_range,
)
from .errors import (
    BipartiteViolation,
    CausalProcError,
    CycleError,
    IllegalOrder,
    Incoherent,
    InvalidSpec,
    ModelFormatError,
    ModelTooLarge,
    NetImportError,
    NoAcceptedSamples,
    NonConvergence,
    NormalizationError,
    NotParent,
    NotSimple,
    OutOfRange,
    RangeError,
    SessionStateError,
    ShapeError,
    SingletonDefault,
    StructureError,
    TableDomainError,
    UndefinedConditional,
    UnknownCause,
    Violation,
    ZeroEvidence,
)
from .inference import (
    JointDistribution,
    Query,
    SampleOutcome,
    brute_force_oracle,
    dump_lines,
    estimate_query,
    forward_sample,
    joint_distribution,
    joint_with_elimination,
    query,
    relevant_subgraph,
)
from .model import (
    CausalModel,
    LevelAssignment,
    NodeKind,
    assign_levels,
    build_model,
    load_model,
    model_to_doc,
    normalize_structure,
    parse_model,
    save_model,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteViolation",
    "CausalModel",
    "CausalProcError",
    "CycleError",
    "DiscreteBayesNet",
    "ElicitationSession",
    "IllegalOrder",
    "Incoherent",
    "InvalidSpec",
    "JointDistribution",
    "LegalRange",
    "LevelAssignment",
    "MarginalSequence",
    "ModelFormatError",
    "ModelTooLarge",
    "NetImportError",
    "NoAcceptedSamples",
    "NodeKind",
    "NonConvergence",
    "NormalizationError",
    "NotParent",
    "NotSimple",
    "OutOfRange",
    "Query",
    "RangeError",
    "SampleOutcome",
    "SessionStateError",
    "ShapeError",
    "SingletonDefault",
    "StructureError",
    "SynergySpec",
    "TableDomainError",
    "UndefinedConditional",
    "UnknownCause",
    "Violation",
    "ZeroEvidence",
    "assign_levels",
    "brute_force_oracle",
    "build_model",
    "commit",
    "commit_conditional",
    "complete",
    "counting_order",
    "default_current",
    "dump_lines",
    "estimate_query",
    "eval_synergy",
    "expand_synergy",
    "forward_sample",
    "import_dgraph",
    "import_dgraph_doc",
    "is_legal_order",
    "joint_distribution",
    "joint_with_elimination",
    "load_model",
    "model_to_doc",
    "net_from_doc",
    "next_range",
    "noisy_or",
    "normalize_structure",
    "pair_composition_prob",
    "parse_model",
    "query",
    "relevant_subgraph",
    "save_model",
    "session_from_doc",
    "session_to_constraints",
    "session_to_doc",
    "single_effect_prob",
    "start_session",
    "synergy_param_range",
    "validate_model",
    "validate_synergy",
]
