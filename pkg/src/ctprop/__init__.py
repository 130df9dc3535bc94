"""Exact inference in discrete Bayesian networks by recursive decomposition
at complete separators of the moral graph — no triangulation, ever."""

from .engine import (
    DEFAULT_STRATEGY,
    FIRST_LEAF_STRATEGY,
    LARGEST_LEAF_STRATEGY,
    STRATEGIES,
    ComponentTree,
    PickStrategy,
    RunReport,
    build_component_tree,
    combine,
    main_query,
    parallel_reduction,
    posterior,
    random_strategy,
    serial_reduction,
)
from .errors import (
    CtpropError,
    EvidenceError,
    InternalInvariantError,
    InvalidSeparatorError,
    ModelInconsistencyError,
    ParseError,
    StateSpaceTooLargeError,
    ZeroEvidenceError,
)
from .netformat import format_net, parse_net
from .networks import (
    Item,
    PartialBayesNet,
    Query,
    append_answer,
    induced_decomposition,
    is_simple,
    joint_potential,
    make_query,
    marginal_potential,
    observed_leaves,
    split_query,
    union,
)
from .oracle import brute_force_marginal, variable_elimination_marginal
from .tables import Potential, Variable

__version__ = "0.1.0"

__all__ = [
    "ComponentTree", "CtpropError", "DEFAULT_STRATEGY", "EvidenceError",
    "FIRST_LEAF_STRATEGY", "InternalInvariantError", "InvalidSeparatorError",
    "Item", "LARGEST_LEAF_STRATEGY", "ModelInconsistencyError", "ParseError",
    "PartialBayesNet", "PickStrategy", "Potential", "Query", "RunReport",
    "STRATEGIES", "StateSpaceTooLargeError", "Variable", "ZeroEvidenceError",
    "append_answer", "brute_force_marginal", "build_component_tree", "combine",
    "format_net", "induced_decomposition", "is_simple", "joint_potential",
    "main_query", "make_query", "marginal_potential", "observed_leaves",
    "parallel_reduction", "parse_net", "posterior", "random_strategy",
    "serial_reduction", "split_query", "union",
    "variable_elimination_marginal",
]
