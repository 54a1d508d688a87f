"""Impartial vertex selection in directed graphs, with exhaustive verification."""

from .graph import (
    Digraph,
    GraphClass,
    GraphError,
    LexKey,
    ParseError,
    deviation_neighborhood,
    enumerate_class,
    indegree,
    max_indegree,
    parse_graph,
    restricted_deviation_neighborhood,
    top,
)
from .mechanisms import (
    DomainError,
    InternalError,
    MechanismId,
    Variant,
    apwru,
    apwru_deletion,
    apwru_pivotal,
    pwru,
    run,
)
from .verify import (
    Aggregator,
    VerificationReport,
    additive_gap,
    aggregate,
    check_impartial,
    lemma1_select,
    measure_additive,
    strata,
)

__version__ = "0.1.0"
