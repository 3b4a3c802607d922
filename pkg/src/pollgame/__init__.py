"""Repetitive polling (local-majority) games on finite graphs."""

from .analysis import (
    EvolutionTable,
    PotentialTrace,
    bundled_table,
    check_bounds,
    check_table_conformance,
    min_dynamo_search,
    no_tie_certificate,
    potential_trace,
    table_self_check,
)
from .dynamics import (
    AllWhite,
    CapReached,
    Cycle,
    Majority,
    Rho,
    TiePolicy,
    Trajectory,
    blinks_at,
    conquered_at,
    dominates,
    is_dynamo,
    parse_rule,
    quotient_step,
    run,
    step,
    uniform_over_n,
)
from .graph import (
    Graph,
    GraphError,
    QuotientGraph,
    chain_construct,
    duplicate,
    hat,
    load_graph,
    quotient,
)

__version__ = "0.1.0"
