"""Greedy tree search over embedded polytopes for sparse feasible solutions."""

from .lp import LpOutcome, LpProblem, LpStatus, solve
from .sets import (
    HalfspaceSet,
    InfeasibleSet,
    ObjectiveUnbounded,
    load_halfspace_set,
    sample_random_vertex,
    sample_targeted,
    sample_vertex,
    save_halfspace_set,
)
from .polytope import (
    Polytope,
    SignCensus,
    count_signs,
    dedup_rows,
    polytope_from_dict,
    polytope_to_dict,
    raw_vanish_combinations,
    reduce_complexity,
    select_coordinate,
    unveil_children,
    vanish_coordinate,
)
from .search import (
    SearchConfig,
    SearchTrace,
    brute_force_oracle,
    fixed_order_from_l1,
    in_convex_hull,
    init_root,
    merge_siblings,
    run_breadth_first,
    run_depth_first,
    trace_to_dict,
)
from .filters import (
    FilterSpec,
    ImpulseResponse,
    amplitude,
    build_filter_set,
    verify_filter,
    x_to_impulse,
)

__version__ = "0.1.0"

__all__ = [
    "LpOutcome", "LpProblem", "LpStatus", "solve",
    "HalfspaceSet", "InfeasibleSet", "ObjectiveUnbounded",
    "load_halfspace_set", "sample_random_vertex", "sample_targeted",
    "sample_vertex", "save_halfspace_set",
    "Polytope", "SignCensus", "count_signs", "dedup_rows",
    "polytope_from_dict", "polytope_to_dict", "raw_vanish_combinations",
    "reduce_complexity", "select_coordinate", "unveil_children",
    "vanish_coordinate",
    "SearchConfig", "SearchTrace", "brute_force_oracle", "fixed_order_from_l1",
    "in_convex_hull", "init_root", "merge_siblings", "run_breadth_first",
    "run_depth_first", "trace_to_dict",
    "FilterSpec", "ImpulseResponse", "amplitude", "build_filter_set",
    "verify_filter", "x_to_impulse",
]
