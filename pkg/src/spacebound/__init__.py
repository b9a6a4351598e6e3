"""Spatial-temporal invariants of distributed component systems:
term-level specification, exact region reasoning, collision and coverage
checking, SMT-LIB2 condition emission, and an s-expression DSL."""

from .errors import SpaceboundError
from .regions import Box, Region, bounding_box, box2d, box3d, region_contains, \
    region_difference, region_inflate, region_intersection, region_union
from .terms import ground, eval_symint, validate
from .timeorder import At, Between, TimeOrder, Tristate, shared_time_points
from .transforms import (
    Automaton,
    Classification,
    EventTrace,
    Mode,
    TimedSpace,
    aggregate,
    assign_owner,
    box_abstract,
    geometrize,
    index_by_time,
    merge_intervals,
    normalize,
    resolve_event_relative,
    resolve_events,
    spatial_region,
    strip_owner,
    unfold_automaton,
)
from .checkers import (
    CheckProperty,
    CheckReport,
    Verdict,
    check_collision_boxes,
    check_collision_points,
    check_coverage,
    run_pairwise,
)
from .smt import SmtDocument, SolverResult, SolverStatus, emit_monolithic, \
    emit_per_timepoint, run_solver
from .dsl import SourceDocument, parse, parse_term, print_document, print_term

__version__ = "0.1.0"
