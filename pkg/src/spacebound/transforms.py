"""Passes from raw invariant terms to checkable timed spatial data.

A component invariant in guarded form ("time index implies spatial
formula") is indexed into a :class:`TimedSpace`: a per-time-index table of
spatial formulas, tagged with what the formulas mean (occupied space vs.
communication range) and in which direction they approximate the real
system (over vs. under). Everything here is pure; per-entry work is
independent across time indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

from . import terms as T
from .errors import (
    AlreadyOwned,
    ClassificationMismatch,
    DimensionMismatch,
    EmptyInitial,
    ModeMismatch,
    NegationUnsupported,
    NodeNotGeometrized,
    NotImplicationForm,
    NotSpatial,
    OffsetOutOfRange,
    ParameterOutOfRange,
    UngroundedSymbol,
    UnmappedNode,
    UnresolvedEventRelative,
)
from .regions import Box, Region, bounding_box, empty_region, region_intersection, region_union
from .timeorder import At, Between, TimeIndex, TimeOrder


class Mode(Enum):
    """Approximation direction relative to the real system."""

    OVER = "over"
    UNDER = "under"


class Classification(Enum):
    OCCUPIED = "occupied"
    COMM_RANGE = "comm-range"


@dataclass(frozen=True)
class PendingGuard:
    """An event-guarded entry not yet resolved against a trace:
    (time point and event) implies formula."""

    point: str
    event: str
    formula: T.Term


@dataclass(frozen=True)
class TimedSpace:
    """Per-time-index spatial formulas of one component.

    ``entries`` maps time indices (points or intervals) to spatial
    formulas; ``pending`` holds event-guarded entries awaiting
    ``resolve_events``. Treat instances as immutable values: operations
    return updated copies.
    """

    component: str
    classification: Classification
    mode: Mode
    entries: Mapping[TimeIndex, T.Term] = field(default_factory=dict)
    pending: tuple[PendingGuard, ...] = ()

    def with_entries(self, entries, pending=None) -> "TimedSpace":
        return replace(
            self,
            entries=dict(entries),
            pending=self.pending if pending is None else tuple(pending),
        )


@dataclass(frozen=True)
class EventTrace:
    """Which events are asserted at which time points.

    An event missing from ``occurrences`` is unconstrained: it may occur
    anywhere. An event listed with a set of points occurs exactly there.
    """

    occurrences: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self,
            "occurrences",
            {e: frozenset(pts) for e, pts in self.occurrences.items()},
        )

    def occurs(self, event: str, point: str) -> bool:
        return point in self.occurrences.get(event, frozenset())

    def may_occur(self, event: str, point: str) -> bool:
        if event not in self.occurrences:
            return True
        return point in self.occurrences[event]


@dataclass(frozen=True)
class Automaton:
    """Labelled transition system over named states; labels are spatial
    formulas describing the space used in each state."""

    states: tuple[str, ...]
    initial: tuple[str, ...]
    transitions: tuple[tuple[str, str], ...]
    labels: Mapping[str, T.Term]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        known = set(self.states)
        for s in self.initial:
            if s not in known:
                raise ValueError(f"initial state {s!r} not in states")
        for a, b in self.transitions:
            if a not in known or b not in known:
                raise ValueError(f"transition ({a!r},{b!r}) leaves state set")
        missing = known - set(self.labels)
        if missing:
            raise ValueError(f"unlabelled states: {sorted(missing)}")


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def normalize(term: T.Term) -> T.Term:
    """Flatten to n-ary normal form and absorb boolean units.

    Binary and n-ary conjunctions (disjunctions) of the same polarity are
    merged into a single BigAnd (BigOr); TrueAtom/FalseAtom units are
    absorbed. The result is semantically equivalent to the input.
    """
    if isinstance(term, (T.And, T.BigAnd)):
        kids = _flatten(term, conj=True)
        if any(isinstance(k, T.FalseAtom) for k in kids):
            return T.FALSE
        kids = [k for k in kids if not isinstance(k, T.TrueAtom)]
        if not kids:
            return T.TRUE
        if len(kids) == 1:
            return kids[0]
        return T.BigAnd(tuple(kids))
    if isinstance(term, (T.Or, T.BigOr)):
        kids = _flatten(term, conj=False)
        if any(isinstance(k, T.TrueAtom) for k in kids):
            return T.TRUE
        kids = [k for k in kids if not isinstance(k, T.FalseAtom)]
        if not kids:
            return T.FALSE
        if len(kids) == 1:
            return kids[0]
        return T.BigOr(tuple(kids))
    if isinstance(term, T.Not):
        inner = normalize(term.term)
        if isinstance(inner, T.TrueAtom):
            return T.FALSE
        if isinstance(inner, T.FalseAtom):
            return T.TRUE
        return T.Not(inner)
    if isinstance(term, T.Implies):
        return T.Implies(normalize(term.antecedent), normalize(term.consequent))
    return term


def _flatten(term: T.Term, conj: bool) -> list[T.Term]:
    same = (T.And, T.BigAnd) if conj else (T.Or, T.BigOr)
    out: list[T.Term] = []
    for child in T.children(term):
        norm = normalize(child)
        if isinstance(norm, same):
            out.extend(norm.terms if isinstance(norm, (T.BigAnd, T.BigOr)) else (norm.left, norm.right))
        else:
            out.append(norm)
    return out


# ---------------------------------------------------------------------------
# spatial formula checks and geometry
# ---------------------------------------------------------------------------

_CONNECTIVES = (T.And, T.Or, T.BigAnd, T.BigOr)


def check_spatial(formula: T.Term, path: tuple[int, ...] = ()) -> None:
    """Raise unless ``formula`` is in the checked spatial fragment:
    spatial atoms under And/Or/BigAnd/BigOr with boolean constants."""
    if isinstance(formula, (T.TrueAtom, T.FalseAtom)):
        return
    if isinstance(formula, T.Not):
        raise NegationUnsupported(f"negation at path {list(path)}")
    if isinstance(formula, _CONNECTIVES):
        for i, child in enumerate(T.children(formula)):
            check_spatial(child, path + (i,))
        return
    if isinstance(formula, T.Atom):
        if T.is_spatial_atom(formula):
            return
        raise NotSpatial(f"non-spatial atom {formula} at path {list(path)}")
    raise NotSpatial(f"{type(formula).__name__} at path {list(path)}")


def atom_extent(atom: T.Atom, mode: Mode) -> Box:
    """Axis-aligned extent of one spatial atom.

    Segments with a radius are capsules; for overapproximation the extent
    is the capsule's bounding box (segment box inflated by the radius),
    for underapproximation the segment box itself (inscribed in the
    capsule core).
    """
    if isinstance(atom, T.Owned):
        return atom_extent(atom.atom, mode)
    if isinstance(atom, T.OccupyPoint2D):
        return Box((atom.x, atom.y), (atom.x, atom.y))
    if isinstance(atom, T.OccupyPoint3D):
        return Box((atom.x, atom.y, atom.z), (atom.x, atom.y, atom.z))
    if isinstance(atom, T.OccupyBox2D):
        return Box((atom.x1, atom.y1), (atom.x2, atom.y2))
    if isinstance(atom, T.OccupyBox3D):
        return Box((atom.x1, atom.y1, atom.z1), (atom.x2, atom.y2, atom.z2))
    if isinstance(atom, T.OccupySegment2D):
        lo = (min(atom.x1, atom.x2), min(atom.y1, atom.y2))
        hi = (max(atom.x1, atom.x2), max(atom.y1, atom.y2))
        box = Box(lo, hi)
        return box.inflate(atom.radius) if mode is Mode.OVER else box
    if isinstance(atom, T.OccupySegment3D):
        lo = (min(atom.x1, atom.x2), min(atom.y1, atom.y2), min(atom.z1, atom.z2))
        hi = (max(atom.x1, atom.x2), max(atom.y1, atom.y2), max(atom.z1, atom.z2))
        box = Box(lo, hi)
        return box.inflate(atom.radius) if mode is Mode.OVER else box
    if isinstance(atom, T.OccupyNode):
        raise NodeNotGeometrized(f"node {atom.node!r} has no geometry")
    if isinstance(atom, T.OccupyBoxSym):
        raise UngroundedSymbol(f"symbolic box {atom}")
    raise NotSpatial(f"atom {atom} has no spatial extent")


def formula_dim(formula: T.Term) -> Optional[int]:
    """Dimension of the spatial atoms in a formula, None when it has
    none; mixing 2D and 3D atoms raises."""
    dim: Optional[int] = None
    for _, atom in T.iter_atoms(formula):
        inner = atom.atom if isinstance(atom, T.Owned) else atom
        if isinstance(inner, (T.OccupyPoint2D, T.OccupyBox2D, T.OccupySegment2D, T.OccupyBoxSym)):
            d = 2
        elif isinstance(inner, (T.OccupyPoint3D, T.OccupyBox3D, T.OccupySegment3D)):
            d = 3
        else:
            continue
        if dim is None:
            dim = d
        elif dim != d:
            raise DimensionMismatch("formula mixes 2D and 3D atoms")
    return dim


def spatial_region(formula: T.Term, mode: Mode, dim: Optional[int] = None) -> Region:
    """Region denoted by a grounded, geometrized spatial formula.

    Conjoined facts all hold, so And always unions the extents of its
    parts. A disjunction may take either branch: overapproximation unions
    the branches, underapproximation keeps only their common part.
    """
    if dim is None:
        dim = formula_dim(formula) or 2
    return _region(formula, mode, dim)


def _region(formula: T.Term, mode: Mode, dim: int) -> Region:
    if isinstance(formula, (T.TrueAtom, T.FalseAtom)):
        return empty_region(dim)
    if isinstance(formula, T.Not):
        raise NegationUnsupported("negation has no region semantics")
    if isinstance(formula, (T.And, T.BigAnd)):
        acc = empty_region(dim)
        for child in T.children(formula):
            acc = region_union(acc, _region(child, mode, dim))
        return acc
    if isinstance(formula, (T.Or, T.BigOr)):
        kids = T.children(formula)
        if not kids:
            return empty_region(dim)
        if mode is Mode.OVER:
            acc = empty_region(dim)
            for child in kids:
                acc = region_union(acc, _region(child, mode, dim))
            return acc
        acc = _region(kids[0], mode, dim)
        for child in kids[1:]:
            acc = region_intersection(acc, _region(child, mode, dim))
        return acc
    if isinstance(formula, T.Atom):
        if not T.is_spatial_atom(formula):
            raise NotSpatial(f"non-spatial atom {formula}")
        return Region(dim, (atom_extent(formula, mode),))
    raise NotSpatial(f"{type(formula).__name__} in spatial formula")


def regions_by_owner(
    formula: T.Term, default_owner: str, mode: Mode, dim: int
) -> dict[str, Region]:
    """Partition a formula's overapproximated region by owner tag.

    Only valid in OVER mode, where both And and Or denote unions, so the
    per-owner split is exact. Unowned atoms default to ``default_owner``.
    """
    if mode is not Mode.OVER:
        raise ModeMismatch("owner partitioning is defined for overapproximations")
    buckets: dict[str, list[Box]] = {}

    def walk(node: T.Term) -> None:
        if isinstance(node, (T.TrueAtom, T.FalseAtom)):
            return
        if isinstance(node, T.Not):
            raise NegationUnsupported("negation has no region semantics")
        if isinstance(node, _CONNECTIVES):
            for child in T.children(node):
                walk(child)
            return
        if isinstance(node, T.Atom):
            if not T.is_spatial_atom(node):
                raise NotSpatial(f"non-spatial atom {node}")
            owner = node.owner if isinstance(node, T.Owned) else default_owner
            buckets.setdefault(owner, []).append(atom_extent(node, mode))
            return
        raise NotSpatial(f"{type(node).__name__} in spatial formula")

    walk(formula)
    return {owner: Region(dim, tuple(boxes)) for owner, boxes in buckets.items()}


# ---------------------------------------------------------------------------
# time indexing
# ---------------------------------------------------------------------------


def _conjuncts(term: T.Term, path: tuple[int, ...]) -> list[tuple[tuple[int, ...], T.Term]]:
    if isinstance(term, T.And):
        return _conjuncts(term.left, path + (0,)) + _conjuncts(term.right, path + (1,))
    if isinstance(term, T.BigAnd):
        out = []
        for i, child in enumerate(term.terms):
            out += _conjuncts(child, path + (i,))
        return out
    if isinstance(term, T.TrueAtom):
        return []
    return [(path, term)]


def _absolute(label: T.TimeLabel) -> str:
    if isinstance(label, T.EventRelative):
        raise UnresolvedEventRelative(
            f"event-relative label {label!r}; run resolve_event_relative first"
        )
    return label.name


def _event_only(formula: T.Term) -> bool:
    """True when a formula consists purely of event atoms (a derived-event
    rule consequent rather than a spatial entry)."""
    if isinstance(formula, T.Event):
        return True
    if isinstance(formula, (T.And, T.BigAnd)):
        kids = T.children(formula)
        return bool(kids) and all(_event_only(k) for k in kids)
    return False


def _split_guard(antecedent: T.Term, path) -> tuple[T.Atom, Optional[str]]:
    """Split an implication antecedent into its time atom and optional
    event guard name."""
    if isinstance(antecedent, (T.TimePoint, T.TimeInterval)):
        return antecedent, None
    if isinstance(antecedent, (T.And, T.BigAnd)):
        kids = T.children(antecedent)
        time_atoms = [k for k in kids if isinstance(k, (T.TimePoint, T.TimeInterval))]
        events = [k for k in kids if isinstance(k, T.Event)]
        if len(time_atoms) == 1 and len(events) == 1 and len(kids) == 2:
            return time_atoms[0], events[0].name
    raise NotImplicationForm("antecedent is not a time index (with optional event)", path)


def index_by_time(
    term: T.Term,
    order: TimeOrder,
    *,
    component: str = "component",
    classification: Classification = Classification.OCCUPIED,
    mode: Mode = Mode.OVER,
    atom_filter: Optional[Callable[[T.Atom], bool]] = None,
) -> TimedSpace:
    """Index a guarded invariant into a per-time table.

    The term must be a conjunction of implications whose antecedents are
    single time points or intervals (optionally conjoined with one event
    atom, kept pending until ``resolve_events``) and whose consequents are
    spatial formulas. Derived-event rules (consequent made of event atoms
    only) are skipped here; feed them to ``saturate_events``. Repeated
    indices conjoin their formulas. ``atom_filter``, when given, keeps
    only consequent conjuncts whose spatial atoms all satisfy it, which
    separates e.g. occupancy boxes from range boxes sharing one invariant.
    """
    entries: dict[TimeIndex, T.Term] = {}
    pending: list[PendingGuard] = []

    for path, conjunct in _conjuncts(term, ()):
        if not isinstance(conjunct, T.Implies):
            raise NotImplicationForm(
                f"expected an implication, got {type(conjunct).__name__}", path
            )
        time_atom, guard_event = _split_guard(conjunct.antecedent, path)
        formula = conjunct.consequent
        if _event_only(formula):
            continue
        check_spatial(formula, path + (1,))
        if atom_filter is not None:
            kept = _filter_conjuncts(formula, atom_filter)
            if kept is None:
                continue
            formula = kept

        if isinstance(time_atom, T.TimePoint):
            point = _absolute(time_atom.label)
            order._require(point)
            if guard_event is not None:
                pending.append(PendingGuard(point, guard_event, formula))
                continue
            key: TimeIndex = At(point)
        else:
            start = _absolute(time_atom.start)
            end = _absolute(time_atom.end)
            if guard_event is not None:
                raise NotImplicationForm("event guards apply to time points only", path)
            if start == end:
                order._require(start)
                key = At(start)
            else:
                order.expand_interval(start, end)  # membership + order check
                key = Between(start, end)
        entries[key] = formula if key not in entries else T.And(entries[key], formula)

    return TimedSpace(component, classification, mode, entries, tuple(pending))


def _filter_conjuncts(formula: T.Term, keep: Callable[[T.Atom], bool]) -> Optional[T.Term]:
    conjuncts = _conjuncts(formula, ()) or [((), formula)]
    kept = [
        c
        for _, c in conjuncts
        if all(keep(a) for _, a in T.iter_atoms(c) if T.is_spatial_atom(a))
    ]
    if not kept:
        return None
    if len(kept) == 1:
        return kept[0]
    return T.BigAnd(tuple(kept))


def timed_space_to_term(ts: TimedSpace, order: Optional[TimeOrder] = None) -> T.Term:
    """Rebuild the guarded-implication term of a timed space (inverse of
    ``index_by_time`` up to conjunction shape)."""

    def key_sort(ix: TimeIndex):
        if isinstance(ix, At):
            pos = order.sort_key(ix.point) if order else (0, ix.point)
            return (0, pos)
        pos = order.sort_key(ix.start) if order else (0, ix.start)
        return (1, pos, ix.end)

    conjuncts: list[T.Term] = []
    for ix in sorted(ts.entries, key=key_sort):
        guard: T.Term
        if isinstance(ix, At):
            guard = T.TimePoint(ix.point)
        else:
            guard = T.TimeInterval(ix.start, ix.end)
        conjuncts.append(T.Implies(guard, ts.entries[ix]))
    for g in ts.pending:
        conjuncts.append(
            T.Implies(T.And(T.TimePoint(g.point), T.Event(g.event)), g.formula)
        )
    if not conjuncts:
        return T.TRUE
    if len(conjuncts) == 1:
        return conjuncts[0]
    return T.BigAnd(tuple(conjuncts))


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------


def resolve_events(ts: TimedSpace, trace: EventTrace) -> TimedSpace:
    """Fold pending event-guarded entries into the table.

    Overapproximations activate a guard whenever the event may occur at
    the guard's time point (an event the trace does not mention at all is
    assumed possible); underapproximations only when the trace asserts it.
    Activated formulas conjoin with (augment, not replace) any unguarded
    entry at the same point.
    """
    entries = dict(ts.entries)
    for g in ts.pending:
        if ts.mode is Mode.OVER:
            active = trace.may_occur(g.event, g.point)
        else:
            active = trace.occurs(g.event, g.point)
        if not active:
            continue
        key = At(g.point)
        entries[key] = g.formula if key not in entries else T.And(entries[key], g.formula)
    return ts.with_entries(entries, pending=())


def saturate_events(term: T.Term, trace: EventTrace) -> EventTrace:
    """Close a trace under the derived-event rules found in ``term``.

    Supported rule shapes: "time point implies event" and "(time point
    and event) implies event". Saturation uses asserted occurrences, so
    it adds facts only; for overapproximations unlisted events are
    already treated as possible everywhere.
    """
    rules: list[tuple[str, Optional[str], str]] = []  # (point, guard event, new event)
    for path, conjunct in _conjuncts(term, ()):
        if not isinstance(conjunct, T.Implies) or not _event_only(conjunct.consequent):
            continue
        time_atom, guard_event = _split_guard(conjunct.antecedent, path)
        if not isinstance(time_atom, T.TimePoint):
            raise NotImplicationForm("derived-event rules need a time point guard", path)
        point = _absolute(time_atom.label)
        for _, atom in T.iter_atoms(conjunct.consequent):
            rules.append((point, guard_event, atom.name))

    occs = {e: set(pts) for e, pts in trace.occurrences.items()}
    changed = True
    while changed:
        changed = False
        for point, guard, new_event in rules:
            fires = guard is None or point in occs.get(guard, set())
            if fires and point not in occs.setdefault(new_event, set()):
                occs[new_event].add(point)
                changed = True
    return EventTrace({e: frozenset(p) for e, p in occs.items()})


def resolve_event_relative(term: T.Term, trace: EventTrace, order: TimeOrder) -> T.Term:
    """Replace event-relative time labels with absolute points.

    The order must be a chain: an offset k maps an occurrence to the
    point k steps later. An implication whose antecedent is event-relative
    expands to one copy per occurrence (a conjunction); with no listed
    occurrence it collapses to TrueAtom. Offsets leaving the chain raise.
    """
    chain = order.as_chain()
    position = {p: i for i, p in enumerate(chain)}

    def shift(point: str, offset: int) -> str:
        i = position[point] + offset
        if not 0 <= i < len(chain):
            raise OffsetOutOfRange(f"{point} {offset:+d} leaves the chain")
        return chain[i]

    def label_events(node: T.Term) -> list[str]:
        out = []
        for _, atom in T.iter_atoms(node):
            if isinstance(atom, T.TimePoint) and isinstance(atom.label, T.EventRelative):
                out.append(atom.label.event)
            elif isinstance(atom, T.TimeInterval):
                for lab in (atom.start, atom.end):
                    if isinstance(lab, T.EventRelative):
                        out.append(lab.event)
        return out

    def substitute(node: T.Term, occurrence: Mapping[str, str]) -> T.Term:
        def fix(atom: T.Atom) -> T.Term:
            if isinstance(atom, T.TimePoint) and isinstance(atom.label, T.EventRelative):
                lab = atom.label
                if lab.event in occurrence:
                    return T.TimePoint(shift(occurrence[lab.event], lab.offset))
            if isinstance(atom, T.TimeInterval):
                start, end = atom.start, atom.end
                if isinstance(start, T.EventRelative) and start.event in occurrence:
                    start = T.Absolute(shift(occurrence[start.event], start.offset))
                if isinstance(end, T.EventRelative) and end.event in occurrence:
                    end = T.Absolute(shift(occurrence[end.event], end.offset))
                if (start, end) != (atom.start, atom.end):
                    return T.TimeInterval(start, end)
            return atom

        return T.map_atoms(node, fix)

    def walk(node: T.Term) -> T.Term:
        if isinstance(node, T.Implies):
            events = sorted(set(label_events(node.antecedent)))
            if not events:
                return T.Implies(node.antecedent, walk(node.consequent))
            copies: list[T.Term] = []
            for assign in _assignments(events, trace, order):
                copies.append(
                    T.Implies(
                        substitute(node.antecedent, assign),
                        walk(substitute(node.consequent, assign)),
                    )
                )
            if not copies:
                return T.TRUE
            if len(copies) == 1:
                return copies[0]
            return T.BigAnd(tuple(copies))
        if isinstance(node, T.Atom):
            if label_events(node):
                raise UnresolvedEventRelative(
                    "event-relative label outside an implication antecedent"
                )
            return node
        kids = T.children(node)
        new = tuple(walk(c) for c in kids)
        return node if new == kids else T.rebuild(node, new)

    return walk(term)


def _assignments(events: Sequence[str], trace: EventTrace, order: TimeOrder):
    """All ways of picking one listed occurrence per event, in
    deterministic chain order."""
    pools = []
    for e in events:
        pts = order.sorted_points(trace.occurrences.get(e, frozenset()))
        if not pts:
            return
        pools.append(pts)
    idx = [0] * len(events)
    while True:
        yield {e: pools[i][idx[i]] for i, e in enumerate(events)}
        for i in reversed(range(len(events))):
            idx[i] += 1
            if idx[i] < len(pools[i]):
                break
            idx[i] = 0
        else:
            return


# ---------------------------------------------------------------------------
# interval merging, geometry, abstraction, ownership, aggregation
# ---------------------------------------------------------------------------


def region_formula(region: Region) -> T.Term:
    """Spatial formula whose region is exactly ``region``: a conjunction
    of its boxes (conjoined facts union), FalseAtom when empty."""
    atoms: list[T.Term] = []
    for b in region.boxes:
        if region.dim == 2:
            atoms.append(T.OccupyBox2D(b.lo[0], b.lo[1], b.hi[0], b.hi[1]))
        else:
            atoms.append(T.OccupyBox3D(b.lo[0], b.lo[1], b.lo[2], b.hi[0], b.hi[1], b.hi[2]))
    if not atoms:
        return T.FALSE
    if len(atoms) == 1:
        return atoms[0]
    return T.BigAnd(tuple(atoms))


def merge_intervals(
    ts: TimedSpace, order: TimeOrder, pairs: Sequence[tuple[str, str]]
) -> TimedSpace:
    """Add interval entries combining the point entries they span.

    Overapproximations take the disjunction of the covered entries (the
    space used somewhere in the interval). Underapproximations keep only
    what is guaranteed throughout: the intersection of the covered
    regions, emitted as a conjunction of boxes (which needs grounded,
    geometrized entries). Point entries are retained; pairs spanning no
    recorded point entry add nothing.
    """
    entries = dict(ts.entries)
    for start, end in pairs:
        covered = order.sorted_points(order.expand_interval(start, end))
        if start == end:
            continue  # the merged entry is the retained point entry itself
        formulas = [entries[At(p)] for p in covered if At(p) in entries]
        if not formulas:
            continue
        if len(formulas) == 1:
            combined = formulas[0]
        elif ts.mode is Mode.OVER:
            combined = T.BigOr(tuple(formulas))
        else:
            dim = next((d for d in map(formula_dim, formulas) if d is not None), 2)
            common = spatial_region(formulas[0], Mode.UNDER, dim)
            for f in formulas[1:]:
                common = region_intersection(common, spatial_region(f, Mode.UNDER, dim))
            combined = region_formula(common)
        key: TimeIndex = Between(start, end)
        entries[key] = combined if key not in entries else T.And(entries[key], combined)
    return ts.with_entries(entries)


def map_entries(ts: TimedSpace, fn: Callable[[T.Term], T.Term]) -> TimedSpace:
    """Apply a formula transform to every entry and pending guard."""
    entries = {ix: fn(f) for ix, f in ts.entries.items()}
    pending = tuple(replace(g, formula=fn(g.formula)) for g in ts.pending)
    return ts.with_entries(entries, pending=pending)


def geometrize_term(term: T.Term, node_geometry: Mapping[str, Box]) -> T.Term:
    """Replace topological node atoms by their boxes; all node names must
    be mapped."""

    def fix(atom: T.Atom) -> T.Term:
        if isinstance(atom, T.Owned):
            inner = fix(atom.atom)
            return atom if inner is atom.atom else T.Owned(atom.owner, inner)
        if isinstance(atom, T.OccupyNode):
            try:
                box = node_geometry[atom.node]
            except KeyError:
                raise UnmappedNode(atom.node) from None
            if box.dim != 2:
                raise DimensionMismatch("node geometry must be 2D boxes")
            return T.OccupyBox2D(box.lo[0], box.lo[1], box.hi[0], box.hi[1])
        return atom

    return T.map_atoms(term, fix)


def geometrize(ts: TimedSpace, node_geometry: Mapping[str, Box]) -> TimedSpace:
    """``geometrize_term`` over every entry and pending guard."""
    return map_entries(ts, lambda f: geometrize_term(f, node_geometry))


def box_abstract(ts: TimedSpace) -> TimedSpace:
    """Coarsen every entry to the single bounding box of its region; only
    sound for overapproximations."""
    if ts.mode is not Mode.OVER:
        raise ModeMismatch("box abstraction is an overapproximation")

    def coarsen(formula: T.Term) -> T.Term:
        dim = formula_dim(formula) or 2
        bb = bounding_box(spatial_region(formula, Mode.OVER, dim))
        if bb is None:
            return T.FALSE
        if dim == 2:
            return T.OccupyBox2D(bb.lo[0], bb.lo[1], bb.hi[0], bb.hi[1])
        return T.OccupyBox3D(bb.lo[0], bb.lo[1], bb.lo[2], bb.hi[0], bb.hi[1], bb.hi[2])

    return map_entries(ts, coarsen)


def assign_owner(formula: T.Term, owner: str) -> T.Term:
    """Wrap every spatial atom in an ownership tag. Atoms already owned
    by someone else raise; re-tagging with the same owner is a no-op."""

    def fix(atom: T.Atom) -> T.Term:
        if isinstance(atom, T.Owned):
            if atom.owner != owner:
                raise AlreadyOwned(atom.owner)
            return atom
        if T.is_spatial_atom(atom):
            return T.Owned(owner, atom)
        return atom

    return T.map_atoms(formula, fix)


def strip_owner(formula: T.Term) -> T.Term:
    return T.map_atoms(
        formula, lambda a: a.atom if isinstance(a, T.Owned) else a
    )


def aggregate(parts: Sequence[TimedSpace], name: str) -> TimedSpace:
    """Combine subcomponent tables into one component.

    Entry keys union; formulas on shared keys conjoin, so the combined
    region per time point is the union of the parts' regions. Ownership
    tags inside the parts survive, letting collision checks ignore
    intra-component overlap.
    """
    if not parts:
        raise ValueError("nothing to aggregate")
    first = parts[0]
    for p in parts[1:]:
        if p.mode is not first.mode:
            raise ModeMismatch(f"{p.component} is {p.mode.value}, expected {first.mode.value}")
        if p.classification is not first.classification:
            raise ClassificationMismatch(
                f"{p.component} is {p.classification.value}, "
                f"expected {first.classification.value}"
            )
    entries: dict[TimeIndex, T.Term] = {}
    pending: list[PendingGuard] = []
    for p in parts:
        for ix, f in p.entries.items():
            entries[ix] = f if ix not in entries else T.And(entries[ix], f)
        pending.extend(p.pending)
    return TimedSpace(name, first.classification, first.mode, entries, tuple(pending))


# ---------------------------------------------------------------------------
# automata unfolding
# ---------------------------------------------------------------------------


def unfold_automaton(
    automaton: Automaton, horizon: int, prefix: str = "t"
) -> tuple[T.Term, TimeOrder]:
    """Unfold reachable behavior into a timed invariant over a fresh chain.

    Step k's entry is the disjunction of the labels of all states the
    automaton can be in after exactly k steps; states without outgoing
    transitions persist (self-loop), so the invariant stays defined over
    the whole horizon.
    """
    if horizon < 1:
        raise ParameterOutOfRange(f"horizon {horizon} < 1")
    if not automaton.initial:
        raise EmptyInitial("automaton has no initial states")
    succ: dict[str, list[str]] = {s: [] for s in automaton.states}
    for a, b in automaton.transitions:
        succ[a].append(b)

    order = TimeOrder.chain(horizon, prefix)
    frontier = set(automaton.initial)
    conjuncts: list[T.Term] = []
    for k in range(horizon):
        labels: list[T.Term] = []
        for state in sorted(frontier):
            lab = automaton.labels[state]
            if lab not in labels:
                labels.append(lab)
        disjunct = labels[0] if len(labels) == 1 else T.BigOr(tuple(labels))
        conjuncts.append(T.Implies(T.TimePoint(f"{prefix}{k}"), disjunct))
        frontier = {q for s in frontier for q in (succ[s] or [s])}
    term = conjuncts[0] if len(conjuncts) == 1 else T.BigAnd(tuple(conjuncts))
    return term, order
