"""Invariant term language.

Terms are immutable trees: logical connectives over temporal atoms
(time points, time intervals, events) and spatial atoms (points, boxes,
segments, topological nodes), with optional ownership tags and symbolic
integer box coordinates. All coordinates are integers; callers pick a
unit scale (recorded in DSL document headers, semantically inert).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .errors import BoxUnordered, UnboundVariable

# ---------------------------------------------------------------------------
# symbolic integers
# ---------------------------------------------------------------------------


class SymInt:
    """Integer expression over named variables."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(SymInt):
    value: int


@dataclass(frozen=True)
class Var(SymInt):
    name: str


@dataclass(frozen=True)
class Add(SymInt):
    left: SymInt
    right: SymInt


@dataclass(frozen=True)
class Sub(SymInt):
    left: SymInt
    right: SymInt


@dataclass(frozen=True)
class Mul(SymInt):
    left: SymInt
    right: SymInt


def eval_symint(expr: SymInt, env: Mapping[str, int]) -> int:
    """Evaluate a symbolic integer under a variable binding.

    Raises :class:`UnboundVariable` for variables missing from ``env``.
    """
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise UnboundVariable(expr.name) from None
    if isinstance(expr, Add):
        return eval_symint(expr.left, env) + eval_symint(expr.right, env)
    if isinstance(expr, Sub):
        return eval_symint(expr.left, env) - eval_symint(expr.right, env)
    if isinstance(expr, Mul):
        return eval_symint(expr.left, env) * eval_symint(expr.right, env)
    raise TypeError(f"not a SymInt: {expr!r}")


def symint_variables(expr: SymInt) -> frozenset[str]:
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, (Add, Sub, Mul)):
        return symint_variables(expr.left) | symint_variables(expr.right)
    return frozenset()


# ---------------------------------------------------------------------------
# time labels
# ---------------------------------------------------------------------------


class TimeLabel:
    __slots__ = ()


@dataclass(frozen=True)
class Absolute(TimeLabel):
    name: str


@dataclass(frozen=True)
class EventRelative(TimeLabel):
    """A time point a fixed number of chain steps after an event occurrence.

    Offsets may be negative (before the occurrence).
    """

    event: str
    offset: int


def _as_label(value: Union[str, TimeLabel]) -> TimeLabel:
    if isinstance(value, str):
        return Absolute(value)
    if isinstance(value, TimeLabel):
        return value
    raise TypeError(f"not a time label: {value!r}")


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class And(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Or(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Term):
    term: Term


@dataclass(frozen=True)
class Implies(Term):
    antecedent: Term
    consequent: Term


@dataclass(frozen=True)
class BigAnd(Term):
    """N-ary conjunction, equivalent to nested binary conjunctions."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class BigOr(Term):
    """N-ary disjunction, equivalent to nested binary disjunctions."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class TrueAtom(Term):
    pass


@dataclass(frozen=True)
class FalseAtom(Term):
    pass


TRUE = TrueAtom()
FALSE = FalseAtom()


class Atom(Term):
    """Leaf of the term language: temporal, event or spatial fact."""

    __slots__ = ()


@dataclass(frozen=True)
class TimePoint(Atom):
    label: TimeLabel

    def __post_init__(self):
        object.__setattr__(self, "label", _as_label(self.label))


@dataclass(frozen=True)
class TimeInterval(Atom):
    start: TimeLabel
    end: TimeLabel

    def __post_init__(self):
        object.__setattr__(self, "start", _as_label(self.start))
        object.__setattr__(self, "end", _as_label(self.end))


@dataclass(frozen=True)
class Event(Atom):
    name: str


@dataclass(frozen=True)
class OccupyPoint2D(Atom):
    x: int
    y: int


@dataclass(frozen=True)
class OccupyBox2D(Atom):
    x1: int
    y1: int
    x2: int
    y2: int


@dataclass(frozen=True)
class OccupySegment2D(Atom):
    x1: int
    y1: int
    x2: int
    y2: int
    radius: int


@dataclass(frozen=True)
class OccupyPoint3D(Atom):
    x: int
    y: int
    z: int


@dataclass(frozen=True)
class OccupyBox3D(Atom):
    x1: int
    y1: int
    z1: int
    x2: int
    y2: int
    z2: int


@dataclass(frozen=True)
class OccupySegment3D(Atom):
    x1: int
    y1: int
    z1: int
    x2: int
    y2: int
    z2: int
    radius: int


@dataclass(frozen=True)
class OccupyNode(Atom):
    """Occupation of a named node of a topological graph; geometric
    meaning is assigned later by ``geometrize``."""

    node: str


@dataclass(frozen=True)
class Owned(Atom):
    """Tags a spatial atom with the component the space belongs to."""

    owner: str
    atom: Atom


@dataclass(frozen=True)
class OccupyBoxSym(Atom):
    """2D box with symbolic integer coordinates; ``ground`` turns it into
    an :class:`OccupyBox2D`."""

    x1: SymInt
    y1: SymInt
    x2: SymInt
    y2: SymInt


_SPATIAL_KINDS = (
    OccupyPoint2D,
    OccupyBox2D,
    OccupySegment2D,
    OccupyPoint3D,
    OccupyBox3D,
    OccupySegment3D,
    OccupyNode,
    Owned,
    OccupyBoxSym,
)

_TEMPORAL_KINDS = (TimePoint, TimeInterval, Event)


def is_spatial_atom(atom: Atom) -> bool:
    return isinstance(atom, _SPATIAL_KINDS)


# ---------------------------------------------------------------------------
# traversal helpers
# ---------------------------------------------------------------------------


def children(term: Term) -> tuple[Term, ...]:
    if isinstance(term, (And, Or)):
        return (term.left, term.right)
    if isinstance(term, Implies):
        return (term.antecedent, term.consequent)
    if isinstance(term, Not):
        return (term.term,)
    if isinstance(term, (BigAnd, BigOr)):
        return term.terms
    return ()


def rebuild(term: Term, new_children: tuple[Term, ...]) -> Term:
    if isinstance(term, And):
        return And(*new_children)
    if isinstance(term, Or):
        return Or(*new_children)
    if isinstance(term, Implies):
        return Implies(*new_children)
    if isinstance(term, Not):
        return Not(new_children[0])
    if isinstance(term, BigAnd):
        return BigAnd(new_children)
    if isinstance(term, BigOr):
        return BigOr(new_children)
    return term


def iter_atoms(term: Term) -> Iterator[tuple[tuple[int, ...], Atom]]:
    """Yield every atom with its path of child indices from the root."""
    stack: list[tuple[tuple[int, ...], Term]] = [((), term)]
    while stack:
        path, node = stack.pop()
        if isinstance(node, Atom):
            yield path, node
        else:
            for i, child in enumerate(children(node)):
                stack.append((path + (i,), child))


def map_atoms(term: Term, fn) -> Term:
    """Rebuild ``term`` with every atom replaced by ``fn(atom)``.

    ``fn`` receives the whole atom (including ``Owned`` wrappers) and must
    return a Term.
    """
    if isinstance(term, Atom):
        return fn(term)
    if isinstance(term, (TrueAtom, FalseAtom)):
        return term
    kids = children(term)
    new = tuple(map_atoms(c, fn) for c in kids)
    if new == kids:
        return term
    return rebuild(term, new)


def free_symbols(term: Term) -> frozenset[str]:
    """Names of symbolic variables occurring in the term."""
    out: set[str] = set()
    for _, atom in iter_atoms(term):
        inner = atom.atom if isinstance(atom, Owned) else atom
        if isinstance(inner, OccupyBoxSym):
            for coord in (inner.x1, inner.y1, inner.x2, inner.y2):
                out |= symint_variables(coord)
    return frozenset(out)


# ---------------------------------------------------------------------------
# structural validation
# ---------------------------------------------------------------------------

BOX_UNORDERED = "BoxUnordered"
EMPTY_BIG_CONNECTIVE = "EmptyBigConnective"
NEGATIVE_RADIUS = "NegativeRadius"
OWNED_NESTED = "OwnedNested"
OWNED_NONSPATIAL = "OwnedNonSpatial"
EMPTY_LABEL = "EmptyLabel"


@dataclass(frozen=True)
class Violation:
    kind: str
    path: tuple[int, ...]
    detail: str = ""

    def __str__(self) -> str:
        where = "root" if not self.path else "/".join(map(str, self.path))
        msg = f"{self.kind} at {where}"
        return f"{msg}: {self.detail}" if self.detail else msg


def _box_ordered(coords: tuple[int, ...]) -> bool:
    half = len(coords) // 2
    return all(coords[i] <= coords[i + half] for i in range(half))


def _label_violations(label: TimeLabel, path) -> list[Violation]:
    if isinstance(label, Absolute) and not label.name:
        return [Violation(EMPTY_LABEL, path, "empty absolute time point name")]
    return []


def _atom_violations(atom: Atom, path: tuple[int, ...]) -> list[Violation]:
    out: list[Violation] = []
    if isinstance(atom, TimePoint):
        out += _label_violations(atom.label, path)
    elif isinstance(atom, TimeInterval):
        out += _label_violations(atom.start, path)
        out += _label_violations(atom.end, path)
    elif isinstance(atom, OccupyBox2D):
        if not _box_ordered((atom.x1, atom.y1, atom.x2, atom.y2)):
            out.append(Violation(BOX_UNORDERED, path, f"{atom}"))
    elif isinstance(atom, OccupyBox3D):
        if not _box_ordered((atom.x1, atom.y1, atom.z1, atom.x2, atom.y2, atom.z2)):
            out.append(Violation(BOX_UNORDERED, path, f"{atom}"))
    elif isinstance(atom, (OccupySegment2D, OccupySegment3D)):
        if atom.radius < 0:
            out.append(Violation(NEGATIVE_RADIUS, path, f"radius {atom.radius}"))
    elif isinstance(atom, Owned):
        if isinstance(atom.atom, Owned):
            out.append(Violation(OWNED_NESTED, path, f"owner {atom.owner!r}"))
        elif not is_spatial_atom(atom.atom):
            out.append(Violation(OWNED_NONSPATIAL, path, f"{atom.atom}"))
        else:
            out += _atom_violations(atom.atom, path)
    # OccupyBoxSym ordering is only checkable after grounding.
    return out


def validate(term: Term) -> list[Violation]:
    """Collect all structural-invariant violations; an empty list means
    the term is well formed. Never raises, never mutates."""
    out: list[Violation] = []
    stack: list[tuple[tuple[int, ...], Term]] = [((), term)]
    while stack:
        path, node = stack.pop()
        if isinstance(node, (BigAnd, BigOr)) and not node.terms:
            out.append(Violation(EMPTY_BIG_CONNECTIVE, path))
        if isinstance(node, Atom):
            out += _atom_violations(node, path)
        else:
            for i, child in enumerate(children(node)):
                stack.append((path + (i,), child))
    out.sort(key=lambda v: (v.path, v.kind))
    return out


# ---------------------------------------------------------------------------
# grounding
# ---------------------------------------------------------------------------


def _ground_atom(atom: Atom, env: Mapping[str, int]) -> Atom:
    if isinstance(atom, Owned):
        inner = _ground_atom(atom.atom, env)
        return atom if inner is atom.atom else Owned(atom.owner, inner)
    if isinstance(atom, OccupyBoxSym):
        x1 = eval_symint(atom.x1, env)
        y1 = eval_symint(atom.y1, env)
        x2 = eval_symint(atom.x2, env)
        y2 = eval_symint(atom.y2, env)
        if x1 > x2 or y1 > y2:
            raise BoxUnordered(
                f"grounded box ({x1},{y1},{x2},{y2}) violates coordinate order"
            )
        return OccupyBox2D(x1, y1, x2, y2)
    return atom


def ground(term: Term, env: Mapping[str, int]) -> Term:
    """Replace every symbolic box by a concrete one under ``env``.

    The result contains no :class:`OccupyBoxSym`. Raises
    :class:`UnboundVariable` for missing bindings and :class:`BoxUnordered`
    when evaluated coordinates come out unordered. Idempotent.
    """
    return map_atoms(term, lambda a: _ground_atom(a, env))
