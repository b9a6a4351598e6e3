"""Discrete time as a finite partial order of named time points.

A :class:`TimeOrder` is a DAG whose reflexive-transitive edge closure is
the ordering relation. Intervals expand to the full set of points between
their endpoints, which keeps interval reasoning a safe overapproximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from . import terms
from .errors import (
    CycleDetected,
    NotAChain,
    NotOrdered,
    UnknownTimePoint,
    UnresolvedEventRelative,
)


class Tristate(Enum):
    YES = "yes"
    NO = "no"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class At:
    point: str


@dataclass(frozen=True)
class Between:
    start: str
    end: str


TimeIndex = At | Between


@dataclass(frozen=True)
class TimeOrder:
    """Finite set of named time points with a partial order.

    ``edges`` are (predecessor, successor) pairs; the order is their
    reflexive-transitive closure. Construction rejects unknown endpoints,
    duplicate points and cycles. Instances are immutable; queries are safe
    to run concurrently.
    """

    points: tuple[str, ...]
    edges: tuple[tuple[str, str], ...] = ()
    _succ: dict = field(init=False, repr=False, compare=False)
    _pred: dict = field(init=False, repr=False, compare=False)
    _pos: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(self.points)
        edges = tuple((a, b) for a, b in self.edges)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "edges", edges)
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate time point names")
        succ: dict[str, list[str]] = {p: [] for p in pts}
        pred: dict[str, list[str]] = {p: [] for p in pts}
        for a, b in edges:
            if a not in succ:
                raise UnknownTimePoint(a)
            if b not in succ:
                raise UnknownTimePoint(b)
            if b not in succ[a]:
                succ[a].append(b)
                pred[b].append(a)
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_pred", pred)
        object.__setattr__(self, "_pos", self._topological_positions(succ, pred))

    @staticmethod
    def _topological_positions(succ, pred) -> dict[str, int]:
        indeg = {p: len(ps) for p, ps in pred.items()}
        ready = sorted(p for p, d in indeg.items() if d == 0)
        pos: dict[str, int] = {}
        while ready:
            p = ready.pop(0)
            pos[p] = len(pos)
            grew = []
            for q in succ[p]:
                indeg[q] -= 1
                if indeg[q] == 0:
                    grew.append(q)
            if grew:
                ready = sorted(ready + grew)
        if len(pos) != len(indeg):
            raise CycleDetected("time order edges contain a cycle")
        return pos

    # -- constructors -------------------------------------------------------

    @classmethod
    def chain(cls, n: int, prefix: str = "t") -> "TimeOrder":
        """Total order of ``n`` points named ``<prefix>0 .. <prefix>{n-1}``."""
        pts = tuple(f"{prefix}{i}" for i in range(n))
        return cls(pts, tuple((pts[i], pts[i + 1]) for i in range(n - 1)))

    @classmethod
    def chain_of(cls, names: Iterable[str]) -> "TimeOrder":
        pts = tuple(names)
        return cls(pts, tuple((pts[i], pts[i + 1]) for i in range(len(pts) - 1)))

    # -- queries ------------------------------------------------------------

    def _require(self, p: str) -> None:
        if p not in self._succ:
            raise UnknownTimePoint(p)

    def _reaches(self, src: str, dst: str) -> bool:
        if src == dst:
            return True
        seen = {src}
        frontier = [src]
        while frontier:
            nxt = []
            for p in frontier:
                for q in self._succ[p]:
                    if q == dst:
                        return True
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return False

    def time_leq(self, a: str, b: str) -> Tristate:
        """Reflexive order test: YES iff a precedes-or-equals b."""
        self._require(a)
        self._require(b)
        if self._reaches(a, b):
            return Tristate.YES
        if self._reaches(b, a):
            return Tristate.NO
        return Tristate.INCOMPARABLE

    def expand_interval(self, start: str, end: str) -> frozenset[str]:
        """All points p with start <= p <= end, both ends included."""
        self._require(start)
        self._require(end)
        if not self._reaches(start, end):
            raise NotOrdered(f"{start!r} does not precede {end!r}")
        forward = self._closure(start, self._succ)
        backward = self._closure(end, self._pred)
        return frozenset(forward & backward)

    def _closure(self, src: str, adj) -> set[str]:
        seen = {src}
        frontier = [src]
        while frontier:
            nxt = []
            for p in frontier:
                for q in adj[p]:
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return seen

    def sort_key(self, point: str):
        return (self._pos[point], point)

    def sorted_points(self, pts: Iterable[str]) -> list[str]:
        return sorted(pts, key=self.sort_key)

    def index_points(self, index: TimeIndex) -> frozenset[str]:
        """Points covered by a time index (interval endpoints included)."""
        if isinstance(index, At):
            self._require(index.point)
            return frozenset((index.point,))
        return self.expand_interval(index.start, index.end)

    def as_chain(self) -> list[str]:
        """The points in order, provided the order is total; otherwise
        raises :class:`NotAChain`."""
        seq = sorted(self._pos, key=self._pos.get)
        for a, b in zip(seq, seq[1:]):
            if b not in self._succ[a] and not self._reaches(a, b):
                raise NotAChain("time order is not totally ordered")
        return seq


# ---------------------------------------------------------------------------
# shared time points of two invariant terms
# ---------------------------------------------------------------------------


def mentioned_points(term: terms.Term, order: TimeOrder) -> frozenset[str]:
    """Time points a term talks about, with intervals fully expanded."""
    out: set[str] = set()
    for _, atom in terms.iter_atoms(term):
        if isinstance(atom, terms.TimePoint):
            label = atom.label
            if isinstance(label, terms.EventRelative):
                raise UnresolvedEventRelative(
                    f"event-relative label {label!r}; resolve before querying time"
                )
            order._require(label.name)
            out.add(label.name)
        elif isinstance(atom, terms.TimeInterval):
            for label in (atom.start, atom.end):
                if isinstance(label, terms.EventRelative):
                    raise UnresolvedEventRelative(
                        f"event-relative label {label!r}; resolve before querying time"
                    )
            out |= order.expand_interval(atom.start.name, atom.end.name)
    return frozenset(out)


def shared_time_points(a: terms.Term, b: terms.Term, order: TimeOrder) -> frozenset[str]:
    """Overapproximated set of time points at which two invariants can
    interact: the intersection of their mentioned points."""
    return mentioned_points(a, order) & mentioned_points(b, order)
