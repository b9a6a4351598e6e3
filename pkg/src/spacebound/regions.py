"""Exact region arithmetic on finite unions of closed integer boxes.

Boxes are closed on every face, so touching boxes overlap; difference and
containment are defined on the integer lattice, which keeps every test
exact. Regions canonicalize on construction: boxes contained in another
box are dropped and the list is sorted, so structural equality is usable
for regression tests (equality of point sets still goes through
membership where minimality matters).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Optional

from .errors import BoxUnordered, DimensionMismatch, NegativeMargin


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned integer box, any dimension >= 1."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(self.lo))
        object.__setattr__(self, "hi", tuple(self.hi))
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch(f"corner ranks differ: {self.lo} vs {self.hi}")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise BoxUnordered(f"box {self.lo}..{self.hi} has lo > hi")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def intersect(self, other: "Box") -> Optional["Box"]:
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(l > h for l, h in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def contains_box(self, other: "Box") -> bool:
        return all(a <= b for a, b in zip(self.lo, other.lo)) and all(
            a >= b for a, b in zip(self.hi, other.hi)
        )

    def contains_point(self, pt: tuple[int, ...]) -> bool:
        return all(l <= c <= h for l, c, h in zip(self.lo, pt, self.hi))

    def inflate(self, margin: int) -> "Box":
        return Box(tuple(c - margin for c in self.lo), tuple(c + margin for c in self.hi))

    def hull(self, other: "Box") -> "Box":
        return Box(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def lattice_count(self, step: int = 1) -> int:
        n = 1
        for l, h in zip(self.lo, self.hi):
            lo = -(-l // step) * step  # first multiple of step >= l
            hi = (h // step) * step
            if lo > hi:
                return 0
            n *= (hi - lo) // step + 1
        return n

    def lattice_points(self, step: int = 1) -> Iterator[tuple[int, ...]]:
        """Grid points inside the box whose coordinates are multiples of
        ``step`` (grid anchored at the origin)."""
        axes = []
        for l, h in zip(self.lo, self.hi):
            lo = -(-l // step) * step
            hi = (h // step) * step
            if lo > hi:
                return
            axes.append(range(lo, hi + 1, step))
        yield from product(*axes)


def box2d(x1: int, y1: int, x2: int, y2: int) -> Box:
    return Box((x1, y1), (x2, y2))


def box3d(x1: int, y1: int, z1: int, x2: int, y2: int, z2: int) -> Box:
    return Box((x1, y1, z1), (x2, y2, z2))


def _canonical(boxes: Iterable[Box]) -> tuple[Box, ...]:
    bs = list(boxes)
    keep: list[Box] = []
    for i, b in enumerate(bs):
        redundant = False
        for j, other in enumerate(bs):
            if i == j:
                continue
            if other.contains_box(b):
                # Of two equal boxes keep the earlier one.
                if b.contains_box(other) and i < j:
                    continue
                redundant = True
                break
        if not redundant:
            keep.append(b)
    keep.sort(key=lambda b: (b.lo, b.hi))
    return tuple(keep)


@dataclass(frozen=True)
class Region:
    """Finite union of closed integer boxes of one dimension."""

    dim: int
    boxes: tuple[Box, ...] = ()

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DimensionMismatch(f"unsupported dimension {self.dim}")
        for b in self.boxes:
            if b.dim != self.dim:
                raise DimensionMismatch(f"{b.dim}D box in {self.dim}D region")
        object.__setattr__(self, "boxes", _canonical(self.boxes))

    @property
    def is_empty(self) -> bool:
        return not self.boxes

    def contains_point(self, pt: tuple[int, ...]) -> bool:
        return any(b.contains_point(pt) for b in self.boxes)


def empty_region(dim: int) -> Region:
    return Region(dim, ())


def _require_same_dim(a: Region, b: Region) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim}D vs {b.dim}D")


def region_union(a: Region, b: Region) -> Region:
    _require_same_dim(a, b)
    return Region(a.dim, a.boxes + b.boxes)


def region_intersection(a: Region, b: Region) -> Region:
    _require_same_dim(a, b)
    out = []
    for p in a.boxes:
        for q in b.boxes:
            r = p.intersect(q)
            if r is not None:
                out.append(r)
    return Region(a.dim, tuple(out))


def _box_minus(a: Box, b: Box) -> list[Box]:
    """Fragments of ``a`` covering exactly the lattice points of a not in b.

    Per-axis splitting: at most two fragments per axis, then the remaining
    core (the part of a inside b) is discarded.
    """
    core = a.intersect(b)
    if core is None:
        return [a]
    frags: list[Box] = []
    lo = list(a.lo)
    hi = list(a.hi)
    for axis in range(a.dim):
        if lo[axis] <= core.lo[axis] - 1:
            f_lo, f_hi = list(lo), list(hi)
            f_hi[axis] = core.lo[axis] - 1
            frags.append(Box(tuple(f_lo), tuple(f_hi)))
        if core.hi[axis] + 1 <= hi[axis]:
            f_lo, f_hi = list(lo), list(hi)
            f_lo[axis] = core.hi[axis] + 1
            frags.append(Box(tuple(f_lo), tuple(f_hi)))
        lo[axis] = core.lo[axis]
        hi[axis] = core.hi[axis]
    return frags


def region_difference(a: Region, b: Region) -> Region:
    """Lattice difference: the result contains an integer point iff the
    point is in ``a`` and not in ``b``."""
    _require_same_dim(a, b)
    current = list(a.boxes)
    for sub in b.boxes:
        nxt: list[Box] = []
        for frag in current:
            nxt.extend(_box_minus(frag, sub))
        current = nxt
    return Region(a.dim, tuple(current))


def region_contains(outer: Region, inner: Region) -> tuple[bool, Optional[tuple[int, ...]]]:
    """Lattice containment of ``inner`` in ``outer``; on failure also
    returns one uncovered integer point as a witness."""
    _require_same_dim(outer, inner)
    left_over = region_difference(inner, outer)
    if left_over.is_empty:
        return True, None
    return False, left_over.boxes[0].lo


def region_inflate(r: Region, margin: int) -> Region:
    """Grow every box by ``margin`` on each face; overapproximates the
    Minkowski sum with an L-infinity ball of that radius."""
    if margin < 0:
        raise NegativeMargin(f"margin {margin}")
    if margin == 0:
        return r
    return Region(r.dim, tuple(b.inflate(margin) for b in r.boxes))


def bounding_box(r: Region) -> Optional[Box]:
    """Smallest single box containing the region; None when empty."""
    if r.is_empty:
        return None
    acc = r.boxes[0]
    for b in r.boxes[1:]:
        acc = acc.hull(b)
    return acc
