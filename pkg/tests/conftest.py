"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import random

from spacebound import terms as T
from spacebound.regions import Box, Region
from spacebound.timeorder import At, TimeOrder
from spacebound.transforms import Classification, Mode, TimedSpace

# ---------------------------------------------------------------------------
# lattice oracles (kept independent of the region implementation)
# ---------------------------------------------------------------------------


def window_of(*regions: Region, pad: int = 1):
    """Iterate lattice points of the joint bounding window of the given
    regions, padded so outside behavior is sampled too."""
    boxes = [b for r in regions for b in r.boxes]
    if not boxes:
        return []
    dim = boxes[0].dim
    lo = [min(b.lo[a] for b in boxes) - pad for a in range(dim)]
    hi = [max(b.hi[a] for b in boxes) + pad for a in range(dim)]

    def walk(axis):
        if axis == dim:
            yield ()
            return
        for c in range(lo[axis], hi[axis] + 1):
            for rest in walk(axis + 1):
                yield (c,) + rest

    return list(walk(0))


def member(region: Region, pt) -> bool:
    """Direct per-box membership, bypassing region operations."""
    return any(
        all(l <= c <= h for l, c, h in zip(b.lo, pt, b.hi)) for b in region.boxes
    )


def region_equal(a: Region, b: Region) -> bool:
    """Point-set equality over the joint window."""
    if a.dim != b.dim:
        return False
    for pt in window_of(a, b):
        if member(a, pt) != member(b, pt):
            return False
    return not window_of(a, b) or True


# ---------------------------------------------------------------------------
# random data
# ---------------------------------------------------------------------------


def random_box(rng: random.Random, span: int = 20, side: int = 12) -> Box:
    x1 = rng.randint(-span, span - 1)
    y1 = rng.randint(-span, span - 1)
    return Box(
        (x1, y1),
        (min(span, x1 + rng.randint(0, side)), min(span, y1 + rng.randint(0, side))),
    )


def random_region(rng: random.Random, max_boxes: int = 6) -> Region:
    return Region(2, tuple(random_box(rng) for _ in range(rng.randint(0, max_boxes))))


def random_symint(rng: random.Random, depth: int, variables) -> T.SymInt:
    if depth == 0 or rng.random() < 0.35:
        if variables and rng.random() < 0.5:
            return T.Var(rng.choice(variables))
        return T.Const(rng.randint(-50, 50))
    op = rng.choice((T.Add, T.Sub, T.Mul))
    return op(
        random_symint(rng, depth - 1, variables),
        random_symint(rng, depth - 1, variables),
    )


def random_spatial_formula(rng: random.Random, depth: int = 3) -> T.Term:
    """Grounded, geometrized spatial formula (atoms and and/or only)."""
    if depth == 0 or rng.random() < 0.4:
        kind = rng.random()
        if kind < 0.6:
            b = random_box(rng)
            return T.OccupyBox2D(b.lo[0], b.lo[1], b.hi[0], b.hi[1])
        if kind < 0.8:
            x, y = rng.randint(-20, 20), rng.randint(-20, 20)
            return T.OccupyPoint2D(x, y)
        return T.OccupySegment2D(
            rng.randint(-20, 20), rng.randint(-20, 20),
            rng.randint(-20, 20), rng.randint(-20, 20),
            rng.randint(0, 4),
        )
    roll = rng.random()
    if roll < 0.35:
        return T.And(random_spatial_formula(rng, depth - 1), random_spatial_formula(rng, depth - 1))
    if roll < 0.7:
        return T.Or(random_spatial_formula(rng, depth - 1), random_spatial_formula(rng, depth - 1))
    n = rng.randint(1, 3)
    kids = tuple(random_spatial_formula(rng, depth - 1) for _ in range(n))
    return T.BigAnd(kids) if roll < 0.85 else T.BigOr(kids)


def random_timed_space(
    rng: random.Random,
    order: TimeOrder,
    component: str,
    max_boxes: int = 4,
    point_share: float = 0.8,
) -> TimedSpace:
    entries = {}
    for p in order.points:
        if rng.random() > point_share:
            continue
        boxes = [random_box(rng) for _ in range(rng.randint(1, max_boxes))]
        atoms = tuple(
            T.OccupyBox2D(b.lo[0], b.lo[1], b.hi[0], b.hi[1]) for b in boxes
        )
        entries[At(p)] = atoms[0] if len(atoms) == 1 else T.BigAnd(atoms)
    return TimedSpace(component, Classification.OCCUPIED, Mode.OVER, entries)


def random_dag(rng: random.Random, n: int, edge_prob: float = 0.15) -> TimeOrder:
    """Random DAG by orienting edges along a random point ordering."""
    names = [f"p{i}" for i in range(n)]
    rng.shuffle(names)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((names[i], names[j]))
    return TimeOrder(tuple(names), tuple(edges))


# ---------------------------------------------------------------------------
# random valid terms and documents (serialization coverage)
# ---------------------------------------------------------------------------

_NAMES = ("pt1", "pt2", "alpha", "n3", "fl2", "go-left", "e")


def random_label(rng: random.Random):
    if rng.random() < 0.75:
        return T.Absolute(rng.choice(_NAMES))
    return T.EventRelative(rng.choice(_NAMES), rng.randint(-3, 5))


def random_atom(rng: random.Random) -> T.Atom:
    roll = rng.randrange(12)
    if roll == 0:
        return T.TimePoint(random_label(rng))
    if roll == 1:
        return T.TimeInterval(random_label(rng), random_label(rng))
    if roll == 2:
        return T.Event(rng.choice(_NAMES))
    if roll == 3:
        return T.OccupyPoint2D(rng.randint(-99, 99), rng.randint(-99, 99))
    if roll == 4:
        x1, y1 = rng.randint(-99, 0), rng.randint(-99, 0)
        return T.OccupyBox2D(x1, y1, x1 + rng.randint(0, 99), y1 + rng.randint(0, 99))
    if roll == 5:
        return T.OccupySegment2D(
            rng.randint(-99, 99), rng.randint(-99, 99),
            rng.randint(-99, 99), rng.randint(-99, 99), rng.randint(0, 9),
        )
    if roll == 6:
        return T.OccupyPoint3D(*(rng.randint(-99, 99) for _ in range(3)))
    if roll == 7:
        c = [rng.randint(-99, 0) for _ in range(3)]
        return T.OccupyBox3D(c[0], c[1], c[2], *(v + rng.randint(0, 99) for v in c))
    if roll == 8:
        return T.OccupySegment3D(
            *(rng.randint(-99, 99) for _ in range(6)), rng.randint(0, 9)
        )
    if roll == 9:
        return T.OccupyNode(rng.choice(_NAMES))
    if roll == 10:
        inner = random_atom(rng)
        while not (T.is_spatial_atom(inner) and not isinstance(inner, T.Owned)):
            inner = random_atom(rng)
        return T.Owned(rng.choice(_NAMES), inner)
    return T.OccupyBoxSym(
        random_symint(rng, 2, ["x", "y"]),
        random_symint(rng, 2, ["x", "y"]),
        random_symint(rng, 2, ["x", "y"]),
        random_symint(rng, 2, ["x", "y"]),
    )


def random_term(rng: random.Random, depth: int = 4) -> T.Term:
    if depth == 0 or rng.random() < 0.35:
        roll = rng.random()
        if roll < 0.08:
            return T.TRUE
        if roll < 0.16:
            return T.FALSE
        return random_atom(rng)
    roll = rng.randrange(6)
    if roll == 0:
        return T.And(random_term(rng, depth - 1), random_term(rng, depth - 1))
    if roll == 1:
        return T.Or(random_term(rng, depth - 1), random_term(rng, depth - 1))
    if roll == 2:
        return T.Not(random_term(rng, depth - 1))
    if roll == 3:
        return T.Implies(random_term(rng, depth - 1), random_term(rng, depth - 1))
    kids = tuple(random_term(rng, depth - 1) for _ in range(rng.randint(1, 4)))
    return T.BigAnd(kids) if roll == 4 else T.BigOr(kids)


def random_document(rng: random.Random):
    from spacebound import dsl
    from spacebound.regions import Box
    from spacebound.transforms import EventTrace

    defs = []
    for i in range(rng.randint(1, 4)):
        defs.append(dsl.Definition(dsl.TERM, f"term{i}", random_term(rng, rng.randint(1, 8))))
    if rng.random() < 0.8:
        defs.append(dsl.Definition(dsl.TIMEORDER, "order", random_dag(rng, rng.randint(1, 8), 0.3)))
    if rng.random() < 0.5:
        events = {}
        for name in rng.sample(_NAMES, rng.randint(0, 3)):
            events[name] = frozenset(rng.sample(_NAMES, rng.randint(0, 3)))
        defs.append(dsl.Definition(dsl.TRACE, "trace", EventTrace(events)))
    if rng.random() < 0.5:
        table = {}
        for name in rng.sample(_NAMES, rng.randint(0, 4)):
            x1, y1 = rng.randint(-99, 0), rng.randint(-99, 0)
            table[name] = Box((x1, y1), (x1 + rng.randint(0, 50), y1 + rng.randint(0, 50)))
        defs.append(dsl.Definition(dsl.GEOMETRY, "geom", table))
    unit = rng.choice((None, "0.1m", "mm", "cell"))
    return dsl.SourceDocument(tuple(defs), unit=unit)
