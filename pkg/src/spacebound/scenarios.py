"""Parameterized model generators for demos, regression tests and
benchmarks: a forklift moving over a topological path network, a lifting
arm sweeping up and down, a rotating robot sampled into boxes, and a
seeded random benchmark pair."""

from __future__ import annotations

import math
import random

from . import dsl
from . import terms as T
from .errors import ParameterOutOfRange
from .regions import Box
from .timeorder import At, TimeOrder
from .transforms import Classification, Mode, TimedSpace, timed_space_to_term


def gen_forklift_topological() -> tuple[T.Term, TimeOrder]:
    """Second forklift of the path-network model: four time points, node
    occupation only, no geometric interpretation yet."""
    term = T.And(
        T.And(
            T.And(
                T.Implies(T.TimePoint("pt1"), T.OccupyNode("n2")),
                T.Implies(
                    T.TimePoint("pt2"),
                    T.Or(T.OccupyNode("n3"), T.OccupyNode("n4")),
                ),
            ),
            T.Implies(
                T.TimePoint("pt3"),
                T.Or(T.OccupyNode("n6"), T.OccupyNode("n7")),
            ),
        ),
        T.Implies(T.TimePoint("pt4"), T.OccupyNode("n7")),
    )
    order = TimeOrder.chain_of(("pt1", "pt2", "pt3", "pt4"))
    return term, order


def synthetic_forklift_geometry() -> dict[str, Box]:
    """A made-up geometric interpretation of the n1..n7 path network for
    demos; the model itself carries no geometry table."""
    centers = {
        "n1": (0, 40),
        "n2": (40, 40),
        "n3": (80, 40),
        "n4": (120, 40),
        "n5": (0, 0),
        "n6": (80, 0),
        "n7": (120, 0),
    }
    return {
        node: Box((cx - 8, cy - 8), (cx + 8, cy + 8))
        for node, (cx, cy) in centers.items()
    }


def gen_lifting_arm(speed_milli: int, stoppointup: int) -> tuple[T.Term, TimeOrder]:
    """One arm of a grapple hook over 202 time stamps: it rises for the
    first 101 stamps and sinks for the rest, unless stopped early.

    ``speed_milli`` is the vertical speed in thousandths of a unit per
    stamp; positions truncate to integers step by step, so the peak stamp
    is visited twice (end of the rise, start of the descent). A
    ``stoppointup`` past the descent range means the arm never stops.
    """
    if speed_milli < 0:
        raise ParameterOutOfRange(f"speed_milli {speed_milli} < 0")
    if stoppointup < 0:
        raise ParameterOutOfRange(f"stoppointup {stoppointup} < 0")

    def up(i: int) -> int:
        return 200 + (i * speed_milli) // 1000

    peak = (100 * speed_milli) // 1000
    conjuncts: list[T.Term] = []
    for i in range(101):
        y = up(i)
        conjuncts.append(
            T.Implies(T.TimePoint(f"t{i}"), T.OccupySegment2D(300, y, 320, y, 3))
        )
    for i in range(101):
        if i < stoppointup:
            y = 200 + peak - (i * speed_milli) // 1000
        else:
            y = 200 + peak - (stoppointup * speed_milli) // 1000
        conjuncts.append(
            T.Implies(T.TimePoint(f"t{i + 101}"), T.OccupySegment2D(300, y, 320, y, 3))
        )
    return T.BigAnd(tuple(conjuncts)), TimeOrder.chain(202)


def gen_rotating_robot(
    cx: int, cy: int, radius: int, arm_len: int, tool_half: int, steps: int
) -> tuple[T.Term, TimeOrder]:
    """Circular tool movement sampled at ``steps`` angles.

    Per step the tool tip occupies a box of half-width ``tool_half``
    around its integer-rounded position; the body is covered by the
    static bounding box of its radius circle. Grounded boxes only.
    """
    if steps < 1:
        raise ParameterOutOfRange(f"steps {steps} < 1")
    if radius < 0 or arm_len < 0 or tool_half < 0:
        raise ParameterOutOfRange("radius, arm_len and tool_half must be >= 0")
    body = T.OccupyBox2D(cx - radius, cy - radius, cx + radius, cy + radius)
    reach = radius + arm_len
    conjuncts: list[T.Term] = []
    for k in range(steps):
        angle = 2.0 * math.pi * k / steps
        tx = cx + round(reach * math.cos(angle))
        ty = cy + round(reach * math.sin(angle))
        tool = T.OccupyBox2D(tx - tool_half, ty - tool_half, tx + tool_half, ty + tool_half)
        conjuncts.append(T.Implies(T.TimePoint(f"t{k}"), T.And(body, tool)))
    term = conjuncts[0] if len(conjuncts) == 1 else T.BigAnd(tuple(conjuncts))
    return term, TimeOrder.chain(steps)


def gen_benchmark(
    pair_count: int,
    timepoints: int,
    boxes_per_entry: int,
    seed: int,
    force_overlap: bool = False,
) -> list[TimedSpace]:
    """Seeded random timed spaces over a shared chain for scale tests.

    Components live in disjoint coordinate bands, so the default verdict
    is collision free; ``force_overlap`` plants one overlapping box pair
    between the first two components at the first time point. Output is
    a pure function of the arguments. The governing order is
    ``TimeOrder.chain(timepoints)``.
    """
    if pair_count < 1 or timepoints < 1 or boxes_per_entry < 1:
        raise ParameterOutOfRange("sizes must be positive")
    rng = random.Random(seed)
    tables: list[dict] = []
    for c in range(pair_count):
        base = c * 10_000
        entries = {}
        for t in range(timepoints):
            boxes = []
            for _ in range(boxes_per_entry):
                x1 = base + rng.randrange(0, 500)
                y1 = rng.randrange(0, 500)
                boxes.append(
                    T.OccupyBox2D(x1, y1, x1 + rng.randrange(0, 50), y1 + rng.randrange(0, 50))
                )
            entries[At(f"t{t}")] = boxes[0] if len(boxes) == 1 else T.BigAnd(tuple(boxes))
        tables.append(entries)
    if force_overlap and pair_count >= 2:
        planted = T.OccupyBox2D(5_000, 5_000, 5_040, 5_040)
        for table in tables[:2]:
            key = At("t0")
            table[key] = T.And(table[key], planted)
    return [
        TimedSpace(f"c{i}", Classification.OCCUPIED, Mode.OVER, entries)
        for i, entries in enumerate(tables)
    ]


# ---------------------------------------------------------------------------
# scenario documents for the CLI
# ---------------------------------------------------------------------------


def forklift_document() -> dsl.SourceDocument:
    term, order = gen_forklift_topological()
    geometry = synthetic_forklift_geometry()
    return dsl.SourceDocument(
        (
            dsl.Definition(dsl.TERM, "fl2", term),
            dsl.Definition(dsl.TIMEORDER, "order", order),
            dsl.Definition(dsl.GEOMETRY, "synthetic-demo-geometry", geometry),
        )
    )


def lifting_document(speed_milli: int, stoppointup: int) -> dsl.SourceDocument:
    term, order = gen_lifting_arm(speed_milli, stoppointup)
    return dsl.SourceDocument(
        (
            dsl.Definition(dsl.TERM, "arm", term),
            dsl.Definition(dsl.TIMEORDER, "order", order),
        )
    )


def rotating_document(
    cx: int, cy: int, radius: int, arm_len: int, tool_half: int, steps: int
) -> dsl.SourceDocument:
    term, order = gen_rotating_robot(cx, cy, radius, arm_len, tool_half, steps)
    return dsl.SourceDocument(
        (
            dsl.Definition(dsl.TERM, "robot", term),
            dsl.Definition(dsl.TIMEORDER, "order", order),
        )
    )


def benchmark_document(
    pair_count: int, timepoints: int, boxes_per_entry: int, seed: int,
    force_overlap: bool = False,
) -> dsl.SourceDocument:
    spaces = gen_benchmark(pair_count, timepoints, boxes_per_entry, seed, force_overlap)
    order = TimeOrder.chain(timepoints)
    defs = [
        dsl.Definition(dsl.TERM, ts.component, timed_space_to_term(ts, order))
        for ts in spaces
    ]
    defs.append(dsl.Definition(dsl.TIMEORDER, "order", order))
    return dsl.SourceDocument(tuple(defs))
