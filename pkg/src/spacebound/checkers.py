"""Native verification backends and report assembly.

Collision freedom is checked per shared time point by exact region
intersection (boxes backend) or by hashed lattice point sets (points
backend); range coverage by lattice containment. Checks per time index
never depend on each other, so pairwise runs may fan out to a thread
pool; reports merge deterministically by sorted time index.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Optional, Sequence

from . import terms as T
from .errors import ClassificationMismatch, ModeMismatch, StepNonPositive
from .regions import Region, empty_region, region_contains, region_inflate, region_intersection, region_union
from .timeorder import TimeOrder
from .transforms import (
    Classification,
    Mode,
    TimedSpace,
    formula_dim,
    regions_by_owner,
    spatial_region,
)


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class CheckProperty(Enum):
    COLLISION_FREE = "collision-free"
    COVERAGE = "coverage"


@dataclass(frozen=True)
class Witness:
    """Evidence at one time point: an overlap region (collision) or an
    uncovered point (coverage). SMT-backed verdicts may carry neither
    when the solver reports satisfiability without a usable model."""

    time: Optional[str]
    components: tuple[str, str]
    region: Optional[Region] = None
    point: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class CheckStats:
    time_points_examined: int
    early_exit: bool
    wall_time_s: float
    backend: str
    vacuous: bool = False


@dataclass(frozen=True)
class CheckReport:
    property: CheckProperty
    components: tuple[str, str]
    verdict: Verdict
    witnesses: tuple[Witness, ...] = ()
    stats: CheckStats = field(
        default_factory=lambda: CheckStats(0, False, 0.0, "boxes")
    )


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _require(ts: TimedSpace, mode: Mode, classification: Classification) -> None:
    if ts.mode is not mode:
        raise ModeMismatch(
            f"{ts.component}: need a {mode.value}approximation, got {ts.mode.value}"
        )
    if ts.classification is not classification:
        raise ClassificationMismatch(
            f"{ts.component}: need {classification.value}, got {ts.classification.value}"
        )
    if ts.pending:
        raise ValueError(
            f"{ts.component}: unresolved event guards; run resolve_events first"
        )


def point_formulas(ts: TimedSpace, order: TimeOrder) -> dict[str, T.Term]:
    """Per-point formula table: interval entries contribute to every point
    they span; several entries covering one point conjoin."""
    out: dict[str, T.Term] = {}
    for ix, formula in ts.entries.items():
        for p in order.index_points(ix):
            out[p] = formula if p not in out else T.And(out[p], formula)
    return out


def spaces_dim(spaces: Sequence[TimedSpace]) -> int:
    for ts in spaces:
        for formula in ts.entries.values():
            d = formula_dim(formula)
            if d is not None:
                return d
    return 2


def _owner_pairs(ra: dict[str, Region], rb: dict[str, Region]):
    for oa in sorted(ra):
        for ob in sorted(rb):
            if oa != ob:
                yield ra[oa], rb[ob]


# ---------------------------------------------------------------------------
# collision checking
# ---------------------------------------------------------------------------


def check_collision_boxes(
    a: TimedSpace,
    b: TimedSpace,
    order: TimeOrder,
    margin: int = 0,
    early_exit: bool = False,
) -> CheckReport:
    """Exact collision check: at every shared time point, intersect the
    components' regions (the first inflated by the safety margin).
    Differently owned space only; self-owned overlap inside an aggregate
    is not a collision."""
    _require(a, Mode.OVER, Classification.OCCUPIED)
    _require(b, Mode.OVER, Classification.OCCUPIED)
    started = time.perf_counter()
    fa = point_formulas(a, order)
    fb = point_formulas(b, order)
    shared = order.sorted_points(set(fa) & set(fb))
    dim = spaces_dim((a, b))

    witnesses: list[Witness] = []
    examined = 0
    exited = False
    for p in shared:
        examined += 1
        ra = regions_by_owner(fa[p], a.component, Mode.OVER, dim)
        rb = regions_by_owner(fb[p], b.component, Mode.OVER, dim)
        overlap = empty_region(dim)
        for region_a, region_b in _owner_pairs(ra, rb):
            overlap = region_union(
                overlap, region_intersection(region_inflate(region_a, margin), region_b)
            )
        if not overlap.is_empty:
            witnesses.append(Witness(p, (a.component, b.component), region=overlap))
            if early_exit:
                exited = True
                break
    verdict = Verdict.FAIL if witnesses else Verdict.PASS
    stats = CheckStats(examined, exited, time.perf_counter() - started, "boxes")
    return CheckReport(
        CheckProperty.COLLISION_FREE, (a.component, b.component), verdict,
        tuple(witnesses), stats,
    )


def _owner_points(
    regions: dict[str, Region], step: int
) -> dict[str, set[tuple[int, ...]]]:
    out: dict[str, set[tuple[int, ...]]] = {}
    for owner, region in regions.items():
        pts: set[tuple[int, ...]] = set()
        for box in region.boxes:
            pts.update(box.lattice_points(step))
        out[owner] = pts
    return out


def check_collision_points(
    a: TimedSpace,
    b: TimedSpace,
    order: TimeOrder,
    step: int = 1,
    early_exit: bool = False,
) -> CheckReport:
    """Grid collision check: unfold each region to lattice points
    (multiples of ``step``, anchored at the origin), hash one side, probe
    with the other. At step 1 the verdict matches the boxes backend; at
    coarser steps a clean run is only Inconclusive since sub-grid
    overlaps can hide, while any hit is still a sound Fail."""
    if step < 1:
        raise StepNonPositive(f"step {step}")
    _require(a, Mode.OVER, Classification.OCCUPIED)
    _require(b, Mode.OVER, Classification.OCCUPIED)
    started = time.perf_counter()
    fa = point_formulas(a, order)
    fb = point_formulas(b, order)
    shared = order.sorted_points(set(fa) & set(fb))
    dim = spaces_dim((a, b))

    witnesses: list[Witness] = []
    examined = 0
    exited = False
    for p in shared:
        examined += 1
        ra = regions_by_owner(fa[p], a.component, Mode.OVER, dim)
        rb = regions_by_owner(fb[p], b.component, Mode.OVER, dim)
        hit = None
        if len(ra) == 1 and len(rb) == 1:
            (oa, region_a), = ra.items()
            (ob, region_b), = rb.items()
            if oa != ob:
                occupied: set[tuple[int, ...]] = set()
                for box in region_a.boxes:
                    occupied.update(box.lattice_points(step))
                for box in region_b.boxes:
                    for pt in box.lattice_points(step):
                        if pt in occupied:
                            hit = pt
                            break
                    if hit is not None:
                        break
        else:
            pts_a = _owner_points(ra, step)
            by_point: dict[tuple[int, ...], set[str]] = {}
            for owner, pts in pts_a.items():
                for pt in pts:
                    by_point.setdefault(pt, set()).add(owner)
            for ob, pts in sorted(_owner_points(rb, step).items()):
                for pt in pts:
                    owners = by_point.get(pt)
                    if owners and (owners - {ob}):
                        hit = pt
                        break
                if hit is not None:
                    break
        if hit is not None:
            witnesses.append(Witness(p, (a.component, b.component), point=hit))
            if early_exit:
                exited = True
                break
    if witnesses:
        verdict = Verdict.FAIL
    elif step > 1:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    stats = CheckStats(examined, exited, time.perf_counter() - started, "points")
    return CheckReport(
        CheckProperty.COLLISION_FREE, (a.component, b.component), verdict,
        tuple(witnesses), stats,
    )


def check_coverage(
    inner: TimedSpace,
    outer: TimedSpace,
    order: TimeOrder,
    early_exit: bool = False,
) -> CheckReport:
    """Range coverage: at every shared time point the (overapproximated)
    occupied space must lie inside the (underapproximated) range."""
    _require(inner, Mode.OVER, Classification.OCCUPIED)
    _require(outer, Mode.UNDER, Classification.COMM_RANGE)
    started = time.perf_counter()
    fi = point_formulas(inner, order)
    fo = point_formulas(outer, order)
    shared = order.sorted_points(set(fi) & set(fo))
    dim = spaces_dim((inner, outer))

    witnesses: list[Witness] = []
    examined = 0
    exited = False
    for p in shared:
        examined += 1
        region_in = spatial_region(fi[p], Mode.OVER, dim)
        region_out = spatial_region(fo[p], Mode.UNDER, dim)
        ok, uncovered = region_contains(region_out, region_in)
        if not ok:
            witnesses.append(
                Witness(p, (inner.component, outer.component), point=uncovered)
            )
            if early_exit:
                exited = True
                break
    verdict = Verdict.FAIL if witnesses else Verdict.PASS
    stats = CheckStats(examined, exited, time.perf_counter() - started, "boxes")
    return CheckReport(
        CheckProperty.COVERAGE, (inner.component, outer.component), verdict,
        tuple(witnesses), stats,
    )


# ---------------------------------------------------------------------------
# pairwise driving
# ---------------------------------------------------------------------------


def _vacuous(prop: CheckProperty, a: TimedSpace, b: TimedSpace, backend: str) -> CheckReport:
    stats = CheckStats(0, False, 0.0, backend, vacuous=True)
    return CheckReport(prop, (a.component, b.component), Verdict.PASS, (), stats)


def run_pairwise(
    components: Sequence[TimedSpace],
    order: TimeOrder,
    prop: CheckProperty,
    *,
    backend: str = "boxes",
    margin: int = 0,
    step: int = 1,
    early_exit: bool = False,
    jobs: Optional[int] = None,
) -> list[CheckReport]:
    """One report per component pair: every unordered pair for collision
    freedom, every (occupied, range) pair for coverage. Pairs that share
    no time point cannot interfere and report a vacuous Pass without
    running a backend."""
    if prop is CheckProperty.COLLISION_FREE:
        if len(components) < 2:
            raise ValueError("collision checking needs at least two components")
        pairs = list(combinations(components, 2))
    else:
        inners = [c for c in components if c.classification is Classification.OCCUPIED]
        outers = [c for c in components if c.classification is Classification.COMM_RANGE]
        pairs = list(product(inners, outers))

    covered = {
        ts.component: frozenset(point_formulas(ts, order)) for ts in components
    }

    def run_one(pair: tuple[TimedSpace, TimedSpace]) -> CheckReport:
        a, b = pair
        if not covered[a.component] & covered[b.component]:
            return _vacuous(prop, a, b, backend)
        if prop is CheckProperty.COVERAGE:
            return check_coverage(a, b, order, early_exit=early_exit)
        if backend == "points":
            return check_collision_points(a, b, order, step=step, early_exit=early_exit)
        if backend == "boxes":
            return check_collision_boxes(a, b, order, margin=margin, early_exit=early_exit)
        raise ValueError(f"unknown native backend {backend!r}")

    if jobs and jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_one, pairs))
    return [run_one(p) for p in pairs]


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["overall", "reports"],
    "properties": {
        "overall": {"enum": ["pass", "fail", "inconclusive"]},
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["property", "components", "verdict", "witnesses", "stats"],
                "properties": {
                    "property": {"enum": ["collision-free", "coverage"]},
                    "components": {
                        "type": "array", "items": {"type": "string"}, "minItems": 2,
                    },
                    "verdict": {"enum": ["pass", "fail", "inconclusive"]},
                    "witnesses": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["time", "components", "kind"],
                            "properties": {
                                "time": {"type": ["string", "null"]},
                                "components": {"type": "array", "items": {"type": "string"}},
                                "kind": {"enum": ["region", "point", "abstract"]},
                                "boxes": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": ["lo", "hi"],
                                        "properties": {
                                            "lo": {"type": "array", "items": {"type": "integer"}},
                                            "hi": {"type": "array", "items": {"type": "integer"}},
                                        },
                                    },
                                },
                                "point": {"type": "array", "items": {"type": "integer"}},
                            },
                        },
                    },
                    "stats": {
                        "type": "object",
                        "required": [
                            "time_points_examined", "early_exit", "wall_time_s",
                            "backend", "vacuous",
                        ],
                        "properties": {
                            "time_points_examined": {"type": "integer", "minimum": 0},
                            "early_exit": {"type": "boolean"},
                            "wall_time_s": {"type": "number", "minimum": 0},
                            "backend": {"type": "string"},
                            "vacuous": {"type": "boolean"},
                        },
                    },
                },
            },
        },
    },
}


def overall_verdict(reports: Sequence[CheckReport]) -> Verdict:
    if any(r.verdict is Verdict.FAIL for r in reports):
        return Verdict.FAIL
    if any(r.verdict is Verdict.INCONCLUSIVE for r in reports):
        return Verdict.INCONCLUSIVE
    return Verdict.PASS


def _witness_dict(w: Witness) -> dict:
    out: dict = {"time": w.time, "components": list(w.components)}
    if w.region is not None:
        out["kind"] = "region"
        out["boxes"] = [{"lo": list(b.lo), "hi": list(b.hi)} for b in w.region.boxes]
    elif w.point is not None:
        out["kind"] = "point"
        out["point"] = list(w.point)
    else:
        out["kind"] = "abstract"
    return out


def report_dict(report: CheckReport) -> dict:
    return {
        "property": report.property.value,
        "components": list(report.components),
        "verdict": report.verdict.value,
        "witnesses": [_witness_dict(w) for w in report.witnesses],
        "stats": {
            "time_points_examined": report.stats.time_points_examined,
            "early_exit": report.stats.early_exit,
            "wall_time_s": report.stats.wall_time_s,
            "backend": report.stats.backend,
            "vacuous": report.stats.vacuous,
        },
    }


def reports_json(reports: Sequence[CheckReport]) -> str:
    doc = {
        "overall": overall_verdict(reports).value if reports else "pass",
        "reports": [report_dict(r) for r in reports],
    }
    return json.dumps(doc, indent=2) + "\n"


def _witness_line(w: Witness) -> str:
    at = w.time if w.time is not None else "(some shared time)"
    if w.region is not None:
        boxes = ", ".join(f"{b.lo}..{b.hi}" for b in w.region.boxes)
        return f"  {at}: overlap {boxes}"
    if w.point is not None:
        return f"  {at}: point {tuple(w.point)}"
    return f"  {at}: witness reported by solver"


def reports_text(reports: Sequence[CheckReport]) -> str:
    lines: list[str] = []
    for r in reports:
        mark = r.verdict.value.upper()
        pair = " vs ".join(r.components)
        extra = " (vacuous: no shared time points)" if r.stats.vacuous else ""
        lines.append(
            f"[{mark}] {r.property.value} {pair}: "
            f"{len(r.witnesses)} witness(es), "
            f"{r.stats.time_points_examined} time point(s), "
            f"{r.stats.wall_time_s:.3f}s [{r.stats.backend}]{extra}"
        )
        lines.extend(_witness_line(w) for w in r.witnesses)
    if reports:
        lines.append(f"overall: {overall_verdict(reports).value}")
    return "\n".join(lines) + "\n"
