"""SMT-LIB2 verification condition emission and external solver driving.

Collision at a time point is encoded as satisfiability of the overlap
formula (a model is a shared coordinate), so sat maps to Fail. One
condition per shared time point keeps witnesses precise; a single
monolithic disjunction over all shared points amortizes solver startup.
Emission is deterministic: identical inputs give byte-identical scripts.
"""

from __future__ import annotations

import shlex
import subprocess
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .checkers import (
    CheckProperty,
    CheckReport,
    CheckStats,
    Verdict,
    Witness,
    point_formulas,
    spaces_dim,
)
from .errors import ModeMismatch
from .regions import Region
from .timeorder import TimeOrder
from .transforms import Classification, Mode, TimedSpace, regions_by_owner

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class SmtDocument:
    """One SMT-LIB2 script plus the metadata needed to interpret its
    answer: sat means the covered time indices admit an overlap."""

    text: str
    time_indices: tuple[str, ...]
    components: tuple[str, str]
    sat_means_collision: bool = True


class SolverStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    ERROR = "error"


@dataclass(frozen=True)
class SolverResult:
    status: SolverStatus
    detail: str = ""


def _int_lit(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _box_formula(box, dim: int) -> str:
    parts = []
    for axis in range(dim):
        v = _AXES[axis]
        parts.append(f"(<= {_int_lit(box.lo[axis])} {v})")
        parts.append(f"(<= {v} {_int_lit(box.hi[axis])})")
    return "(and " + " ".join(parts) + ")"


def _region_formula(region: Region) -> str:
    if region.is_empty:
        return "false"
    clauses = [_box_formula(b, region.dim) for b in region.boxes]
    if len(clauses) == 1:
        return clauses[0]
    return "(or " + " ".join(clauses) + ")"


def _or(clauses: list[str]) -> str:
    clauses = [c for c in clauses if c != "false"]
    if not clauses:
        return "false"
    if len(clauses) == 1:
        return clauses[0]
    return "(or " + " ".join(clauses) + ")"


def _overlap_at(a: TimedSpace, b: TimedSpace, fa, fb, point: str, dim: int) -> str:
    ra = regions_by_owner(fa[point], a.component, Mode.OVER, dim)
    rb = regions_by_owner(fb[point], b.component, Mode.OVER, dim)
    pair_clauses = []
    for oa in sorted(ra):
        for ob in sorted(rb):
            if oa == ob:
                continue
            left = _region_formula(ra[oa])
            right = _region_formula(rb[ob])
            if left == "false" or right == "false":
                continue
            pair_clauses.append(f"(and {left} {right})")
    return _or(pair_clauses)


def _script(assertion: str, dim: int, comment: str) -> str:
    lines = [f"; {comment}", "(set-logic QF_LIA)"]
    lines += [f"(declare-const {_AXES[axis]} Int)" for axis in range(dim)]
    lines.append(f"(assert {assertion})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _prepare(a: TimedSpace, b: TimedSpace, order: TimeOrder):
    for ts in (a, b):
        if ts.mode is not Mode.OVER or ts.classification is not Classification.OCCUPIED:
            raise ModeMismatch(
                f"{ts.component}: SMT collision conditions need occupied overapproximations"
            )
    fa = point_formulas(a, order)
    fb = point_formulas(b, order)
    shared = order.sorted_points(set(fa) & set(fb))
    dim = spaces_dim((a, b))
    return fa, fb, shared, dim


def emit_per_timepoint(
    a: TimedSpace, b: TimedSpace, order: TimeOrder
) -> list[SmtDocument]:
    """One verification condition per shared time point."""
    fa, fb, shared, dim = _prepare(a, b, order)
    docs = []
    for p in shared:
        assertion = _overlap_at(a, b, fa, fb, p, dim)
        comment = f"overlap of {a.component} and {b.component} at {p} (sat = collision)"
        docs.append(
            SmtDocument(_script(assertion, dim, comment), (p,), (a.component, b.component))
        )
    return docs


def emit_monolithic(a: TimedSpace, b: TimedSpace, order: TimeOrder) -> SmtDocument:
    """A single verification condition disjoining all shared time points;
    unsatisfiable iff the pair never overlaps."""
    fa, fb, shared, dim = _prepare(a, b, order)
    assertion = _or([_overlap_at(a, b, fa, fb, p, dim) for p in shared])
    comment = (
        f"overlap of {a.component} and {b.component} at any of "
        f"{len(shared)} shared time point(s) (sat = collision)"
    )
    return SmtDocument(_script(assertion, dim, comment), tuple(shared), (a.component, b.component))


# ---------------------------------------------------------------------------
# external solver
# ---------------------------------------------------------------------------


def run_solver(doc: SmtDocument, solver_command: str, timeout_s: float = 60.0) -> SolverResult:
    """Feed the script to an external solver process on stdin and parse
    the first result token. Never raises: solver trouble becomes an ERROR
    result; exceeding the timeout (or a non-positive timeout) is UNKNOWN.
    """
    if timeout_s <= 0:
        return SolverResult(SolverStatus.UNKNOWN, "timeout budget exhausted")
    try:
        argv = shlex.split(solver_command)
        proc = subprocess.run(
            argv,
            input=doc.text,
            capture_output=True,
            text=True,
            timeout=timeout_s,
        )
    except subprocess.TimeoutExpired:
        return SolverResult(SolverStatus.UNKNOWN, f"timeout after {timeout_s}s")
    except (OSError, ValueError) as exc:
        return SolverResult(SolverStatus.ERROR, f"cannot run solver: {exc}")
    for line in proc.stdout.splitlines():
        token = line.strip()
        if token == "sat":
            return SolverResult(SolverStatus.SAT)
        if token == "unsat":
            return SolverResult(SolverStatus.UNSAT)
        if token == "unknown":
            return SolverResult(SolverStatus.UNKNOWN, "solver answered unknown")
    detail = (proc.stderr or proc.stdout).strip()[:500]
    return SolverResult(
        SolverStatus.ERROR, f"no result token (exit {proc.returncode}): {detail}"
    )


def check_collision_smt(
    a: TimedSpace,
    b: TimedSpace,
    order: TimeOrder,
    *,
    monolithic: bool = False,
    solver_command: Optional[str] = None,
    timeout_s: float = 60.0,
    jobs: Optional[int] = None,
) -> tuple[CheckReport, list[SmtDocument]]:
    """Check a pair through the SMT backend.

    Without a solver command the documents are still produced and the
    verdict is Inconclusive. Solver runs are independent per document and
    may be bounded-parallel via ``jobs``.
    """
    started = time.perf_counter()
    docs = (
        [emit_monolithic(a, b, order)]
        if monolithic
        else emit_per_timepoint(a, b, order)
    )
    examined = sum(len(d.time_indices) for d in docs) if not monolithic else len(
        docs[0].time_indices
    )
    components = (a.component, b.component)

    if examined == 0:
        stats = CheckStats(
            0, False, time.perf_counter() - started, _backend_name(monolithic), vacuous=True
        )
        return (
            CheckReport(CheckProperty.COLLISION_FREE, components, Verdict.PASS, (), stats),
            docs,
        )

    if solver_command is None:
        stats = CheckStats(examined, False, time.perf_counter() - started, _backend_name(monolithic))
        return (
            CheckReport(CheckProperty.COLLISION_FREE, components, Verdict.INCONCLUSIVE, (), stats),
            docs,
        )

    def solve(doc: SmtDocument) -> SolverResult:
        return run_solver(doc, solver_command, timeout_s)

    if jobs and jobs > 1 and len(docs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(solve, docs))
    else:
        results = [solve(d) for d in docs]

    witnesses = []
    inconclusive = False
    for doc, result in zip(docs, results):
        if result.status is SolverStatus.SAT:
            at = doc.time_indices[0] if len(doc.time_indices) == 1 else None
            witnesses.append(Witness(at, components))
        elif result.status is not SolverStatus.UNSAT:
            inconclusive = True
    if witnesses:
        verdict = Verdict.FAIL
    elif inconclusive:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    stats = CheckStats(examined, False, time.perf_counter() - started, _backend_name(monolithic))
    return (
        CheckReport(CheckProperty.COLLISION_FREE, components, verdict, tuple(witnesses), stats),
        docs,
    )


def _backend_name(monolithic: bool) -> str:
    return "smt-mono" if monolithic else "smt-per-t"


def document_filename(doc: SmtDocument, monolithic: bool) -> str:
    pair = "-".join(doc.components)
    if monolithic or len(doc.time_indices) != 1:
        return f"vc_{pair}_all.smt2"
    return f"vc_{pair}_{doc.time_indices[0]}.smt2"
