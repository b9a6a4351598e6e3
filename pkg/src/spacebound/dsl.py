"""Textual serialization of terms, time orders, traces and geometries.

Documents are s-expressions in ``.besd`` files (UTF-8, LF line endings on
output): a header recording format version and the physical unit one
coordinate step stands for, followed by named definitions. Parsing and
printing round-trip: ``parse(print(doc)) == doc``, and printing is
idempotent formatting.

Grammar (EBNF, ``;`` starts a line comment)::

    document ::= header? definition*
    header   ::= "(besd" INT [ "(unit" SYMBOL ")" ] ")"
    definition ::=
        "(def-term" NAME term ")"
      | "(def-timeorder" NAME "(points" NAME* ")" "(edges" ("(" NAME NAME ")")* ")" ")"
      | "(def-trace" NAME ("(occurs" NAME NAME* ")")* ")"
      | "(def-geometry" NAME ("(" NAME INT INT INT INT ")")* ")"
    term ::= "(and" term term ")" | "(or" term term ")" | "(not" term ")"
      | "(implies" term term ")" | "(bigand" term+ ")" | "(bigor" term+ ")"
      | "(true)" | "(false)" | atom
    atom ::= "(time" label ")" | "(interval" label label ")" | "(event" NAME ")"
      | "(box2d" INT INT INT INT ")" | "(point2d" INT INT ")"
      | "(seg2d" INT INT INT INT INT ")" | "(box3d" INT{6} ")"
      | "(point3d" INT{3} ")" | "(seg3d" INT{7} ")" | "(node" NAME ")"
      | "(own" NAME atom ")" | "(boxsym" sym sym sym sym ")"
    label ::= NAME | "(after" NAME INT ")"
    sym ::= INT | NAME | "(+" sym sym ")" | "(-" sym sym ")" | "(*" sym sym ")"
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import terms as T
from .errors import DslSyntaxError, DuplicateName
from .regions import Box
from .timeorder import TimeOrder
from .transforms import EventTrace

SUPPORTED_VERSION = 1
_WRAP_COLUMN = 96

# ---------------------------------------------------------------------------
# raw s-expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SAtom:
    value: Union[int, str]
    line: int
    col: int

    @property
    def is_int(self) -> bool:
        return isinstance(self.value, int)


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int


SNode = Union[SAtom, SList]

_DELIMS = set("(); \t\r\n")


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, line, col
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in _DELIMS:
                i += 1
                col += 1
            yield text[start:i], line, start_col
    yield None, line, col  # end marker


def read_sexprs(text: str) -> list[SNode]:
    """Read every top-level s-expression; raises on imbalance. Also used
    to sanity-check emitted SMT scripts."""
    stack: list[list] = []
    positions: list[tuple[int, int]] = []
    top: list[SNode] = []
    for token, line, col in _tokenize(text):
        if token is None:
            if stack:
                raise DslSyntaxError(positions[-1][0], positions[-1][1], "')'")
            return top
        if token == "(":
            stack.append([])
            positions.append((line, col))
        elif token == ")":
            if not stack:
                raise DslSyntaxError(line, col, "an expression, not ')'")
            items = stack.pop()
            where = positions.pop()
            node = SList(tuple(items), where[0], where[1])
            (stack[-1] if stack else top).append(node)
        else:
            try:
                value: Union[int, str] = int(token)
            except ValueError:
                value = token
            node = SAtom(value, line, col)
            (stack[-1] if stack else top).append(node)
    return top


# ---------------------------------------------------------------------------
# shaping: s-expressions to domain values
# ---------------------------------------------------------------------------


def _fail(node: SNode, expected: str):
    raise DslSyntaxError(node.line, node.col, expected)


def _head(node: SNode) -> Optional[str]:
    if isinstance(node, SList) and node.items and isinstance(node.items[0], SAtom):
        head = node.items[0].value
        if isinstance(head, str):
            return head
    return None


def _name(node: SNode, what: str) -> str:
    if isinstance(node, SAtom) and isinstance(node.value, str):
        return node.value
    _fail(node, what)


def _int(node: SNode, what: str) -> int:
    if isinstance(node, SAtom) and node.is_int:
        return node.value
    _fail(node, what)


def _arity(node: SList, n: int, what: str) -> tuple:
    args = node.items[1:]
    if len(args) != n:
        _fail(node, f"{what} with {n} argument(s)")
    return args


def _label(node: SNode) -> T.TimeLabel:
    if isinstance(node, SAtom) and isinstance(node.value, str):
        return T.Absolute(node.value)
    if _head(node) == "after":
        event, offset = _arity(node, 2, "(after EVENT OFFSET)")
        return T.EventRelative(_name(event, "an event name"), _int(offset, "an offset"))
    _fail(node, "a time point name or (after EVENT OFFSET)")


def _symint(node: SNode) -> T.SymInt:
    if isinstance(node, SAtom):
        if node.is_int:
            return T.Const(node.value)
        return T.Var(node.value)
    ops = {"+": T.Add, "-": T.Sub, "*": T.Mul}
    head = _head(node)
    if head in ops:
        a, b = _arity(node, 2, f"({head} SYM SYM)")
        return ops[head](_symint(a), _symint(b))
    _fail(node, "an integer, a variable or (+|-|* SYM SYM)")


def _atom(node: SNode) -> T.Atom:
    head = _head(node)
    if head == "time":
        (lab,) = _arity(node, 1, "(time LABEL)")
        return T.TimePoint(_label(lab))
    if head == "interval":
        a, b = _arity(node, 2, "(interval LABEL LABEL)")
        return T.TimeInterval(_label(a), _label(b))
    if head == "event":
        (name,) = _arity(node, 1, "(event NAME)")
        return T.Event(_name(name, "an event name"))
    if head == "point2d":
        return T.OccupyPoint2D(*(_int(a, "a coordinate") for a in _arity(node, 2, "(point2d X Y)")))
    if head == "box2d":
        return T.OccupyBox2D(*(_int(a, "a coordinate") for a in _arity(node, 4, "(box2d X1 Y1 X2 Y2)")))
    if head == "seg2d":
        return T.OccupySegment2D(
            *(_int(a, "a coordinate") for a in _arity(node, 5, "(seg2d X1 Y1 X2 Y2 RADIUS)"))
        )
    if head == "point3d":
        return T.OccupyPoint3D(*(_int(a, "a coordinate") for a in _arity(node, 3, "(point3d X Y Z)")))
    if head == "box3d":
        return T.OccupyBox3D(
            *(_int(a, "a coordinate") for a in _arity(node, 6, "(box3d X1 Y1 Z1 X2 Y2 Z2)"))
        )
    if head == "seg3d":
        return T.OccupySegment3D(
            *(_int(a, "a coordinate") for a in _arity(node, 7, "(seg3d X1 Y1 Z1 X2 Y2 Z2 RADIUS)"))
        )
    if head == "node":
        (name,) = _arity(node, 1, "(node NAME)")
        return T.OccupyNode(_name(name, "a node name"))
    if head == "own":
        owner, inner = _arity(node, 2, "(own OWNER ATOM)")
        return T.Owned(_name(owner, "an owner name"), _atom(inner))
    if head == "boxsym":
        return T.OccupyBoxSym(*(_symint(a) for a in _arity(node, 4, "(boxsym SYM SYM SYM SYM)")))
    _fail(node, "an atom")


_ATOM_HEADS = {
    "time", "interval", "event", "point2d", "box2d", "seg2d",
    "point3d", "box3d", "seg3d", "node", "own", "boxsym",
}


def term_from_sexpr(node: SNode) -> T.Term:
    head = _head(node)
    if head == "and":
        a, b = _arity(node, 2, "(and TERM TERM)")
        return T.And(term_from_sexpr(a), term_from_sexpr(b))
    if head == "or":
        a, b = _arity(node, 2, "(or TERM TERM)")
        return T.Or(term_from_sexpr(a), term_from_sexpr(b))
    if head == "not":
        (a,) = _arity(node, 1, "(not TERM)")
        return T.Not(term_from_sexpr(a))
    if head == "implies":
        a, b = _arity(node, 2, "(implies TERM TERM)")
        return T.Implies(term_from_sexpr(a), term_from_sexpr(b))
    if head in ("bigand", "bigor"):
        args = node.items[1:]
        if not args:
            _fail(node, f"({head} TERM+) with at least one term")
        kids = tuple(term_from_sexpr(a) for a in args)
        return T.BigAnd(kids) if head == "bigand" else T.BigOr(kids)
    if head == "true":
        _arity(node, 0, "(true)")
        return T.TRUE
    if head == "false":
        _arity(node, 0, "(false)")
        return T.FALSE
    if head in _ATOM_HEADS:
        return _atom(node)
    _fail(node, "a term")


def _timeorder_from_sexpr(args: tuple, node: SList) -> TimeOrder:
    points: tuple[str, ...] = ()
    edges: list[tuple[str, str]] = []
    saw_points = False
    for part in args:
        head = _head(part)
        if head == "points":
            points = tuple(_name(p, "a time point name") for p in part.items[1:])
            saw_points = True
        elif head == "edges":
            for e in part.items[1:]:
                if not isinstance(e, SList) or len(e.items) != 2:
                    _fail(e, "(FROM TO)")
                edges.append(
                    (_name(e.items[0], "a time point name"), _name(e.items[1], "a time point name"))
                )
        else:
            _fail(part, "(points ...) or (edges ...)")
    if not saw_points:
        _fail(node, "(points ...)")
    return TimeOrder(points, tuple(edges))


def _trace_from_sexpr(args: tuple) -> EventTrace:
    occurrences: dict[str, frozenset[str]] = {}
    for part in args:
        if _head(part) != "occurs" or len(part.items) < 2:
            _fail(part, "(occurs EVENT POINT*)")
        event = _name(part.items[1], "an event name")
        pts = frozenset(_name(p, "a time point name") for p in part.items[2:])
        if event in occurrences:
            _fail(part, f"a single (occurs {event} ...) clause")
        occurrences[event] = pts
    return EventTrace(occurrences)


def _geometry_from_sexpr(args: tuple) -> dict[str, Box]:
    table: dict[str, Box] = {}
    for part in args:
        if not isinstance(part, SList) or len(part.items) != 5:
            _fail(part, "(NODE X1 Y1 X2 Y2)")
        name = _name(part.items[0], "a node name")
        coords = [_int(c, "a coordinate") for c in part.items[1:]]
        if name in table:
            _fail(part, f"a single box for node {name}")
        table[name] = Box((coords[0], coords[1]), (coords[2], coords[3]))
    return table


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------

TERM = "term"
TIMEORDER = "timeorder"
TRACE = "trace"
GEOMETRY = "geometry"

_DEF_KINDS = {
    "def-term": TERM,
    "def-timeorder": TIMEORDER,
    "def-trace": TRACE,
    "def-geometry": GEOMETRY,
}


@dataclass(frozen=True)
class Definition:
    kind: str
    name: str
    value: object


@dataclass(frozen=True)
class SourceDocument:
    definitions: tuple[Definition, ...] = ()
    version: int = SUPPORTED_VERSION
    unit: Optional[str] = None

    def of_kind(self, kind: str) -> dict[str, object]:
        return {d.name: d.value for d in self.definitions if d.kind == kind}

    @property
    def terms(self) -> dict[str, T.Term]:
        return self.of_kind(TERM)  # type: ignore[return-value]

    @property
    def timeorders(self) -> dict[str, TimeOrder]:
        return self.of_kind(TIMEORDER)  # type: ignore[return-value]

    @property
    def traces(self) -> dict[str, EventTrace]:
        return self.of_kind(TRACE)  # type: ignore[return-value]

    @property
    def geometries(self) -> dict[str, dict[str, Box]]:
        return self.of_kind(GEOMETRY)  # type: ignore[return-value]


def parse(text: str) -> SourceDocument:
    """Parse a document; syntax errors carry line and column."""
    nodes = read_sexprs(text)
    version = SUPPORTED_VERSION
    unit: Optional[str] = None
    idx = 0
    if nodes and _head(nodes[0]) == "besd":
        header = nodes[0]
        parts = header.items[1:]
        if not parts:
            _fail(header, "(besd VERSION ...)")
        version = _int(parts[0], "a format version")
        if version != SUPPORTED_VERSION:
            _fail(parts[0], f"supported format version {SUPPORTED_VERSION}")
        for extra in parts[1:]:
            if _head(extra) == "unit":
                (u,) = _arity(extra, 1, "(unit NAME)")
                unit = _name(u, "a unit name")
            else:
                _fail(extra, "(unit NAME)")
        idx = 1

    defs: list[Definition] = []
    seen: set[str] = set()
    for node in nodes[idx:]:
        head = _head(node)
        if head not in _DEF_KINDS:
            _fail(node, "a definition (def-term | def-timeorder | def-trace | def-geometry)")
        if len(node.items) < 2:
            _fail(node, f"({head} NAME ...)")
        name = _name(node.items[1], "a definition name")
        if name in seen:
            raise DuplicateName(name)
        seen.add(name)
        kind = _DEF_KINDS[head]
        args = node.items[2:]
        if kind == TERM:
            if len(args) != 1:
                _fail(node, "(def-term NAME TERM)")
            value: object = term_from_sexpr(args[0])
        elif kind == TIMEORDER:
            value = _timeorder_from_sexpr(args, node)
        elif kind == TRACE:
            value = _trace_from_sexpr(args)
        else:
            value = _geometry_from_sexpr(args)
        defs.append(Definition(kind, name, value))
    return SourceDocument(tuple(defs), version, unit)


def parse_term(text: str) -> T.Term:
    nodes = read_sexprs(text)
    if len(nodes) != 1:
        raise DslSyntaxError(1, 1, "exactly one term")
    return term_from_sexpr(nodes[0])


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------


def _label_sexpr(label: T.TimeLabel):
    if isinstance(label, T.Absolute):
        return label.name
    return ["after", label.event, str(label.offset)]


def _symint_sexpr(s: T.SymInt):
    if isinstance(s, T.Const):
        return str(s.value)
    if isinstance(s, T.Var):
        return s.name
    op = {T.Add: "+", T.Sub: "-", T.Mul: "*"}[type(s)]
    return [op, _symint_sexpr(s.left), _symint_sexpr(s.right)]


def term_to_sexpr(term: T.Term):
    if isinstance(term, T.And):
        return ["and", term_to_sexpr(term.left), term_to_sexpr(term.right)]
    if isinstance(term, T.Or):
        return ["or", term_to_sexpr(term.left), term_to_sexpr(term.right)]
    if isinstance(term, T.Not):
        return ["not", term_to_sexpr(term.term)]
    if isinstance(term, T.Implies):
        return ["implies", term_to_sexpr(term.antecedent), term_to_sexpr(term.consequent)]
    if isinstance(term, T.BigAnd):
        return ["bigand", *(term_to_sexpr(t) for t in term.terms)]
    if isinstance(term, T.BigOr):
        return ["bigor", *(term_to_sexpr(t) for t in term.terms)]
    if isinstance(term, T.TrueAtom):
        return ["true"]
    if isinstance(term, T.FalseAtom):
        return ["false"]
    if isinstance(term, T.TimePoint):
        return ["time", _label_sexpr(term.label)]
    if isinstance(term, T.TimeInterval):
        return ["interval", _label_sexpr(term.start), _label_sexpr(term.end)]
    if isinstance(term, T.Event):
        return ["event", term.name]
    if isinstance(term, T.OccupyPoint2D):
        return ["point2d", str(term.x), str(term.y)]
    if isinstance(term, T.OccupyBox2D):
        return ["box2d", str(term.x1), str(term.y1), str(term.x2), str(term.y2)]
    if isinstance(term, T.OccupySegment2D):
        return ["seg2d", str(term.x1), str(term.y1), str(term.x2), str(term.y2), str(term.radius)]
    if isinstance(term, T.OccupyPoint3D):
        return ["point3d", str(term.x), str(term.y), str(term.z)]
    if isinstance(term, T.OccupyBox3D):
        return [
            "box3d",
            str(term.x1), str(term.y1), str(term.z1),
            str(term.x2), str(term.y2), str(term.z2),
        ]
    if isinstance(term, T.OccupySegment3D):
        return [
            "seg3d",
            str(term.x1), str(term.y1), str(term.z1),
            str(term.x2), str(term.y2), str(term.z2),
            str(term.radius),
        ]
    if isinstance(term, T.OccupyNode):
        return ["node", term.node]
    if isinstance(term, T.Owned):
        return ["own", term.owner, term_to_sexpr(term.atom)]
    if isinstance(term, T.OccupyBoxSym):
        return [
            "boxsym",
            _symint_sexpr(term.x1), _symint_sexpr(term.y1),
            _symint_sexpr(term.x2), _symint_sexpr(term.y2),
        ]
    raise TypeError(f"cannot serialize {term!r}")


def _render(node, indent: int) -> str:
    if isinstance(node, str):
        return node
    inline = "(" + " ".join(_render_inline(c) for c in node) + ")"
    if indent + len(inline) <= _WRAP_COLUMN:
        return inline
    pad = " " * (indent + 2)
    head = _render_inline(node[0])
    lines = [f"({head}"]
    for child in node[1:]:
        lines.append(pad + _render(child, indent + 2))
    return "\n".join(lines) + ")"


def _render_inline(node) -> str:
    if isinstance(node, str):
        return node
    return "(" + " ".join(_render_inline(c) for c in node) + ")"


def print_term(term: T.Term, indent: int = 0) -> str:
    return _render(term_to_sexpr(term), indent)


def _definition_sexpr(d: Definition):
    if d.kind == TERM:
        return ["def-term", d.name, term_to_sexpr(d.value)]
    if d.kind == TIMEORDER:
        order: TimeOrder = d.value
        return [
            "def-timeorder", d.name,
            ["points", *order.points],
            ["edges", *(list(e) for e in order.edges)],
        ]
    if d.kind == TRACE:
        trace: EventTrace = d.value
        clauses = [
            ["occurs", event, *sorted(points)]
            for event, points in sorted(trace.occurrences.items())
        ]
        return ["def-trace", d.name, *clauses]
    if d.kind == GEOMETRY:
        rows = [
            [node, str(b.lo[0]), str(b.lo[1]), str(b.hi[0]), str(b.hi[1])]
            for node, b in sorted(d.value.items())
        ]
        return ["def-geometry", d.name, *rows]
    raise TypeError(f"cannot serialize definition kind {d.kind!r}")


def print_document(doc: SourceDocument) -> str:
    header = ["besd", str(doc.version)]
    if doc.unit is not None:
        header.append(["unit", doc.unit])
    blocks = [_render(header, 0)]
    blocks += [_render(_definition_sexpr(d), 0) for d in doc.definitions]
    return "\n\n".join(blocks) + "\n"
