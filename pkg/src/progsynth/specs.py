"""Specification wffs over the eight number-theory relations.

A wff describes a finite set of positive integers.  Unquantified input
variables (I, J, K, I4, ...) are values handed to the program; output
variables (x, y, z, x4, ...) are the values the program must list; bound
variables (A, B, C, A4, ...) appear under ``(exists A)`` / ``(all A)``.

Concrete syntax::

    wff     := conj ('v' conj)*
    conj    := unary ('^' unary)*
    unary   := '~' unary | '(' ('exists'|'all'|'forall') BOUND ')' unary | primary
    primary := '(' wff ')' | REL '(' term (',' term)* ')'
    term    := INPUT | OUTPUT | BOUND | '"' digits '"'

A quantifier binds as tightly as ``~``: its body stops at the next ``^`` or
``v`` unless parenthesized.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Union

RELATIONS: dict[str, int] = {
    "EQ": 2,
    "LT": 2,
    "BETW": 3,
    "MUL": 3,
    "FAC": 2,
    "REM": 3,
    "PFAC": 2,
    "PRIME": 1,
}


class SpecError(ValueError):
    pass


class SpecSyntaxError(SpecError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ArityError(SpecError):
    pass


class UnboundVariableError(SpecError):
    pass


class Unclassifiable(SpecError):
    pass


class NoMatch(SpecError):
    """A DEF or pattern does not fit; the message is rendered only on demand."""

    def __init__(self, what: str, sub: "Wff | None" = None):
        super().__init__(what)
        self.what = what
        self.sub = sub

    def __str__(self) -> str:
        if self.sub is None:
            return self.what
        return f"{self.what} does not match {render_spec(self.sub)}"


def rank_name(letters: str, rank: int) -> str:
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    if rank <= 3:
        return letters[rank - 1]
    return f"{letters[0]}{rank}"


def _name_rank(letters: str, name: str) -> int | None:
    if len(name) == 1 and name in letters:
        return letters.index(name) + 1
    m = re.fullmatch(rf"{letters[0]}(\d+)", name)
    if m and not m.group(1).startswith("0") and int(m.group(1)) >= 4:
        return int(m.group(1))
    return None


# --- terms -----------------------------------------------------------------


@dataclass(frozen=True)
class InputVar:
    rank: int

    def __str__(self) -> str:
        return rank_name("IJK", self.rank)


@dataclass(frozen=True)
class OutputVar:
    rank: int

    def __str__(self) -> str:
        return rank_name("xyz", self.rank)


@dataclass(frozen=True)
class BoundVar:
    rank: int

    def __str__(self) -> str:
        return rank_name("ABC", self.rank)


@dataclass(frozen=True)
class Literal:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise SpecError("literals are nonnegative")

    def __str__(self) -> str:
        return f'"{self.value}"'


@dataclass(frozen=True)
class Meta:
    """Component variable of a DEF pattern; unifies with any term."""

    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[InputVar, OutputVar, BoundVar, Literal, Meta]


def parse_term(text: str) -> Term:
    text = text.strip()
    m = re.fullmatch(r'"(\d+)"', text)
    if m:
        return Literal(int(m.group(1)))
    for letters, cls in (("IJK", InputVar), ("xyz", OutputVar), ("ABC", BoundVar)):
        rank = _name_rank(letters, text)
        if rank is not None:
            return cls(rank)
    raise SpecError(f"not a term: {text!r}")


# --- wffs ------------------------------------------------------------------


def _cached_hash(node, parts: tuple) -> int:
    # wffs are immutable and hashed constantly during search
    h = node.__dict__.get("_hash")
    if h is None:
        h = hash((type(node).__name__, *parts))
        object.__setattr__(node, "_hash", h)
    return h


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple

    def __hash__(self) -> int:
        return _cached_hash(self, (self.relation, self.args))

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise SpecError(f"unknown relation {self.relation}")
        if len(self.args) != RELATIONS[self.relation]:
            raise ArityError(
                f"{self.relation} takes {RELATIONS[self.relation]} arguments, got {len(self.args)}"
            )


@dataclass(frozen=True)
class Not:
    body: "Wff"

    def __hash__(self) -> int:
        return _cached_hash(self, (self.body,))


@dataclass(frozen=True)
class And:
    left: "Wff"
    right: "Wff"

    def __hash__(self) -> int:
        return _cached_hash(self, (self.left, self.right))


@dataclass(frozen=True)
class Or:
    left: "Wff"
    right: "Wff"

    def __hash__(self) -> int:
        return _cached_hash(self, (self.left, self.right))


@dataclass(frozen=True)
class Exists:
    var: BoundVar
    body: "Wff"

    def __hash__(self) -> int:
        return _cached_hash(self, (self.var, self.body))


@dataclass(frozen=True)
class Forall:
    var: BoundVar
    body: "Wff"

    def __hash__(self) -> int:
        return _cached_hash(self, (self.var, self.body))


@dataclass(frozen=True)
class WMeta:
    """Wff-valued pattern variable (the P and Q of a DEF)."""

    name: str


Wff = Union[Atom, Not, And, Or, Exists, Forall, WMeta]


def atom(relation: str, *args: Term) -> Atom:
    return Atom(relation, tuple(args))


def children(w: Wff) -> tuple:
    match w:
        case Not(b) | Exists(_, b) | Forall(_, b):
            return (b,)
        case And(l, r) | Or(l, r):
            return (l, r)
    return ()


def rebuild(w: Wff, kids: tuple) -> Wff:
    match w:
        case Not():
            return Not(kids[0])
        case Exists(v, _):
            return Exists(v, kids[0])
        case Forall(v, _):
            return Forall(v, kids[0])
        case And():
            return And(kids[0], kids[1])
        case Or():
            return Or(kids[0], kids[1])
    return w


def walk(w: Wff, path: tuple = ()) -> Iterator[tuple[tuple, Wff]]:
    """Yield ``(path, subtree)`` pairs in preorder."""
    yield path, w
    for i, c in enumerate(children(w)):
        yield from walk(c, path + (i,))


def subtree_at(w: Wff, path: tuple) -> Wff:
    for i in path:
        kids = children(w)
        if i >= len(kids):
            raise SpecError(f"path {path} out of bounds")
        w = kids[i]
    return w


def replace_at(w: Wff, path: tuple, new: Wff) -> Wff:
    if not path:
        return new
    kids = list(children(w))
    if path[0] >= len(kids):
        raise SpecError(f"path {path} out of bounds")
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(w, tuple(kids))


def terms(w: Wff) -> Iterator[Term]:
    for _, sub in walk(w):
        if isinstance(sub, Atom):
            yield from sub.args


def inputs(w: Wff) -> list[int]:
    """Input ranks in order of first occurrence."""
    seen: list[int] = []
    for t in terms(w):
        if isinstance(t, InputVar) and t.rank not in seen:
            seen.append(t.rank)
    return seen


def outputs(w: Wff) -> list[int]:
    seen: list[int] = []
    for t in terms(w):
        if isinstance(t, OutputVar) and t.rank not in seen:
            seen.append(t.rank)
    return seen


def literals(w: Wff) -> list[int]:
    return sorted({t.value for t in terms(w) if isinstance(t, Literal)})


def max_bound_rank(w: Wff) -> int:
    ranks = [0]
    for _, sub in walk(w):
        if isinstance(sub, (Exists, Forall)):
            ranks.append(sub.var.rank)
    ranks.extend(t.rank for t in terms(w) if isinstance(t, BoundVar))
    return max(ranks)


def map_terms(w: Wff, fn) -> Wff:
    match w:
        case Atom(rel, args):
            return Atom(rel, tuple(fn(a) for a in args))
        case Exists(v, b):
            return Exists(v, map_terms(b, fn))
        case Forall(v, b):
            return Forall(v, map_terms(b, fn))
    kids = children(w)
    if not kids:
        return w
    return rebuild(w, tuple(map_terms(k, fn) for k in kids))


def substitute(w: Wff, mapping: dict) -> Wff:
    """Simultaneously replace terms (keys) by terms (values)."""
    return map_terms(w, lambda t: mapping.get(t, t))


def free_bound(w: Wff) -> set[int]:
    """Bound-variable ranks used in atoms but not bound by an enclosing quantifier."""
    match w:
        case Atom(_, args):
            return {a.rank for a in args if isinstance(a, BoundVar)}
        case Exists(v, b) | Forall(v, b):
            return free_bound(b) - {v.rank}
    out: set[int] = set()
    for k in children(w):
        out |= free_bound(k)
    return out


def check_closed(w: Wff) -> None:
    loose = free_bound(w)
    if loose:
        names = ", ".join(str(BoundVar(r)) for r in sorted(loose))
        raise UnboundVariableError(f"unbound quantified variable(s): {names}")
    _check_shadowing(w, frozenset())


def _check_shadowing(w: Wff, scope: frozenset) -> None:
    if isinstance(w, (Exists, Forall)):
        if w.var.rank in scope:
            raise SpecError(f"quantifier shadows {w.var}")
        scope = scope | {w.var.rank}
    for k in children(w):
        _check_shadowing(k, scope)


def canonical(w: Wff) -> Wff:
    """Rename bound variables A, B, C, ... in preorder of their quantifiers.

    Two wffs that differ only in bound-variable names have equal canonical forms.
    """
    counter = [0]

    def go(w, env):
        match w:
            case Atom(rel, args):
                return Atom(rel, tuple(BoundVar(env[a.rank]) if isinstance(a, BoundVar) and a.rank in env else a for a in args))
            case Exists(v, b) | Forall(v, b):
                counter[0] += 1
                new = BoundVar(counter[0])
                body = go(b, {**env, v.rank: counter[0]})
                return Exists(new, body) if isinstance(w, Exists) else Forall(new, body)
        kids = children(w)
        if not kids:
            return w
        return rebuild(w, tuple(go(k, env) for k in kids))

    return go(w, {})


def alpha_equal(a: Wff, b: Wff) -> bool:
    return canonical(a) == canonical(b)


# --- rendering ---------------------------------------------------------------


def render_spec(w: Wff) -> str:
    match w:
        case Atom(rel, args):
            return f"{rel}({','.join(str(a) for a in args)})"
        case WMeta(name):
            return name
        case Not(b):
            return "~" + _unary_operand(b)
        case Exists(v, b):
            return f"(exists {v})" + _unary_operand(b)
        case Forall(v, b):
            return f"(all {v})" + _unary_operand(b)
        case And(l, r):
            left = _paren(l) if isinstance(l, Or) else render_spec(l)
            right = _paren(r) if isinstance(r, (And, Or)) else render_spec(r)
            return f"{left}^{right}"
        case Or(l, r):
            left = _paren(l) if isinstance(l, And) else render_spec(l)
            right = _paren(r) if isinstance(r, (And, Or)) else render_spec(r)
            return f"{left} v {right}"
    raise TypeError(f"not a wff: {w!r}")


def _paren(w: Wff) -> str:
    return f"({render_spec(w)})"


def _unary_operand(w: Wff) -> str:
    return _paren(w) if isinstance(w, (And, Or)) else render_spec(w)


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r'\s*(?:(?P<lit>"\d+")|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<sym>[()\^~,]))')


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.scope: list[int] = []

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise SpecSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def wff(self) -> Wff:
        left = self.conj()
        while self.peek()[:2] == ("name", "v"):
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Wff:
        left = self.unary()
        while self.peek()[:2] == ("sym", "^"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Wff:
        kind, val, pos = self.peek()
        if (kind, val) == ("sym", "~"):
            self.take()
            return Not(self.unary())
        if (kind, val) == ("sym", "(") and self.peek(1)[1] in ("exists", "all", "forall"):
            self.take()
            q = self.take()[1]
            _, name, npos = self.take()
            rank = _name_rank("ABC", name)
            if rank is None:
                raise SpecSyntaxError(f"{name!r} is not a quantified variable name", npos)
            if rank in self.scope:
                raise SpecSyntaxError(f"quantifier shadows {name}", npos)
            self.expect(")")
            self.scope.append(rank)
            body = self.unary()
            self.scope.pop()
            return Exists(BoundVar(rank), body) if q == "exists" else Forall(BoundVar(rank), body)
        return self.primary()

    def primary(self) -> Wff:
        kind, val, pos = self.take()
        if (kind, val) == ("sym", "("):
            inner = self.wff()
            self.expect(")")
            return inner
        if kind != "name" or val not in RELATIONS:
            raise SpecSyntaxError(f"expected a relation, found {val or 'end of input'!r}", pos)
        self.expect("(")
        args = [self.term()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.term())
        self.expect(")")
        if len(args) != RELATIONS[val]:
            raise ArityError(f"{val} takes {RELATIONS[val]} arguments, got {len(args)} (position {pos})")
        return Atom(val, tuple(args))

    def term(self) -> Term:
        kind, val, pos = self.take()
        if kind == "lit":
            return Literal(int(val[1:-1]))
        if kind == "name":
            try:
                t = parse_term(val)
            except SpecError:
                raise SpecSyntaxError(f"{val!r} is not a variable name", pos) from None
            if isinstance(t, BoundVar) and t.rank not in self.scope:
                raise UnboundVariableError(f"unbound quantified variable {val} at position {pos}")
            return t
        raise SpecSyntaxError(f"expected a term, found {val or 'end of input'!r}", pos)


def parse_spec(text: str) -> Wff:
    p = _Parser(text)
    w = p.wff()
    kind, val, pos = p.peek()
    if kind != "end":
        raise SpecSyntaxError(f"unexpected {val!r}", pos)
    return w


# --- classification ------------------------------------------------------------


class SpecKind(enum.Enum):
    DECIDE = "decide"
    LIST = "list"
    CONDITIONAL_LIST = "conditional-list"


def _outputs_under_forall(w: Wff) -> bool:
    for _, sub in walk(w):
        if isinstance(sub, Forall) and outputs(sub.body):
            return True
    return False


def classify(w: Wff) -> SpecKind:
    check_closed(w)
    outs = outputs(w)
    if not outs:
        return SpecKind.DECIDE
    if len(outs) > 1:
        raise Unclassifiable("more than one output variable")
    for _, sub in walk(w):
        if isinstance(sub, Atom):
            out_args = [a for a in sub.args if isinstance(a, OutputVar)]
            if len(out_args) > 1:
                raise Unclassifiable(f"repeated output variable in {render_spec(sub)}")
    if _outputs_under_forall(w):
        raise Unclassifiable("output variable under a universal quantifier")
    for _, sub in walk(w):
        if isinstance(sub, Or) and (not outputs(sub.left) or not outputs(sub.right)):
            raise Unclassifiable(f"disjunct without output variable in {render_spec(sub)}")
    if isinstance(w, And) and (not outputs(w.left) or not outputs(w.right)):
        return SpecKind.CONDITIONAL_LIST
    return SpecKind.LIST


def classify_rewritten(w: Wff) -> SpecKind:
    """Kind of ``w`` after every ``(all A)`` is rewritten as ``~(exists A)~``."""
    return classify(eliminate_forall(w)[0])


def kind_of(w: Wff) -> SpecKind | None:
    try:
        return classify(w)
    except SpecError:
        return None


# --- pattern matching --------------------------------------------------------------


def match(pattern: Wff, w: Wff, binding: dict | None = None, *, inputs_are_meta: bool = False) -> dict | None:
    """Match ``w`` against ``pattern``.

    Keys of the returned binding: ``Meta`` and ``WMeta`` nodes, ``("bound", rank)``
    for pattern bound variables, and ``InputVar`` when ``inputs_are_meta``.
    Pattern bound variables map bijectively onto bound variables of ``w``.
    """
    b = dict(binding or {})
    return b if _match(pattern, w, b, inputs_are_meta) else None


def _bind(b: dict, key, value) -> bool:
    if key in b:
        return b[key] == value
    b[key] = value
    return True


def _match_term(p: Term, t: Term, b: dict, inputs_are_meta: bool) -> bool:
    if isinstance(p, Meta):
        return _bind(b, p, t)
    if isinstance(p, InputVar) and inputs_are_meta:
        if not isinstance(t, (InputVar, Literal)):
            return False
        return _bind(b, p, t)
    if isinstance(p, BoundVar):
        key = ("bound", p.rank)
        if key in b:
            return isinstance(t, BoundVar) and b[key] == t.rank
    return p == t


def _match(p: Wff, w: Wff, b: dict, inputs_are_meta: bool) -> bool:
    match p:
        case WMeta():
            return _bind(b, p, w)
        case Atom(rel, pargs):
            if not isinstance(w, Atom) or w.relation != rel:
                return False
            return all(_match_term(pa, wa, b, inputs_are_meta) for pa, wa in zip(pargs, w.args))
        case Exists(v, body) | Forall(v, body):
            if type(w) is not type(p):
                return False
            key = ("bound", v.rank)
            targets = b.setdefault("_bound_targets", set())
            if key in b or w.var.rank in targets:
                return False
            b[key] = w.var.rank
            targets.add(w.var.rank)
            return _match(body, w.body, b, inputs_are_meta)
        case Not(body):
            return isinstance(w, Not) and _match(body, w.body, b, inputs_are_meta)
        case And(l, r) | Or(l, r):
            return type(w) is type(p) and _match(l, w.left, b, inputs_are_meta) and _match(r, w.right, b, inputs_are_meta)
    raise TypeError(f"bad pattern node {p!r}")


def instantiate(pattern: Wff, binding: dict, fresh_bound: int) -> Wff:
    """Fill a pattern; unbound pattern quantifiers get ranks from ``fresh_bound`` upward."""
    ranks: dict[int, int] = {}
    counter = [fresh_bound]

    def bound_rank(r: int) -> int:
        key = ("bound", r)
        if key in binding:
            return binding[key]
        if r not in ranks:
            ranks[r] = counter[0]
            counter[0] += 1
        return ranks[r]

    def term(t: Term) -> Term:
        if isinstance(t, Meta):
            return binding[t]
        if isinstance(t, BoundVar):
            return BoundVar(bound_rank(t.rank))
        if isinstance(t, InputVar) and t in binding:
            return binding[t]
        return t

    def go(p: Wff) -> Wff:
        match p:
            case WMeta():
                return binding[p]
            case Atom(rel, args):
                return Atom(rel, tuple(term(a) for a in args))
            case Exists(v, body):
                return Exists(BoundVar(bound_rank(v.rank)), go(body))
            case Forall(v, body):
                return Forall(BoundVar(bound_rank(v.rank)), go(body))
        return rebuild(p, tuple(go(k) for k in children(p)))

    return go(pattern)


def match_axiom(goal: Wff, axiom_spec: Wff) -> dict | None:
    """Find the input substitution that turns ``axiom_spec`` into ``goal``.

    Returns ``{rank: Term}`` with identity entries dropped, or ``None``.  Output
    variables must agree positionally; bound variables match up to renaming.
    """
    b = match(axiom_spec, goal, inputs_are_meta=True)
    if b is None:
        return None
    return {k.rank: v for k, v in b.items() if isinstance(k, InputVar) and k != v}


# --- definitional rewrites -------------------------------------------------------

a, b_, c = Meta("a"), Meta("b"), Meta("c")
_A = BoundVar(1)
_P, _Q = WMeta("P"), WMeta("Q")


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    def reverse(self) -> "Direction":
        return Direction.FORWARD if self is Direction.BACKWARD else Direction.BACKWARD


@dataclass(frozen=True)
class DefRule:
    id: str
    lhs: Wff
    rhs: Wff


# Each DEF carries its named relation on the left; BACKWARD rewrites lhs -> rhs.
DEFS: dict[str, DefRule] = {
    d.id: d
    for d in (
        DefRule("BETW", atom("BETW", a, b_, c), And(atom("LT", a, b_), atom("LT", b_, c))),
        DefRule("FAC", atom("FAC", a, b_), Exists(_A, atom("MUL", _A, a, b_))),
        DefRule("PFAC", atom("PFAC", a, b_), And(atom("FAC", a, b_), atom("BETW", Literal(1), a, b_))),
        DefRule(
            "PRIME",
            atom("PRIME", a),
            And(Not(Exists(_A, atom("PFAC", _A, a))), Not(atom("LT", a, Literal(2)))),
        ),
        DefRule("REM", atom("REM", b_, a, Literal(0)), atom("FAC", a, b_)),
        DefRule("MUL", atom("MUL", a, b_, c), atom("MUL", b_, a, c)),
        DefRule("MULT", atom("MUL", a, b_, c), And(atom("MUL", a, b_, c), Not(atom("LT", c, a)))),
        DefRule("AND_COMM", And(_P, _Q), And(_Q, _P)),
        # P(a) = (exists A)P(A) ^ EQ(A,a); relation-generic, handled by _def_eq.
        DefRule("EQ", WMeta("P(a)"), Exists(_A, And(WMeta("P(A)"), atom("EQ", _A, a)))),
    )
}

DERIVED = ("ALL", "SCOPE")


def apply_def(
    def_id: str,
    w: Wff,
    path: tuple = (),
    direction: Direction = Direction.BACKWARD,
    position: int | None = None,
) -> Wff:
    """Rewrite the subtree of ``w`` at ``path`` with one side of a DEF.

    ``position`` selects the abstracted argument for EQ and the conjunct side
    for SCOPE.  Raises ``NoMatch`` when the subtree does not fit.
    """
    direction = Direction(direction)
    sub = subtree_at(w, path)
    if def_id == "EQ":
        new = _def_eq(sub, direction, position, max_bound_rank(w) + 1)
    elif def_id == "ALL":
        new = _def_all(sub, direction)
    elif def_id == "SCOPE":
        new = _def_scope(sub, direction, position)
    elif def_id in DEFS:
        rule = DEFS[def_id]
        src, dst = (rule.lhs, rule.rhs) if direction is Direction.BACKWARD else (rule.rhs, rule.lhs)
        binding = match(src, sub)
        if binding is None:
            raise NoMatch(f"DEF-{def_id}", sub)
        quantified = any(isinstance(x, (Exists, Forall)) for _, x in walk(dst))
        fresh = max_bound_rank(w) + 1 if quantified else 1
        new = instantiate(dst, binding, fresh)
    else:
        raise SpecError(f"unknown DEF {def_id}")
    out = replace_at(w, path, new)
    if free_bound(out):
        raise NoMatch(f"DEF-{def_id} would unbind a quantified variable")
    return out


def _def_eq(sub: Wff, direction: Direction, position: int | None, fresh: int) -> Wff:
    if direction is Direction.BACKWARD:
        if not isinstance(sub, Atom) or position is None or not 0 <= position < len(sub.args):
            raise NoMatch("DEF-EQ needs an atom and an argument position")
        var = BoundVar(fresh)
        args = list(sub.args)
        value = args[position]
        args[position] = var
        return Exists(var, And(Atom(sub.relation, tuple(args)), atom("EQ", var, value)))
    match sub:
        case Exists(v, And(Atom(rel, args), Atom("EQ", (BoundVar() as v2, value)))) if v2 == v and value != v:
            hits = [i for i, t in enumerate(args) if t == v]
            if len(hits) == 1 and (position is None or hits[0] == position):
                new_args = list(args)
                new_args[hits[0]] = value
                return Atom(rel, tuple(new_args))
    raise NoMatch("DEF-EQ", sub)


def negate(w: Wff) -> Wff:
    """Negation pushed through ^ and v, with double negations removed."""
    match w:
        case Not(b):
            return b
        case And(l, r):
            return Or(negate(l), negate(r))
        case Or(l, r):
            return And(negate(l), negate(r))
    return Not(w)


def _def_all(sub: Wff, direction: Direction) -> Wff:
    if direction is Direction.BACKWARD and isinstance(sub, Forall):
        return Not(Exists(sub.var, negate(sub.body)))
    if direction is Direction.FORWARD and isinstance(sub, Not) and isinstance(sub.body, Exists):
        return Forall(sub.body.var, negate(sub.body.body))
    raise NoMatch("ALL", sub)


def _mentions(w: Wff, var: BoundVar) -> bool:
    return any(t == var for t in terms(w))


def _def_scope(sub: Wff, direction: Direction, position: int | None) -> Wff:
    if direction is Direction.BACKWARD:
        # (exists A)(P ^ Q) -> ((exists A)P) ^ Q when A is absent from Q
        if isinstance(sub, Exists) and isinstance(sub.body, And):
            v, (l, r) = sub.var, (sub.body.left, sub.body.right)
            if position in (None, 0) and not _mentions(r, v):
                return And(Exists(v, l), r)
            if position in (None, 1) and not _mentions(l, v):
                return And(l, Exists(v, r))
    elif isinstance(sub, And):
        l, r = sub.left, sub.right
        if position in (None, 0) and isinstance(l, Exists) and not _mentions(r, l.var):
            return Exists(l.var, And(l.body, r))
        if position in (None, 1) and isinstance(r, Exists) and not _mentions(l, r.var):
            return Exists(r.var, And(l, r.body))
    raise NoMatch("SCOPE", sub)


def eliminate_forall(w: Wff) -> tuple[Wff, list[tuple]]:
    """Rewrite every ``(all A)P`` as ``~(exists A)~P`` (negation pushed inward).

    Returns the rewritten wff and the paths rewritten, outermost first.
    """
    paths = []
    while True:
        hit = next((p for p, sub in walk(w) if isinstance(sub, Forall)), None)
        if hit is None:
            return w, paths
        w = apply_def("ALL", w, hit, Direction.BACKWARD)
        paths.append(hit)


# --- JSON ----------------------------------------------------------------------------


def term_to_json(t: Term) -> str:
    return str(t)


def wff_to_json(w: Wff) -> dict:
    match w:
        case Atom(rel, args):
            return {"node": "atom", "relation": rel, "args": [term_to_json(a) for a in args]}
        case Not(b):
            return {"node": "not", "body": wff_to_json(b)}
        case And(l, r) | Or(l, r):
            return {"node": type(w).__name__.lower(), "left": wff_to_json(l), "right": wff_to_json(r)}
        case Exists(v, b) | Forall(v, b):
            return {"node": type(w).__name__.lower(), "var": str(v), "body": wff_to_json(b)}
    raise TypeError(w)


def wff_from_json(d: dict) -> Wff:
    node = d["node"]
    if node == "atom":
        return Atom(d["relation"], tuple(parse_term(a) for a in d["args"]))
    if node == "not":
        return Not(wff_from_json(d["body"]))
    if node in ("and", "or"):
        cls = And if node == "and" else Or
        return cls(wff_from_json(d["left"]), wff_from_json(d["right"]))
    if node in ("exists", "forall"):
        cls = Exists if node == "exists" else Forall
        return cls(parse_term(d["var"]), wff_from_json(d["body"]))
    raise SpecError(f"unknown node {node!r}")
