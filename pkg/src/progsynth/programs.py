"""Programs in the small PHP subset the synthesizer emits.

Variables follow a rank convention: inputs ``$i $j $k $i4 ...`` are never
assigned; loop variables ``$a $b $c $a4 ...`` and flag variables
``$A $B $C $A4 ...`` are.  Loop variables and flags are both ``ProgVar``;
they live in separate rank sequences so that combining programs can shift
each sequence independently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Union

from .specs import rank_name


class ProgramError(ValueError):
    pass


class ProgramSyntaxError(ProgramError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NoEcho(ProgramError):
    pass


# --- expressions -----------------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class InVar:
    rank: int


@dataclass(frozen=True)
class ProgVar:
    rank: int
    flag: bool = False


@dataclass(frozen=True)
class Hole:
    """``[M]`` placeholder in a template: the argument of the echo being replaced."""

    name: str = "M"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Eq:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Lt:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Rem:
    left: "Expr"
    right: "Expr"


Expr = Union[BoolLit, IntLit, InVar, ProgVar, Hole, Not, And, Or, Eq, Lt, Mul, Rem]
BINARY = {And: "&&", Or: "||", Eq: "==", Lt: "<", Mul: "*", Rem: "%"}
ATOMIC = (BoolLit, IntLit, InVar, ProgVar, Hole)

TRUE, FALSE = BoolLit(True), BoolLit(False)

# --- commands -------------------------------------------------------------------------


@dataclass(frozen=True)
class Echo:
    expr: Expr


@dataclass(frozen=True)
class Assign:
    var: ProgVar
    expr: Expr


@dataclass(frozen=True)
class Inc:
    var: ProgVar


@dataclass(frozen=True)
class If:
    cond: Expr
    body: "Cmd"


@dataclass(frozen=True)
class For:
    init: Assign
    cond: Expr
    step: Inc
    body: "Cmd"


@dataclass(frozen=True)
class Block:
    body: tuple


Cmd = Union[Echo, Assign, Inc, If, For, Block]


@dataclass(frozen=True)
class Program:
    commands: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        for c in iter_cmds(self.commands):
            if isinstance(c, (Assign, Inc)) and not isinstance(c.var, ProgVar):
                raise ProgramError("input variables are never assigned")

    def __str__(self) -> str:
        return render(self)


# --- traversal ------------------------------------------------------------------------


def iter_cmds(cmds: Iterable[Cmd]) -> Iterator[Cmd]:
    for c in cmds:
        yield c
        match c:
            case If(_, body):
                yield from iter_cmds([body])
            case For(init, _, step, body):
                yield from iter_cmds([init, step, body])
            case Block(body):
                yield from iter_cmds(body)


def cmd_exprs(c: Cmd) -> list[Expr]:
    match c:
        case Echo(e):
            return [e]
        case Assign(v, e):
            return [v, e]
        case Inc(v):
            return [v]
        case If(cond, _):
            return [cond]
        case For(_, cond, _, _):
            return [cond]
    return []


def iter_expr(e: Expr) -> Iterator[Expr]:
    yield e
    match e:
        case Not(x):
            yield from iter_expr(x)
        case And(l, r) | Or(l, r) | Eq(l, r) | Lt(l, r) | Mul(l, r) | Rem(l, r):
            yield from iter_expr(l)
            yield from iter_expr(r)


def map_expr(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Bottom-up rewrite; ``fn`` returns a replacement for a leaf or ``None``."""
    if isinstance(e, ATOMIC):
        out = fn(e)
        return e if out is None else out
    if isinstance(e, Not):
        return Not(map_expr(e.operand, fn))
    return type(e)(map_expr(e.left, fn), map_expr(e.right, fn))


def map_program(p: Program, fn: Callable[[Expr], Expr | None]) -> Program:
    def cmd(c: Cmd) -> Cmd:
        match c:
            case Echo(e):
                return Echo(map_expr(e, fn))
            case Assign(v, e):
                return Assign(map_expr(v, fn), map_expr(e, fn))
            case Inc(v):
                return Inc(map_expr(v, fn))
            case If(cond, body):
                return If(map_expr(cond, fn), cmd(body))
            case For(init, cond, step, body):
                return For(cmd(init), map_expr(cond, fn), cmd(step), cmd(body))
            case Block(body):
                return Block(tuple(cmd(x) for x in body))
        raise TypeError(c)

    return Program(tuple(cmd(c) for c in p.commands))


def assigned_vars(p: Program) -> set[ProgVar]:
    return {c.var for c in iter_cmds(p.commands) if isinstance(c, (Assign, Inc))}


def max_prog_rank(p: Program, flag: bool = False) -> int:
    """Highest rank among assigned loop variables (or flags), 0 if none."""
    return max((v.rank for v in assigned_vars(p) if v.flag == flag), default=0)


def echo_count(p: Program) -> int:
    return sum(isinstance(c, Echo) for c in iter_cmds(p.commands))


def input_ranks(p: Program) -> set[int]:
    out = set()
    for c in iter_cmds(p.commands):
        for e in cmd_exprs(c):
            out |= {x.rank for x in iter_expr(e) if isinstance(x, InVar)}
    return out


# --- transformations --------------------------------------------------------------------


def subst_inputs(p: Program, binding: dict[int, Expr]) -> Program:
    """``M:I=E1,J=E2``: replace input variables simultaneously."""
    if not binding:
        return p
    return map_program(p, lambda e: binding.get(e.rank) if isinstance(e, InVar) else None)


def shift_ranks(n: Program, offset: int, flag_offset: int = 0) -> Program:
    """Raise every loop-variable rank by ``offset`` and every flag rank by ``flag_offset``."""
    if offset == 0 and flag_offset == 0:
        return n

    def fn(e):
        if isinstance(e, ProgVar):
            return ProgVar(e.rank + (flag_offset if e.flag else offset), e.flag)
        return None

    return map_program(n, fn)


def shift_past(host: Program, n: Program) -> Program:
    """Rename ``n``'s program variables so none collide with those ``host`` assigns."""
    return shift_ranks(n, max_prog_rank(host), max_prog_rank(host, flag=True))


def fill(template: Program, hole: str, value: Expr) -> tuple:
    def fn(e):
        if isinstance(e, Hole) and e.name == hole:
            return value
        return None

    return map_program(template, fn).commands


def _slot(cmds: list) -> Cmd:
    return cmds[0] if len(cmds) == 1 else Block(tuple(cmds))


def splice_with(m: Program, replace: Callable[[Expr], tuple]) -> Program:
    """Replace every echo in ``m`` by the commands ``replace(argument)``."""

    def many(cmds) -> list:
        out = []
        for c in cmds:
            out.extend(one(c))
        return out

    def one(c: Cmd) -> list:
        match c:
            case Echo(e):
                return list(replace(e))
            case If(cond, body):
                return [If(cond, _slot(one(body)))]
            case For(init, cond, step, body):
                return [For(init, cond, step, _slot(one(body)))]
            case Block(body):
                return [Block(tuple(many(body)))]
        return [c]

    if echo_count(m) == 0:
        raise NoEcho("program has no echo command to splice into")
    return Program(tuple(many(m.commands)))


def splice(m: Program, tpl: Program, hole: str = "M") -> Program:
    """s(M, N): put ``tpl`` in place of each echo of ``m``, filling ``[M]`` with its argument."""
    return splice_with(m, lambda e: fill(tpl, hole, e))


def simplify_cr1(p: Program) -> Program:
    """Rewrite ``$v=FALSE ; if (P) $v=TRUE ; echo $v ;`` to ``echo P ;``.

    Applies only when ``$v`` is referenced nowhere but in such triples.  The
    ``if`` may sit alone inside a block.
    """
    triples = _cr1_sites(p.commands)
    if not triples:
        return p
    total: dict[ProgVar, int] = {}
    for c in iter_cmds(p.commands):
        for e in cmd_exprs(c):
            for x in iter_expr(e):
                if isinstance(x, ProgVar):
                    total[x] = total.get(x, 0) + 1
    inside: dict[ProgVar, int] = {}
    for v in triples:
        inside[v] = inside.get(v, 0) + 3
    ok = {v for v in inside if total.get(v, 0) == inside[v]}
    if not ok:
        return p

    def rewrite(cmds) -> tuple:
        out = []
        i = 0
        while i < len(cmds):
            hit = _cr1_match(cmds, i)
            if hit is not None and hit[0] in ok:
                out.append(Echo(hit[1]))
                i += 3
                continue
            out.append(rewrite_one(cmds[i]))
            i += 1
        return tuple(out)

    def rewrite_one(c: Cmd) -> Cmd:
        match c:
            case If(cond, body):
                return If(cond, _slot(list(rewrite((body,)))))
            case For(init, cond, step, body):
                return For(init, cond, step, _slot(list(rewrite((body,)))))
            case Block(body):
                return Block(rewrite(body))
        return c

    return Program(rewrite(p.commands))


def _cr1_match(cmds, i):
    if i + 3 > len(cmds):
        return None
    first, mid, last = cmds[i : i + 3]
    match first:
        case Assign(v, BoolLit(False)):
            pass
        case _:
            return None
    if isinstance(mid, Block) and len(mid.body) == 1:
        mid = mid.body[0]
    match mid, last:
        case If(cond, Assign(v2, BoolLit(True))), Echo(v3) if v2 == v and v3 == v:
            if any(x == v for x in iter_expr(cond)):
                return None
            return v, cond
    return None


def _cr1_sites(cmds) -> list:
    found = []
    for i in range(len(cmds)):
        hit = _cr1_match(cmds, i)
        if hit:
            found.append(hit[0])
    for c in cmds:
        match c:
            case If(_, body) | For(_, _, _, body):
                found.extend(_cr1_sites((body,)))
            case Block(body):
                found.extend(_cr1_sites(body))
    return found


# --- printing ------------------------------------------------------------------------------


def var_name(e: Expr) -> str:
    match e:
        case InVar(r):
            return "$" + rank_name("ijk", r)
        case ProgVar(r, flag):
            return "$" + rank_name("ABC" if flag else "abc", r)
    raise TypeError(e)


def render_expr(e: Expr) -> str:
    match e:
        case BoolLit(v):
            return "TRUE" if v else "FALSE"
        case IntLit(v):
            return str(v)
        case InVar() | ProgVar():
            return var_name(e)
        case Hole(name):
            return f"[{name}]"
        case Not(x):
            return f"!({render_expr(x)})"
        case And(l, r) | Or(l, r):
            return f"{_logic_operand(l)} {BINARY[type(e)]} {_logic_operand(r)}"
        case Mul(l, r):
            left = render_expr(l) if isinstance(l, (Mul, *ATOMIC)) else f"({render_expr(l)})"
            return f"{left} * {_arith_operand(r)}"
        case Eq(l, r) | Lt(l, r) | Rem(l, r):
            return f"{_arith_operand(l)} {BINARY[type(e)]} {_arith_operand(r)}"
    raise TypeError(e)


def _logic_operand(e: Expr) -> str:
    return render_expr(e) if isinstance(e, ATOMIC) else f"({render_expr(e)})"


def _arith_operand(e: Expr) -> str:
    return render_expr(e) if isinstance(e, ATOMIC + (Not,)) else f"({render_expr(e)})"


def render_cmd(c: Cmd) -> str:
    match c:
        case Echo(e):
            return f"echo {render_expr(e)} ;"
        case Assign(v, e):
            return f"{var_name(v)} = {render_expr(e)} ;"
        case Inc(v):
            return f"++{var_name(v)} ;"
        case If(cond, body):
            return f"if ({render_expr(cond)}) {render_cmd(body)}"
        case For(init, cond, step, body):
            head = f"{var_name(init.var)} = {render_expr(init.expr)} ; {render_expr(cond)} ; ++{var_name(step.var)}"
            return f"for ({head}) {render_cmd(body)}"
        case Block(body):
            inner = " ".join(render_cmd(x) for x in body)
            return f"{{ {inner} }} ;" if inner else "{ } ;"
    raise TypeError(c)


def render(p: Program) -> str:
    return " ".join(render_cmd(c) for c in p.commands)


def normalize_text(text: str) -> str:
    """Comparison key for program text: no whitespace, no optional semicolons."""
    s = re.sub(r"\s+", "", text)
    s = re.sub(r"\};", "}", s)
    return s.rstrip(";")


def same_text(a: str, b: str) -> bool:
    return normalize_text(a) == normalize_text(b)


# --- parsing ---------------------------------------------------------------------------------

_PTOKEN = re.compile(
    r"(?P<var>\$[A-Za-z][A-Za-z0-9]*)|(?P<num>\d+)|(?P<word>[A-Za-z]+)"
    r"|(?P<op>\+\+|&&|\|\||==|[<!*%=;(){}])"
)


def _parse_var(name: str, pos: int) -> Expr:
    body = name[1:]
    for letters, make in (
        ("ijk", InVar),
        ("abc", lambda r: ProgVar(r)),
        ("ABC", lambda r: ProgVar(r, True)),
    ):
        if len(body) == 1 and body in letters:
            return make(letters.index(body) + 1)
        m = re.fullmatch(rf"{letters[0]}(\d+)", body)
        if m and int(m.group(1)) >= 4 and not m.group(1).startswith("0"):
            return make(int(m.group(1)))
    raise ProgramSyntaxError(f"unsupported variable name {name}", pos)


class _ProgramParser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _PTOKEN.match(text, pos)
            if not m:
                raise ProgramSyntaxError(f"unexpected character {text[pos]!r}", pos)
            self.toks.append((m.lastgroup, m.group(), m.start()))
            pos = m.end()
        self.toks.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        kind, v, pos = self.take()
        if v != val:
            raise ProgramSyntaxError(f"expected {val!r}, found {v or 'end of input'!r}", pos)

    def semi(self):
        # a missing ';' is tolerated before '}' and at end of input
        if self.peek()[1] == ";":
            self.take()
        elif self.peek()[1] not in ("}", ""):
            kind, v, pos = self.peek()
            raise ProgramSyntaxError(f"expected ';', found {v!r}", pos)

    def program(self) -> Program:
        cmds = []
        while self.peek()[0] != "end":
            if self.peek()[1] == ";":
                self.take()
                continue
            cmds.append(self.command())
        return Program(tuple(cmds))

    def command(self) -> Cmd:
        kind, val, pos = self.peek()
        if val == "echo":
            self.take()
            e = self.expr()
            self.semi()
            return Echo(e)
        if val == "if":
            self.take()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return If(cond, self.command())
        if val == "for":
            self.take()
            self.expect("(")
            init = self.assignment()
            self.expect(";")
            cond = self.expr()
            self.expect(";")
            step = self.increment()
            self.expect(")")
            return For(init, cond, step, self.command())
        if val == "{":
            self.take()
            body = []
            while self.peek()[1] != "}":
                if self.peek()[0] == "end":
                    raise ProgramSyntaxError("unclosed '{'", pos)
                if self.peek()[1] == ";":
                    self.take()
                    continue
                body.append(self.command())
            self.take()
            if self.peek()[1] == ";":
                self.take()
            return Block(tuple(body))
        if val == "++":
            c = self.increment()
            self.semi()
            return c
        if kind == "var":
            c = self.assignment()
            self.semi()
            return c
        raise ProgramSyntaxError(f"expected a command, found {val or 'end of input'!r}", pos)

    def lvalue(self) -> ProgVar:
        kind, val, pos = self.take()
        if kind != "var":
            raise ProgramSyntaxError(f"expected a variable, found {val!r}", pos)
        v = _parse_var(val, pos)
        if not isinstance(v, ProgVar):
            raise ProgramSyntaxError(f"input variable {val} cannot be assigned", pos)
        return v

    def assignment(self) -> Assign:
        v = self.lvalue()
        self.expect("=")
        return Assign(v, self.expr())

    def increment(self) -> Inc:
        self.expect("++")
        return Inc(self.lvalue())

    # precedence, loosest first: || && == < (* %) !
    def expr(self) -> Expr:
        return self._binary(0)

    _LEVELS = (("||",), ("&&",), ("==",), ("<",), ("*", "%"))
    _OPS = {"||": Or, "&&": And, "==": Eq, "<": Lt, "*": Mul, "%": Rem}

    def _binary(self, level: int) -> Expr:
        if level == len(self._LEVELS):
            return self.unary()
        left = self._binary(level + 1)
        while self.peek()[1] in self._LEVELS[level]:
            op = self.take()[1]
            left = self._OPS[op](left, self._binary(level + 1))
        return left

    def unary(self) -> Expr:
        kind, val, pos = self.take()
        if val == "!":
            return Not(self.unary())
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            return IntLit(int(val))
        if kind == "var":
            return _parse_var(val, pos)
        if val in ("TRUE", "FALSE"):
            return BoolLit(val == "TRUE")
        raise ProgramSyntaxError(f"expected an expression, found {val or 'end of input'!r}", pos)


def parse_program(text: str) -> Program:
    return _ProgramParser(text).program()
