"""Axioms and rules of inference over judgments ``PROG # SPEC``.

Every rule is a function from judgments to a judgment.  A derivation is a
postfix list of entries evaluated on a stack: axiom and theorem references
push, rule entries pop their arguments and push the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Union

from . import programs as pg
from . import specs as sp
from .programs import Program
from .specs import SpecKind


class RuleError(ValueError):
    pass


class DerivationError(ValueError):
    pass


@dataclass(frozen=True)
class Judgment:
    program: Program
    spec: sp.Wff

    def __str__(self) -> str:
        return f'"{pg.render(self.program)}" # {sp.render_spec(self.spec)}'


@dataclass(frozen=True)
class Axiom:
    id: int
    program: Program
    spec: sp.Wff

    @property
    def judgment(self) -> Judgment:
        return Judgment(self.program, self.spec)


def _ax(n: int, prog: str, spec: str) -> Axiom:
    return Axiom(n, pg.parse_program(prog), sp.parse_spec(spec))


AXIOMS: dict[int, Axiom] = {
    a.id: a
    for a in (
        _ax(1, "echo $i ;", "EQ(I,x)"),
        _ax(2, "echo $i == $j ;", "EQ(I,J)"),
        _ax(3, "echo $i < $j ;", "LT(I,J)"),
        _ax(4, "echo $i * $j ;", "MUL(I,J,x)"),
        _ax(5, "echo $i % $j ;", "REM(I,J,x)"),
        _ax(6, "for ($a = 1 ; $a < $i ; ++$a) echo $a ;", "LT(x,I)"),
        _ax(7, "for ($a = 1 ; !($i < $a) ; ++$a) echo $a ;", "~LT(I,x)"),
    )
}


def axiom_lookup(n: int) -> Judgment:
    try:
        return AXIOMS[n].judgment
    except KeyError:
        raise RuleError(f"no axiom {n}") from None


# --- rules ---------------------------------------------------------------------


def _kind(j: Judgment) -> SpecKind:
    try:
        return sp.classify(j.spec)
    except sp.SpecError as exc:
        raise RuleError(str(exc)) from None


def _need(j: Judgment, *kinds: SpecKind, rule: str) -> SpecKind:
    k = _kind(j)
    if k not in kinds:
        raise RuleError(f"{rule}: {sp.render_spec(j.spec)} is a {k.value} spec")
    return k


LISTS = (SpecKind.LIST, SpecKind.CONDITIONAL_LIST)


def term_expr(t: sp.Term) -> pg.Expr:
    match t:
        case sp.InputVar(r):
            return pg.InVar(r)
        case sp.Literal(v):
            return pg.IntLit(v)
    raise RuleError(f"cannot substitute {t} into a program")


def rule_sub(j: Judgment, binding: Mapping[int, sp.Term]) -> Judgment:
    """SUB: ``M # P(I) => M:I=J # P(J)``."""
    present = set(sp.inputs(j.spec))
    for r in binding:
        if r not in present:
            raise RuleError(f"SUB names {sp.InputVar(r)}, absent from {sp.render_spec(j.spec)}")
    prog = pg.subst_inputs(j.program, {r: term_expr(t) for r, t in binding.items()})
    spec = sp.substitute(j.spec, {sp.InputVar(r): t for r, t in binding.items()})
    return Judgment(prog, spec)


def rule_not(j: Judgment) -> Judgment:
    _need(j, SpecKind.DECIDE, rule="NOT")
    prog = pg.splice(j.program, Program((pg.Echo(pg.Not(pg.Hole())),)))
    spec = j.spec.body if isinstance(j.spec, sp.Not) else sp.Not(j.spec)
    return Judgment(prog, spec)


def rule_and(m: Judgment, n: Judgment) -> Judgment:
    _need(m, SpecKind.DECIDE, rule="AND")
    _need(n, SpecKind.DECIDE, rule="AND")
    inner = pg.splice(
        pg.shift_past(m.program, n.program),
        Program((pg.Echo(pg.And(pg.Hole("M"), pg.Hole("N"))),)),
        hole="N",
    )
    return Judgment(pg.splice(m.program, inner), sp.And(m.spec, n.spec))


def _single_output(j: Judgment, rule: str) -> sp.OutputVar:
    outs = sp.outputs(j.spec)
    if len(outs) != 1:
        raise RuleError(f"{rule}: {sp.render_spec(j.spec)} must list exactly one variable")
    return sp.OutputVar(outs[0])


def rule_do(m: Judgment, n: Judgment, target: int) -> Judgment:
    """DO: list ``P(x)`` and keep the elements that the decider of ``Q`` accepts
    when its input ``target`` is set to the element."""
    _need(m, *LISTS, rule="DO")
    x = _single_output(m, "DO")
    _need(n, SpecKind.DECIDE, rule="DO")
    if target not in sp.inputs(n.spec):
        raise RuleError(f"DO: {sp.InputVar(target)} is not an input of {sp.render_spec(n.spec)}")
    n2 = pg.subst_inputs(pg.shift_past(m.program, n.program), {target: pg.Hole("M")})
    guard = Program((pg.Block((pg.If(pg.Hole("N"), pg.Echo(pg.Hole("M"))),)),))
    inner = pg.splice(n2, guard, hole="N")
    spec = sp.And(m.spec, sp.substitute(n.spec, {sp.InputVar(target): x}))
    return Judgment(pg.splice(m.program, inner), spec)


def rule_if(m: Judgment, n: Judgment) -> Judgment:
    _need(m, SpecKind.DECIDE, rule="IF")
    _need(n, *LISTS, rule="IF")
    guard = Program((pg.Block((pg.If(pg.Hole("M"), pg.Echo(pg.Hole("N"))),)),))
    inner = pg.splice(pg.shift_past(m.program, n.program), guard, hole="N")
    return Judgment(pg.splice(m.program, inner), sp.And(m.spec, n.spec))


def rule_union(m: Judgment, n: Judgment) -> Judgment:
    _need(m, *LISTS, rule="UNION")
    _need(n, *LISTS, rule="UNION")
    if _single_output(m, "UNION") != _single_output(n, "UNION"):
        raise RuleError("UNION: operands list different variables")
    shifted = pg.shift_past(m.program, n.program)
    return Judgment(Program(m.program.commands + shifted.commands), sp.Or(m.spec, n.spec))


def rule_quit(m: Judgment) -> Judgment:
    """QUIT: decide whether the listed set is nonempty via a fresh flag."""
    _need(m, *LISTS, rule="QUIT")
    x = _single_output(m, "QUIT")
    flag = pg.ProgVar(pg.max_prog_rank(m.program, flag=True) + 1, flag=True)
    if pg.echo_count(m.program):
        body = list(pg.splice(m.program, Program((pg.Assign(flag, pg.TRUE),))).commands)
    else:
        body = []
    if len(body) > 1:
        body = [pg.Block(tuple(body))]
    prog = Program((pg.Assign(flag, pg.FALSE), *body, pg.Echo(flag)))
    var = sp.BoundVar(sp.max_bound_rank(m.spec) + 1)
    return Judgment(prog, sp.Exists(var, sp.substitute(m.spec, {x: var})))


# --- derivation entries --------------------------------------------------------------


def _binding_label(binding) -> str:
    return ",".join(f"{sp.InputVar(r)}={t}" for r, t in binding)


@dataclass(frozen=True)
class AxiomRef:
    id: int
    arity = 0

    def label(self) -> str:
        return f"AX{self.id}"


@dataclass(frozen=True)
class TheoremRef:
    name: str
    arity = 0

    def label(self) -> str:
        return f"THM:{self.name}"


@dataclass(frozen=True)
class SubApp:
    binding: tuple  # ((rank, Term), ...) sorted by rank
    arity = 1

    @classmethod
    def of(cls, mapping: Mapping[int, sp.Term]) -> "SubApp":
        return cls(tuple(sorted(mapping.items())))

    def label(self) -> str:
        return f"SUB:{_binding_label(self.binding)}"


@dataclass(frozen=True)
class NotApp:
    arity = 1

    def label(self) -> str:
        return "NOT"


@dataclass(frozen=True)
class QuitApp:
    arity = 1

    def label(self) -> str:
        return "QUIT"


@dataclass(frozen=True)
class AndApp:
    arity = 2

    def label(self) -> str:
        return "AND"


@dataclass(frozen=True)
class DoApp:
    target: int
    arity = 2

    def label(self) -> str:
        return f"DO:{sp.InputVar(self.target)}=x"


@dataclass(frozen=True)
class IfApp:
    arity = 2

    def label(self) -> str:
        return "IF"


@dataclass(frozen=True)
class UnionApp:
    arity = 2

    def label(self) -> str:
        return "UNION"


@dataclass(frozen=True)
class DefApp:
    def_id: str
    path: tuple = ()
    direction: sp.Direction = sp.Direction.FORWARD
    position: int | None = None
    arity = 1

    def label(self) -> str:
        where = "" if not self.path else "@" + ".".join(map(str, self.path))
        return f"DEF-{self.def_id}{where}"


Entry = Union[AxiomRef, TheoremRef, SubApp, NotApp, QuitApp, AndApp, DoApp, IfApp, UnionApp, DefApp]


@dataclass
class Derivation:
    entries: list
    goal: sp.Wff


def apply_entry(e: Entry, args: list[Judgment], theorems: Mapping[str, Judgment] | None = None) -> Judgment:
    match e:
        case AxiomRef(n):
            return axiom_lookup(n)
        case TheoremRef(name):
            if not theorems or name not in theorems:
                raise DerivationError(f"unknown theorem {name}")
            return theorems[name]
        case SubApp(binding):
            return rule_sub(args[0], dict(binding))
        case NotApp():
            return rule_not(args[0])
        case QuitApp():
            return rule_quit(args[0])
        case AndApp():
            return rule_and(*args)
        case DoApp(target):
            return rule_do(args[0], args[1], target)
        case IfApp():
            return rule_if(*args)
        case UnionApp():
            return rule_union(*args)
        case DefApp(def_id, path, direction, position):
            try:
                spec = sp.apply_def(def_id, args[0].spec, path, direction, position)
            except sp.SpecError as exc:
                raise RuleError(str(exc)) from None
            return Judgment(args[0].program, spec)
    raise DerivationError(f"unknown entry {e!r}")


def eval_steps(entries, theorems: Mapping[str, Judgment] | None = None) -> list[list[Judgment]]:
    """Evaluate entries; return the stack after each one."""
    stack: list[Judgment] = []
    history = []
    for i, e in enumerate(entries, 1):
        if len(stack) < e.arity:
            raise DerivationError(f"entry {i} ({e.label()}) needs {e.arity} operands, stack has {len(stack)}")
        args = stack[len(stack) - e.arity :] if e.arity else []
        del stack[len(stack) - e.arity :]
        stack.append(apply_entry(e, args, theorems))
        history.append(list(stack))
    return history


def eval_derivation(d: Derivation | list, theorems: Mapping[str, Judgment] | None = None) -> Judgment:
    entries = d.entries if isinstance(d, Derivation) else d
    history = eval_steps(entries, theorems)
    if not history or len(history[-1]) != 1:
        size = len(history[-1]) if history else 0
        raise DerivationError(f"derivation leaves {size} items on the stack")
    return history[-1][0]


@dataclass
class ReplayResult:
    ok: bool
    reason: str = ""
    judgment: Judgment | None = None

    def __bool__(self) -> bool:
        return self.ok


def replay_check(d: Derivation, theorems: Mapping[str, Judgment] | None = None) -> ReplayResult:
    """Forward soundness certificate: the entries evaluate to a judgment about ``d.goal``."""
    try:
        j = eval_derivation(d, theorems)
    except (DerivationError, RuleError, sp.SpecError, pg.ProgramError) as exc:
        return ReplayResult(False, str(exc))
    if not sp.alpha_equal(j.spec, d.goal):
        return ReplayResult(
            False,
            f"derived {sp.render_spec(j.spec)}, expected {sp.render_spec(d.goal)}",
            j,
        )
    return ReplayResult(True, "", j)


def format_trace(entries, theorems: Mapping[str, Judgment] | None = None) -> str:
    """Numbered execution-stack construction, one line per entry."""
    lines = []
    for i, (e, stack) in enumerate(zip(entries, eval_steps(entries, theorems)), 1):
        top = stack[-1]
        lines.append(f"{i}. {e.label():<16} {top}")
    return "\n".join(lines)


# --- JSON --------------------------------------------------------------------------------


def entry_to_json(e: Entry) -> dict:
    match e:
        case AxiomRef(n):
            return {"entry": "axiom", "id": n}
        case TheoremRef(name):
            return {"entry": "theorem", "name": name}
        case SubApp(binding):
            return {"entry": "sub", "binding": {str(sp.InputVar(r)): str(t) for r, t in binding}}
        case DoApp(target):
            return {"entry": "do", "target": str(sp.InputVar(target))}
        case DefApp(def_id, path, direction, position):
            return {
                "entry": "def",
                "def": def_id,
                "path": list(path),
                "direction": sp.Direction(direction).value,
                "position": position,
            }
    return {"entry": e.label().lower()}


_SIMPLE = {"not": NotApp, "quit": QuitApp, "and": AndApp, "if": IfApp, "union": UnionApp}


def entry_from_json(d: dict) -> Entry:
    kind = d["entry"]
    if kind == "axiom":
        return AxiomRef(int(d["id"]))
    if kind == "theorem":
        return TheoremRef(d["name"])
    if kind == "sub":
        return SubApp.of({sp.parse_term(k).rank: sp.parse_term(v) for k, v in d["binding"].items()})
    if kind == "do":
        return DoApp(sp.parse_term(d["target"]).rank)
    if kind == "def":
        return DefApp(d["def"], tuple(d["path"]), sp.Direction(d["direction"]), d.get("position"))
    if kind in _SIMPLE:
        return _SIMPLE[kind]()
    raise DerivationError(f"unknown entry kind {kind!r}")


def derivation_to_json(d: Derivation) -> dict:
    return {"goal": sp.render_spec(d.goal), "entries": [entry_to_json(e) for e in d.entries]}


def derivation_from_json(d: dict) -> Derivation:
    return Derivation([entry_from_json(e) for e in d["entries"]], sp.parse_spec(d["goal"]))


def dumps_entries(entries) -> str:
    return json.dumps([entry_to_json(e) for e in entries])
