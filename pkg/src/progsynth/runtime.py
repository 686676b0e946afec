"""Execute programs and check them against brute-force spec semantics."""

from __future__ import annotations

import functools
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import programs as pg
from . import specs as sp

DEFAULT_STEP_LIMIT = 10**7
DEFAULT_BOUND = 128


class RuntimeFault(RuntimeError):
    pass


class StepLimitExceeded(RuntimeFault):
    pass


class UnboundVariable(RuntimeFault):
    pass


class TypeFault(RuntimeFault):
    pass


class RemainderByZero(RuntimeFault):
    pass


class InputError(ValueError):
    pass


@dataclass
class RunResult:
    outputs: list
    steps: int


def format_value(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    return str(v)


# --- interpreter -------------------------------------------------------------------
#
# Programs are compiled to nested closures; each AST node evaluated costs one
# step.  The step budget is checked at every command and loop test.


class _Machine:
    __slots__ = ("inputs", "vars", "out", "steps", "limit")

    def __init__(self, inputs: Mapping[int, int], limit: int):
        self.inputs = inputs
        self.vars: dict = {}
        self.out: list = []
        self.steps = 0
        self.limit = limit

    def tick(self, n: int = 1):
        self.steps += n
        if self.steps > self.limit:
            raise StepLimitExceeded(f"step limit {self.limit} exceeded")


def _int(v):
    if type(v) is not int:
        raise TypeFault(f"expected an integer, got {format_value(v)}")
    return v


def _bool(v):
    if type(v) is not bool:
        raise TypeFault(f"expected a boolean, got {format_value(v)}")
    return v


def _compile_expr(e: pg.Expr):
    """Return ``f(machine) -> value``; also returns the node count of ``e``."""
    match e:
        case pg.BoolLit(v) | pg.IntLit(v):
            return (lambda m: v), 1
        case pg.InVar(r):
            def invar(m):
                try:
                    return m.inputs[r]
                except KeyError:
                    raise UnboundVariable(f"input {pg.var_name(e)} not provided") from None
            return invar, 1
        case pg.ProgVar():
            name = pg.var_name(e)

            def progvar(m):
                try:
                    return m.vars[e]
                except KeyError:
                    raise UnboundVariable(f"{name} read before assignment") from None
            return progvar, 1
        case pg.Not(x):
            f, n = _compile_expr(x)
            return (lambda m: not _bool(f(m))), n + 1
        case pg.And(l, r):
            # both operands are evaluated: the synthesized programs are pure
            fl, nl = _compile_expr(l)
            fr, nr = _compile_expr(r)
            return (lambda m: _bool(fl(m)) & _bool(fr(m))), nl + nr + 1
        case pg.Or(l, r):
            fl, nl = _compile_expr(l)
            fr, nr = _compile_expr(r)
            return (lambda m: _bool(fl(m)) | _bool(fr(m))), nl + nr + 1
        case pg.Eq(l, r):
            fl, nl = _compile_expr(l)
            fr, nr = _compile_expr(r)
            return (lambda m: _int(fl(m)) == _int(fr(m))), nl + nr + 1
        case pg.Lt(l, r):
            fl, nl = _compile_expr(l)
            fr, nr = _compile_expr(r)
            return (lambda m: _int(fl(m)) < _int(fr(m))), nl + nr + 1
        case pg.Mul(l, r):
            fl, nl = _compile_expr(l)
            fr, nr = _compile_expr(r)
            return (lambda m: _int(fl(m)) * _int(fr(m))), nl + nr + 1
        case pg.Rem(l, r):
            fl, nl = _compile_expr(l)
            fr, nr = _compile_expr(r)

            def rem(m):
                x, y = _int(fl(m)), _int(fr(m))
                if y == 0:
                    raise RemainderByZero("remainder by zero")
                return x % y
            return rem, nl + nr + 1
        case pg.Hole():
            raise pg.ProgramError("cannot run a template with holes")
    raise TypeError(e)


def _compile_cmd(c: pg.Cmd):
    match c:
        case pg.Echo(e):
            f, n = _compile_expr(e)

            def echo(m):
                m.tick(n + 1)
                m.out.append(f(m))
            return echo
        case pg.Assign(v, e):
            f, n = _compile_expr(e)

            def assign(m):
                m.tick(n + 1)
                m.vars[v] = f(m)
            return assign
        case pg.Inc(v):
            name = pg.var_name(v)

            def inc(m):
                m.tick()
                try:
                    m.vars[v] = _int(m.vars[v]) + 1
                except KeyError:
                    raise UnboundVariable(f"{name} read before assignment") from None
            return inc
        case pg.If(cond, body):
            f, n = _compile_expr(cond)
            g = _compile_cmd(body)

            def if_(m):
                m.tick(n + 1)
                if _bool(f(m)):
                    g(m)
            return if_
        case pg.For(init, cond, step, body):
            fi = _compile_cmd(init)
            fc, n = _compile_expr(cond)
            fs = _compile_cmd(step)
            fb = _compile_cmd(body)

            def for_(m):
                m.tick()
                fi(m)
                while True:
                    m.tick(n)
                    if not _bool(fc(m)):
                        break
                    fb(m)
                    fs(m)
            return for_
        case pg.Block(body):
            fs = [_compile_cmd(x) for x in body]

            def block(m):
                m.tick()
                for f in fs:
                    f(m)
            return block
    raise TypeError(c)


# Programs are also translated to straight Python source, which runs several
# times faster than the closures.  The closures stay as the fallback for programs
# nested deeper than the Python compiler allows.


def _static_type(e: pg.Expr):
    match e:
        case pg.IntLit() | pg.InVar() | pg.Mul() | pg.Rem():
            return int
        case pg.BoolLit() | pg.Not() | pg.And() | pg.Or() | pg.Eq() | pg.Lt():
            return bool
    return None


class _Source:
    def __init__(self):
        self.lines: list[str] = []
        self.names: dict[str, str] = {}

    def local(self, e) -> str:
        name = ("in_" if isinstance(e, pg.InVar) else "fl_" if e.flag else "pv_") + str(e.rank)
        self.names[name] = pg.var_name(e)
        return name

    def expr(self, e: pg.Expr, want) -> str:
        code = self._raw(e)
        if want is not None and _static_type(e) is not want:
            return f"{'_i' if want is int else '_b'}({code})"
        return code

    def _raw(self, e: pg.Expr) -> str:
        match e:
            case pg.BoolLit(v) | pg.IntLit(v):
                return repr(v)
            case pg.InVar() | pg.ProgVar():
                return self.local(e)
            case pg.Not(x):
                return f"(not {self.expr(x, bool)})"
            case pg.And(l, r):
                return f"({self.expr(l, bool)} & {self.expr(r, bool)})"
            case pg.Or(l, r):
                return f"({self.expr(l, bool)} | {self.expr(r, bool)})"
            case pg.Eq(l, r):
                return f"({self.expr(l, int)} == {self.expr(r, int)})"
            case pg.Lt(l, r):
                return f"({self.expr(l, int)} < {self.expr(r, int)})"
            case pg.Mul(l, r):
                return f"({self.expr(l, int)} * {self.expr(r, int)})"
            case pg.Rem(l, r):
                return f"({self.expr(l, int)} % {self.expr(r, int)})"
            case pg.Hole():
                raise pg.ProgramError("cannot run a template with holes")
        raise TypeError(e)

    def emit(self, depth: int, line: str):
        self.lines.append("    " * depth + line)

    def tick(self, depth: int, n: int):
        self.emit(depth, f"steps += {n}")
        self.emit(depth, "if steps > limit: _over(limit)")

    def cmd(self, c: pg.Cmd, d: int):
        match c:
            case pg.Echo(e):
                self.tick(d, _size(e) + 1)
                self.emit(d, f"out.append({self.expr(e, None)})")
            case pg.Assign(v, e):
                self.tick(d, _size(e) + 1)
                self.emit(d, f"{self.local(v)} = {self.expr(e, None)}")
            case pg.Inc(v):
                self.tick(d, 1)
                name = self.local(v)
                self.emit(d, f"{name} = _i({name}) + 1")
            case pg.If(cond, body):
                self.tick(d, _size(cond) + 1)
                self.emit(d, f"if {self.expr(cond, bool)}:")
                self.cmd(body, d + 1)
            case pg.For(init, cond, step, body):
                self.tick(d, 1)
                self.cmd(init, d)
                self.emit(d, "while True:")
                self.tick(d + 1, _size(cond))
                self.emit(d + 1, f"if not {self.expr(cond, bool)}: break")
                self.cmd(body, d + 1)
                self.cmd(step, d + 1)
            case pg.Block(body):
                self.tick(d, 1)
                for x in body:
                    self.cmd(x, d)
            case _:
                raise TypeError(c)


def _size(e: pg.Expr) -> int:
    return sum(1 for _ in pg.iter_expr(e))


def _over(limit):
    raise StepLimitExceeded(f"step limit {limit} exceeded")


def _translate(p: pg.Program):
    src = _Source()
    body = _Source()
    body.names = src.names
    for c in p.commands:
        body.cmd(c, 2)
    ranks = sorted({int(n[3:]) for n in src.names if n.startswith("in_")})
    src.emit(0, "def program(inputs, limit, out):")
    src.emit(1, "steps = 0")
    for r in ranks:
        src.emit(1, f"if {r} in inputs: in_{r} = inputs[{r}]")
    src.emit(1, "try:")
    src.lines += body.lines or ["        pass"]
    src.emit(1, "finally:")
    src.emit(2, "out.append(steps)")
    scope = {"_i": _int, "_b": _bool, "_over": _over}
    exec(compile("\n".join(src.lines), "<program>", "exec"), scope)
    fn = scope["program"]
    names = dict(src.names)

    def runner(m: _Machine):
        sink: list = []
        try:
            fn(m.inputs, m.limit, sink)
        except NameError as exc:
            local = str(exc).split("'")[1] if "'" in str(exc) else ""
            shown = names.get(local, local)
            if local.startswith("in_"):
                raise UnboundVariable(f"input {shown} not provided") from None
            raise UnboundVariable(f"{shown} read before assignment") from None
        except ZeroDivisionError:
            raise RemainderByZero("remainder by zero") from None
        finally:
            m.steps = sink.pop()
            m.out = sink
    return runner


_CACHE: dict = {}


def _closures(p: pg.Program):
    fs = [_compile_cmd(c) for c in p.commands]

    def fn(m):
        for f in fs:
            f(m)
    return fn


def compile_program(p: pg.Program, native: bool = True):
    key = (p, native)
    fn = _CACHE.get(key)
    if fn is None:
        fn = None
        if native:
            try:
                fn = _translate(p)
            except (SyntaxError, RecursionError, MemoryError):
                fn = None
        if fn is None:
            fn = _closures(p)
        if len(_CACHE) > 4096:
            _CACHE.clear()
        _CACHE[key] = fn
    return fn


def run(p: pg.Program, env: Mapping[int, int], step_limit: int = DEFAULT_STEP_LIMIT, native: bool = True) -> RunResult:
    """Run ``p`` with input ranks bound by ``env`` (``{1: i, 2: j, ...}``).

    ``native=False`` forces the closure interpreter; both give the same outputs,
    step counts and faults.
    """
    for r, v in env.items():
        if type(v) is not int or v < 1:
            raise InputError(f"input ${sp.rank_name('ijk', r)} must be a positive integer, got {v!r}")
    m = _Machine(dict(env), step_limit)
    compile_program(p, native)(m)
    return RunResult(m.out, m.steps)


# --- oracle ----------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _prime(x: int) -> bool:
    # no proper factor and not below 2, checked by trial over every candidate
    return x >= 2 and not any(_relation("PFAC", [d, x]) for d in range(2, x))


def _relation(rel: str, xs: list[int]) -> bool:
    match rel, xs:
        case "EQ", (x, y):
            return x == y
        case "LT", (x, y):
            return x < y
        case "BETW", (x, y, z):
            return x < y < z
        case "MUL", (x, y, z):
            return x * y == z
        case "FAC", (x, y):
            return x > 0 and y > 0 and y % x == 0
        case "REM", (x, y, z):
            return y > 0 and x % y == z
        case "PFAC", (x, y):
            return _relation("FAC", [x, y]) and 1 < x < y
        case "PRIME", (x,):
            return _prime(x)
    raise sp.SpecError(f"cannot evaluate {rel}{tuple(xs)}")


def _value(t: sp.Term, env: Mapping[int, int], out: Mapping[int, int], bound: Mapping[int, int]) -> int:
    match t:
        case sp.Literal(v):
            return v
        case sp.InputVar(r):
            return env[r]
        case sp.OutputVar(r):
            return out[r]
        case sp.BoundVar(r):
            return bound[r]
    raise TypeError(t)


def _holds(w: sp.Wff, env, out, bound, limit: int, memo: dict | None = None) -> bool:
    # memo caches output-free subformulas while a listing tries each candidate output
    if memo is not None and w in memo:
        cache = memo[w]
        key = tuple(sorted(bound.items()))
        if key not in cache:
            cache[key] = _eval(w, env, out, bound, limit, memo)
        return cache[key]
    return _eval(w, env, out, bound, limit, memo)


def _eval(w: sp.Wff, env, out, bound, limit: int, memo) -> bool:
    match w:
        case sp.Atom(rel, args):
            return _relation(rel, [_value(a, env, out, bound) for a in args])
        case sp.Not(b):
            return not _holds(b, env, out, bound, limit, memo)
        case sp.And(l, r):
            return _holds(l, env, out, bound, limit, memo) and _holds(r, env, out, bound, limit, memo)
        case sp.Or(l, r):
            return _holds(l, env, out, bound, limit, memo) or _holds(r, env, out, bound, limit, memo)
        case sp.Exists(v, b):
            return any(_holds(b, env, out, {**bound, v.rank: n}, limit, memo) for n in range(1, limit + 1))
        case sp.Forall(v, b):
            return all(_holds(b, env, out, {**bound, v.rank: n}, limit, memo) for n in range(1, limit + 1))
    raise TypeError(w)


def _output_free(w: sp.Wff) -> dict:
    """One empty cache per compound subformula that never mentions an output."""
    return {sub: {} for _, sub in sp.walk(w) if not isinstance(sub, sp.Atom) and not sp.outputs(sub)}


def quantifier_bound(w: sp.Wff, env: Mapping[int, int], bound: int) -> int:
    return max([bound, *env.values(), *sp.literals(w)])


# Wffs are also translated to Python expressions.  Quantifiers become any/all
# over ranges; in a listing, closed subformulas that mention no output are
# evaluated once per environment instead of once per candidate.

_REL_CODE = {
    "EQ": "({0} == {1})",
    "LT": "({0} < {1})",
    "BETW": "({0} < {1} < {2})",
    "MUL": "({0} * {1} == {2})",
    "FAC": "({0} > 0 and {1} > 0 and {1} % {0} == 0)",
    "REM": "({1} > 0 and {0} % {1} == {2})",
    "PFAC": "({0} > 0 and {1} > 0 and {1} % {0} == 0 and 1 < {0} < {1})",
    "PRIME": "_prime({0})",
}


def _term_code(t: sp.Term) -> str:
    match t:
        case sp.Literal(v):
            return repr(v)
        case sp.InputVar(r):
            return f"in_{r}"
        case sp.OutputVar(r):
            return f"out_{r}"
        case sp.BoundVar(r):
            return f"bv_{r}"
    raise TypeError(t)


def _free_bound(w: sp.Wff) -> set[int]:
    match w:
        case sp.Atom(_, args):
            return {t.rank for t in args if isinstance(t, sp.BoundVar)}
        case sp.Not(b):
            return _free_bound(b)
        case sp.And(l, r) | sp.Or(l, r):
            return _free_bound(l) | _free_bound(r)
        case sp.Exists(v, b) | sp.Forall(v, b):
            return _free_bound(b) - {v.rank}
    raise TypeError(w)


def _wff_code(w: sp.Wff, hoisted: list | None) -> str:
    if hoisted is not None and not isinstance(w, sp.Atom) and not sp.outputs(w) and not _free_bound(w):
        hoisted.append(_wff_code(w, None))
        return f"h_{len(hoisted) - 1}"
    match w:
        case sp.Atom(rel, args):
            if rel not in _REL_CODE or len(args) != sp.RELATIONS.get(rel):
                raise sp.SpecError(f"cannot evaluate {rel}{tuple(args)}")
            return _REL_CODE[rel].format(*(_term_code(t) for t in args))
        case sp.Not(b):
            return f"(not {_wff_code(b, hoisted)})"
        case sp.And(l, r):
            return f"({_wff_code(l, hoisted)} and {_wff_code(r, hoisted)})"
        case sp.Or(l, r):
            return f"({_wff_code(l, hoisted)} or {_wff_code(r, hoisted)})"
        case sp.Exists(v, b) | sp.Forall(v, b):
            fn = "any" if isinstance(w, sp.Exists) else "all"
            return f"{fn}({_wff_code(b, hoisted)} for bv_{v.rank} in range(1, limit + 1))"
    raise TypeError(w)


_ORACLES: dict = {}


def _oracle_fn(w: sp.Wff, listing: bool):
    key = (w, listing)
    if key in _ORACLES:
        return _ORACLES[key]
    lines = ["def oracle(env, out, limit):"]
    lines += [f"    in_{r} = env[{r}]" for r in sorted(sp.inputs(w))]
    try:
        if listing:
            hoisted: list = []
            x = sp.outputs(w)[0]
            body = _wff_code(w, hoisted)
            lines += [f"    h_{n} = {code}" for n, code in enumerate(hoisted)]
            lines.append(f"    return [out_{x} for out_{x} in range(1, limit + 1) if {body}]")
        else:
            lines += [f"    out_{r} = out[{r}]" for r in sp.outputs(w)]
            lines.append(f"    return bool({_wff_code(w, None)})")
        scope = {"_prime": _prime}
        exec(compile("\n".join(lines), "<oracle>", "exec"), scope)
        fn = scope["oracle"]
    except (SyntaxError, RecursionError, MemoryError):
        fn = None
    if len(_ORACLES) > 4096:
        _ORACLES.clear()
    _ORACLES[key] = fn
    return fn


def oracle_decide(
    w: sp.Wff, env: Mapping[int, int], bound: int = DEFAULT_BOUND, outputs=None, native: bool = True
) -> bool:
    """Truth of ``w`` with quantifiers ranging over ``[1..max(bound, inputs, literals)]``."""
    limit = quantifier_bound(w, env, bound)
    fn = _oracle_fn(w, False) if native else None
    if fn is not None:
        return fn(env, outputs or {}, limit)
    return _holds(w, env, outputs or {}, {}, limit)


def oracle_list(w: sp.Wff, env: Mapping[int, int], bound: int = DEFAULT_BOUND, native: bool = True) -> list[int]:
    outs = sp.outputs(w)
    if len(outs) != 1:
        raise sp.Unclassifiable("listing needs exactly one output variable")
    limit = quantifier_bound(w, env, bound)
    fn = _oracle_fn(w, True) if native else None
    if fn is not None:
        return fn(env, {}, limit)
    memo = _output_free(w)
    return [v for v in range(1, limit + 1) if _holds(w, env, {outs[0]: v}, {}, limit, memo)]


# --- judgment checking ---------------------------------------------------------------------


@dataclass
class Disagreement:
    env: dict
    expected: object
    got: object

    def to_json(self) -> dict:
        got = self.got if isinstance(self.got, str) else [format_value(v) for v in self.got]
        exp = format_value(self.expected) if isinstance(self.expected, bool) else self.expected
        return {"env": {sp.rank_name("IJK", r): v for r, v in self.env.items()}, "expected": exp, "got": got}


@dataclass
class Report:
    spec: str
    kind: str
    envs: int = 0
    steps: int = 0
    max_steps: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "kind": self.kind,
            "envs": self.envs,
            "ok": self.ok,
            "steps": self.steps,
            "max_steps": self.max_steps,
            "disagreements": len(self.disagreements),
            "first_failure": self.disagreements[0].to_json() if self.disagreements else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def grid_envs(ranks: list[int], grid) -> Iterable[dict]:
    """Cross product of per-input ranges; ``grid`` maps rank -> values or is one shared range."""
    if isinstance(grid, Mapping):
        axes = [list(grid[r]) for r in ranks]
    else:
        axes = [list(grid)] * len(ranks)
    for combo in itertools.product(*axes):
        yield dict(zip(ranks, combo))


def check_judgment(
    j,
    grid,
    mode: str = "multiset",
    bound: int = DEFAULT_BOUND,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> Report:
    """Compare ``j.program`` with the oracle of ``j.spec`` on every grid point.

    Decide specs must echo exactly one boolean equal to the oracle.  List specs
    compare multisets of echoed integers against the oracle's set; ``mode="set"``
    drops duplicates first.
    """
    if mode not in ("set", "multiset"):
        raise ValueError(f"unknown mode {mode!r}")
    kind = sp.classify_rewritten(j.spec)
    ranks = sorted(sp.inputs(j.spec))
    report = Report(sp.render_spec(j.spec), kind.value)
    for env in grid_envs(ranks, grid):
        report.envs += 1
        try:
            res = run(j.program, env, step_limit)
        except RuntimeFault as exc:
            report.disagreements.append(Disagreement(env, None, f"error: {exc}"))
            continue
        report.steps += res.steps
        report.max_steps = max(report.max_steps, res.steps)
        if kind is sp.SpecKind.DECIDE:
            expected = oracle_decide(j.spec, env, bound)
            if res.outputs != [expected] or type(res.outputs[0]) is not bool:
                report.disagreements.append(Disagreement(env, expected, res.outputs))
        else:
            expected = oracle_list(j.spec, env, bound)
            got = res.outputs
            if any(type(v) is not int for v in got):
                report.disagreements.append(Disagreement(env, expected, got))
                continue
            if mode == "set":
                same = set(got) == set(expected)
            else:
                same = Counter(got) == Counter(expected)
            if not same:
                report.disagreements.append(Disagreement(env, expected, got))
    return report
