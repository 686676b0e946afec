"""Backward proof search from a goal spec to a derivation.

The first open goal is repeatedly replaced by one of: a stored theorem, an
axiom (each possibly followed by a SUB), an equivalent spec obtained from a
DEF, or an inverse rule with its argument specs as new goals.  Search is
depth-first over alternatives in that order, with iterative deepening on the
number of nested inverse rules and a separate cap on consecutive DEF steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from . import calculus as cal
from . import programs as pg
from . import specs as sp
from .calculus import Derivation, Judgment
from .specs import Direction, SpecKind

LISTS = (SpecKind.LIST, SpecKind.CONDITIONAL_LIST)


class SearchExhausted(RuntimeError):
    def __init__(self, goal: sp.Wff, frontier: list, reason: str = ""):
        self.goal = goal
        self.frontier = frontier
        self.reason = reason
        msg = reason or f"no proof of {sp.render_spec(goal)} within the search bounds"
        if frontier:
            msg += "; dead-end subgoals: " + ", ".join(sp.render_spec(g) for g in frontier)
        super().__init__(msg)


@dataclass
class SearchConfig:
    max_depth: int = 24
    max_def_chain: int = 6
    # "off", "restricted" (abstract the result slot of MUL/REM only) or "full"
    def_eq: str = "restricted"
    order: tuple = ("theorem", "axiom", "commute", "rule", "def")
    max_nodes: int = 200_000

    def __post_init__(self):
        if self.max_depth < 1 or self.max_def_chain < 1 or self.max_nodes < 1:
            raise ValueError("search bounds must be >= 1")
        if self.def_eq not in ("off", "restricted", "full"):
            raise ValueError(f"bad def_eq mode {self.def_eq!r}")


# --- theorem store -------------------------------------------------------------------


@dataclass
class Theorem:
    name: str
    judgment: Judgment
    derivation: Derivation
    simplified: bool = False

    @property
    def spec(self) -> sp.Wff:
        return self.judgment.spec


def _store_key(w: sp.Wff) -> sp.Wff:
    """Canonical form that also renumbers inputs I, J, K, ... by first occurrence."""
    order: dict[int, int] = {}
    for t in sp.terms(w):
        if isinstance(t, sp.InputVar) and t.rank not in order:
            order[t.rank] = len(order) + 1
    renamed = sp.substitute(w, {sp.InputVar(r): sp.InputVar(n) for r, n in order.items()})
    return sp.canonical(renamed)


class TheoremStore:
    """Named theorems, looked up by matching their spec against a goal."""

    def __init__(self):
        self._items: dict[str, Theorem] = {}
        self._by_spec: dict[sp.Wff, str] = {}

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, name: str) -> bool:
        return name in self._items

    def __iter__(self) -> Iterator[Theorem]:
        return iter(self._items.values())

    def get(self, name: str) -> Theorem:
        return self._items[name]

    def add(self, thm: Theorem) -> None:
        self._items[thm.name] = thm
        self._by_spec.setdefault(_store_key(thm.spec), thm.name)

    def find(self, spec: sp.Wff) -> Theorem | None:
        name = self._by_spec.get(_store_key(spec))
        return self._items[name] if name else None

    def before(self, name: str) -> "TheoremStore":
        """A copy holding only the theorems added before ``name``."""
        out = TheoremStore()
        for t in self._items.values():
            if t.name == name:
                break
            out.add(t)
        return out

    def judgments(self) -> dict[str, Judgment]:
        return {name: t.judgment for name, t in self._items.items()}

    def matches(self, goal: sp.Wff) -> list[tuple[str, dict]]:
        out = []
        for t in self._items.values():
            b = sp.match_axiom(goal, t.spec)
            if b is not None:
                out.append((t.name, b))
        return out

    def to_json(self) -> dict:
        return {
            "theorems": [
                {
                    "name": t.name,
                    "spec": sp.render_spec(t.spec),
                    "program": pg.render(t.judgment.program),
                    "simplified": t.simplified,
                    "derivation": cal.derivation_to_json(t.derivation),
                }
                for t in self._items.values()
            ]
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TheoremStore":
        store = cls()
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for item in data["theorems"]:
            j = Judgment(pg.parse_program(item["program"]), sp.parse_spec(item["spec"]))
            store.add(Theorem(item["name"], j, cal.derivation_from_json(item["derivation"]), item.get("simplified", False)))
        return store


# --- proofs ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Alternative:
    kind: str  # "theorem" | "axiom" | "def" | "rule"
    entry: object
    subgoals: tuple = ()
    sub: cal.SubApp | None = None

    def label(self) -> str:
        return self.entry.label() + (f" + {self.sub.label()}" if self.sub else "")


@dataclass
class Proof:
    goal: sp.Wff
    alt: Alternative
    children: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        below = max((c.depth for c in self.children), default=0)
        return below + (1 if self.alt.kind == "rule" else 0)

    def entries(self) -> list:
        out = []
        for c in self.children:
            out.extend(c.entries())
        out.append(self.alt.entry)
        if self.alt.sub is not None:
            out.append(self.alt.sub)
        return out


def _fresh_input(goal: sp.Wff) -> int:
    return max(sp.inputs(goal), default=0) + 1


def _rule_alternatives(goal: sp.Wff, kind: SpecKind) -> list[Alternative]:
    alts = []
    match goal:
        case sp.Not(body) if kind is SpecKind.DECIDE:
            alts.append(Alternative("rule", cal.NotApp(), (body,)))
        case sp.Exists(var, body) if kind is SpecKind.DECIDE:
            x = sp.OutputVar(max(sp.outputs(body), default=0) + 1)
            alts.append(Alternative("rule", cal.QuitApp(), (sp.substitute(body, {var: x}),)))
        case sp.Or(left, right) if kind in LISTS:
            if sp.kind_of(left) in LISTS and sp.kind_of(right) in LISTS:
                alts.append(Alternative("rule", cal.UnionApp(), (left, right)))
        case sp.And(left, right) if kind is SpecKind.DECIDE:
            alts.append(Alternative("rule", cal.AndApp(), (left, right)))
        case sp.And(left, right):
            lk, rk = sp.kind_of(left), sp.kind_of(right)
            if lk is SpecKind.DECIDE and rk in LISTS:
                alts.append(Alternative("rule", cal.IfApp(), (left, right)))
            if lk in LISTS and sp.outputs(right):
                x = sp.OutputVar(sp.outputs(left)[0])
                k = _fresh_input(goal)
                decider = sp.substitute(right, {x: sp.InputVar(k)})
                if sp.kind_of(decider) is SpecKind.DECIDE:
                    alts.append(Alternative("rule", cal.DoApp(k), (left, decider)))
    return alts


_UNFOLD = ("BETW", "FAC", "PFAC", "PRIME")


def _def_moves(goal: sp.Wff, cfg: SearchConfig) -> Iterator[tuple[str, tuple, Direction, int | None]]:
    """Candidate DEF applications as ``(def, path, search direction, position)``."""
    for path, sub in sp.walk(goal):
        match sub:
            case sp.Atom(rel, args):
                if rel in _UNFOLD:
                    yield rel, path, Direction.BACKWARD, None
                if rel == "FAC":
                    yield "REM", path, Direction.FORWARD, None
                if rel == "MUL":
                    yield "MUL", path, Direction.BACKWARD, None
                    # MULT only adds a consequence; adding it twice is pointless
                    implied = sp.Not(sp.atom("LT", args[2], args[0]))
                    if not any(w == implied for _, w in sp.walk(goal)):
                        yield "MULT", path, Direction.BACKWARD, None
                if cfg.def_eq == "full":
                    for i, t in enumerate(args):
                        if not isinstance(t, (sp.OutputVar, sp.BoundVar)):
                            yield "EQ", path, Direction.BACKWARD, i
                elif cfg.def_eq == "restricted" and rel in ("MUL", "REM"):
                    if not sp.outputs(sub) and isinstance(args[2], (sp.InputVar, sp.Literal)):
                        yield "EQ", path, Direction.BACKWARD, 2
            case sp.Exists():
                yield "FAC", path, Direction.FORWARD, None
                yield "SCOPE", path, Direction.BACKWARD, 0
                yield "SCOPE", path, Direction.BACKWARD, 1
            case sp.And():
                yield "BETW", path, Direction.FORWARD, None
                yield "PFAC", path, Direction.FORWARD, None


def _def_alternative(goal, def_id, path, direction, position) -> Alternative | None:
    try:
        new = sp.apply_def(def_id, goal, path, direction, position)
    except sp.SpecError:
        return None
    if new == goal:
        return None
    entry = cal.DefApp(def_id, path, direction.reverse(), position)
    return Alternative("def", entry, (new,))


def expand(goal: sp.Wff, store: TheoremStore | None = None, cfg: SearchConfig | None = None) -> list[Alternative]:
    """Ordered ways to replace ``goal`` in the goal list; empty means dead end."""
    cfg = cfg or SearchConfig()
    kind = sp.kind_of(goal)
    if kind is None:
        return []
    alts: list[Alternative] = []
    for section in cfg.order:
        if section == "theorem" and store is not None:
            for name, b in store.matches(goal):
                alts.append(Alternative("theorem", cal.TheoremRef(name), (), cal.SubApp.of(b) if b else None))
        elif section == "axiom":
            for n, ax in cal.AXIOMS.items():
                b = sp.match_axiom(goal, ax.spec)
                if b is not None:
                    alts.append(Alternative("axiom", cal.AxiomRef(n), (), cal.SubApp.of(b) if b else None))
        elif section == "commute":
            # conjunct order only matters when one side must list for DO or IF
            if isinstance(goal, sp.And) and kind in LISTS:
                alt = _def_alternative(goal, "AND_COMM", (), Direction.BACKWARD, None)
                if alt:
                    alts.append(alt)
        elif section == "rule":
            alts.extend(_rule_alternatives(goal, kind))
        elif section == "def":
            seen = set()
            for move in _def_moves(goal, cfg):
                alt = _def_alternative(goal, *move)
                if alt is not None and alt.subgoals[0] not in seen:
                    seen.add(alt.subgoals[0])
                    alts.append(alt)
    return alts


# No offered DEF move removes more than two wff nodes (the BETW and PFAC folds).
_MAX_SHRINK = 2


def _size(w: sp.Wff) -> int:
    return sum(1 for _ in sp.walk(w))


class _Searcher:
    def __init__(self, store: TheoremStore | None, cfg: SearchConfig):
        self.store = store
        self.cfg = cfg
        self.solved: dict[sp.Wff, Proof] = {}
        self.failed: dict[sp.Wff, list] = {}
        self.hopeless: set[sp.Wff] = set()
        self.cuts = 0
        self.frontier: list[sp.Wff] = []
        self.nodes = 0
        self.cut = False
        self._expansions: dict[sp.Wff, list] = {}
        leaves = [ax.spec for ax in cal.AXIOMS.values()] + [t.spec for t in (store or ())]
        self.largest_leaf = max(_size(w) for w in leaves)

    def alternatives(self, goal: sp.Wff) -> list[Alternative]:
        alts = self._expansions.get(goal)
        if alts is None:
            alts = expand(goal, self.store, self.cfg)
            self._expansions[goal] = alts
            if not alts and goal not in self.frontier:
                self.frontier.append(goal)
        return alts

    def solve(self, goal: sp.Wff, depth: int, chain: int, ancestors: frozenset, after_inner: bool = False) -> Proof | None:
        """Prove ``goal`` with at most ``depth`` nested rules and ``chain`` more DEFs.

        ``after_inner`` is set when the previous step rewrote below the root.
        A root rule is then skipped: splitting first and rewriting inside the
        operand reaches the same subgoals.
        """
        key = sp.canonical(goal)
        if key in ancestors:
            self.cuts += 1
            return None
        known = self.solved.get(key)
        if known is not None and known.depth <= depth:
            return known
        if key in self.hopeless:
            return None
        for d, c, restricted in self.failed.get(key, ()):
            if d >= depth and c >= chain and (after_inner or not restricted):
                return None
        if depth == 0 and _size(goal) - _MAX_SHRINK * chain > self.largest_leaf:
            # only DEFs remain and they cannot shrink the goal to a theorem or axiom
            self.cuts += 1
            return None
        self.nodes += 1
        if self.nodes > self.cfg.max_nodes:
            raise SearchExhausted(goal, [], f"node budget {self.cfg.max_nodes} exhausted")
        cuts_before = self.cuts
        inner = ancestors | {key}
        for alt in self.alternatives(goal):
            if alt.kind == "rule" and (depth == 0 or after_inner):
                self.cut = self.cut or depth == 0
                self.cuts += 1
                continue
            if alt.kind == "def" and chain == 0:
                self.cuts += 1
                continue
            kids = []
            for g in alt.subgoals:
                if alt.kind == "rule":
                    p = self.solve(g, depth - 1, self.cfg.max_def_chain, inner)
                else:
                    p = self.solve(g, depth, chain - 1, inner, bool(alt.entry.path))
                if p is None:
                    break
                kids.append(p)
            else:
                proof = Proof(goal, alt, kids)
                if known is None or proof.depth < known.depth:
                    self.solved[key] = proof
                return proof
        if self.cuts == cuts_before:
            # nothing was pruned below, so no larger budget can help
            self.hopeless.add(key)
        else:
            self.failed.setdefault(key, []).append((depth, chain, after_inner))
        return None


@dataclass
class Synthesis:
    goal: sp.Wff
    proof: Proof
    derivation: Derivation
    judgment: Judgment
    nodes: int = 0


def synthesize(goal: sp.Wff | str, cfg: SearchConfig | None = None, store: TheoremStore | None = None, name: str | None = None) -> Synthesis:
    """Find a derivation of ``goal``; optionally store the result as theorem ``name``."""
    cfg = cfg or SearchConfig()
    if isinstance(goal, str):
        goal = sp.parse_spec(goal)
    sp.check_closed(goal)
    work, all_paths = sp.eliminate_forall(goal)
    try:
        sp.classify(work)
    except sp.Unclassifiable as exc:
        raise SearchExhausted(goal, [], f"unsupported spec: {exc}") from None

    searcher = _Searcher(store, cfg)
    proof = None
    for depth in range(cfg.max_depth + 1):
        searcher.cut = False
        proof = searcher.solve(work, depth, cfg.max_def_chain, frozenset())
        if proof is not None or not searcher.cut:
            break
    if proof is None:
        raise SearchExhausted(goal, _frontier(searcher.frontier))

    # wrap the forall elimination as DEF steps so replay ends at the original goal
    states = [goal]
    for p in all_paths:
        states.append(sp.apply_def("ALL", states[-1], p, Direction.BACKWARD))
    for p, outer in zip(reversed(all_paths), reversed(states[:-1])):
        proof = Proof(outer, Alternative("def", cal.DefApp("ALL", p, Direction.FORWARD)), [proof])

    d = Derivation(proof.entries(), goal)
    theorems = store.judgments() if store is not None else {}
    check = cal.replay_check(d, theorems)
    if not check:
        raise AssertionError(f"search produced an unsound derivation: {check.reason}")
    result = Synthesis(goal, proof, d, check.judgment, searcher.nodes)
    if name is not None and store is not None:
        store.add(Theorem(name, check.judgment, d))
    return result


def _frontier(goals: list[sp.Wff], limit: int = 6) -> list[sp.Wff]:
    """Smallest dead ends first: they name what the calculus cannot build."""
    lists = [g for g in goals if sp.kind_of(g) in LISTS]
    pool = lists or goals
    return sorted(pool, key=lambda g: (len(sp.render_spec(g)), sp.render_spec(g)))[:limit]


# --- backward trace -------------------------------------------------------------------------


def backward_trace(proof: Proof) -> list[tuple[str, list[tuple[str, bool]]]]:
    """Replay the goal-list rewriting; each step is ``(label, [(line, is_new), ...])``."""
    items: list = [("open", proof)]
    steps = [("Given", [(sp.render_spec(proof.goal), True)])]
    while True:
        idx = next((i for i, it in enumerate(items) if it[0] == "open"), None)
        if idx is None:
            break
        node: Proof = items[idx][1]
        alt = node.alt
        if alt.kind in ("axiom", "theorem"):
            repl = [("done", f"{sp.render_spec(node.goal)} = {alt.entry.label()}", node)]
            if alt.sub:
                repl.append(("done", alt.sub.label(), None))
        else:
            repl = [("open", c) for c in node.children]
            repl.append(("done", alt.entry.label(), None))
        items[idx : idx + 1] = repl
        new_ids = {id(r) for r in repl}
        lines = []
        for it in items:
            text = sp.render_spec(it[1].goal) if it[0] == "open" else it[1]
            lines.append((text, id(it) in new_ids and it[0] == "open"))
        steps.append((alt.label(), lines))
    return steps


def format_backward_trace(proof: Proof) -> str:
    out = []
    for n, (label, lines) in enumerate(backward_trace(proof), 1):
        out.append(f"{n}. {label}")
        for text, new in lines:
            out.append(f"     {'**' + text + '**' if new else text}")
    return "\n".join(out)


# --- theorems ------------------------------------------------------------------------------

THEOREMS: tuple[tuple[str, str, str], ...] = (
    ("1", "BETW(I,J,K)", "Is one number exclusively between two others?"),
    ("2", "BETW(I,x,J)", "List all numbers exclusively between two numbers."),
    ("3", "(LT(I,J)^EQ(I,x)) v (~LT(I,J)^EQ(J,x))", "Output the minimum of two numbers."),
    ("4", "FAC(I,J)", "Is one number a factor of another?"),
    ("5", "FAC(x,I)", "List the factors of a number."),
    ("6", "PFAC(x,I)", "List the proper factors of a number."),
    ("7", "PRIME(I)", "Is a number prime?"),
    ("8", "FAC(x,I)^PRIME(x)", "List the prime factors of a number."),
    ("9", "PRIME(x)^BETW(I,x,J)", "List the primes between two numbers."),
    ("10", 'PRIME(x)^BETW("1",x,"100")', "List the primes between 1 and 100."),
)


@dataclass
class BootstrapRow:
    name: str
    spec: str
    program: str
    entries: int
    reused: bool


def store_result(store: TheoremStore, name: str, result: Synthesis, simplify: bool = True) -> Theorem:
    """Store a synthesized theorem, CR1-simplified unless told otherwise."""
    j = result.judgment
    if simplify:
        j = Judgment(pg.simplify_cr1(j.program), j.spec)
    thm = Theorem(name, j, result.derivation, simplified=simplify and j != result.judgment)
    store.add(thm)
    return thm


def bootstrap_theorems(store: TheoremStore, cfg: SearchConfig | None = None, simplify: bool = True) -> list[BootstrapRow]:
    """Synthesize the numbered theorems in order, each reusing the ones before it."""
    cfg = cfg or SearchConfig()
    rows = []
    for name, text, _ in THEOREMS:
        if name in store:
            t = store.get(name)
            rows.append(BootstrapRow(name, text, pg.render(t.judgment.program), len(t.derivation.entries), True))
            continue
        try:
            result = synthesize(text, cfg, store)
        except SearchExhausted as exc:
            raise SearchExhausted(exc.goal, exc.frontier, f"theorem {name}: {exc}") from None
        t = store_result(store, name, result, simplify)
        rows.append(BootstrapRow(name, text, pg.render(t.judgment.program), len(t.derivation.entries), False))
    return rows
