import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from progsynth import calculus as cal
from progsynth import programs as pg
from progsynth import runtime as rt
from progsynth import specs as sp

from .conftest import divisors, sieve
from .strategies import programs, wffs

FACTOR_LISTER = "for ($a = 1 ; !($i < $a) ; ++$a) { if (($i % $a) == 0) echo $a ; } ;"
PRIME_CHECKER = (
    "$A = FALSE ; for ($a = 1 ; $a < $i ; ++$a) { if (1 < $a) { if (($i % $a) == 0) $A = TRUE ; } ; } ; "
    "echo (!($A)) && (!($i < 2)) ;"
)


def run(text, **inputs):
    env = {"ijk".index(k) + 1: v for k, v in inputs.items()}
    return rt.run(pg.parse_program(text), env).outputs


def test_factor_lister_on_twelve():
    assert run(FACTOR_LISTER, i=12) == [1, 2, 3, 4, 6, 12]


def test_prime_checker_edges():
    assert run(PRIME_CHECKER, i=1) == [False]
    assert run(PRIME_CHECKER, i=2) == [True]
    assert run(PRIME_CHECKER, i=9) == [False]


def test_arithmetic_and_boolean_operators():
    assert run("echo $i * $j ; echo $i % $j ; echo $i == $j ; echo $i < $j ;", i=7, j=3) == [21, 1, False, False]
    assert run("echo TRUE && !(FALSE) ; echo FALSE || FALSE ;") == [True, False]


def test_loop_variable_survives_the_loop():
    assert run("for ($a = 1 ; $a < 4 ; ++$a) echo $a ; echo $a ;") == [1, 2, 3, 4]


def test_format_value():
    assert [rt.format_value(v) for v in (True, False, 0, 12)] == ["TRUE", "FALSE", "0", "12"]


@pytest.mark.parametrize("bad", [0, -3, 2.5, "4", True])
def test_inputs_must_be_positive_integers(bad):
    with pytest.raises(rt.InputError):
        rt.run(pg.parse_program("echo $i ;"), {1: bad})


def test_step_limit_stops_a_long_loop():
    with pytest.raises(rt.StepLimitExceeded):
        rt.run(pg.parse_program("for ($a = 1 ; $a < $i ; ++$a) echo $a ;"), {1: 10_000}, step_limit=500)


def test_remainder_by_zero_faults():
    with pytest.raises(rt.RemainderByZero):
        run("echo $i % 0 ;", i=3)


def test_reading_an_unset_variable_faults():
    with pytest.raises(rt.UnboundVariable):
        run("echo $b ;")
    with pytest.raises(rt.UnboundVariable):
        run("echo $j ;", i=1)


def test_type_mismatch_faults():
    with pytest.raises(rt.TypeFault):
        run("echo $i && TRUE ;", i=1)


# --- oracle ---------------------------------------------------------------------------


def test_prime_relation_matches_the_sieve():
    primes = set(sieve(500))
    w = sp.parse_spec("PRIME(I)")
    assert {n for n in range(1, 501) if rt.oracle_decide(w, {1: n})} == primes


def test_fac_listing_matches_divisors():
    w = sp.parse_spec("FAC(x,I)")
    for n in range(1, 61):
        assert rt.oracle_list(w, {1: n}) == divisors(n)


def test_quantifier_range_covers_inputs_and_literals():
    w = sp.parse_spec("(exists A)EQ(A,I)")
    assert rt.oracle_decide(w, {1: 500}, bound=10)
    assert rt.quantifier_bound(sp.parse_spec('LT(I,"300")'), {1: 4}, 10) == 300


def test_forall_is_evaluated_directly():
    smallest = sp.parse_spec("FAC(x,I)^LT(\"1\",x)^(all A)(~FAC(A,I) v ~LT(\"1\",A) v ~LT(A,x))")
    for n in range(2, 40):
        assert rt.oracle_list(smallest, {1: n}) == [min(d for d in divisors(n) if d > 1)]


def test_outputs_supplied_to_the_decider():
    w = sp.parse_spec("MUL(I,J,x)")
    assert rt.oracle_decide(w, {1: 3, 2: 4}, outputs={1: 12})
    assert not rt.oracle_decide(w, {1: 3, 2: 4}, outputs={1: 11})


def test_grid_envs_shared_and_per_rank():
    assert len(list(rt.grid_envs([1, 2, 3], range(1, 13)))) == 1728
    assert list(rt.grid_envs([1, 2], {1: [5], 2: [1, 2]})) == [{1: 5, 2: 1}, {1: 5, 2: 2}]


# --- judgment checks -----------------------------------------------------------------


def J(prog, spec):
    return cal.Judgment(pg.parse_program(prog), sp.parse_spec(spec))


def test_check_accepts_the_factor_lister():
    report = rt.check_judgment(J(FACTOR_LISTER, "FAC(x,I)"), range(1, 41))
    assert report.ok and report.envs == 40 and report.max_steps > 0


def test_check_reports_a_wrong_decider():
    report = rt.check_judgment(J("echo $i < $j ;", "~LT(J,I)"), range(1, 6))
    # disagrees exactly on the diagonal
    assert [d.env for d in report.disagreements] == [{1: n, 2: n} for n in range(1, 6)]
    doc = report.to_json()
    assert doc["ok"] is False and doc["disagreements"] == 5
    assert doc["first_failure"] == {"env": {"I": 1, "J": 1}, "expected": "TRUE", "got": ["FALSE"]}


def test_check_distinguishes_set_and_multiset():
    twice = J("echo $i ; echo $i ;", "EQ(I,x)")
    assert not rt.check_judgment(twice, range(1, 4)).ok
    assert rt.check_judgment(twice, range(1, 4), mode="set").ok


def test_check_records_runtime_faults():
    report = rt.check_judgment(J("echo $i % 0 ;", "REM(I,\"2\",x)"), range(1, 3))
    assert len(report.disagreements) == 2
    assert report.disagreements[0].got.startswith("error:")


def test_decider_must_echo_one_boolean():
    assert not rt.check_judgment(J("echo 1 ;", "LT(I,J)"), range(1, 3)).ok
    assert not rt.check_judgment(J("echo TRUE ; echo TRUE ;", "EQ(I,I)"), range(1, 3)).ok


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40))
def test_axioms_agree_with_the_oracle_pointwise(x, y):
    for ax in cal.AXIOMS.values():
        env = {r: v for r, v in zip(sorted(sp.inputs(ax.spec)), (x, y))}
        got = rt.run(ax.program, env).outputs
        if not sp.outputs(ax.spec):
            assert got == [rt.oracle_decide(ax.spec, env)]
        elif ax.id == 5 and x % y == 0:
            # a zero remainder is echoed but lies outside the positive universe
            assert got == [0] and rt.oracle_list(ax.spec, env) == []
        else:
            # products reach 40 * 40, past the default listing bound
            assert sorted(got) == rt.oracle_list(ax.spec, env, bound=1600)


# --- compiled runner vs closure interpreter ----------------------------------------------------


def _outcome(p, env, limit, native):
    try:
        res = rt.run(p, env, limit, native=native)
    except rt.RuntimeFault as exc:
        return type(exc).__name__, str(exc)
    return res.outputs, res.steps


@st.composite
def loose_exprs(draw, depth=3):
    """Expressions with no typing discipline, reading variables that may be unset."""
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        return draw(
            st.one_of(
                st.builds(pg.IntLit, st.integers(0, 9)),
                st.sampled_from([pg.TRUE, pg.FALSE]),
                st.builds(pg.InVar, st.integers(1, 3)),
                st.builds(pg.ProgVar, st.integers(1, 2), st.booleans()),
            )
        )
    if draw(st.booleans()):
        return pg.Not(draw(loose_exprs(depth - 1)))
    cls = draw(st.sampled_from([pg.And, pg.Or, pg.Eq, pg.Lt, pg.Mul, pg.Rem]))
    return cls(draw(loose_exprs(depth - 1)), draw(loose_exprs(depth - 1)))


@st.composite
def loose_programs(draw):
    def var():
        return pg.ProgVar(draw(st.integers(1, 2)), draw(st.booleans()))

    def cmd(depth):
        choice = draw(st.integers(0, 5 if depth else 2))
        if choice == 0:
            return pg.Echo(draw(loose_exprs()))
        if choice == 1:
            return pg.Assign(var(), draw(loose_exprs()))
        if choice == 2:
            return pg.Inc(var())
        if choice == 3:
            return pg.If(draw(loose_exprs()), cmd(depth - 1))
        if choice == 4:
            return pg.Block(tuple(cmd(depth - 1) for _ in range(draw(st.integers(0, 3)))))
        v = var()
        return pg.For(pg.Assign(v, pg.IntLit(1)), draw(loose_exprs()), pg.Inc(v), cmd(depth - 1))

    return pg.Program(tuple(cmd(2) for _ in range(draw(st.integers(1, 4)))))


@settings(max_examples=300, deadline=None)
@given(loose_programs(), st.dictionaries(st.integers(1, 3), st.integers(1, 6)), st.integers(1, 400))
def test_compiled_runner_matches_closures_on_faulty_programs(p, env, limit):
    assert _outcome(p, env, limit, True) == _outcome(p, env, limit, False)


@settings(max_examples=150, deadline=None)
@given(programs(), st.integers(1, 9), st.integers(1, 9))
def test_compiled_runner_matches_closures(p, i, j):
    env = {1: i, 2: j}
    assert _outcome(p, env, rt.DEFAULT_STEP_LIMIT, True) == _outcome(p, env, rt.DEFAULT_STEP_LIMIT, False)


def test_deep_nesting_falls_back_to_closures():
    body: pg.Cmd = pg.Echo(pg.IntLit(7))
    for _ in range(30):
        body = pg.For(pg.Assign(pg.ProgVar(1), pg.IntLit(1)), pg.Lt(pg.ProgVar(1), pg.IntLit(2)), pg.Inc(pg.ProgVar(1)), body)
    p = pg.Program((body,))
    with pytest.raises(SyntaxError):
        rt._translate(p)
    assert rt.run(p, {}).outputs == [7]
    assert rt.run(p, {}) == rt.run(p, {}, native=False)


# --- compiled oracle vs tree-walking evaluator -------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(wffs(depth=4), st.integers(1, 12), st.integers(1, 12), st.integers(1, 10))
def test_compiled_oracle_decides_like_the_evaluator(w, i, j, bound):
    env = {r: v for r, v in ((1, i), (2, j)) if r in sp.inputs(w)}
    assert rt.oracle_decide(w, env, bound) is rt.oracle_decide(w, env, bound, native=False)


@settings(max_examples=300, deadline=None)
@given(wffs(depth=4, outputs=True), st.integers(1, 12), st.integers(1, 12), st.integers(1, 10))
def test_compiled_oracle_lists_like_the_evaluator(w, i, j, bound):
    if len(sp.outputs(w)) != 1:
        return
    env = {r: v for r, v in ((1, i), (2, j)) if r in sp.inputs(w)}
    assert rt.oracle_list(w, env, bound) == rt.oracle_list(w, env, bound, native=False)


def test_listing_with_an_output_free_conjunct():
    w = sp.parse_spec("(exists A)(PFAC(A,I)^PFAC(A,J))^FAC(x,K)")
    assert rt.oracle_list(w, {1: 12, 2: 18, 3: 10}) == [1, 2, 5, 10]
    assert rt.oracle_list(w, {1: 7, 2: 18, 3: 10}) == []
