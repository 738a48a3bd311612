import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from musat.formula import (BOT, TOP, And, Atom, Fix, FormulaError, Modal, Not, Op, Or, ParseError, Var,
                           alternation_depth, closure, get_logic, nnf, normalize_vars, parse, parse_raw,
                           prepare, show, size, unfold)

import oracles


def test_parse_mu_diamond():
    f = parse_raw("mu X. (p | <> X)")
    assert f == Fix("mu", "X", Or(Atom("p"), Modal(Op("dia"), (Var("X"),))))


def test_parse_fairness_formula():
    f = parse("nu X. mu Y. ((p & <> X) | <> Y)")
    assert isinstance(f, Fix) and f.kind == "nu"
    assert isinstance(f.body, Fix) and f.body.kind == "mu"
    dia = Op("dia")
    assert f.body.body == Or(And(Atom("p"), Modal(dia, (Var("X"),))), Modal(dia, (Var("Y"),)))


@pytest.mark.parametrize("text, msg", [
    ("mu X. X", "not guarded"),
    ("mu X. p", "never used"),
    ("<> X", "free"),
    ("mu X. ~<> X", "negations"),
])
def test_parse_rejects_bad_variables(text, msg):
    with pytest.raises(FormulaError, match=msg):
        parse(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse("p & & q")
    assert e.value.pos == 4


def test_operator_must_belong_to_logic():
    with pytest.raises(ParseError):
        parse("<1> p", "kripke")
    with pytest.raises(ParseError):
        parse("<> p", "graded")
    with pytest.raises(ParseError):
        parse("L{1;2}(p)", "probabilistic")


def test_presburger_coefficients_positive():
    with pytest.raises(ParseError, match="positive"):
        parse("L{0,1;2}(p, q)", "presburger")


def test_polynomial_parses():
    f = parse("PL{x1*x2;1/4}(a, b)", "poly-probabilistic")
    assert f.op.kind == "PL" and f.op.threshold == Fraction(1, 4)
    assert f.op.poly == ((Fraction(1), (1, 1)),)
    with pytest.raises(ParseError, match="arguments"):
        parse("PL{x1*x2;1/4}(a)", "poly-probabilistic")


def test_infinite_grades_fold_to_constants():
    assert parse("<inf> p", "graded") == BOT
    assert parse("[inf] p", "graded") == TOP


def test_binder_body_extends_right():
    f = parse_raw("nu X. <> X & p")
    assert isinstance(f, Fix) and isinstance(f.body, And)


def test_and_binds_tighter():
    assert parse_raw("p | q & r") == Or(Atom("p"), And(Atom("q"), Atom("r")))


def test_nnf_examples():
    dia, box = Op("dia"), Op("box")
    assert nnf(parse_raw("~ <> p")) == Modal(box, (Atom("p", False),))
    assert nnf(parse_raw("~ mu X. <> X")) == Fix("nu", "X", Modal(box, (Var("X"),)))
    g = nnf(parse_raw("~ <2> p", "graded"))
    assert g == Modal(Op("gbox", Fraction(2)), (Atom("p", False),))


def test_nnf_negated_fixpoint_agrees_on_small_frames():
    f = parse_raw("~ mu X. <> X")
    g = parse_raw("nu X. [] X")
    for n in (1, 2):
        for m in oracles.models("powerset", n, []):
            assert oracles.evaluate(m, f) == oracles.evaluate(m, g)


def test_alternation_depth_examples():
    assert alternation_depth(parse("nu X. <> X")) == 1
    assert alternation_depth(parse("mu X. (p | <> X)")) == 2
    assert alternation_depth(parse("nu X. mu Y. ((p & <> X) | <> Y)")) == 3
    # independent nesting does not add up
    assert alternation_depth(parse("nu X. (<> X & mu Y. (p | <> Y))")) == 2


def test_clean_renames_reused_binders():
    f = parse("(mu X. <> X) | (nu X. [] X)")
    names = [g.var for g in _fixes(f)]
    assert len(set(names)) == 2


def _fixes(f):
    from musat.formula import subformulas
    return [g for g in subformulas(f) if isinstance(g, Fix)]


def test_closure_mu_diamond():
    c = closure(parse("mu X. <> X"))
    assert len(c) == 2
    assert c.show(0) == "mu X. <> X"
    assert c.show(1) == "<> (mu X. <> X)"


def test_closure_boolean():
    c = closure(parse("<> p & [] q"))
    assert sorted(c.show(i) for i in range(len(c))) == sorted(["<> p & [] q", "<> p", "[] q", "p", "q"])


def test_unfold_examples():
    f = parse("mu X. <> X")
    assert unfold(f) == Modal(Op("dia"), (f,))
    g = parse("nu X. (p & <1> X)", "graded")
    assert unfold(g) == And(Atom("p"), Modal(Op("gdia", Fraction(1)), (g,)))
    h = parse("mu X. (p | [] X)")
    assert unfold(h) == Or(Atom("p"), Modal(Op("box"), (h,)))
    with pytest.raises((FormulaError, TypeError, ValueError)):
        unfold(Atom("p"))


def test_size_counts_binary_constants():
    assert size(parse("<5> p", "graded")) > size(parse("<1> p", "graded"))


# -- properties ---------------------------------------------------------------

LOGIC_NAMES = list(oracles.FUNCTOR)


@st.composite
def raw_formulas(draw, logic=None):
    logic = logic or draw(st.sampled_from(LOGIC_NAMES))
    seed = draw(st.integers(0, 2 ** 32))
    rng = random.Random(seed)
    while True:
        f = oracles.random_formula(rng, 5, logic)
        try:
            prepare(f)
        except FormulaError:
            continue
        return logic, f


@settings(max_examples=150, deadline=None)
@given(raw_formulas())
def test_double_negation(lf):
    _, f = lf
    assert normalize_vars(nnf(Not(nnf(Not(f))))) == normalize_vars(nnf(f))


@settings(max_examples=150, deadline=None)
@given(raw_formulas(), st.integers(0, 2 ** 32))
def test_nnf_and_cleaning_preserve_semantics(lf, seed):
    logic, f = lf
    m = oracles.random_model(random.Random(seed), oracles.FUNCTOR[logic], 3)
    assert oracles.evaluate(m, f) == oracles.evaluate(m, prepare(f))


@settings(max_examples=150, deadline=None)
@given(raw_formulas(), st.integers(0, 2 ** 32))
def test_knaster_tarski_equals_kleene(lf, seed):
    logic, f = lf
    m = oracles.random_model(random.Random(seed), oracles.FUNCTOR[logic], 3)
    assert oracles.evaluate(m, f, knaster_tarski=True) == oracles.evaluate(m, f, knaster_tarski=False)


@settings(max_examples=100, deadline=None)
@given(raw_formulas(), st.integers(0, 2 ** 32))
def test_unfolding_preserves_semantics(lf, seed):
    logic, f = lf
    g = prepare(f)
    from musat.formula import subformulas
    m = oracles.random_model(random.Random(seed), oracles.FUNCTOR[logic], 3)
    for h in subformulas(g):
        if isinstance(h, Fix) and not _free(h):
            assert oracles.evaluate(m, h) == oracles.evaluate(m, unfold(h))


def _free(h):
    from musat.formula import free_vars
    return free_vars(h)


@settings(max_examples=100, deadline=None)
@given(raw_formulas())
def test_print_parse_roundtrip(lf):
    logic, f = lf
    g = prepare(f)
    assert parse(show(g), logic) == g


@settings(max_examples=100, deadline=None)
@given(raw_formulas())
def test_closure_size_and_fixed_point(lf):
    logic, f = lf
    chi = prepare(f)
    c = closure(chi)
    assert len(c) <= size(chi)
    members = {c.formula(i) for i in range(len(c))}
    for i in range(len(c)):
        g = c.formula(i)
        if isinstance(g, (And, Or)):
            succ = [g.left, g.right]
        elif isinstance(g, Modal):
            succ = list(g.args)
        elif isinstance(g, Fix):
            succ = [unfold(g)]
        else:
            succ = []
        assert set(succ) <= members


def _ops(logic):
    """A spread of operators per logic (arity at most 2)."""
    if logic == "kripke":
        return [Op("dia"), Op("box")]
    if logic == "graded":
        return [Op(k, Fraction(t)) for k in ("gdia", "gbox") for t in range(3)]
    if logic == "probabilistic":
        return [Op(k, Fraction(t, 3)) for k in ("pdia", "pbox") for t in range(4)]
    if logic == "presburger":
        return [Op(k, Fraction(b), c) for k in ("L", "M") for b in (0, 2) for c in ((1,), (1, 2))]
    return [Op(k, Fraction(1, 4), poly=p) for k in ("PL", "PM") for p in oracles.POLYS]


def _elements(functor, n):
    if functor == "powerset":
        return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]
    if functor == "multiset":
        return [{i: w for i, w in enumerate(ws) if w} for ws in itertools.product(range(3), repeat=n)]
    return list(oracles._grid(n, 3)) + list(oracles._grid(n, 4))


def _subsets(n):
    return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]


@pytest.mark.parametrize("logic", LOGIC_NAMES)
def test_lifting_duality(logic):
    n = 3
    functor = oracles.FUNCTOR[logic]
    universe = frozenset(range(n))
    for op in _ops(logic):
        for t in _elements(functor, n):
            for args in itertools.product(_subsets(n), repeat=op.arity):
                co = [universe - a for a in args]
                assert op.holds(t, list(args)) == (not op.dual().holds(t, co))
                assert op.holds(t, list(args)) == oracles.lift(op, t, list(args))


@pytest.mark.parametrize("logic", LOGIC_NAMES)
def test_lifting_monotone(logic):
    n = 3
    functor = oracles.FUNCTOR[logic]
    subs = _subsets(n)
    for op in _ops(logic):
        for t in _elements(functor, n):
            for args in itertools.product(subs, repeat=op.arity):
                if not op.holds(t, list(args)):
                    continue
                for bigger in itertools.product(subs, repeat=op.arity):
                    if all(a <= b for a, b in zip(args, bigger)):
                        assert op.holds(t, list(bigger))


def test_logic_closed_under_duals():
    for name in LOGIC_NAMES:
        lg = get_logic(name)
        for op in _ops(name):
            assert op.kind in lg.kinds and op.dual().kind in lg.kinds
            assert op.dual().dual() == op
