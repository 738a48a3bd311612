import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from musat.formula import Op
from musat.onestep import (OneStepInstance, OracleTooLarge, check_witness, fm_feasible, oracle, solve,
                           solve_kripke, solve_polynomial)

import oracles

F = Fraction
dia, box = Op("dia"), Op("box")


def inst(lits, U, nullary=()):
    return OneStepInstance.make(lits, U, nullary)


def test_kripke_example():
    i = inst([(dia, "a"), (box, "b")], [{"a", "b"}, {"b"}])
    r = solve("kripke", i)
    assert r.sat and frozenset({"a", "b"}) in r.witness
    # the witness is the set of all box-satisfying elements
    assert r.witness == frozenset({frozenset({"a", "b"}), frozenset({"b"})})


def test_kripke_trivial_cases():
    assert solve("kripke", inst([(box, "a")], [])).witness == frozenset()
    assert not solve("kripke", inst([(dia, "a")], []))
    assert not solve("kripke", inst([(dia, "a"), (box, "b")], [{"b"}]))


def test_nullary_literals():
    i = inst([(dia, "a")], [{"a"}], nullary=[("p", True), ("p", False)])
    assert not solve("kripke", i)
    assert not solve("kripke", inst([], [{"a"}], nullary=["bot"]))
    assert solve("kripke", inst([(dia, "a")], [{"a"}], nullary=["top", ("p", True)]))


def test_probabilistic_empty_base():
    assert not solve("probabilistic", inst([], []))


def test_graded_examples():
    assert not solve("graded", inst([(Op("gdia", F(5)), "a"), (Op("gbox", F(3)), "b")], [{"a"}]))
    r = solve("graded", inst([(Op("gdia", F(1)), "a")], [{"a"}]))
    assert r.witness == {frozenset({"a"}): 2}
    assert not solve("graded", inst([(Op("gdia", F(3)), "a"), (Op("gbox", F(2)), "b")], [{"a"}]))


def test_presburger_example():
    r = solve("presburger", inst([(Op("L", F(3), (1, 1)), ("a", "b"))], [{"a", "b"}]))
    assert r.witness == {frozenset({"a", "b"}): 2}


def test_probabilistic_examples():
    half, third = Op("pdia", F(1, 2)), Op("pdia", F(1, 3))
    assert not solve("probabilistic", inst([(half, "a"), (half, "b")], [{"a"}, {"b"}]))
    r = solve("probabilistic", inst([(third, "a"), (third, "b")], [{"a"}, {"b"}]))
    assert r.sat and all(w > F(1, 3) for w in r.witness.values())
    r = solve("probabilistic", inst([], [{"a"}]))
    assert r.witness == {frozenset({"a"}): 1}


def test_polynomial_examples():
    prod = ((F(1), (1, 1)),)
    r = solve("poly-probabilistic", inst([(Op("PL", F(1, 5), poly=prod), ("a", "b"))], [{"a", "b"}]))
    assert r.witness == {frozenset({"a", "b"}): 1}
    r = solve("poly-probabilistic", inst([(Op("PL", F(1, 4), poly=prod), ("a", "b"))], [{"a"}, {"b"}]))
    assert not r.sat
    r = solve("poly-probabilistic", inst([], [{"a"}]))
    assert r.witness == {frozenset({"a"}): 1}


def test_polynomial_depth_limit_flags_incomplete():
    # d_a * d_b > 1/4 fails only at the boundary point (1/2, 1/2), so the
    # boxes around it can never be refuted
    op = Op("PL", F(1, 4), poly=((F(1), (1, 1)),))
    r = solve_polynomial(inst([(op, ("a", "b"))], [{"a"}, {"b"}]), depth=4)
    assert not r.sat and r.incomplete


def test_wrong_logic_rejected():
    with pytest.raises(ValueError):
        solve("graded", inst([(dia, "a")], [{"a"}]))


def test_oracle_size_limit():
    U = [{x} for x in "abcde"]
    with pytest.raises(OracleTooLarge):
        oracle("kripke", inst([(dia, "a")], U))


def test_fourier_motzkin_strictness():
    # x > 0, y > 0, x + y <= 0 is infeasible; with >= it is feasible at 0
    strict = [({"x": F(1)}, F(0), True), ({"y": F(1)}, F(0), True), ({"x": F(-1), "y": F(-1)}, F(0), False)]
    assert fm_feasible(strict, ["x", "y"]) is None
    weak = [(c, k, False) for c, k, _ in strict]
    sol = fm_feasible(weak, ["x", "y"])
    assert sol == {"x": 0, "y": 0}


def test_kripke_step_bound():
    for i in oracles.kripke_family(("a", "b"), 4):
        r = solve_kripke(i)
        assert r.steps <= len(i.literals) * len(i.U)


def test_graded_family_small():
    for i in oracles.graded_family(("a", "b"), 3):
        assert solve("graded", i).sat == oracle("graded", i)


def test_cap_soundness_small():
    for i in oracles.graded_family(("a", "b"), 3):
        B = max((int(op.threshold) for op, _ in i.literals if op.lower), default=0) + 1
        assert oracle("graded", i, bound=B) == oracle("graded", i, bound=B + 3)


def test_probabilistic_against_lp():
    rng = random.Random(2)
    for _ in range(200):
        i = oracles.random_probabilistic_instance(rng)
        assert solve("probabilistic", i).sat == oracles.lp_feasible(i)


def test_polynomial_against_grid():
    rng = random.Random(4)
    for _ in range(150):
        i = oracles.random_polynomial_instance(rng)
        r = solve("poly-probabilistic", i)
        if oracle("poly-probabilistic", i, max_denominator=12):
            assert r.sat
        if r.sat:
            assert _independent_check(i, r.witness)


def _independent_check(i, w) -> bool:
    # witness masses over U, evaluated through the test-side liftings
    U = list(i.U)
    if isinstance(w, frozenset):
        t = frozenset(j for j, u in enumerate(U) if u in w)
    else:
        t = {j: w.get(u, 0) for j, u in enumerate(U) if w.get(u, 0)}
    for op, args in i.literals:
        sets = [frozenset(j for j, u in enumerate(U) if a in u) for a in args]
        if not oracles.lift(op, t, sets):
            return False
    return True


# -- properties ---------------------------------------------------------------

LOGICS = list(oracles.FUNCTOR)
VARS = ("a", "b", "c")


def _random_instance(rng, logic):
    if logic == "probabilistic":
        return oracles.random_probabilistic_instance(rng)
    if logic == "poly-probabilistic":
        return oracles.random_polynomial_instance(rng)
    lits = []
    for x in VARS:
        if rng.random() < 0.6:
            op = oracles.random_op(rng, logic)
            args = (x,) if op.arity == 1 else tuple(rng.choice(VARS) for _ in range(op.arity))
            lits.append((op, args))
    U = rng.sample(oracles._powerset(VARS), rng.randint(0, 3))
    return OneStepInstance.make(lits, U)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(LOGICS), st.integers(0, 2 ** 32))
def test_witness_soundness(logic, seed):
    i = _random_instance(random.Random(seed), logic)
    r = solve(logic, i)
    if r.sat:
        assert check_witness(logic, i, r.witness)
        assert _independent_check(i, r.witness)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(LOGICS), st.integers(0, 2 ** 32), st.integers(0, 7))
def test_monotone_in_U(logic, seed, extra):
    rng = random.Random(seed)
    i = _random_instance(rng, logic)
    bigger = OneStepInstance(i.literals, i.U | {oracles._powerset(VARS)[extra]}, i.nullary)
    if solve(logic, i).sat:
        assert solve(logic, bigger).sat


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(LOGICS), st.integers(0, 2 ** 32))
def test_antitone_in_literals(logic, seed):
    rng = random.Random(seed)
    i = _random_instance(rng, logic)
    if not i.literals:
        return
    fewer = OneStepInstance(i.literals[:-1], i.U, i.nullary)
    if solve(logic, i).sat:
        assert solve(logic, fewer).sat
