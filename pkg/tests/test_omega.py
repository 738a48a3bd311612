import random

import pytest

from musat.formula import closure, parse
from musat.omega import (complement, determinize, lasso_accepts_dpa, lasso_accepts_nba, lasso_accepts_npa,
                         parity_to_buchi)
from musat.tracking import Selection, UnfoldStep, build_tracking

import oracles


def automata(text, logic="kripke"):
    npa = build_tracking(closure(parse(text, logic)))
    nba = parity_to_buchi(npa)
    return npa, nba, determinize(nba)


def cycle(npa):
    """``(Selection{<> chi} . UnfoldStep chi)^omega`` for ``chi = eta X. <> X``."""
    c = npa.closure
    return [], [UnfoldStep(0), Selection.of(c, [1])]


def test_no_fixpoints_empty_language():
    npa, nba, _ = automata("<> p & [] q")
    assert nba.evens == []
    rng = random.Random(0)
    for _ in range(50):
        pre, loop = oracles.random_word(rng, npa)
        assert not lasso_accepts_nba(nba, pre, loop)
        assert not lasso_accepts_npa(npa, pre, loop)


def test_mu_diamond_loop_accepted():
    npa, nba, d = automata("mu X. <> X")
    pre, loop = cycle(npa)
    assert lasso_accepts_npa(npa, pre, loop)
    assert lasso_accepts_nba(nba, pre, loop)
    assert lasso_accepts_dpa(d, pre, loop)
    assert not lasso_accepts_dpa(complement(d), pre, loop)


def test_nu_diamond_loop_rejected():
    npa, nba, d = automata("nu X. <> X")
    pre, loop = cycle(npa)
    assert not lasso_accepts_npa(npa, pre, loop)
    assert not lasso_accepts_nba(nba, pre, loop)
    assert lasso_accepts_dpa(complement(d), pre, loop)


def test_dead_trace_rejected():
    npa, nba, d = automata("mu X. <> X")
    loop = [UnfoldStep(0), Selection(frozenset())]
    assert not lasso_accepts_npa(npa, [], loop)
    assert lasso_accepts_dpa(complement(d), [], loop)


def test_nba_size_bound_example():
    npa, nba, _ = automata("mu X. (p | <> X) & nu Y. [] Y")
    n, k = npa.closure.n, npa.closure.k
    assert len(nba) <= n * (k // 2 + 1) + n


def test_nba_copies_respect_guessed_priority():
    npa, nba, _ = automata("nu X. mu Y. ((p & <> X) | <> Y)")
    rng = random.Random(3)
    for _ in range(200):
        letter = rng.choice(npa.alphabet_sample_pool())
        for q in npa.nodes:
            prios = dict(npa.succ(q, letter))
            for p in nba.evens:
                for (t, copy), acc in nba.succ((q, p), letter):
                    assert copy == p and prios[t] <= p and acc == (prios[t] == p)


def _explore(d, rng, steps=300):
    """Random walk over macro-states via the letters that matter there."""
    v = d.initial
    seen = [v]
    for _ in range(steps):
        letters = d.letters(v)
        if not letters:
            v = rng.choice(seen)
            continue
        a = rng.choice(letters)
        yield v, a
        v, _ = d.step(v, a)
        seen.append(v)


@pytest.mark.parametrize("seed", range(5))
def test_label_coherence_and_determinism(seed):
    rng = random.Random(seed)
    f = oracles.random_closed(rng, "kripke", max_size=10, max_ad=2, min_size=5)
    npa = build_tracking(closure(f))
    d = complement(determinize(parity_to_buchi(npa)))
    for v, a in _explore(d, rng):
        u, prio = d.step(v, a)
        assert d.step(v, a) == (u, prio)
        assert d.label(u) == npa.targets(d.label(v), a)
        assert 1 <= prio <= d.max_priority


def test_complement_shifts_priorities():
    npa, nba, d = automata("nu X. mu Y. ((p & <> X) | <> Y)")
    c = complement(d)
    rng = random.Random(5)
    for v, a in _explore(d, rng, 100):
        assert c.step(v, a)[1] == d.step(v, a)[1] + 1
    assert c.max_priority == d.max_priority + 1


def test_complement_partitions_lassos():
    rng = random.Random(9)
    for _ in range(5):
        f = oracles.random_closed(rng, "kripke", max_size=8, max_ad=2, min_size=5)
        npa = build_tracking(closure(f))
        d = determinize(parity_to_buchi(npa))
        c = complement(d)
        for i in range(100):
            pre, loop = oracles.trace_word(rng, npa) if i % 2 else oracles.random_word(rng, npa)
            assert lasso_accepts_dpa(d, pre, loop) != lasso_accepts_dpa(c, pre, loop)
            assert lasso_accepts_dpa(c, pre, loop) == (not oracles.trace_accepts(npa.closure, pre, loop))


def test_lasso_requires_loop():
    npa, nba, d = automata("mu X. <> X")
    with pytest.raises(ValueError):
        lasso_accepts_npa(npa, [], [])
