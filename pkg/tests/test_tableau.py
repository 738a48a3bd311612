import itertools
import random

import pytest

from musat.formula import parse
from musat.tableau import (EXHAUSTED, SAT, UNSAT, Tableau, compress_cycles, compress_priorities,
                           nested_fixpoint, nested_fixpoint_local, run)
from musat.tracking import Selection

import oracles


def full(text, logic="kripke"):
    tab = Tableau(parse(text, logic), logic)
    todo = [tab.v0]
    while todo:
        v = todo.pop()
        if v not in tab.succ:
            todo.extend(tab.expand(v))
    return tab


def find(tab, pred):
    return next(v for v in tab.order if pred(tab.closure, tab.label(v)))


def shows(c, lab):
    return {c.show(i) for i in lab}


# -- run examples --------------------------------------------------------------

@pytest.mark.parametrize("text, verdict", [
    ("nu X. <> X", SAT),
    ("mu X. <> X", UNSAT),
    ("mu X. [] X", SAT),
])
def test_run_examples(text, verdict):
    r = run(parse(text), "kripke")
    assert r.verdict == verdict
    if r.sat:
        assert r.model_ok


@pytest.mark.parametrize("order", ["fifo", "dfs", "prestate-first"])
@pytest.mark.parametrize("every", [0, 1, 16])
def test_orders_and_intervals_agree(order, every):
    texts = ["nu X. mu Y. ((p & <> X) | <> Y)",
             "(nu X. mu Y. ((p & <> X) | <> Y)) & nu Z. (~p & [] Z)",
             "mu X. (p | <> X) & nu Y. (~p & [] Y)",
             "nu X. (<> X & <> ~p & [] (p | <> p))"]
    expect = [SAT, UNSAT, UNSAT, SAT]
    for text, v in zip(texts, expect):
        assert run(parse(text), "kripke", propagate_every=every, order=order).verdict == v


def test_unknown_order_rejected():
    with pytest.raises(ValueError):
        run(parse("p"), order="bfs")


def test_node_cap_gives_resource_exhaustion():
    r = run(parse("nu X. mu Y. ((p & <> X) | <> Y) & nu Z. (<> q & [] Z)"), node_cap=2, propagate_every=0)
    assert r.verdict == EXHAUSTED and "node cap" in r.reason


def test_time_cap_gives_resource_exhaustion():
    r = run(parse("nu X. mu Y. ((p & <> X) | <> Y) & nu Z. (<> q & [] Z)"), time_cap=0.0, propagate_every=0)
    assert r.verdict == EXHAUSTED and "time cap" in r.reason


# -- f and g ---------------------------------------------------------------------

def test_prestate_outside_X():
    tab = full("(p | q) & <> r")
    c = tab.closure
    v = find(tab, lambda c, lab: "p | q" in shows(c, lab) and "(p | q) & <> r" not in shows(c, lab))
    assert not tab.is_state(v)
    G = frozenset(tab.order)
    lvl = tab.levels(G)
    d = max(lvl.values(), default=0) + 1
    # both branches outside X: out of f(X), and in g of the complements
    assert v not in tab.f_step([frozenset()] * d, G, lvl)
    assert v in tab.g_step([G] * d, G, lvl)


def test_state_with_diamond():
    tab = full("<> p")
    c = tab.closure
    v0 = tab.v0
    assert tab.is_state(v0)
    G = frozenset(tab.order)
    lvl = {p: 1 for v in G for _, _, p in tab.succ[v]}
    target = next(u for a, u, _ in tab.succ[v0] if shows(c, tab.label(u)) == {"p"})
    X = [frozenset(), frozenset({target})]
    assert v0 in tab.f_step(X, G, lvl)
    X = [frozenset(), frozenset()]
    assert v0 not in tab.f_step(X, G, lvl)


def test_bottom_state_always_refuted():
    tab = full("p & ~p")
    v = find(tab, lambda c, lab: shows(c, lab) == {"p", "~p"})
    G = frozenset(tab.order)
    lvl = tab.levels(G)
    d = max(lvl.values(), default=0) + 1
    for X in ([frozenset()] * d, [G] * d):
        assert v in tab.g_step(X, G, lvl)
        assert v not in tab.f_step(X, G, lvl)


def test_box_state_in_E():
    tab = full("[] p")
    assert tab.v0 in tab.compute_E()


def test_odd_cycle_not_in_E():
    tab = full("mu X. <> X")
    E = tab.compute_E()
    cycle = [v for v in tab.order if 0 in tab.label(v) or 1 in tab.label(v)]
    assert cycle and not E & set(cycle)
    assert tab.v0 in tab.compute_A()


@pytest.mark.parametrize("seed", range(6))
def test_f_g_duality(seed):
    rng = random.Random(seed)
    chi = oracles.random_closed(rng, rng.choice(["kripke", "graded", "probabilistic"]), max_size=8, min_size=4)
    tab = Tableau(chi, _logic_of(chi))
    todo = [tab.v0]
    while todo and len(tab.order) < 60:
        v = todo.pop(0)
        if v not in tab.succ:
            todo.extend(tab.expand(v))
    G = frozenset(tab.order)
    lvl = tab.levels(G)
    d = max(lvl.values(), default=0)
    known = set(G) | {u for v in G for _, u, _ in tab.succ[v]}
    for _ in range(20):
        X = [frozenset(v for v in G if rng.random() < 0.5) for _ in range(d + 1)]
        co = [G - x for x in X]
        out = frozenset(u for u in known - G if rng.random() < 0.5)
        co_out = frozenset(known - G) - out
        assert tab.g_step(X, G, lvl, out) == set(G) - tab.f_step(co, G, lvl, co_out)


def _logic_of(chi):
    from musat.formula import Modal, subformulas
    kinds = {g.op.kind for g in subformulas(chi) if isinstance(g, Modal)}
    if kinds & {"gdia", "gbox"}:
        return "graded"
    if kinds & {"pdia", "pbox"}:
        return "probabilistic"
    return "kripke"


# -- propagation -----------------------------------------------------------------

@pytest.mark.parametrize("logic", ["kripke", "graded", "probabilistic", "presburger"])
def test_propagation_variants_agree(logic):
    rng = random.Random(hash(logic) % 1000)
    runs = 0
    while runs < 6:
        chi = oracles.random_closed(rng, logic, max_size=9, min_size=4)
        got = oracles.drive(chi, logic, every=rng.choice([1, 3]), node_limit=120)
        if got is None:
            continue
        runs += 1
        tab, passes = got
        for _, E, A, El, Al in passes:
            assert E == El and A == Al
            assert not E & A
        # plain Kleene without warm starts gives the same sets again
        assert tab.compute_E(reset=False, scc=False) == passes[-1][1]
        # on the completed graph every node is decided
        assert passes[-1][1] | passes[-1][2] == frozenset(tab.order)


def test_strategy_covers_E_and_is_consistent():
    for text in ["nu X. mu Y. ((p & <> X) | <> Y)", "nu X. (<> X & <> ~p & [] (p | <> p))"]:
        tab = full(text)
        E = tab.compute_E()
        strat = tab.record_strategy(E)
        assert set(strat) == set(E)
        for v, (kind, *rest) in strat.items():
            if kind == "prestate":
                assert rest[1] in E
            else:
                witness, target = rest
                assert all(target[x][1] in E for x in witness)


# -- nested fixpoints on parity games ----------------------------------------------

def random_game(rng, n=5, maxp=4):
    owner = [rng.randint(0, 1) for _ in range(n)]
    edges = []
    for v in range(n):
        for u in rng.sample(range(n), rng.randint(1, 2)):
            edges.append((v, u, rng.randint(1, maxp)))
    return owner, edges


def brute_winning(owner, edges, n):
    """Player 0 wins iff some positional choice leaves only even-max cycles."""
    out = {v: [(u, p) for w, u, p in edges if w == v] for v in range(n)}
    mine = [v for v in range(n) if owner[v] == 0]
    won = set()
    for choice in itertools.product(*[range(len(out[v])) for v in mine]):
        pick = dict(zip(mine, choice))
        g = {v: ([out[v][pick[v]]] if v in pick else out[v]) for v in range(n)}
        for start in range(n):
            if start in won:
                continue
            reach, todo = {start}, [start]
            while todo:
                x = todo.pop()
                for u, _ in g[x]:
                    if u not in reach:
                        reach.add(u)
                        todo.append(u)
            if not any(_odd_cycle(g, reach, p) for p in range(1, 10, 2)):
                won.add(start)
    return frozenset(won)


def _odd_cycle(g, reach, p):
    """A cycle in ``reach`` using priorities <= p through a priority-p edge."""
    for v in reach:
        for u, q in g[v]:
            if q != p:
                continue
            seen, todo = {u}, [u]
            while todo:
                x = todo.pop()
                if x == v:
                    return True
                for y, r in g[x]:
                    if r <= p and y in reach and y not in seen:
                        seen.add(y)
                        todo.append(y)
    return False


@pytest.mark.parametrize("seed", range(60))
def test_nested_fixpoint_solves_parity_games(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    owner, edges = random_game(rng, n)
    universe = frozenset(range(n))
    greatest = lambda i: i % 2 == 0
    depth = max(p for _, _, p in edges)

    def holds_with(levels):
        def holds(v, X):
            mine = [(u, levels[i]) for i, (w, u, _) in enumerate(edges) if w == v]
            test = any if owner[v] == 0 else all
            return test(u in X[l] for u, l in mine)
        return holds

    plain = [p for _, _, p in edges]
    body = lambda X: {v for v in universe if holds_with(plain)(v, X)}
    expected = brute_winning(owner, edges, n)
    assert nested_fixpoint(depth, greatest, body, universe) == expected
    assert nested_fixpoint(depth, greatest, body, universe, reset=False) == expected

    cyc = compress_cycles(universe, edges)
    preds = {}
    for (v, u, _), l in zip(edges, cyc):
        preds.setdefault(u, []).append((v, l))
    assert nested_fixpoint_local(max(cyc), greatest, universe, holds_with(cyc), preds) == expected

    comp = compress_priorities(plain)
    levels = [comp[p] for p in plain]
    body2 = lambda X: {v for v in universe if holds_with(levels)(v, X)}
    assert nested_fixpoint(max(levels), greatest, body2, universe) == expected


def test_compress_priorities():
    assert compress_priorities([3, 5, 6, 8, 9]) == {3: 1, 5: 1, 6: 2, 8: 2, 9: 3}
    assert compress_priorities([2]) == {2: 2}


def test_stats_schema():
    r = run(parse("nu X. <> X"))
    for key in ("formula_size", "alternation_depth", "dpa_states", "nodes_expanded", "states", "prestates",
                "propagations", "onestep_calls", "onestep_max_literals", "verdict", "wall_time_s"):
        assert key in r.stats
