"""Deciding satisfiability with the global caching tableau.

Run:  python3 demos/04_solve.py
"""
from musat.formula import parse
from musat.tableau import run

cases = [
    ("kripke", "nu X. <> X"),
    ("kripke", "mu X. <> X"),
    ("kripke", "mu X. [] X"),
    ("kripke", "nu X. mu Y. ((p & <> X) | <> Y)"),
    ("kripke", "nu X. mu Y. ((p & <> X) | <> Y) & nu Z. ([] Z & ~p)"),
    ("graded", "<5> true & [3] false"),
    ("probabilistic", "<1/2> p & <1/2> ~p"),
    ("presburger", "L{1,1;3}(p, ~p) & M{1;2}(p)"),
]
for logic, text in cases:
    r = run(parse(text, logic), logic)
    s = r.stats
    print(f"{r.verdict:5} {logic:13} {text}")
    print(f"      nodes={s['nodes_expanded']} macro-states={s['dpa_states']} "
          f"one-step calls={s['onestep_calls']} time={s['wall_time_s']:.3f}s")

# propagation interval and expansion order change the work, not the answer
chi = parse("nu X. mu Y. ((p & <> X) | <> Y) & [] [] ~p")
for order in ("fifo", "dfs", "prestate-first"):
    for every in (1, 16, 0):
        r = run(chi, propagate_every=every, order=order)
        print(f"order={order:14} every={every:2}  {r.verdict}  nodes={r.stats['nodes_expanded']}")
