"""Tracking automaton, its Buchi form and the complemented deterministic automaton.

On the word that keeps unfolding mu X. <> X and selecting the diamond,
the single trace unfolds a least fixpoint forever: the tracking automaton
accepts (bad trace) and the complemented deterministic automaton rejects.

Run:  python3 demos/02_automata.py
"""
from musat.formula import closure, parse
from musat.omega import complement, determinize, lasso_accepts_dpa, lasso_accepts_npa, parity_to_buchi
from musat.tracking import Selection, UnfoldStep, build_tracking

for text in ["mu X. <> X", "nu X. <> X"]:
    npa = build_tracking(closure(parse(text)))
    nba = parity_to_buchi(npa)
    dpa = complement(determinize(nba))
    loop = [UnfoldStep(0), Selection.of(npa.closure, [1])]
    print(f"{text}:  NPA {len(npa.closure)} nodes, NBA {len(nba)} states")
    print("   tracking automaton accepts the loop:", lasso_accepts_npa(npa, [], loop))
    print("   complemented DPA accepts the loop  :", lasso_accepts_dpa(dpa, [], loop))
    print("   macro-states built on demand       :", len(dpa))

print()
print(build_tracking(closure(parse("nu X. mu Y. ((p & <> X) | <> Y)"))).dump())
