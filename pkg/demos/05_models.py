"""Model extraction and model checking.

Every SAT answer comes with a finite coalgebra that is checked against the
formula before the answer is reported.

Run:  python3 demos/05_models.py
"""
from musat.formula import parse
from musat.model import Coalgebra, holds_at, model_check
from musat.tableau import run

for logic, text in [("kripke", "nu X. mu Y. ((p & <> X) | <> Y)"),
                    ("graded", "nu X. (p & <1> X)"),
                    ("graded", "nu X. <1> X"),
                    ("probabilistic", "nu X. (<1/3> X & <1/3> (p & X))")]:
    chi = parse(text, logic)
    r = run(chi, logic)
    m = r.model
    print(f"{logic}: {text}")
    print(f"  {len(m.states)} state(s), root {m.root}, checked={r.model_ok}")
    for s in m.states:
        print(f"    {s}: atoms={sorted(m.atoms.get(s, ()))} succ={m.succ[s]}")

# a model survives a JSON round trip with exact weights
back = Coalgebra.from_json(m.dumps())
print("after JSON round trip:", holds_at(back, chi))
print(m.dumps())
print(m.to_dot())

print("states satisfying <1/2> true:", sorted(model_check(back, parse("<1/2> true", "probabilistic"))))
