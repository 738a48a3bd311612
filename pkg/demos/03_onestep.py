"""One-step satisfiability for each logic.

A one-step instance is a set of modal literals over variables a, b, ...
plus the set U of allowed successor labels; a witness is a structure over
U that satisfies every literal.

Run:  python3 demos/03_onestep.py
"""
from fractions import Fraction as F

from musat.formula import Op
from musat.onestep import OneStepInstance, check_witness, solve


def show(logic, lits, U):
    inst = OneStepInstance.make(lits, U)
    r = solve(logic, inst)
    text = " & ".join(f"{op.kind}{'' if op.threshold is None else op.threshold}({','.join(a)})"
                      for op, a in inst.literals)
    verdict = "SAT  " if r.sat else "UNSAT"
    checked = f"  (witness re-checked: {check_witness(logic, inst, r.witness)})" if r.sat else ""
    print(f"{logic:19} {text:34} U={[sorted(u) for u in inst.U]}  {verdict} {r.witness or ''}{checked}")


show("kripke", [(Op("dia"), ("a",)), (Op("box"), ("b",))], [{"a", "b"}, {"b"}])
show("kripke", [(Op("dia"), ("a",)), (Op("box"), ("b",))], [{"a"}])
show("graded", [(Op("gdia", F(1)), ("a",))], [{"a"}])
show("graded", [(Op("gdia", F(3)), ("a",)), (Op("gbox", F(2)), ("b",))], [{"a"}])
show("presburger", [(Op("L", F(3), (1, 1)), ("a", "b"))], [{"a", "b"}])
show("probabilistic", [(Op("pdia", F(1, 3)), ("a",)), (Op("pdia", F(1, 3)), ("b",))], [{"a"}, {"b"}])
show("probabilistic", [(Op("pdia", F(1, 2)), ("a",)), (Op("pdia", F(1, 2)), ("b",))], [{"a"}, {"b"}])
prod = ((F(1), (1, 1)),)
show("poly-probabilistic", [(Op("PL", F(1, 5), poly=prod), ("a", "b"))], [{"a", "b"}])
show("poly-probabilistic", [(Op("PL", F(1, 4), poly=prod), ("a", "b"))], [{"a"}, {"b"}])
