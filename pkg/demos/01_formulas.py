"""Parsing, normal forms, closures and fixpoint unfolding.

Run:  python3 demos/01_formulas.py
"""
from musat.formula import alternation_depth, closure, nnf, parse, parse_raw, show, size, unfold

fair = "nu X. mu Y. ((p & <> X) | <> Y)"
f = parse(fair)
print("formula      :", show(f))
print("size n       :", size(f))
print("alternation k:", alternation_depth(f))

# negations are pushed to atoms; fixpoints flip on the way
print("nnf of ~(mu X. <> X):", show(nnf(parse_raw("~ mu X. <> X"))))

# the closure is the graph the tableau works on; index 0 is the input
c = closure(f)
for i in range(len(c)):
    print(f"  q{i}: {c.show(i)}")

print("one unfolding:", show(unfold(f)))

# other logics share the same syntax with their own modalities
for logic, text in [("graded", "nu X. (p & <1> X)"), ("probabilistic", "<1/2> p & <1/2> ~p"),
                    ("presburger", "L{1,2;3}(p, q)"), ("poly-probabilistic", "PL{x1*x2;1/4}(a, b)")]:
    g = parse(text, logic)
    print(f"{logic:19} {show(g):28} n={size(g)}")
