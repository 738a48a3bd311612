"""Finite coalgebraic models: extraction from a tableau strategy, model
checking, and JSON/DOT export.

A model is a finite carrier with a one-step structure per state:

* Kripke: a set of successors;
* graded / Presburger: a multigraph, successor -> multiplicity;
* probabilistic logics: a Markov chain, successor -> rational probability.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .formula import (And, Atom, Bot, Fix, Formula, Logic, Modal, Not, Or, Top, Var,
                      get_logic)

__all__ = ["Coalgebra", "extract_pst", "extract_model", "model_check", "holds_at"]


@dataclass
class Coalgebra:
    logic: Logic
    states: list
    succ: dict  # state -> frozenset (powerset) or {state: weight}
    atoms: dict = field(default_factory=dict)  # state -> frozenset of atom names
    root: int = 0
    labels: dict = field(default_factory=dict)  # state -> human readable label text

    def __len__(self) -> int:
        return len(self.states)

    def element(self, s):
        """The functor element of ``s`` in the form :meth:`Op.holds` expects."""
        t = self.succ[s]
        return frozenset(t) if self.logic.functor == "powerset" else dict(t)

    def validate(self) -> None:
        for s in self.states:
            t = self.succ[s]
            if self.logic.functor == "powerset":
                assert set(t) <= set(self.states)
                continue
            assert set(t) <= set(self.states), "successor outside the carrier"
            assert all(w > 0 for w in t.values())
            if self.logic.functor == "distribution":
                assert sum(t.values(), Fraction(0)) == 1, f"state {s} is not a distribution"
            else:
                assert all(Fraction(w).denominator == 1 for w in t.values())

    # -- export -------------------------------------------------------------

    def to_json(self) -> dict:
        def weight(w):
            w = Fraction(w)
            return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"

        states = []
        for s in self.states:
            entry = {"id": s, "atoms": sorted(self.atoms.get(s, ()))}
            t = self.succ[s]
            if self.logic.functor == "powerset":
                entry["successors"] = sorted(t)
            else:
                entry["successors"] = {str(u): weight(w) for u, w in sorted(t.items())}
            if s in self.labels:
                entry["label"] = self.labels[s]
            states.append(entry)
        return {"logic": self.logic.name, "functor": self.logic.functor,
                "root": self.root, "states": states}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "Coalgebra":
        if isinstance(data, str):
            data = json.loads(data)
        logic = get_logic(data["logic"])
        states, succ, atoms = [], {}, {}
        for entry in data["states"]:
            s = int(entry["id"])
            states.append(s)
            atoms[s] = frozenset(entry.get("atoms", ()))
            t = entry.get("successors", [] if logic.functor == "powerset" else {})
            if logic.functor == "powerset":
                succ[s] = frozenset(int(u) for u in t)
            else:
                succ[s] = {int(u): Fraction(w) for u, w in t.items()}
        m = cls(logic, states, succ, atoms, int(data.get("root", states[0] if states else 0)))
        m.validate()
        return m

    def to_dot(self) -> str:
        lines = ["digraph model {", "  node [shape=circle];"]
        for s in self.states:
            text = ",".join(sorted(self.atoms.get(s, ()))) or " "
            shape = ' shape=doublecircle' if s == self.root else ""
            lines.append(f'  s{s} [label="s{s}\\n{text}"{shape}];')
        for s in self.states:
            t = self.succ[s]
            if self.logic.functor == "powerset":
                for u in sorted(t):
                    lines.append(f"  s{s} -> s{u};")
            else:
                for u, w in sorted(t.items()):
                    lines.append(f'  s{s} -> s{u} [label="{Fraction(w)}"];')
        lines.append("}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Model checking
# ---------------------------------------------------------------------------

def model_check(m: Coalgebra, f: Formula, env: dict | None = None) -> frozenset:
    """States of ``m`` satisfying ``f``; fixpoints by Kleene iteration."""
    universe = frozenset(m.states)
    env = dict(env or {})
    cache: dict = {}

    def ev(g: Formula, env: dict) -> frozenset:
        if isinstance(g, Top):
            return universe
        if isinstance(g, Bot):
            return frozenset()
        if isinstance(g, Atom):
            has = frozenset(s for s in m.states if g.name in m.atoms.get(s, ()))
            return has if g.positive else universe - has
        if isinstance(g, Var):
            return env[g.name]
        if isinstance(g, Not):
            return universe - ev(g.arg, env)
        if isinstance(g, And):
            return ev(g.left, env) & ev(g.right, env)
        if isinstance(g, Or):
            return ev(g.left, env) | ev(g.right, env)
        if isinstance(g, Modal):
            args = [ev(a, env) for a in g.args]
            return frozenset(s for s in m.states if g.op.holds(m.element(s), args))
        if isinstance(g, Fix):
            X = frozenset() if g.kind == "mu" else universe
            while True:
                Y = ev(g.body, {**env, g.var: X})
                if Y == X:
                    return X
                X = Y
        raise TypeError(g)

    return ev(f, env)


def holds_at(m: Coalgebra, f: Formula, state: int | None = None) -> bool:
    return (m.root if state is None else state) in model_check(m, f)


# ---------------------------------------------------------------------------
# Extraction from a tableau strategy
# ---------------------------------------------------------------------------

def _shrink(tab, v, witness, avail_labels):
    """Drop Kripke successors not needed by any diamond (boxes survive subsets)."""
    from .onestep import check_witness

    inst = tab.instance(v, avail_labels)
    keep = set(witness)
    for u in sorted(witness, key=lambda u: (-len(u), sorted(u))):
        trial = keep - {u}
        if check_witness(tab.logic, inst, frozenset(trial)):
            keep = trial
    return frozenset(keep)


def extract_pst(tab) -> dict:
    """Pre-semi-tableau: each reachable node with its kept successors.

    Pre-states keep the recorded choice, states keep the successors carrying
    the recorded one-step witness.  Raises if a cycle runs only through
    pre-states.
    """
    strat = tab.strategy
    pst: dict = {}
    stack = [tab.v0]
    while stack:
        v = stack.pop()
        if v in pst:
            continue
        kind, *rest = strat[v]
        if kind == "prestate":
            out = [rest[1]]
        else:
            witness, target = rest
            support = witness if tab.logic.functor == "powerset" else [x for x, w in witness.items() if w]
            out = [target[x][1] for x in sorted(support, key=sorted)]
        pst[v] = out
        stack.extend(u for u in out if u not in pst)
    # pre-state-only cycles would make the collapse below diverge
    colour: dict = {}
    for start in pst:
        if tab.is_state(start) or start in colour:
            continue
        path = [start]
        while path:
            v = path[-1]
            if colour.get(v) is None:
                colour[v] = "grey"
                u = pst[v][0]
                if not tab.is_state(u):
                    if colour.get(u) == "grey":
                        raise AssertionError("pre-state cycle in the extracted tableau")
                    if u not in colour:
                        path.append(u)
                        continue
            colour[v] = "black"
            path.pop()
    return pst


def extract_model(tab) -> Coalgebra:
    """Collapse pre-state chains of the strategy into a finite model."""
    pst = extract_pst(tab)
    strat = tab.strategy
    logic = tab.logic

    def ceil(u):
        while not tab.is_state(u):
            u = pst[u][0]
        return u

    root = ceil(tab.v0)
    order, succ = [], {}
    stack = [root]
    while stack:
        v = stack.pop()
        if v in succ:
            continue
        _, witness, target = strat[v]
        if logic.functor == "powerset":
            avail = frozenset(target)
            kept = _shrink(tab, v, witness, avail)
            t = frozenset(ceil(target[x][1]) for x in kept)
            nxt = list(t)
        else:
            t: dict = {}
            for x, w in witness.items():
                if w:
                    u = ceil(target[x][1])
                    t[u] = t.get(u, 0) + w
            nxt = list(t)
        succ[v] = t
        order.append(v)
        stack.extend(u for u in sorted(nxt, reverse=True) if u not in succ)

    # dense numbering, root first
    ids = {v: i for i, v in enumerate(order)}
    c = tab.closure
    states = list(range(len(order)))
    new_succ, atoms, labels = {}, {}, {}
    for v in order:
        i = ids[v]
        t = succ[v]
        if logic.functor == "powerset":
            new_succ[i] = frozenset(ids[u] for u in t)
        else:
            new_succ[i] = {ids[u]: (Fraction(w) if logic.functor == "distribution" else int(w)) for u, w in t.items()}
        lab = tab.label(v)
        atoms[i] = frozenset(c.ops[j][0] for j in lab if c.kinds[j] == "atom" and c.ops[j][1])
        labels[i] = "{" + ", ".join(c.show(j) for j in sorted(lab)) + "}"
    m = Coalgebra(logic, states, new_succ, atoms, 0, labels)
    m.validate()
    m.node_of = {ids[v]: v for v in order}
    return m
