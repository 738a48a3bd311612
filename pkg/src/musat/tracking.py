"""The nondeterministic tracking parity automaton over the closure.

A node of the automaton is a closure index.  Letters either decompose one
non-modal formula (a disjunct choice, a conjunction step, a fixpoint
unfolding) or select which modal literals to follow across a modal step.
A selection picks ``(literal, argument)`` pairs, so a literal with several
arguments can send its traces to different successors; for unary
modalities this is the same as choosing a set of literals.
Priorities live on transitions: unfolding a fixpoint has the priority of
its alternation level, every other transition has priority 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .formula import Closure, closure as build_closure, Formula

__all__ = [
    "Letter", "DisjChoice", "ConjStep", "UnfoldStep", "Selection",
    "TrackingNPA", "build_tracking", "letters_for", "selections", "chosen_formula",
]


class Letter:
    __slots__ = ()


@dataclass(frozen=True)
class DisjChoice(Letter):
    formula: int
    b: int


@dataclass(frozen=True)
class ConjStep(Letter):
    formula: int


@dataclass(frozen=True)
class UnfoldStep(Letter):
    formula: int


@dataclass(frozen=True)
class Selection(Letter):
    picks: frozenset  # of (literal index, argument index) pairs

    @classmethod
    def of(cls, c: Closure, literals: Iterable[int]) -> "Selection":
        """Select every argument of the given literals."""
        return cls(frozenset((q, t) for q in literals for t in c.children[q]))


class TrackingNPA:
    """Tracking automaton ``(F, Sigma, Delta, chi, alpha)``.

    Transitions are computed on demand; :meth:`succ` returns the list of
    ``(target, priority)`` pairs.
    """

    def __init__(self, c: Closure):
        self.closure = c
        self.initial = 0
        self.nodes = range(len(c))
        self.k = c.k
        self._modal = [c.is_modal(i) for i in self.nodes]

    def __len__(self) -> int:
        return len(self.closure)

    def is_modal(self, q: int) -> bool:
        return self._modal[q]

    def succ(self, q: int, letter: Letter) -> list:
        c = self.closure
        kind = c.kinds[q]
        if isinstance(letter, Selection):
            if kind != "modal":
                return []
            return [(t, 1) for t in dict.fromkeys(c.children[q]) if (q, t) in letter.picks]
        if letter.formula != q:
            return [(q, 1)]
        if isinstance(letter, DisjChoice):
            if kind != "or":
                return [(q, 1)]
            return [(c.children[q][letter.b], 1)]
        if isinstance(letter, ConjStep):
            if kind != "and":
                return [(q, 1)]
            return [(t, 1) for t in dict.fromkeys(c.children[q])]
        if isinstance(letter, UnfoldStep):
            if kind != "fix":
                return [(q, 1)]
            target = c.children[q][0]
            return [(target, c.priority[q] if target != q else 1)]
        raise TypeError(letter)

    def targets(self, qs: Iterable[int], letter: Letter) -> frozenset:
        return frozenset(t for q in qs for t, _ in self.succ(q, letter))

    def priorities(self) -> set:
        return {1} | {p for p in self.closure.priority if p}

    def letters_for(self, label: Iterable[int]) -> list:
        return letters_for(self.closure, label)

    def alphabet_sample_pool(self) -> list:
        """Decomposition letters of the whole closure (selections excluded)."""
        c = self.closure
        out: list = []
        for i in self.nodes:
            if c.kinds[i] == "or":
                out += [DisjChoice(i, 0), DisjChoice(i, 1)]
            elif c.kinds[i] == "and":
                out.append(ConjStep(i))
            elif c.kinds[i] == "fix":
                out.append(UnfoldStep(i))
        return out

    def selectable(self) -> list:
        """All ``(literal, argument)`` pairs a selection may pick."""
        return pick_pool(self.closure, self.nodes)

    def dump(self) -> str:
        """Text dump: one line per closure node with its decomposition."""
        c = self.closure
        lines = [f"tracking automaton: {len(c)} nodes, alternation depth {c.k}",
                 f"initial: q0"]
        for i in self.nodes:
            kind = c.kinds[i]
            if kind == "or":
                edges = [f"(q{i},0) -> q{c.children[i][0]} [1]", f"(q{i},1) -> q{c.children[i][1]} [1]"]
            elif kind == "and":
                edges = [f"and(q{i}) -> {{{', '.join(f'q{t}' for t in c.children[i])}}} [1]"]
            elif kind == "fix":
                edges = [f"unfold(q{i}) -> q{c.children[i][0]} [{c.priority[i]}]"]
            elif kind == "modal":
                edges = [f"sel(q{i},q{t}) -> q{t} [1]" for t in dict.fromkeys(c.children[i])]
            else:
                edges = ["(trace ends on every selection)"]
            lines.append(f"q{i}: {c.show(i)}")
            lines.extend("    " + e for e in edges)
        return "\n".join(lines)


def letters_for(c: Closure, label: Iterable[int]) -> list:
    """Letters that matter at a node with the given label.

    A label with a non-modal formula is decomposed at its least such index;
    otherwise every selection over the label's (non-nullary) modal literals
    is returned, the empty selection first.
    """
    label = sorted(label)
    for i in label:
        kind = c.kinds[i]
        if kind == "or":
            return [DisjChoice(i, 0), DisjChoice(i, 1)]
        if kind == "and":
            return [ConjStep(i)]
        if kind == "fix":
            return [UnfoldStep(i)]
    return list(selections(c, label))


def pick_pool(c: Closure, label: Iterable[int]) -> list:
    return [(q, t) for q in sorted(label) if c.kinds[q] == "modal" for t in dict.fromkeys(c.children[q])]


def selections(c: Closure, label: Iterable[int]) -> Iterator[Selection]:
    pool = pick_pool(c, label)
    for r in range(len(pool) + 1):
        for combo in combinations(pool, r):
            yield Selection(frozenset(combo))


def chosen_formula(c: Closure, label: Iterable[int]) -> int | None:
    """Least non-modal formula of a label, or ``None`` for a state label."""
    for i in sorted(label):
        if not c.is_modal(i):
            return i
    return None


def build_tracking(c: Closure | Formula) -> TrackingNPA:
    if not isinstance(c, Closure):
        c = build_closure(c)
    return TrackingNPA(c)
