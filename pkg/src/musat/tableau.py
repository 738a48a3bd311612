"""Global caching satisfiability checking.

The determinized and complemented tracking automaton is expanded node by
node.  Satisfiability is propagated through the expanded part ``G`` by two
nested fixpoints over the one-step propagation functions:

* ``E_G`` (nodes known satisfiable) alternates least fixpoints at odd and
  greatest fixpoints at even priorities over ``f``;
* ``A_G`` (nodes known unsatisfiable) is the dual over ``g``.

When the initial node enters ``E_G`` a winning strategy is recorded on
``E_G``; :mod:`musat.model` turns it into a finite model.
"""
from __future__ import annotations

import logging
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

from .formula import Formula, Logic, closure as build_closure, get_logic
from .omega import DPA, _sccs, complement, determinize, parity_to_buchi
from .onestep import OneStepInstance, OneStepResult, solve as onestep_solve
from .tracking import (ConjStep, DisjChoice, Selection, TrackingNPA, UnfoldStep,
                       build_tracking, chosen_formula, selections)

log = logging.getLogger(__name__)

__all__ = [
    "Tableau", "RunResult", "run", "nested_fixpoint", "nested_fixpoint_local", "compress_priorities",
    "compress_cycles",
    "ResourceExhausted",
]

SAT, UNSAT, EXHAUSTED = "SAT", "UNSAT", "RESOURCE-EXHAUSTED"


class ResourceExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Nested fixpoints
# ---------------------------------------------------------------------------

def nested_fixpoint(depth: int, greatest: Callable[[int], bool], body: Callable,
                    universe: frozenset, reset: bool = True, on_pass=None) -> frozenset:
    """Compute ``eta_d X_d ... eta_1 X_1. body(X)`` by Kleene iteration.

    ``X`` is passed to ``body`` as a list indexed ``1..depth``.  With
    ``reset=True`` (Emerson-Lei) an inner variable is re-initialized only
    when an enclosing variable of the opposite kind changes; with
    ``reset=False`` every inner fixpoint restarts from scratch, which is the
    plain textbook evaluation.
    """
    if depth == 0:
        return frozenset(body([None]))
    empty = frozenset()

    def init(i):
        return universe if greatest(i) else empty

    X = [None] + [init(i) for i in range(1, depth + 1)]

    def solve(j: int) -> frozenset:
        if not reset:
            for i in range(1, j):
                X[i] = init(i)
        while True:
            Y = frozenset(body(X)) if j == 1 else solve(j - 1)
            if on_pass is not None:
                on_pass()
            if Y == X[j]:
                return Y
            X[j] = Y
            for i in range(1, j):
                if not reset or greatest(i) != greatest(j):
                    X[i] = init(i)

    return solve(depth)


def compress_priorities(priorities: Iterable[int]) -> dict:
    """Order- and parity-preserving map onto ``1..d`` merging adjacent same-parity runs."""
    out: dict = {}
    level = 0
    last = None
    for p in sorted(set(priorities)):
        if last is None:
            level = 1 if p % 2 else 2
        elif p % 2 != last % 2:
            level += 1
        out[p] = level
        last = p
    return out


def compress_cycles(nodes: Iterable, edges: Sequence) -> list:
    """Levels for ``edges`` (``(v, u, priority)`` triples) preserving, for every
    strongly connected set of edges, the parity of its maximum.

    Each component's top-priority edges get the least level of their parity
    above everything the remaining edges of the component need; edges on no
    cycle get level 1.  Plays of a parity game only see the maximum on the
    edges they use infinitely often, so winners are unchanged while far
    fewer levels are needed than with plain order-preserving compression.
    """
    out = [1] * len(edges)

    def rec(idx: list) -> int:
        if not idx:
            return 0
        adj: dict = {}
        for i in idx:
            adj.setdefault(edges[i][0], []).append(edges[i][1])
        verts = {edges[i][0] for i in idx} | {edges[i][1] for i in idx}
        comp_of = {}
        for n, comp in enumerate(_sccs(sorted(verts, key=repr), lambda v: adj.get(v, ()))):
            for v in comp:
                comp_of[v] = n
        groups: dict = {}
        for i in idx:
            v, u, _ = edges[i]
            if comp_of[v] == comp_of[u]:
                groups.setdefault(comp_of[v], []).append(i)
        top_level = 0
        for group in groups.values():
            P = max(edges[i][2] for i in group)
            below = rec([i for i in group if edges[i][2] < P])
            level = below if below % 2 == P % 2 else below + 1
            if level == 0:
                level = 2
            for i in group:
                if edges[i][2] == P:
                    out[i] = level
            top_level = max(top_level, level)
        return top_level

    rec(list(range(len(edges))))
    return out


def nested_fixpoint_local(depth: int, greatest: Callable[[int], bool], nodes: frozenset,
                          holds: Callable, preds: dict, outside=frozenset(), upper: Sequence = ()) -> frozenset:
    """:func:`nested_fixpoint` with a node-wise body and worklist innermost level.

    ``holds(v, X)`` decides membership of ``v`` in the body's value and
    ``preds[u]`` lists ``(w, level)`` for every edge ``w -> u`` whose target
    is consulted at ``level``; ``X[0]`` is the constant ``outside`` and
    ``upper`` supplies fixed values for levels above ``depth``.  The
    innermost variable is updated only at nodes whose successors changed.  Warm starts (Emerson-Lei) are post- or
    pre-fixpoints, so the worklist reaches the same fixpoint as Kleene
    iteration would.
    """
    def init(i):
        return set(nodes) if greatest(i) else set()

    if depth == 0:
        return frozenset(v for v in nodes if holds(v, [outside, *upper]))
    X = [outside] + [init(i) for i in range(1, depth + 1)] + list(upper)

    def inner() -> frozenset:
        cur = X[1]
        new = {v for v in nodes if holds(v, X)}
        if greatest(1):
            work = list(cur - new)
            cur &= new
            while work:
                u = work.pop()
                for w, lv in preds.get(u, ()):
                    if lv == 1 and w in cur and not holds(w, X):
                        cur.discard(w)
                        work.append(w)
        else:
            work = list(new - cur)
            cur |= new
            while work:
                u = work.pop()
                for w, lv in preds.get(u, ()):
                    if lv == 1 and w not in cur and holds(w, X):
                        cur.add(w)
                        work.append(w)
        return frozenset(cur)

    def solve(j: int) -> frozenset:
        if j == 1:
            return inner()
        while True:
            Y = solve(j - 1)
            if Y == X[j]:
                return Y
            X[j] = set(Y)
            for i in range(1, j):
                if greatest(i) != greatest(j):
                    X[i] = init(i)

    return solve(depth)


# ---------------------------------------------------------------------------
# The tableau
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    verdict: str
    tableau: "Tableau"
    stats: dict = field(default_factory=dict)
    model: object = None
    reason: str = ""
    model_ok: bool | None = None

    @property
    def sat(self) -> bool:
        return self.verdict == SAT


class Tableau:
    """Expanded part of the automaton plus propagation and strategies.

    Nodes are macro-state ids of the complemented deterministic automaton.
    ``succ[v]`` lists ``(letter, target, priority)`` triples.
    """

    def __init__(self, chi: Formula, logic: Union[str, Logic], poly_depth: int | None = None):
        self.logic = get_logic(logic)
        self.formula = chi
        self.closure = build_closure(chi)
        self.npa: TrackingNPA = build_tracking(self.closure)
        self.nba = parity_to_buchi(self.npa)
        self.dpa: DPA = complement(determinize(self.nba))
        self.v0 = self.dpa.initial
        self.poly_depth = poly_depth
        self.succ: dict = {}
        self.order: list = []  # expansion order
        self.frontier: set = {self.v0}
        self.strategy: dict = {}
        self.onestep_calls: Counter = Counter()
        self.onestep_cache: dict = {}
        self.max_literals = 0
        self.max_instance_size = 0
        self.incomplete = False
        self.propagations = 0
        self.history: list = []  # (|G|, E, A) after every propagation
        self._is_state: dict = {}
        self._mask_cache: dict = {}
        self.E: frozenset = frozenset()
        self.A: frozenset = frozenset()

    # -- node classification ------------------------------------------------

    def label(self, v: int) -> frozenset:
        return self.dpa.label(v)

    def is_state(self, v: int) -> bool:
        s = self._is_state.get(v)
        if s is None:
            s = self._is_state[v] = chosen_formula(self.closure, self.label(v)) is None
        return s

    @property
    def G(self) -> list:
        return self.order

    # -- expansion ----------------------------------------------------------

    def expand(self, v: int) -> list:
        """Expand ``v``; return the newly discovered nodes."""
        c = self.closure
        lab = self.label(v)
        psi = chosen_formula(c, lab)
        if psi is None:
            letters = list(selections(c, lab))
        else:
            kind = c.kinds[psi]
            if kind == "or":
                letters = [DisjChoice(psi, 0), DisjChoice(psi, 1)]
            elif kind == "and":
                letters = [ConjStep(psi)]
            else:
                letters = [UnfoldStep(psi)]
        out = []
        for a in letters:
            u, prio = self.dpa.step(v, a)
            out.append((a, u, prio))
        self.succ[v] = out
        self.order.append(v)
        self.frontier.discard(v)
        new = []
        for _, u, _ in out:
            if u not in self.succ and u not in self.frontier:
                self.frontier.add(u)
                new.append(u)
        return new

    # -- one-step instances -------------------------------------------------

    def instance(self, v: int, labels: Iterable[frozenset]) -> OneStepInstance:
        c = self.closure
        lits, nullary = [], []
        for i in sorted(self.label(v)):
            kind = c.kinds[i]
            if kind == "modal":
                lits.append((c.ops[i], c.children[i]))
            elif kind == "atom":
                nullary.append(tuple(c.ops[i]))
            else:
                nullary.append(kind)
        return OneStepInstance(tuple(lits), frozenset(labels), tuple(nullary))

    def one_step(self, v: int, labels: frozenset) -> OneStepResult:
        key = (self.label(v), labels)
        res = self.onestep_cache.get(key)
        if res is None:
            inst = self.instance(v, labels)
            self.onestep_calls[self.logic.name] += 1
            self.max_literals = max(self.max_literals, len(inst.literals) + len(inst.nullary))
            self.max_instance_size = max(self.max_instance_size, inst.size)
            opts = {}
            if self.logic.name == "poly-probabilistic" and self.poly_depth is not None:
                opts["depth"] = self.poly_depth
            res = onestep_solve(self.logic, inst, **opts)
            if res.incomplete:
                self.incomplete = True
            self.onestep_cache[key] = res
        return res

    # -- propagation --------------------------------------------------------
    # ``X`` is indexed by compressed priority levels.  An edge into ``G``
    # consults ``X[lvl[p]]``; an edge leaving ``G`` consults the fixed set
    # ``outside`` (nodes already decided), so frontier nodes are never in it.

    def levels(self, nodes: Iterable[int]) -> dict:
        nodes = set(nodes)
        return compress_priorities(p for v in nodes for _, u, p in self.succ[v] if u in nodes)

    def f_holds(self, v: int, X: Sequence, G, lvl: dict, outside=frozenset()) -> bool:
        edges = self.succ[v]
        if self.is_state(v):
            labels = frozenset(self.label(u) for _, u, p in edges
                               if ((u in X[lvl[p]]) if u in G else (u in outside)))
            return self.one_step(v, labels).sat
        return any((u in X[lvl[p]]) if u in G else (u in outside) for _, u, p in edges)

    def g_holds(self, v: int, X: Sequence, G, lvl: dict, outside=frozenset()) -> bool:
        edges = self.succ[v]
        if self.is_state(v):
            labels = frozenset(self.label(u) for _, u, p in edges
                               if not ((u in X[lvl[p]]) if u in G else (u in outside)))
            return not self.one_step(v, labels).sat
        return all((u in X[lvl[p]]) if u in G else (u in outside) for _, u, p in edges)

    def f_step(self, X: Sequence, G: Iterable[int], lvl: dict, outside=frozenset()) -> set:
        """Nodes with a one-step satisfiable choice into the ``X`` sets."""
        G = G if isinstance(G, (set, frozenset)) else frozenset(G)
        return {v for v in G if self.f_holds(v, X, G, lvl, outside)}

    def g_step(self, X: Sequence, G: Iterable[int], lvl: dict, outside=frozenset()) -> set:
        """Nodes all of whose choices are refuted by the ``X`` sets.

        Successors not yet expanded are never refuted.
        """
        G = G if isinstance(G, (set, frozenset)) else frozenset(G)
        return {v for v in G if self.g_holds(v, X, G, lvl, outside)}

    def edge_levels(self, C: frozenset) -> dict:
        """Per-node list of levels of the outgoing edges (0 for edges leaving ``C``)."""
        flat = [(v, u, p) for v in sorted(C) for _, u, p in self.succ[v] if u in C]
        levels = iter(compress_cycles(C, flat))
        return {v: [next(levels) if u in C else 0 for _, u, _ in self.succ[v]] for v in sorted(C)}

    def _compile(self, C: frozenset, elvl: dict, dual: bool):
        """Node-wise body for one component; ``X[0]`` holds the decided outside set."""
        table: dict = {}
        preds: dict = {}
        for v in C:
            edges = []
            for (_, u, _), l in zip(self.succ[v], elvl[v]):
                edges.append((u, l))
                if l:
                    preds.setdefault(u, []).append((v, l))
            labels = [self.label(u) for u, _ in edges] if self.is_state(v) else None
            table[v] = (edges, labels, self._mask_cache.setdefault(v, {}))

        def holds(v, X) -> bool:
            edges, labels, cache = table[v]
            if labels is None:
                if dual:
                    return all(u in X[l] for u, l in edges)
                return any(u in X[l] for u, l in edges)
            mask = 0
            for i, (u, l) in enumerate(edges):
                if (u in X[l]) != dual:
                    mask |= 1 << i
            sat = cache.get(mask)
            if sat is None:
                avail = frozenset(labels[i] for i in range(len(edges)) if mask >> i & 1)
                sat = cache[mask] = self.one_step(v, avail).sat
            return sat != dual

        return holds, preds

    def components(self, G: Iterable[int]) -> list:
        """Strongly connected components of ``G``, successors first."""
        G = set(G)
        return _sccs(sorted(G), lambda v: [u for _, u, _ in self.succ[v] if u in G])

    def _solve(self, G, dual: bool, reset: bool, scc: bool, won=frozenset(), lost=frozenset(),
               local: bool = True) -> frozenset:
        """Solve for E (or A when ``dual``) with ``won``/``lost`` as constants.

        ``won`` nodes are known members of the result and ``lost`` nodes known
        non-members; both are taken out of the fixpoint computation.
        """
        step = self.g_step if dual else self.f_step
        greatest = (lambda i: i % 2 == 1) if dual else (lambda i: i % 2 == 0)
        todo = set(G) - won - lost
        parts = self.components(todo) if scc else [todo]
        decided: set = set(won)
        for C in parts:
            C = frozenset(C)
            fixed = frozenset(decided)
            if local and reset:
                elvl = self.edge_levels(C)
                depth = max((l for ls in elvl.values() for l in ls), default=0)
                holds, preds = self._compile(C, elvl, dual)
                decided |= nested_fixpoint_local(depth, greatest, C, holds, preds, fixed)
            else:
                lvl = self.levels(C)
                depth = max(lvl.values(), default=0)
                decided |= nested_fixpoint(depth, greatest, lambda X: step(X, C, lvl, fixed), C, reset)
        return frozenset(decided)

    def compute_E(self, G: Iterable[int] | None = None, reset: bool = True, scc: bool = True,
                  known_E=frozenset(), known_A=frozenset(), local: bool = True) -> frozenset:
        """Satisfiable nodes of ``G``: ``eta_l X_l ... mu X_1. f(X)``.

        With ``scc=True`` the components of ``G`` are solved bottom-up, each
        with only the priorities on its internal edges; ``scc=False``
        evaluates the nested fixpoint over ``G`` as a whole.  Nodes already
        known to be decided (from a smaller ``G``) may be passed in and are
        then treated as constants.  ``local`` selects the worklist evaluation
        of the innermost level.  All variants give the same set.
        """
        G = frozenset(self.order if G is None else G)
        return self._solve(G, False, reset, scc, frozenset(known_E), frozenset(known_A), local)

    def compute_A(self, G: Iterable[int] | None = None, reset: bool = True, scc: bool = True,
                  known_E=frozenset(), known_A=frozenset(), local: bool = True) -> frozenset:
        """Unsatisfiable nodes of ``G``: the dual fixpoint over ``g``."""
        G = frozenset(self.order if G is None else G)
        return self._solve(G, True, reset, scc, frozenset(known_A), frozenset(known_E), local)

    def propagate(self, incremental: bool = True) -> tuple:
        """Compute ``(E_G, A_G)`` for the current ``G``.

        Incremental propagation reuses the previous pass: decided nodes stay
        decided when ``G`` grows.
        """
        kE, kA = (self.E, self.A) if incremental else (frozenset(), frozenset())
        E = self.compute_E(known_E=kE, known_A=kA)
        A = self.compute_A(known_E=kE, known_A=kA)
        self.E, self.A = E, A
        self.propagations += 1
        self.history.append((len(self.order), E, A))
        return E, A

    # -- strategy -----------------------------------------------------------

    def record_strategy(self, E: frozenset) -> dict:
        """Record a winning choice for every node of ``E``.

        Components are handled bottom-up.  Inside one, least-fixpoint levels
        are replayed stage by stage and a node keeps the choice made when it
        first enters; the stage is then a progress measure, so every path
        along the strategy is accepted.  Greatest-fixpoint levels are
        evaluated to their final value first.
        """
        strategy: dict = {}
        done: set = set()

        for C in self.components(E):
            C = frozenset(C)
            elvl = self.edge_levels(C)
            depth = max((l for ls in elvl.values() for l in ls), default=0)
            holds, preds = self._compile(C, elvl, False)

            def f_record(X) -> set:
                out = set()
                for v in C:
                    edges = self.succ[v]
                    avail = [(a, u) for (a, u, _), l in zip(edges, elvl[v]) if u in X[l]]
                    if self.is_state(v):
                        labels = frozenset(self.label(u) for _, u in avail)
                        res = self.one_step(v, labels)
                        if res.sat:
                            out.add(v)
                            if v not in strategy:
                                target: dict = {}
                                for a, u in avail:
                                    target.setdefault(self.label(u), (a, u))
                                strategy[v] = ("state", res.witness, target)
                    elif avail:
                        out.add(v)
                        if v not in strategy:
                            strategy[v] = ("prestate", *avail[0])
                return out

            X = [frozenset(done)] + [C if i % 2 == 0 else frozenset() for i in range(1, depth + 1)]

            def final(j: int) -> frozenset:
                # value of level j for the current outer values X[j+1..]
                return nested_fixpoint_local(j, lambda i: i % 2 == 0, C, holds, preds, X[0], X[j + 1:])

            def record(j: int) -> frozenset:
                if j == 0:
                    return frozenset(f_record(X))
                if j % 2 == 0:
                    X[j] = final(j)
                    return record(j - 1)
                Y = frozenset()
                while True:
                    X[j] = Y
                    Z = record(j - 1)
                    if Z == Y:
                        return Y
                    Y = Z

            won = record(depth)
            if won != C:
                raise AssertionError("strategy pass disagrees with the propagation result")
            done |= C
        missing = set(E) - set(strategy)
        if missing:
            raise AssertionError(f"strategy missing for {len(missing)} nodes of E")
        self.strategy = strategy
        return strategy

    # -- statistics ---------------------------------------------------------

    def stats(self) -> dict:
        states = sum(1 for v in self.order if self.is_state(v))
        return {
            "formula_size": self.closure.n,
            "alternation_depth": self.closure.k,
            "closure_size": len(self.closure),
            "nba_states": len(self.nba),
            "dpa_states": len(self.dpa),
            "nodes_expanded": len(self.order),
            "states": states,
            "prestates": len(self.order) - states,
            "propagations": self.propagations,
            "onestep_calls": dict(self.onestep_calls),
            "onestep_max_literals": self.max_literals,
            "onestep_max_size": self.max_instance_size,
            "incomplete_onestep": self.incomplete,
        }


def run(chi: Formula, logic: Union[str, Logic] = "kripke", propagate_every: int = 16,
        order: str = "fifo", node_cap: int | None = None, time_cap: float | None = None,
        poly_depth: int | None = None, build_model: bool = True) -> RunResult:
    """Decide satisfiability of ``chi`` by global caching.

    ``propagate_every`` expansions trigger an intermediate propagation
    (0 disables them).  ``order`` is ``fifo``, ``dfs`` or ``prestate-first``.
    """
    if order not in ("fifo", "dfs", "prestate-first"):
        raise ValueError(f"unknown expansion order {order!r}")
    start = time.perf_counter()
    tab = Tableau(chi, logic, poly_depth=poly_depth)
    queue: deque = deque([tab.v0])
    since = 0

    def finish(verdict, E=None, reason=""):
        result = RunResult(verdict, tab, reason=reason)
        if verdict == SAT:
            tab.record_strategy(E)
            if build_model:
                from .model import extract_model, holds_at
                result.model = extract_model(tab)
                result.model_ok = holds_at(result.model, chi)
                if not result.model_ok:
                    log.error("extracted model does not satisfy the formula")
        stats = tab.stats()
        stats["verdict"] = verdict
        stats["wall_time_s"] = time.perf_counter() - start
        if result.model is not None:
            stats["model_states"] = len(result.model.states)
            stats["model_checked"] = result.model_ok
        result.stats = stats
        return result

    while queue:
        if node_cap is not None and len(tab.order) >= node_cap:
            return finish(EXHAUSTED, reason=f"node cap {node_cap} reached")
        if time_cap is not None and time.perf_counter() - start > time_cap:
            return finish(EXHAUSTED, reason=f"time cap {time_cap}s reached")
        if order == "fifo":
            v = queue.popleft()
        elif order == "dfs":
            v = queue.pop()
        else:
            idx = next((i for i, u in enumerate(queue) if not tab.is_state(u)), 0)
            v = queue[idx]
            del queue[idx]
        if v in tab.succ:
            continue
        queue.extend(tab.expand(v))
        since += 1
        if propagate_every and since >= propagate_every and queue:
            since = 0
            E, A = tab.propagate()
            if tab.v0 in E:
                return finish(SAT, E)
            if tab.v0 in A:
                return finish(UNSAT)
    E, A = tab.propagate()
    if tab.v0 in E:
        return finish(SAT, E)
    return finish(UNSAT)
