"""Omega-automata: parity to Buchi, Safra/Piterman determinization, complement.

All acceptance conditions are on transitions.  Parity automata use the
max-parity convention: a run is accepting when the highest priority seen
infinitely often is even.

The deterministic automaton is built lazily.  Macro-states are compact
Safra trees (node names kept dense and ordered by age); they are created
only when a transition out of an existing macro-state is requested.
"""
from __future__ import annotations

from itertools import chain
from typing import Hashable, Iterable, Sequence

from .tracking import Letter, TrackingNPA

__all__ = [
    "NBA", "parity_to_buchi", "DPA", "determinize", "complement",
    "lasso_accepts_npa", "lasso_accepts_nba", "lasso_accepts_dpa",
]


# ---------------------------------------------------------------------------
# Parity -> Buchi
# ---------------------------------------------------------------------------

class NBA:
    """Buchi automaton guessing a dominating even priority.

    States are ``(q, None)`` (initial copy, no acceptance) and ``(q, p)``
    for each even priority ``p``: in copy ``p`` only tracking transitions of
    priority at most ``p`` exist, and those of priority exactly ``p`` are
    accepting.
    """

    def __init__(self, npa: TrackingNPA):
        self.npa = npa
        self.evens = sorted(p for p in npa.priorities() if p % 2 == 0)
        self.initial = (npa.initial, None)

    @property
    def states(self) -> list:
        qs = list(self.npa.nodes)
        return [(q, None) for q in qs] + [(q, p) for p in self.evens for q in qs]

    def __len__(self) -> int:
        return len(self.npa) * (1 + len(self.evens))

    def succ(self, state, letter: Letter) -> list:
        """``[(target, accepting)]`` for one letter."""
        q, copy = state
        out = []
        for t, prio in self.npa.succ(q, letter):
            if copy is None:
                out.append(((t, None), False))
                out.extend(((t, p), False) for p in self.evens if prio <= p)
            elif prio <= copy:
                out.append(((t, copy), prio == copy))
        return out


def parity_to_buchi(npa: TrackingNPA) -> NBA:
    return NBA(npa)


# ---------------------------------------------------------------------------
# Safra trees
# ---------------------------------------------------------------------------
# A tree is encoded as a nested tuple ``(name, label, children)`` with
# ``label`` a frozenset of NBA states and ``children`` a tuple of subtrees
# ordered from oldest to youngest.  ``None`` is the empty tree.


class _Node:
    __slots__ = ("name", "label", "children", "old")

    def __init__(self, name, label, children, old=True):
        self.name = name
        self.label = label
        self.children = children
        self.old = old

    def freeze(self):
        return (self.name, self.label, tuple(ch.freeze() for ch in self.children))


def _thaw(tree) -> _Node:
    name, label, children = tree
    return _Node(name, set(label), [_thaw(ch) for ch in children])


def _walk(node: _Node):
    yield node
    for ch in node.children:
        yield from _walk(ch)


def safra_step(nba: NBA, tree, letter: Letter):
    """One determinization step; returns ``(tree, event)`` where ``event`` is
    ``("good", e)``, ``("bad", f)`` or ``None`` (names before renaming)."""
    if tree is None:
        return None, None
    root = _thaw(tree)
    nodes = list(_walk(root))
    next_name = max(n.name for n in nodes) + 1
    cache: dict = {}

    def step(label):
        all_t, acc_t = set(), set()
        for s in label:
            if s not in cache:
                cache[s] = nba.succ(s, letter)
            for t, acc in cache[s]:
                all_t.add(t)
                if acc:
                    acc_t.add(t)
        return all_t, acc_t

    # successor labels, spawning a youngest child for accepting targets
    for node in nodes:
        all_t, acc_t = step(node.label)
        node.label = all_t
        if acc_t:
            node.children.append(_Node(next_name, acc_t, [], old=False))
            next_name += 1
        # children's labels are handled through their own iteration

    # horizontal merge: a state stays only in the oldest branch
    def prune(node: _Node, allowed: set) -> None:
        node.label &= allowed
        used: set = set()
        for ch in node.children:
            prune(ch, node.label - used)
            used |= ch.label

    prune(root, set(root.label))

    removed: list = []

    def drop_empty(node: _Node) -> None:
        keep = []
        for ch in node.children:
            if ch.label:
                drop_empty(ch)
                keep.append(ch)
            else:
                removed.extend(n.name for n in _walk(ch) if n.old)
        node.children = keep

    if not root.label:
        return None, None
    drop_empty(root)

    marked: list = []

    def vertical(node: _Node) -> None:
        if node.children:
            union = set().union(*(ch.label for ch in node.children))
            if union == node.label:
                for ch in node.children:
                    removed.extend(n.name for n in _walk(ch) if n.old)
                node.children = []
                if node.old:
                    marked.append(node.name)
                return
        for ch in node.children:
            vertical(ch)

    vertical(root)

    f = min(removed) if removed else None
    e = min(marked) if marked else None
    if e is not None and (f is None or e < f):
        event = ("good", e)
    elif f is not None:
        event = ("bad", f)
    else:
        event = None

    # dense renaming preserving age order
    survivors = sorted(n.name for n in _walk(root))
    rename = {old: i + 1 for i, old in enumerate(survivors)}
    for n in _walk(root):
        n.name = rename[n.name]
        n.label = frozenset(n.label)
    return root.freeze(), event


def tree_label(tree) -> frozenset:
    return frozenset() if tree is None else frozenset(q for q, _ in tree[1])


# ---------------------------------------------------------------------------
# Deterministic parity automaton
# ---------------------------------------------------------------------------

class DPA:
    """Lazily built deterministic parity automaton.

    Macro-states are integers; ``trees[v]`` is the Safra tree and
    ``label(v)`` the set of tracking-automaton formulas it contains.  With
    ``m`` NBA states, priorities lie in ``1..2m+1``; a complemented view adds
    one to every priority, giving ``2..2m+2``.
    """

    def __init__(self, nba: NBA, shift: int = 0, _shared=None):
        self.nba = nba
        self.npa = nba.npa
        self.shift = shift
        if _shared is None:
            m = len(nba)
            init = (1, frozenset({nba.initial}), ())
            _shared = {"m": m, "trees": [init], "index": {init: 0}, "delta": {}, "labels": [tree_label(init)]}
        self._s = _shared
        self.initial = 0

    @property
    def m(self) -> int:
        return self._s["m"]

    @property
    def trees(self) -> list:
        return self._s["trees"]

    def __len__(self) -> int:
        """Number of macro-states created so far."""
        return len(self._s["trees"])

    @property
    def max_priority(self) -> int:
        return 2 * self.m + 1 + self.shift

    def label(self, v: int) -> frozenset:
        return self._s["labels"][v]

    def letters(self, v: int) -> list:
        return self.npa.letters_for(self.label(v))

    def _priority(self, event) -> int:
        m = self.m
        if event is None:
            return 1
        kind, name = event
        return 2 * m + 2 - 2 * name if kind == "good" else 2 * m + 3 - 2 * name

    def step(self, v: int, letter: Letter) -> tuple:
        """``(successor, priority)`` of the transition on ``letter``."""
        key = (v, letter)
        delta = self._s["delta"]
        if key not in delta:
            tree, event = safra_step(self.nba, self._s["trees"][v], letter)
            index = self._s["index"]
            if tree not in index:
                index[tree] = len(self._s["trees"])
                self._s["trees"].append(tree)
                self._s["labels"].append(tree_label(tree))
            delta[key] = (index[tree], self._priority(event))
        u, prio = delta[key]
        return u, prio + self.shift

    def complement(self) -> "DPA":
        return DPA(self.nba, self.shift + 1, self._s)


def determinize(nba: NBA) -> DPA:
    return DPA(nba)


def complement(d: DPA) -> DPA:
    """Raise every priority by one; the language becomes the complement."""
    return d.complement()


# ---------------------------------------------------------------------------
# Lasso oracles
# ---------------------------------------------------------------------------

def _lasso_graph(initial_states: Iterable, succ, prefix: Sequence, loop: Sequence):
    """Exact product of an automaton with ``prefix . loop^omega``.

    Returns ``(starts, edges)``: product nodes are ``(state, position)`` with
    ``position`` an index into ``loop``; ``edges`` maps a node to a list of
    ``(node, weight)``.
    """
    current = set(initial_states)
    for a in prefix:
        current = {t for s in current for t, _ in succ(s, a)}
    starts = {(s, 0) for s in current}
    edges: dict = {}
    stack = list(starts)
    while stack:
        node = stack.pop()
        if node in edges:
            continue
        s, i = node
        out = [((t, (i + 1) % len(loop)), w) for t, w in succ(s, loop[i])]
        edges[node] = out
        stack.extend(t for t, _ in out if t not in edges)
    return starts, edges


def _sccs(nodes: Iterable, edges_of) -> list:
    """Tarjan's algorithm (iterative); returns a list of node sets."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges_of(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for t in it:
                if t not in index:
                    index[t] = low[t] = counter
                    counter += 1
                    stack.append(t)
                    on_stack.add(t)
                    work.append((t, iter(edges_of(t))))
                    advanced = True
                    break
                if t in on_stack:
                    low[node] = min(low[node], index[t])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = set()
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.add(x)
                    if x == node:
                        break
                out.append(comp)
    return out


def _has_cycle_with(nodes: set, edges: dict, allowed, required) -> bool:
    """Is there a cycle using only ``allowed`` weights and some ``required`` weight?"""
    def edges_of(n):
        return [t for t, w in edges[n] if allowed(w)]

    for comp in _sccs(nodes, edges_of):
        for n in comp:
            for t, w in edges[n]:
                if t in comp and allowed(w) and required(w):
                    return True
    return False


def lasso_accepts_npa(npa: TrackingNPA, prefix: Sequence, loop: Sequence) -> bool:
    """Does some run of the tracking automaton on ``prefix . loop^omega`` accept?"""
    if not loop:
        raise ValueError("loop must be nonempty")
    starts, edges = _lasso_graph([npa.initial], npa.succ, prefix, loop)
    nodes = set(edges)
    for p in sorted({w for out in edges.values() for _, w in out}):
        if p % 2 == 0 and _has_cycle_with(nodes, edges, lambda w, p=p: w <= p, lambda w, p=p: w == p):
            return True
    return False


def lasso_accepts_nba(nba: NBA, prefix: Sequence, loop: Sequence) -> bool:
    if not loop:
        raise ValueError("loop must be nonempty")
    starts, edges = _lasso_graph([nba.initial], nba.succ, prefix, loop)
    return _has_cycle_with(set(edges), edges, lambda w: True, lambda w: w)


def lasso_accepts_dpa(d: DPA, prefix: Sequence, loop: Sequence) -> bool:
    """Run the deterministic automaton; accept iff the max recurring priority is even."""
    if not loop:
        raise ValueError("loop must be nonempty")
    v = d.initial
    for a in prefix:
        v, _ = d.step(v, a)
    seen: dict = {}
    prios: list = []
    i = 0
    while (v, i) not in seen:
        seen[(v, i)] = len(prios)
        v, p = d.step(v, loop[i])
        prios.append(p)
        i = (i + 1) % len(loop)
    return max(prios[seen[(v, i)]:]) % 2 == 0
