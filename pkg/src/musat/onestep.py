"""One-step satisfiability: solvers returning witnesses, and brute-force oracles.

An instance consists of modal literals over abstract variables and a set
``U`` of subsets of those variables.  The question is whether some element
of ``T U`` satisfies every literal, where the literal ``op(a1..an)`` is
interpreted on the sets ``{u in U | ai in u}``.

Witnesses: a subset of ``U`` (Kripke), a multiset ``{u: count}`` (graded,
Presburger) or a distribution ``{u: Fraction}`` (probabilistic, polynomial).
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence, Union

from .formula import Logic, Op, get_logic

log = logging.getLogger(__name__)

__all__ = [
    "OneStepInstance", "OneStepResult", "solve", "solve_kripke", "solve_graded",
    "solve_presburger", "solve_probabilistic", "solve_polynomial", "oracle",
    "check_witness", "fm_feasible", "OracleTooLarge",
]


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OneStepInstance:
    """``literals`` are ``(Op, args)`` pairs; ``nullary`` holds ``"top"``,
    ``"bot"`` or ``(atom, positive)`` entries; ``U`` is a set of frozensets.
    """
    literals: tuple
    U: frozenset
    nullary: tuple = ()

    @classmethod
    def make(cls, literals: Iterable, U: Iterable[Iterable], nullary: Iterable = ()) -> "OneStepInstance":
        lits = tuple((op, tuple(args) if isinstance(args, (tuple, list)) else (args,)) for op, args in literals)
        return cls(lits, frozenset(frozenset(u) for u in U), tuple(nullary))

    def nullary_clash(self) -> bool:
        atoms = {x for x in self.nullary if isinstance(x, tuple)}
        if "bot" in self.nullary:
            return True
        return any((name, not pos) in atoms for name, pos in atoms)

    @property
    def size(self) -> int:
        return sum(op.size() for op, _ in self.literals) + len(self.nullary)


@dataclass
class OneStepResult:
    sat: bool
    witness: object = None
    incomplete: bool = False  # polynomial search hit its depth limit
    steps: int = 0

    def __bool__(self) -> bool:
        return self.sat


def _members(U, a) -> frozenset:
    return frozenset(u for u in U if a in u)


def check_witness(logic: Union[str, Logic], inst: OneStepInstance, witness) -> bool:
    """Evaluate every literal's lifting on the witness (base set ``U``)."""
    lg = get_logic(logic)
    if inst.nullary_clash():
        return False
    if lg.functor == "powerset":
        if not set(witness) <= inst.U:
            return False
        t = frozenset(witness)
    else:
        if any(u not in inst.U or w < 0 for u, w in witness.items()):
            return False
        t = {u: w for u, w in witness.items() if w}
        if lg.functor == "distribution" and sum(t.values(), Fraction(0)) != 1:
            return False
        if lg.functor == "multiset" and any(Fraction(w).denominator != 1 for w in t.values()):
            return False
    return all(op.holds(t, [_members(inst.U, a) for a in args]) for op, args in inst.literals)


# ---------------------------------------------------------------------------
# Kripke
# ---------------------------------------------------------------------------

def solve_kripke(inst: OneStepInstance) -> OneStepResult:
    """Keep the elements satisfying every box; then every diamond needs a member."""
    if inst.nullary_clash():
        return OneStepResult(False)
    boxes = [args[0] for op, args in inst.literals if op.kind == "box"]
    dias = [args[0] for op, args in inst.literals if op.kind == "dia"]
    steps = 0
    A = []
    for u in sorted(inst.U, key=sorted_key):
        ok = True
        for b in boxes:
            steps += 1
            if b not in u:
                ok = False
                break
        if ok:
            A.append(u)
    chosen = []
    for a in dias:
        hit = None
        for u in A:
            steps += 1
            if a in u:
                hit = u
                break
        if hit is None:
            return OneStepResult(False, steps=steps)
        chosen.append(hit)
    return OneStepResult(True, frozenset(A), steps=steps)


def sorted_key(u) -> tuple:
    return (len(u), sorted(map(repr, u)))


# ---------------------------------------------------------------------------
# Linear constraint forms shared by the arithmetic solvers
# ---------------------------------------------------------------------------

def _coefficients(op: Op, args: Sequence, u: frozenset) -> Fraction:
    """Weight with which element ``u`` enters the literal's linear form."""
    if op.kind in ("gdia", "gbox", "pdia", "pbox"):
        coeffs = (1,)
    else:
        coeffs = op.coeffs
    if op.lower:
        return Fraction(sum(a for a, x in zip(coeffs, args) if x in u))
    return Fraction(sum(a for a, x in zip(coeffs, args) if x not in u))


def _signature(inst: OneStepInstance, u: frozenset) -> tuple:
    """Per-argument membership pattern of ``u`` (what the liftings can see)."""
    return tuple(x in u for _, args in inst.literals for x in args)


def _dominant(inst: OneStepInstance, keys: Sequence) -> list:
    """Drop elements whose argument memberships are dominated.

    Membership of an argument helps every literal: lower-bound literals
    count the mass inside their arguments and upper-bound ones bound the
    mass outside.  An element whose memberships are a subset of another
    element's can thus be dropped without losing solutions, as all
    liftings here are monotone.
    """
    by_sig: dict = {}
    for u in keys:
        by_sig.setdefault(_signature(inst, u), u)
    sigs = list(by_sig)

    def better_eq(s, t):  # s at least as good as t everywhere
        return all(x >= y for x, y in zip(s, t))

    keep = []
    for s in sigs:
        if not any(t != s and better_eq(t, s) for t in sigs):
            keep.append(by_sig[s])
    keep.sort(key=sorted_key)
    return keep


# ---------------------------------------------------------------------------
# Graded / Presburger: integer feasibility by capped branch and bound
# ---------------------------------------------------------------------------

def _integer_cap(inst: OneStepInstance) -> int:
    lowers = [int(op.threshold) for op, _ in inst.literals if op.lower]
    return max(lowers, default=0) + 1


def solve_graded(inst: OneStepInstance) -> OneStepResult:
    """Integer-linear feasibility over multisets, each count capped at the
    largest lower threshold plus one (a single capped term then already
    exceeds every lower bound it occurs in)."""
    if inst.nullary_clash():
        return OneStepResult(False)
    elems = _dominant(inst, inst.U)
    cap = _integer_cap(inst)
    lowers, uppers = [], []
    for op, args in inst.literals:
        row = [int(_coefficients(op, args, u)) for u in elems]  # natural coefficients
        if op.lower:
            lowers.append((row, int(op.threshold) + 1))
        else:
            uppers.append((row, int(op.threshold)))
    n = len(elems)
    values = [0] * n
    steps = 0

    def feasible_prefix(j: int) -> bool:
        for row, bound in uppers:
            if sum(row[i] * values[i] for i in range(j)) > bound:
                return False
        for row, need in lowers:
            best = sum(row[i] * values[i] for i in range(j)) + sum(row[i] * cap for i in range(j, n))
            if best < need:
                return False
        return True

    def search(j: int) -> bool:
        nonlocal steps
        steps += 1
        if not feasible_prefix(j):
            return False
        if j == n:
            return True
        for x in range(cap + 1):
            values[j] = x
            if search(j + 1):
                return True
        values[j] = 0
        return False

    if search(0):
        witness = {u: values[i] for i, u in enumerate(elems) if values[i]}
        return OneStepResult(True, witness, steps=steps)
    return OneStepResult(False, steps=steps)


solve_presburger = solve_graded


# ---------------------------------------------------------------------------
# Probabilistic: exact Fourier-Motzkin with strictness tracking
# ---------------------------------------------------------------------------
# A constraint is (coeffs: dict var -> Fraction, const: Fraction, strict)
# meaning  sum(coeffs[x] * x) + const  >= 0  (> 0 when strict).


def _normalize(c):
    coeffs, const, strict = c
    coeffs = {x: a for x, a in coeffs.items() if a}
    if coeffs:
        scale = max(abs(a) for a in coeffs.values())
        coeffs = {x: a / scale for x, a in coeffs.items()}
        const = const / scale
    return (coeffs, const, strict)


def _key(c):
    coeffs, const, strict = c
    return (tuple(sorted(coeffs.items(), key=lambda kv: repr(kv[0]))), const, strict)


def fm_feasible(constraints: Sequence, variables: Sequence):
    """Decide a system of strict/non-strict linear inequalities exactly.

    Returns a satisfying assignment ``{var: Fraction}`` or ``None``.
    """
    systems = []
    current = {}
    for c in constraints:
        c = _normalize(c)
        current[_key(c)] = c
    current = list(current.values())
    for x in variables:
        systems.append((x, current))
        lows, ups, rest = [], [], []
        for c in current:
            a = c[0].get(x, 0)
            (lows if a > 0 else ups if a < 0 else rest).append(c)
        new = {_key(c): c for c in rest}
        for lc in lows:
            for uc in ups:
                a, b = lc[0][x], -uc[0][x]
                coeffs = {}
                for y, v in lc[0].items():
                    coeffs[y] = coeffs.get(y, 0) + v * b
                for y, v in uc[0].items():
                    coeffs[y] = coeffs.get(y, 0) + v * a
                coeffs.pop(x, None)
                c = _normalize((coeffs, lc[1] * b + uc[1] * a, lc[2] or uc[2]))
                if not c[0]:
                    if c[1] < 0 or (c[2] and c[1] == 0):
                        return None
                    continue
                new[_key(c)] = c
        current = list(new.values())
    for coeffs, const, strict in current:
        if const < 0 or (strict and const == 0):
            return None
    # back-substitution, innermost eliminated variable last
    values: dict = {}
    for x, cs in reversed(systems):
        lo = hi = None
        lo_strict = hi_strict = False
        for coeffs, const, strict in cs:
            a = coeffs.get(x, 0)
            if not a:
                continue
            rest = const + sum(v * values[y] for y, v in coeffs.items() if y != x)
            bound = -rest / a
            if a > 0:  # x >= bound
                if lo is None or bound > lo:
                    lo, lo_strict = bound, strict
                elif bound == lo:
                    lo_strict = lo_strict or strict
            else:  # x <= bound
                if hi is None or bound < hi:
                    hi, hi_strict = bound, strict
                elif bound == hi:
                    hi_strict = hi_strict or strict
        if lo is not None and hi is not None:
            if lo == hi:
                value = lo
            elif lo_strict and hi_strict:
                value = (lo + hi) / 2
            else:
                value = hi if lo_strict else lo
        elif lo is not None:
            value = lo + 1 if lo_strict else lo
        elif hi is not None:
            value = hi - 1 if hi_strict else hi
        else:
            value = Fraction(0)
        values[x] = Fraction(value)
    return values


def solve_probabilistic(inst: OneStepInstance) -> OneStepResult:
    """Linear feasibility over the rational simplex on ``U``."""
    if inst.nullary_clash() or not inst.U:
        return OneStepResult(False)
    elems = _dominant(inst, inst.U)
    n = len(elems)
    xs = list(range(n))
    last = n - 1
    # d_last = 1 - sum(others)

    def linear(row, const, strict):
        coeffs = {i: row[i] - row[last] for i in range(last)}
        return (coeffs, const + row[last], strict)

    cons = []
    for i in range(last):
        cons.append(({i: Fraction(1)}, Fraction(0), False))
    cons.append(({i: Fraction(-1) for i in range(last)}, Fraction(1), False))
    for op, args in inst.literals:
        row = [_coefficients(op, args, u) for u in elems]
        if op.lower:  # sum row*d > p
            cons.append(linear(row, -op.threshold, True))
        else:  # sum row*d <= p
            coeffs, const, _ = linear(row, -op.threshold, False)
            cons.append(({x: -a for x, a in coeffs.items()}, -const, False))
    values = fm_feasible(cons, xs[:last])
    if values is None:
        return OneStepResult(False)
    d = [values.get(i, Fraction(0)) for i in range(last)]
    d.append(1 - sum(d, Fraction(0)))
    witness = {u: d[i] for i, u in enumerate(elems) if d[i]}
    return OneStepResult(True, witness)


# ---------------------------------------------------------------------------
# Polynomial: branch and bound over boxes in the simplex
# ---------------------------------------------------------------------------

DEFAULT_POLY_DEPTH = 24


def solve_polynomial(inst: OneStepInstance, depth: int = DEFAULT_POLY_DEPTH) -> OneStepResult:
    """Monotone polynomial constraints over the rational simplex on ``U``.

    Boxes are bisected along their widest side.  A box is accepted when a
    rational point of box-and-simplex satisfies every constraint, rejected
    when exact bounds on the argument masses over the box refute some
    constraint, and split otherwise.  Running out of depth gives an
    UNSAT result flagged ``incomplete``.
    """
    if inst.nullary_clash() or not inst.U:
        return OneStepResult(False)
    elems = _dominant(inst, inst.U)
    n = len(elems)
    # per literal: per argument the index set of elements whose mass counts
    forms = []
    for op, args in inst.literals:
        idx = []
        for a in args:
            if op.lower:
                idx.append([i for i, u in enumerate(elems) if a in u])
            else:
                idx.append([i for i, u in enumerate(elems) if a not in u])
        forms.append((op, idx))

    def mass_bounds(lo, hi, S):
        inside = set(S)
        s_lo, s_hi = sum(lo[i] for i in S), sum(hi[i] for i in S)
        o_lo = sum(lo[i] for i in range(n) if i not in inside)
        o_hi = sum(hi[i] for i in range(n) if i not in inside)
        return max(s_lo, 1 - o_hi), min(s_hi, 1 - o_lo)

    def value(op, masses):
        if op.kind in ("PL", "PM"):
            return op.eval_poly(masses)
        coeffs = op.coeffs or (1,)
        return sum(a * m for a, m in zip(coeffs, masses))

    def point_ok(d) -> bool:
        for op, idx in forms:
            masses = [sum(d[i] for i in S) for S in idx]
            v = value(op, masses)
            if op.lower and not v > op.threshold:
                return False
            if not op.lower and not v <= op.threshold:
                return False
        return True

    def refuted(lo, hi) -> bool:
        for op, idx in forms:
            bounds = [mass_bounds(lo, hi, S) for S in idx]
            if op.lower and value(op, [b[1] for b in bounds]) <= op.threshold:
                return True
            if not op.lower and value(op, [b[0] for b in bounds]) > op.threshold:
                return True
        return False

    def candidates(lo, hi):
        s_lo, s_hi = sum(lo), sum(hi)
        if s_hi == s_lo:
            yield list(lo)
            return
        lam = (1 - s_lo) / (s_hi - s_lo)
        yield [lo[i] + lam * (hi[i] - lo[i]) for i in range(n)]
        # greedy vertices of box-and-simplex, one per ordering start
        for first in range(n):
            d = list(lo)
            rest = 1 - s_lo
            for i in [first] + [j for j in range(n) if j != first]:
                add = min(hi[i] - lo[i], rest)
                d[i] += add
                rest -= add
            yield d

    incomplete = False
    stack = [([Fraction(0)] * n, [Fraction(1)] * n, 0)]
    steps = 0
    while stack:
        lo, hi, level = stack.pop()
        steps += 1
        if sum(lo) > 1 or sum(hi) < 1:
            continue
        if refuted(lo, hi):
            continue
        for d in candidates(lo, hi):
            if point_ok(d):
                return OneStepResult(True, {u: d[i] for i, u in enumerate(elems) if d[i]}, steps=steps)
        if level >= depth:
            incomplete = True
            continue
        widths = [hi[i] - lo[i] for i in range(n)]
        j = max(range(n), key=lambda i: widths[i])
        mid = (lo[j] + hi[j]) / 2
        left_hi = list(hi)
        left_hi[j] = mid
        right_lo = list(lo)
        right_lo[j] = mid
        stack.append((right_lo, list(hi), level + 1))
        stack.append((list(lo), left_hi, level + 1))
    if incomplete:
        log.warning("polynomial one-step search hit depth %d; answering UNSAT", depth)
    return OneStepResult(False, incomplete=incomplete, steps=steps)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_SOLVERS = {
    "kripke": solve_kripke,
    "graded": solve_graded,
    "presburger": solve_presburger,
    "probabilistic": solve_probabilistic,
    "poly-probabilistic": solve_polynomial,
}


def solve(logic: Union[str, Logic], inst: OneStepInstance, **options) -> OneStepResult:
    lg = get_logic(logic)
    for op, _ in inst.literals:
        if op.kind not in lg.kinds:
            raise ValueError(f"operator {op} does not belong to logic {lg.name}")
    if lg.name == "poly-probabilistic":
        res = solve_polynomial(inst, **options)
    else:
        res = _SOLVERS[lg.name](inst)
    if res.sat and not check_witness(lg, inst, res.witness):
        raise AssertionError(f"one-step solver for {lg.name} produced an invalid witness")
    return res


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def oracle(logic: Union[str, Logic], inst: OneStepInstance, bound: int | None = None,
           max_denominator: int = 8, max_elements: int = 4) -> bool:
    """Exhaustive search over small functor elements.

    Kripke: every subset of ``U``.  Multisets: every count vector in
    ``{0..bound}`` (default: largest threshold plus two).  Distributions:
    every grid point with denominator up to ``max_denominator``; this is
    sound for SAT answers only.
    """
    lg = get_logic(logic)
    U = sorted(inst.U, key=sorted_key)
    if len(U) > max_elements:
        raise OracleTooLarge(f"|U| = {len(U)} exceeds oracle limit {max_elements}")
    if inst.nullary_clash():
        return False
    if lg.functor == "powerset":
        for r in range(len(U) + 1):
            for A in itertools.combinations(U, r):
                if check_witness(lg, inst, frozenset(A)):
                    return True
        return False
    if lg.functor == "multiset":
        if bound is None:
            bound = max((int(op.threshold) for op, _ in inst.literals), default=0) + 2
        members = [(op, [_members(inst.U, a) for a in args]) for op, args in inst.literals]
        for counts in itertools.product(range(bound + 1), repeat=len(U)):
            t = {u: c for u, c in zip(U, counts) if c}
            if all(op.holds(t, ms) for op, ms in members):
                return True
        return False
    for den in range(1, max_denominator + 1):
        for comp in _compositions(den, len(U)):
            if check_witness(lg, inst, {u: Fraction(c, den) for u, c in zip(U, comp)}):
                return True
    return False
