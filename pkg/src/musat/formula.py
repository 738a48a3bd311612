"""Formulas of the coalgebraic mu-calculus.

The AST is built from frozen dataclasses.  Parsing produces a formula that
may contain negation; :func:`prepare` turns it into the negation-free,
clean, guarded form that the rest of the package works with.

Atoms, ``true`` and ``false`` are treated as nullary modal literals.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Logic", "LOGICS", "get_logic", "Op", "Formula", "Top", "Bot", "Atom",
    "And", "Or", "Not", "Modal", "Var", "Fix", "TOP", "BOT", "FormulaError",
    "ParseError", "parse", "nnf", "prepare", "free_vars", "unfold",
    "alternation_depth", "fixpoint_priorities", "size", "Closure", "closure",
    "show", "conj", "disj",
]


class FormulaError(ValueError):
    """Raised for ill-formed formulas (unguarded, free or unused variables...)."""


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Logics and modal operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Logic:
    name: str
    functor: str  # powerset | multiset | distribution
    kinds: frozenset

    def __str__(self) -> str:
        return self.name


LOGICS = {
    "kripke": Logic("kripke", "powerset", frozenset({"dia", "box"})),
    "graded": Logic("graded", "multiset", frozenset({"gdia", "gbox"})),
    "probabilistic": Logic("probabilistic", "distribution", frozenset({"pdia", "pbox"})),
    "presburger": Logic("presburger", "multiset", frozenset({"L", "M"})),
    "poly-probabilistic": Logic("poly-probabilistic", "distribution", frozenset({"PL", "PM"})),
}


def get_logic(logic: Union[str, Logic]) -> Logic:
    if isinstance(logic, Logic):
        return logic
    try:
        return LOGICS[logic]
    except KeyError:
        raise ValueError(f"unknown logic {logic!r}; expected one of {sorted(LOGICS)}") from None


_DUAL_KIND = {"dia": "box", "box": "dia", "gdia": "gbox", "gbox": "gdia",
              "pdia": "pbox", "pbox": "pdia", "L": "M", "M": "L", "PL": "PM", "PM": "PL"}

# kinds whose lifting is a lower bound on the mass of the argument sets
LOWER_KINDS = frozenset({"dia", "gdia", "pdia", "L", "PL"})

Monomial = tuple  # (coefficient: Fraction, exponents: tuple[int, ...])


def _bits(x: int) -> int:
    return max(1, int(x).bit_length())


@dataclass(frozen=True)
class Op:
    """A modal operator with its parameters.

    ``threshold`` is k (graded), p (probabilistic) or b (Presburger/polynomial);
    ``coeffs`` holds the Presburger coefficients a1..an; ``poly`` holds the
    monomials of a polynomial operator.
    """
    kind: str
    threshold: Fraction = Fraction(0)
    coeffs: tuple = ()
    poly: tuple = ()

    @property
    def arity(self) -> int:
        if self.kind in ("L", "M"):
            return len(self.coeffs)
        if self.kind in ("PL", "PM"):
            return len(self.poly[0][1]) if self.poly else 0
        return 1

    @property
    def lower(self) -> bool:
        return self.kind in LOWER_KINDS

    def dual(self) -> "Op":
        return Op(_DUAL_KIND[self.kind], self.threshold, self.coeffs, self.poly)

    def size(self) -> int:
        if self.kind in ("dia", "box"):
            return 1
        if self.kind in ("gdia", "gbox"):
            return 1 + _bits(int(self.threshold))
        if self.kind in ("pdia", "pbox"):
            return 1 + _bits(self.threshold.numerator) + _bits(self.threshold.denominator)
        if self.kind in ("L", "M"):
            return 1 + sum(_bits(a) for a in self.coeffs) + _bits(int(self.threshold))
        return 1 + len(self.poly)

    def eval_poly(self, values: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for coef, exps in self.poly:
            term = Fraction(coef)
            for x, e in zip(values, exps):
                if e:
                    term *= Fraction(x) ** e
            total += term
        return total

    def holds(self, t, args: Sequence[frozenset]) -> bool:
        """Evaluate the predicate lifting on a functor element.

        ``t`` is a set (powerset), or a mapping to weights (multiset,
        distribution).  ``args`` are the argument predicates as sets of
        base elements.
        """
        k = self.kind
        if k == "dia":
            return not set(t).isdisjoint(args[0])
        if k == "box":
            return set(t) <= set(args[0])
        # integer weights stay ints; rational ones promote to Fraction
        mass_in = [sum(w for x, w in t.items() if x in a) for a in args]
        if self.lower:
            masses = mass_in
        else:
            total = sum(t.values())
            masses = [total - m for m in mass_in]
        b = self.threshold
        if b.denominator == 1:
            b = b.numerator
        if k in ("gdia", "pdia"):
            return masses[0] > b
        if k in ("gbox", "pbox"):
            return masses[0] <= b
        if k in ("L", "M"):
            value = sum(a * m for a, m in zip(self.coeffs, masses))
            return value > b if k == "L" else value <= b
        value = self.eval_poly(masses)
        return value > b if k == "PL" else value <= b

    def __str__(self) -> str:
        k, t = self.kind, self.threshold
        if k == "dia":
            return "<>"
        if k == "box":
            return "[]"
        if k == "gdia":
            return f"<{t}>"
        if k == "gbox":
            return f"[{t}]"
        if k == "pdia":
            return f"<{t.numerator}/{t.denominator}>" if t.denominator != 1 else f"<{t}>"
        if k == "pbox":
            return f"[{t.numerator}/{t.denominator}]" if t.denominator != 1 else f"[{t}]"
        if k in ("L", "M"):
            return f"{k}{{{','.join(map(str, self.coeffs))};{t}}}"
        return f"{k}{{{_show_poly(self.poly)};{t}}}"


def _show_poly(poly) -> str:
    parts = []
    for coef, exps in poly:
        factors = [str(coef)]
        for i, e in enumerate(exps, 1):
            if e:
                factors.append(f"x{i}" if e == 1 else f"x{i}^{e}")
        parts.append("*".join(factors))
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str
    positive: bool = True


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Modal(Formula):
    op: Op
    args: tuple


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Fix(Formula):
    kind: str  # "mu" | "nu"
    var: str
    body: Formula


TOP = Top()
BOT = Bot()


def conj(fs: Iterable[Formula]) -> Formula:
    out: Formula | None = None
    for f in fs:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def disj(fs: Iterable[Formula]) -> Formula:
    out: Formula | None = None
    for f in fs:
        out = f if out is None else Or(out, f)
    return BOT if out is None else out


def show(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Atom):
        return f.name if f.positive else "~" + f.name
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Not):
        return f"~{_paren(f.arg)}"
    if isinstance(f, And):
        return f"{_paren(f.left, And)} & {_paren(f.right)}"
    if isinstance(f, Or):
        return f"{_paren(f.left, Or)} | {_paren(f.right)}"
    if isinstance(f, Modal):
        if f.op.kind in ("L", "M", "PL", "PM"):
            return f"{f.op}({', '.join(show(a) for a in f.args)})"
        return f"{f.op} {_paren(f.args[0])}"
    if isinstance(f, Fix):
        return f"{f.kind} {f.var}. {show(f.body)}"
    raise TypeError(f)


def _paren(f: Formula, same=None) -> str:
    if isinstance(f, (Top, Bot, Atom, Var, Not, Modal)) or (same is not None and isinstance(f, same)):
        return show(f)
    return f"({show(f)})"


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Not):
        yield from subformulas(f.arg)
    elif isinstance(f, Modal):
        for a in f.args:
            yield from subformulas(a)
    elif isinstance(f, Fix):
        yield from subformulas(f.body)


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, Var):
        return frozenset({f.name})
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, Modal):
        return frozenset().union(*(free_vars(a) for a in f.args))
    if isinstance(f, Fix):
        return free_vars(f.body) - {f.var}
    return frozenset()


def size(f: Formula) -> int:
    """Length of ``f``; modal operators count with their representation size."""
    if isinstance(f, (And, Or)):
        return 1 + size(f.left) + size(f.right)
    if isinstance(f, Not):
        return 1 + size(f.arg)
    if isinstance(f, Modal):
        return f.op.size() + sum(size(a) for a in f.args)
    if isinstance(f, Fix):
        return 1 + size(f.body)
    return 1


def substitute(f: Formula, name: str, g: Formula) -> Formula:
    if isinstance(f, Var):
        return g if f.name == name else f
    if isinstance(f, And):
        return And(substitute(f.left, name, g), substitute(f.right, name, g))
    if isinstance(f, Or):
        return Or(substitute(f.left, name, g), substitute(f.right, name, g))
    if isinstance(f, Not):
        return Not(substitute(f.arg, name, g))
    if isinstance(f, Modal):
        return Modal(f.op, tuple(substitute(a, name, g) for a in f.args))
    if isinstance(f, Fix):
        if f.var == name:
            return f
        return Fix(f.kind, f.var, substitute(f.body, name, g))
    return f


def unfold(f: Formula) -> Formula:
    """``eta X. psi`` -> ``psi[X := eta X. psi]``."""
    if not isinstance(f, Fix):
        raise FormulaError(f"not a fixpoint formula: {show(f)}")
    return substitute(f.body, f.var, f)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<sym><>|\[\]|[()<>\[\]{}.,;&|~/*^+!-])
""", re.VERBOSE)


def _tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            toks.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(("eof", "", pos))
    return toks


class _Parser:
    def __init__(self, text: str, logic: Logic):
        self.toks = _tokenize(text)
        self.i = 0
        self.logic = logic

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k: int = 1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.next()
        if t[1] != value:
            raise ParseError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2])
        return t

    def parse(self) -> Formula:
        f = self.disjunction()
        if self.tok[0] != "eof":
            raise ParseError(f"unexpected {self.tok[1]!r}", self.tok[2])
        return f

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.tok[1] == "|":
            self.next()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.tok[1] == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def _require(self, kind: str, pos: int):
        if kind not in self.logic.kinds:
            raise ParseError(f"operator not available in logic {self.logic.name}", pos)

    def unary(self) -> Formula:
        kind, val, pos = self.tok
        if val in ("~", "!", "-"):
            self.next()
            return Not(self.unary())
        if val == "(":
            self.next()
            f = self.disjunction()
            self.expect(")")
            return f
        if val == "<>":
            self.next()
            self._require("dia", pos)
            return Modal(Op("dia"), (self.unary(),))
        if val == "[]":
            self.next()
            self._require("box", pos)
            return Modal(Op("box"), (self.unary(),))
        if val in ("<", "["):
            return self.bracket_modality()
        if kind == "ident":
            if val in ("mu", "nu"):
                self.next()
                var = self.next()
                if var[0] != "ident" or not var[1][0].isupper():
                    raise ParseError("expected fixpoint variable (uppercase identifier)", var[2])
                self.expect(".")
                return Fix(val, var[1], self.disjunction())
            if val == "true":
                self.next()
                return TOP
            if val == "false":
                self.next()
                return BOT
            if val in ("L", "M", "PL", "PM") and self.peek()[1] == "{":
                return self.arith_modality()
            self.next()
            if val[0].isupper():
                return Var(val)
            return Atom(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def number(self) -> Fraction:
        t = self.next()
        if t[0] != "num":
            raise ParseError(f"expected number, found {t[1]!r}", t[2])
        value = Fraction(t[1])
        if self.tok[1] == "/":
            self.next()
            d = self.next()
            if d[0] != "num":
                raise ParseError("expected denominator", d[2])
            if Fraction(d[1]) == 0:
                raise ParseError("zero denominator", d[2])
            value /= Fraction(d[1])
        return value

    def bracket_modality(self) -> Formula:
        open_, pos = self.next()[1], self.tok[2]
        close = ">" if open_ == "<" else "]"
        if self.tok[0] == "ident" and self.tok[1] == "inf":
            self.next()
            self.expect(close)
            self._require("gdia", pos)
            arg = self.unary()
            # <inf> f is unsatisfiable, [inf] f is valid
            return BOT if open_ == "<" else TOP
        value = self.number()
        self.expect(close)
        if self.logic.name in ("graded",):
            if value.denominator != 1:
                raise ParseError("graded index must be a natural number", pos)
            op = Op("gdia" if open_ == "<" else "gbox", value)
        elif self.logic.name == "probabilistic":
            if not 0 <= value <= 1:
                raise ParseError("probability threshold must lie in [0, 1]", pos)
            op = Op("pdia" if open_ == "<" else "pbox", value)
        else:
            raise ParseError(f"operator not available in logic {self.logic.name}", pos)
        return Modal(op, (self.unary(),))

    def arith_modality(self) -> Formula:
        name, pos = self.next()[1], self.tok[2]
        kind = {"L": "L", "M": "M", "PL": "PL", "PM": "PM"}[name]
        self._require(kind, pos)
        self.expect("{")
        if kind in ("L", "M"):
            coeffs = [self.natural()]
            while self.tok[1] == ",":
                self.next()
                coeffs.append(self.natural())
            self.expect(";")
            bound = self.natural()
            self.expect("}")
            if any(a <= 0 for a in coeffs):
                raise ParseError("Presburger coefficients must be positive", pos)
            op = Op(kind, Fraction(bound), tuple(coeffs))
            arity = len(coeffs)
        else:
            monomials = self.polynomial()
            self.expect(";")
            bound = self.number()
            self.expect("}")
            arity = max((i for _, exps in monomials for i in exps), default=0)
            poly = []
            for coef, exps in monomials:
                vec = [0] * arity
                for i, e in exps.items():
                    vec[i - 1] += e
                poly.append((coef, tuple(vec)))
            op = Op(kind, bound, (), tuple(poly))
        self.expect("(")
        args = [self.disjunction()]
        while self.tok[1] == ",":
            self.next()
            args.append(self.disjunction())
        self.expect(")")
        if len(args) != arity:
            raise ParseError(f"{name} expects {arity} arguments, got {len(args)}", pos)
        return Modal(op, tuple(args))

    def natural(self) -> int:
        t = self.next()
        if t[0] != "num" or "." in t[1]:
            raise ParseError(f"expected natural number, found {t[1]!r}", t[2])
        return int(t[1])

    def polynomial(self) -> list:
        monos = [self.monomial()]
        while self.tok[1] == "+":
            self.next()
            monos.append(self.monomial())
        return monos

    def monomial(self):
        coef, exps, first = Fraction(1), {}, True
        while True:
            t = self.tok
            if t[0] == "num":
                coef *= self.number()
            elif t[0] == "ident" and re.fullmatch(r"x[1-9][0-9]*", t[1]):
                self.next()
                e = 1
                if self.tok[1] == "^":
                    self.next()
                    e = self.natural()
                i = int(t[1][1:])
                exps[i] = exps.get(i, 0) + e
            elif first:
                raise ParseError("expected monomial", t[2])
            else:
                raise ParseError("expected factor after '*'", t[2])
            first = False
            if self.tok[1] != "*":
                break
            self.next()
        if coef <= 0:
            raise ParseError("polynomial coefficients must be positive", self.tok[2])
        return coef, exps


def parse(text: str, logic: Union[str, Logic] = "kripke") -> Formula:
    """Parse concrete syntax and return the prepared (negation-free) formula."""
    lg = get_logic(logic)
    raw = _Parser(text, lg).parse()
    return prepare(raw)


def parse_raw(text: str, logic: Union[str, Logic] = "kripke") -> Formula:
    return _Parser(text, get_logic(logic)).parse()


# ---------------------------------------------------------------------------
# Well-formedness, negation normal form, cleaning
# ---------------------------------------------------------------------------

def check_source(f: Formula) -> None:
    """Reject free, unguarded, negatively occurring or unused fixpoint variables."""
    uses: dict = {}

    def go(g: Formula, bound: dict, neg: bool) -> None:
        if isinstance(g, Var):
            if g.name not in bound:
                raise FormulaError(f"free fixpoint variable {g.name}")
            bid, guarded, polarity = bound[g.name]
            if not guarded:
                raise FormulaError(f"fixpoint variable {g.name} is not guarded by a modal operator")
            if polarity != neg:
                raise FormulaError(f"fixpoint variable {g.name} occurs under an odd number of negations")
            uses[bid] += 1
        elif isinstance(g, Not):
            go(g.arg, bound, not neg)
        elif isinstance(g, (And, Or)):
            go(g.left, bound, neg)
            go(g.right, bound, neg)
        elif isinstance(g, Modal):
            guarded = {x: (b, True, p) for x, (b, _, p) in bound.items()}
            for a in g.args:
                go(a, guarded, neg)
        elif isinstance(g, Fix):
            bid = len(uses)
            uses[bid] = 0
            go(g.body, {**bound, g.var: (bid, False, neg)}, neg)
            if not uses[bid]:
                raise FormulaError(f"fixpoint variable {g.var} is bound but never used")

    go(f, {}, False)


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Push negations to the atoms, using dual modalities and mu/nu exchange.

    Constants are folded, and binders whose variable disappears during
    folding are dropped.
    """
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, Top):
        return BOT if negate else TOP
    if isinstance(f, Bot):
        return TOP if negate else BOT
    if isinstance(f, Atom):
        return Atom(f.name, f.positive != negate)
    if isinstance(f, Var):
        return f
    if isinstance(f, (And, Or)):
        left, right = nnf(f.left, negate), nnf(f.right, negate)
        is_and = isinstance(f, And) != negate
        if is_and:
            if isinstance(left, Bot) or isinstance(right, Bot):
                return BOT
            if isinstance(left, Top):
                return right
            if isinstance(right, Top):
                return left
            return And(left, right)
        if isinstance(left, Top) or isinstance(right, Top):
            return TOP
        if isinstance(left, Bot):
            return right
        if isinstance(right, Bot):
            return left
        return Or(left, right)
    if isinstance(f, Modal):
        op = f.op.dual() if negate else f.op
        return Modal(op, tuple(nnf(a, negate) for a in f.args))
    if isinstance(f, Fix):
        kind = {"mu": "nu", "nu": "mu"}[f.kind] if negate else f.kind
        body = nnf(f.body, negate)
        if f.var not in free_vars(body):
            return body
        return Fix(kind, f.var, body)
    raise TypeError(f)


def clean(f: Formula) -> Formula:
    """Alpha-rename so that every variable is bound at most once."""
    seen: set = set()

    def fresh(name: str) -> str:
        i = 1
        while f"{name}_{i}" in seen or f"{name}_{i}" in names:
            i += 1
        return f"{name}_{i}"

    names = {g.var for g in subformulas(f) if isinstance(g, Fix)}

    def walk(g: Formula, env: Mapping[str, str]) -> Formula:
        if isinstance(g, Var):
            return Var(env.get(g.name, g.name))
        if isinstance(g, And):
            return And(walk(g.left, env), walk(g.right, env))
        if isinstance(g, Or):
            return Or(walk(g.left, env), walk(g.right, env))
        if isinstance(g, Not):
            return Not(walk(g.arg, env))
        if isinstance(g, Modal):
            return Modal(g.op, tuple(walk(a, env) for a in g.args))
        if isinstance(g, Fix):
            name = g.var if g.var not in seen else fresh(g.var)
            seen.add(name)
            return Fix(g.kind, name, walk(g.body, {**env, g.var: name}))
        return g

    return walk(f, {})


def prepare(f: Formula) -> Formula:
    """Check, negation-normalize and clean a source formula."""
    check_source(f)
    return clean(nnf(f))


def is_clean(f: Formula) -> bool:
    names = [g.var for g in subformulas(f) if isinstance(g, Fix)]
    return len(names) == len(set(names))


def normalize_vars(f: Formula) -> Formula:
    """Rename bound variables to X0, X1, ... in binding order."""
    counter = iter(range(10 ** 9))

    def walk(g: Formula, env) -> Formula:
        if isinstance(g, Var):
            return Var(env.get(g.name, g.name))
        if isinstance(g, And):
            return And(walk(g.left, env), walk(g.right, env))
        if isinstance(g, Or):
            return Or(walk(g.left, env), walk(g.right, env))
        if isinstance(g, Not):
            return Not(walk(g.arg, env))
        if isinstance(g, Modal):
            return Modal(g.op, tuple(walk(a, env) for a in g.args))
        if isinstance(g, Fix):
            name = f"X{next(counter)}"
            return Fix(g.kind, name, walk(g.body, {**env, g.var: name}))
        return g

    return walk(f, {})


# ---------------------------------------------------------------------------
# Alternation depth
# ---------------------------------------------------------------------------

def fixpoint_priorities(f: Formula) -> dict:
    """Map each bound variable of a clean formula to its alternation level.

    Least fixpoints get even, greatest fixpoints odd levels; a binder gets
    the least level of its parity that is at least the level of every
    binder nested inside it that depends on it (strictly greater when the
    parities differ).  Dependency means the variable occurs free in the
    inner binder's body.
    """
    levels: dict = {}

    def walk(g: Formula) -> list:
        """Return the fixpoint subformulas (outermost) found while computing levels."""
        if isinstance(g, (And, Or)):
            return walk(g.left) + walk(g.right)
        if isinstance(g, Not):
            return walk(g.arg)
        if isinstance(g, Modal):
            return [h for a in g.args for h in walk(a)]
        if isinstance(g, Fix):
            inner = walk(g.body)
            level = 2 if g.kind == "mu" else 1
            for h in _all_nested(inner):
                if g.var in free_vars(h.body):
                    other = levels[h.var]
                    level = max(level, other if h.kind == g.kind else other + 1)
            levels[g.var] = level
            return [g]
        return []

    def _all_nested(fixes: list) -> Iterator[Fix]:
        for h in fixes:
            for s in subformulas(h):
                if isinstance(s, Fix):
                    yield s

    walk(f)
    return levels


def alternation_depth(f: Formula) -> int:
    levels = fixpoint_priorities(f)
    return max(levels.values(), default=0)


# ---------------------------------------------------------------------------
# Fischer-Ladner closure
# ---------------------------------------------------------------------------

@dataclass
class Closure:
    """Index-addressed Fischer-Ladner closure of a prepared formula.

    Entry ``i`` is described by ``kind[i]`` (one of top, bot, atom, and, or,
    modal, fix) and ``children[i]``; a fixpoint entry's only child is its
    one-step unfolding.  Index 0 is the target formula.
    """
    origin: Formula
    kinds: list
    children: list
    ops: list  # Op for modal entries, (name, positive) for atoms, (kind, var) for fix
    priority: list  # alternation level of fix entries, 0 otherwise
    n: int
    k: int
    body: dict = field(default_factory=dict, repr=False)
    source: dict = field(default_factory=dict, repr=False)
    _shown: dict = field(default_factory=dict, repr=False)
    _formulas: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.kinds)

    def is_modal(self, i: int) -> bool:
        return self.kinds[i] in ("modal", "atom", "top", "bot")

    def is_nullary(self, i: int) -> bool:
        return self.kinds[i] in ("atom", "top", "bot")

    def formula(self, i: int) -> Formula:
        """The closure member ``i`` as a closed AST (fixpoints substituted)."""
        if i not in self._formulas:
            g, env = self.source[i]
            for x in sorted(free_vars(g)):
                g = substitute(g, x, self.formula(env[x]))
            self._formulas[i] = g
        return self._formulas[i]

    def show(self, i: int) -> str:
        if i not in self._shown:
            self._shown[i] = show(self.formula(i))
        return self._shown[i]

    def index(self, f: Formula) -> int:
        for i in range(len(self)):
            if self.formula(i) == f:
                return i
        raise KeyError(show(f))


def closure(chi: Formula) -> Closure:
    """Fischer-Ladner closure of a prepared formula (clean, guarded, closed)."""
    if free_vars(chi):
        raise FormulaError(f"formula has free variables {sorted(free_vars(chi))}")
    if not is_clean(chi):
        chi = clean(chi)
    levels = fixpoint_priorities(chi)
    kinds: list = []
    children: list = []
    ops: list = []
    bodies: dict = {}
    table: dict = {}
    source: dict = {}

    def alloc(kind, op, ch) -> int:
        kinds.append(kind)
        ops.append(op)
        children.append(ch)
        return len(kinds) - 1

    def build(g: Formula, env: dict) -> int:
        if isinstance(g, Var):
            return env[g.name]
        if isinstance(g, Fix):
            i = alloc("fix", (g.kind, g.var), ())
            source[i] = (g, env)
            bodies[i] = build(g.body, {**env, g.var: i})
            children[i] = (bodies[i],)
            return i
        if isinstance(g, Top):
            key = ("top", None, ())
        elif isinstance(g, Bot):
            key = ("bot", None, ())
        elif isinstance(g, Atom):
            key = ("atom", (g.name, g.positive), ())
        elif isinstance(g, And):
            key = ("and", None, (build(g.left, env), build(g.right, env)))
        elif isinstance(g, Or):
            key = ("or", None, (build(g.left, env), build(g.right, env)))
        elif isinstance(g, Modal):
            key = ("modal", g.op, tuple(build(a, env) for a in g.args))
        else:
            raise FormulaError(f"negation must be eliminated first: {show(g)}")
        if key not in table:
            table[key] = alloc(*key)
            source[table[key]] = (g, env)
        return table[key]

    root = build(chi, {})
    # renumber in preorder from the root so index order is deterministic
    order: list = []
    seen: set = set()
    stack = [root]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        order.append(i)
        stack.extend(reversed(children[i]))
    new = {old: j for j, old in enumerate(order)}
    return Closure(
        origin=chi,
        kinds=[kinds[o] for o in order],
        children=[tuple(new[x] for x in children[o]) for o in order],
        ops=[ops[o] for o in order],
        priority=[levels[ops[o][1]] if kinds[o] == "fix" else 0 for o in order],
        n=size(chi),
        k=max(levels.values(), default=0),
        body={new[i]: new[b] for i, b in bodies.items()},
        source={new[i]: (g, {x: new[j] for x, j in env.items()}) for i, (g, env) in source.items()},
    )
