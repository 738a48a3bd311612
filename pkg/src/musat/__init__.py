"""Satisfiability checking for the coalgebraic mu-calculus.

Supported logics: Kripke (relational), graded, probabilistic, Presburger and
polynomial probabilistic modalities.  ``solve`` parses, decides and, for
satisfiable input, returns a finite model.
"""
from .formula import LOGICS, FormulaError, ParseError, get_logic, parse
from .model import Coalgebra, model_check
from .tableau import EXHAUSTED, SAT, UNSAT, RunResult, run

__version__ = "0.1.0"


def solve(text, logic="kripke", **options) -> RunResult:
    """Parse ``text`` in ``logic`` and decide it; see :func:`musat.tableau.run`."""
    return run(parse(text, logic), logic, **options)


__all__ = [
    "LOGICS", "FormulaError", "ParseError", "get_logic", "parse", "Coalgebra",
    "model_check", "run", "solve", "RunResult", "SAT", "UNSAT", "EXHAUSTED",
]
