"""``musat`` command line.

    musat [solve] --logic L (--formula F | --file PATH) [options]
    musat onestep INSTANCE.json
    musat corpus [DIR] [--jobs N] [--report PATH]
    musat modelcheck --model-json PATH (--formula F | --file PATH)

Exit status: 0 for a decided run (SAT/UNSAT on stdout), 1 for input errors,
2 when a node or time cap is hit, 3 when an internal check fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .formula import FormulaError, LOGICS, Modal, Atom, Top, Bot, get_logic, parse, parse_raw
from .model import Coalgebra, holds_at, model_check
from .onestep import OneStepInstance, check_witness, solve as onestep_solve
from .tableau import EXHAUSTED, SAT, UNSAT, run

log = logging.getLogger("musat")

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_INTERNAL = 0, 1, 2, 3
SUBCOMMANDS = ("solve", "onestep", "corpus", "modelcheck")
STATS_KEYS = (
    "verdict", "logic", "formula_size", "alternation_depth", "closure_size", "nba_states",
    "dpa_states", "nodes_expanded", "states", "prestates", "propagations", "onestep_calls",
    "onestep_max_literals", "onestep_max_size", "incomplete_onestep", "model_states",
    "model_checked", "wall_time_s",
)


class InputError(Exception):
    pass


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
        return value
    return conv


def _nonneg(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _add_formula_source(p):
    p.add_argument("--logic", default="kripke", choices=sorted(LOGICS))
    p.add_argument("--formula", help="formula text")
    p.add_argument("--file", help="file holding the formula ('#' starts a comment line)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="musat", description="Coalgebraic mu-calculus satisfiability")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    s = sub.add_parser("solve", help="decide satisfiability (default)")
    _add_formula_source(s)
    s.add_argument("--propagate-every", type=_nonneg, default=16, metavar="N",
                   help="propagate every N expansions; 0 only at the end")
    s.add_argument("--order", choices=("fifo", "dfs", "prestate-first"), default="fifo")
    s.add_argument("--node-cap", type=_positive(int))
    s.add_argument("--time-cap-ms", type=_positive(int))
    s.add_argument("--model-json", metavar="PATH")
    s.add_argument("--model-dot", metavar="PATH")
    s.add_argument("--stats-json", metavar="PATH")
    s.add_argument("--dump-automata", metavar="PATH")
    s.add_argument("--poly-depth", type=_positive(int), metavar="N")

    o = sub.add_parser("onestep", help="solve a one-step instance given as JSON")
    o.add_argument("instance", help="JSON file, or '-' for stdin")
    o.add_argument("--poly-depth", type=_positive(int), metavar="N")

    c = sub.add_parser("corpus", help="run a directory of formulas with expected verdicts")
    c.add_argument("directory", nargs="?", help="defaults to the bundled corpus")
    c.add_argument("--jobs", type=_positive(int), default=1)
    c.add_argument("--report", metavar="PATH", help="write the JSON report here")
    c.add_argument("--time-cap-ms", type=_positive(int))

    m = sub.add_parser("modelcheck", help="check a formula on a model given as JSON")
    _add_formula_source(m)
    m.add_argument("--model-json", metavar="PATH", required=True)
    m.add_argument("--state", type=int, help="state to check (default: the root)")
    return parser


def read_formula_text(formula: str | None, file: str | None) -> str:
    if (formula is None) == (file is None):
        raise InputError("give exactly one of --formula and --file")
    if formula is not None:
        return formula
    try:
        text = Path(file).read_text()
    except OSError as e:
        raise InputError(f"cannot read {file}: {e}") from e
    return strip_comments(text)


def strip_comments(text: str) -> str:
    return " ".join(line for line in text.splitlines() if not line.lstrip().startswith("#")).strip()


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text + ("" if text.endswith("\n") else "\n"))
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def stats_record(result, logic) -> dict:
    stats = dict(result.stats)
    stats["logic"] = logic
    calls = dict(stats.get("onestep_calls", {}))
    calls.setdefault(logic, 0)
    stats["onestep_calls"] = calls
    stats.setdefault("model_states", None)
    stats.setdefault("model_checked", None)
    return {k: stats.get(k) for k in STATS_KEYS}


def dump_automata(tab) -> str:
    lines = [tab.npa.dump(), "",
             f"buchi automaton: {len(tab.nba)} states, guessed even priorities {tab.nba.evens}", "",
             f"deterministic automaton (complemented): {len(tab.dpa)} macro-states created, "
             f"priorities up to {tab.dpa.max_priority}"]
    for v in range(len(tab.dpa)):
        label = ", ".join(f"q{i}" for i in sorted(tab.label(v)))
        kind = "state" if tab.is_state(v) else "prestate"
        lines.append(f"m{v} [{kind}] {{{label}}}")
        for a, u, p in tab.succ.get(v, ()):
            lines.append(f"    {_letter(a)} -> m{u} [{p}]")
    return "\n".join(lines)


def _letter(a) -> str:
    name = type(a).__name__
    if name == "Selection":
        picks = ",".join(f"q{q}:q{t}" for q, t in sorted(a.picks))
        return f"sel{{{picks}}}"
    if name == "DisjChoice":
        return f"(q{a.formula},{a.b})"
    return f"({'and' if name == 'ConjStep' else 'unfold'} q{a.formula})"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    text = read_formula_text(args.formula, args.file)
    chi = parse(text, args.logic)
    result = run(chi, args.logic, propagate_every=args.propagate_every, order=args.order,
                 node_cap=args.node_cap,
                 time_cap=None if args.time_cap_ms is None else args.time_cap_ms / 1000,
                 poly_depth=args.poly_depth)
    if args.dump_automata:
        _write(args.dump_automata, dump_automata(result.tableau))
    if args.stats_json:
        _write(args.stats_json, json.dumps(stats_record(result, args.logic), indent=2))
    if result.verdict == EXHAUSTED:
        print(f"resource exhausted: {result.reason}", file=sys.stderr)
        return EXIT_RESOURCE
    if result.tableau.incomplete:
        print("warning: polynomial one-step search hit its depth limit; "
              "UNSAT answers below that depth are not certified", file=sys.stderr)
    if result.verdict == SAT:
        m = result.model
        if m is None or not result.model_ok:
            print("internal error: extracted model does not satisfy the formula", file=sys.stderr)
            return EXIT_INTERNAL
        if args.model_json:
            # re-check what is written, in this process, before announcing SAT
            again = Coalgebra.from_json(m.dumps())
            if not holds_at(again, chi):
                print("internal error: serialized model fails the model check", file=sys.stderr)
                return EXIT_INTERNAL
            _write(args.model_json, m.dumps())
        if args.model_dot:
            _write(args.model_dot, m.to_dot())
    print(result.verdict)
    return EXIT_OK


def _literal(text: str, logic):
    f = parse_raw(text, logic)
    if isinstance(f, (Top, Bot)):
        return None, "top" if isinstance(f, Top) else "bot"
    if isinstance(f, Atom):
        return None, (f.name, f.positive)
    if isinstance(f, Modal) and all(isinstance(a, Atom) and a.positive for a in f.args):
        return (f.op, tuple(a.name for a in f.args)), None
    raise InputError(f"not a one-step literal over variables: {text!r}")


def load_instance(data: dict):
    try:
        logic = get_logic(data["logic"])
        lits, nullary = [], []
        for text in data["literals"]:
            lit, nul = _literal(text, logic)
            (lits if lit else nullary).append(lit or nul)
        U = [frozenset(u) for u in data["U"]]
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed one-step instance: {e}") from e
    return logic, OneStepInstance.make(lits, U, nullary)


def _witness_json(logic, witness):
    if witness is None:
        return None
    if logic.functor == "powerset":
        return [sorted(u) for u in sorted(witness, key=sorted)]
    return [{"element": sorted(u), "weight": str(w)} for u, w in sorted(witness.items(), key=lambda x: sorted(x[0])) if w]


def cmd_onestep(args) -> int:
    try:
        raw = sys.stdin.read() if args.instance == "-" else Path(args.instance).read_text()
        data = json.loads(raw)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read instance: {e}") from e
    logic, inst = load_instance(data)
    opts = {"depth": args.poly_depth} if args.poly_depth and logic.name == "poly-probabilistic" else {}
    res = onestep_solve(logic, inst, **opts)
    print("SAT" if res.sat else "UNSAT")
    out = {"sat": res.sat, "witness": _witness_json(logic, res.witness), "incomplete": res.incomplete}
    if res.sat:
        out["witness_checked"] = check_witness(logic, inst, res.witness)
    print(json.dumps(out))
    return EXIT_OK


def cmd_modelcheck(args) -> int:
    text = read_formula_text(args.formula, args.file)
    try:
        m = Coalgebra.from_json(Path(args.model_json).read_text())
    except (OSError, ValueError, KeyError, AssertionError) as e:
        raise InputError(f"cannot load model: {e}") from e
    if m.logic.name != get_logic(args.logic).name:
        raise InputError(f"model is for logic {m.logic.name}, formula for {args.logic}")
    f = parse(text, args.logic)
    sat = model_check(m, f)
    state = m.root if args.state is None else args.state
    if state not in m.states:
        raise InputError(f"no state {state} in the model")
    print("holds" if state in sat else "fails")
    print(json.dumps({"state": state, "satisfying_states": sorted(sat)}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# corpus runner
# ---------------------------------------------------------------------------

def bundled_corpus() -> Path:
    return Path(__file__).with_name("corpus")


def read_entry(path: Path) -> dict:
    """Corpus entry: ``# logic:`` and ``# expect:`` headers plus formula text."""
    text = path.read_text()
    meta = {}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("#") and ":" in line:
            key, _, value = line[1:].partition(":")
            meta[key.strip().lower()] = value.strip()
    logic = meta.get("logic", path.parent.name)
    expect = meta.get("expect", "").upper()
    if logic not in LOGICS:
        raise InputError(f"unknown logic {logic!r}")
    if expect not in (SAT, UNSAT):
        raise InputError("missing '# expect: SAT|UNSAT' header")
    formula = strip_comments(text)
    if not formula:
        raise InputError("no formula")
    return {"logic": logic, "expect": expect, "formula": formula}


def run_entry(path: str, time_cap: float | None = None) -> dict:
    """Run one corpus file; never raises."""
    rec = {"file": path}
    start = time.perf_counter()
    try:
        entry = read_entry(Path(path))
        rec.update(entry)
        chi = parse(entry["formula"], entry["logic"])
        result = run(chi, entry["logic"], time_cap=time_cap)
        rec["verdict"] = result.verdict
        rec["size"] = result.stats["formula_size"]
        rec["alternation_depth"] = result.stats["alternation_depth"]
        rec["nodes"] = result.stats["nodes_expanded"]
        rec["dpa_states"] = result.stats["dpa_states"]
        rec["model_states"] = result.stats.get("model_states")
        rec["model_checked"] = result.model_ok
        rec["onestep_max_literals"] = result.stats["onestep_max_literals"]
        rec["onestep_calls"] = result.stats["onestep_calls"]
        rec["match"] = result.verdict == entry["expect"] and (result.verdict != SAT or bool(result.model_ok))
    except (OSError, UnicodeDecodeError, InputError, FormulaError) as e:
        rec["error"] = str(e)
        rec["match"] = False
    rec["time_s"] = time.perf_counter() - start
    return rec


def corpus_run(directory, jobs: int = 1, time_cap: float | None = None) -> list:
    files = sorted(str(p) for p in Path(directory).rglob("*.mu"))
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(run_entry, files, [time_cap] * len(files)))
    return [run_entry(f, time_cap) for f in files]


def cmd_corpus(args) -> int:
    directory = Path(args.directory) if args.directory else bundled_corpus()
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    cap = None if args.time_cap_ms is None else args.time_cap_ms / 1000
    report = corpus_run(directory, args.jobs, cap)
    for rec in report:
        name = Path(rec["file"]).relative_to(directory)
        if "error" in rec:
            print(f"ERROR    {name}: {rec['error']}", file=sys.stderr)
            continue
        flag = "ok" if rec["match"] else "MISMATCH"
        print(f"{flag:8} {name}  expect={rec['expect']} got={rec['verdict']} "
              f"nodes={rec['nodes']} model={rec['model_states']} {rec['time_s']:.3f}s")
    bad = [r for r in report if not r["match"]]
    total = sum(r["time_s"] for r in report)
    print(f"{len(report) - len(bad)}/{len(report)} match, {total:.2f}s total")
    if args.report:
        _write(args.report, json.dumps(report, indent=2))
    return EXIT_OK if not bad else EXIT_INPUT


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    lead = 1 if argv[:1] in (["-v"], ["--verbose"]) else 0
    first = argv[lead] if len(argv) > lead else None
    if first not in SUBCOMMANDS and first not in ("-h", "--help"):
        argv = argv[:lead] + ["solve"] + argv[lead:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    handlers = {"solve": cmd_solve, "onestep": cmd_onestep, "corpus": cmd_corpus, "modelcheck": cmd_modelcheck}
    try:
        return handlers[args.command](args)
    except (InputError, FormulaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:  # anything else is a bug, not bad input
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
