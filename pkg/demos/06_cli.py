"""The musat command line, driven in-process.

Run:  python3 demos/06_cli.py
"""
import json
import sys
import tempfile
from pathlib import Path

from musat.cli import main

tmp = Path(tempfile.mkdtemp())
sys.stderr = sys.stdout  # keep diagnostics next to the command that caused them


def sh(*argv):
    print("$ musat", " ".join(f"'{a}'" if " " in a else a for a in argv))
    code = main(list(argv))
    print(f"[exit {code}]\n")


sh("--logic", "kripke", "--formula", "nu X. <> X")
sh("--logic", "graded", "--formula", "<5> true & [3] false")
sh("--logic", "probabilistic", "--formula", "<1/2> p & <1/2> ~p")
sh("--formula", "p & & q")
sh("--formula", "nu X. mu Y. ((p & <> X) | <> Y)", "--node-cap", "1")

model, stats = tmp / "model.json", tmp / "stats.json"
sh("--formula", "nu X. mu Y. ((p & <> X) | <> Y)", "--model-json", str(model), "--stats-json", str(stats))
print(json.dumps(json.loads(stats.read_text()), indent=1), "\n")
sh("modelcheck", "--model-json", str(model), "--formula", "nu X. <> p | <> X")

inst = tmp / "inst.json"
inst.write_text(json.dumps({"logic": "presburger", "literals": ["L{1,1;3}(a, b)"], "U": [["a", "b"]]}))
sh("onestep", str(inst))

corpus = tmp / "corpus"
corpus.mkdir()
(corpus / "loop.mu").write_text("# logic: kripke\n# expect: SAT\nnu X. <> X\n")
(corpus / "wrong.mu").write_text("# logic: kripke\n# expect: SAT\nmu X. <> X\n")
sh("corpus", str(corpus))
sh("corpus")
