"""The same workflows through the command-line entry point.

``cantilever <command> --example NAME`` runs a built-in configuration;
``--out DIR`` writes <command>.json (and .csv) instead of printing.
"""

import json
import tempfile
from pathlib import Path

from cantilever.cli import main

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    code = main(["certify", "--example", "saturated-linear", "--out", str(out)])
    data = json.loads((out / "certify.json").read_text())
    print("certify exit code      :", code)
    for c in data["certificates"]:
        print(f"  {c['hypothesis']:4s} margin {c['margin']:+.6g} {c['verdict']}")
    print((out / "certify.csv").read_text())

    code = main(["solve", "--example", "saturated-linear", "--out", str(out), "--panels", "128"])
    rows = (out / "solve.csv").read_text().splitlines()
    print("solve exit code        :", code, " last row", rows[-1])
