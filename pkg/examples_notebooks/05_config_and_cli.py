"""
Config files and the command line
=================================

Scenarios are plain ``key = value`` text.  The same text drives the
``giant-ssh`` command, which writes CSV tables and a JSON summary.
"""

import json
import tempfile
from pathlib import Path

from giant_ssh import io
from giant_ssh.cli import main
from giant_ssh.errors import ConfigError
from giant_ssh.presets import PRESET_TEXT

text = PRESET_TEXT["fig2"]
print(text)
sc = io.parse_scenario(text)
assert io.parse_scenario(io.render(sc)) == sc

# %%
# Mistakes are reported together.
try:
    io.parse_scenario(text.replace("atom.2.n = 54", "atom.2.n = 500") + "atom.2.colour = red\n")
except ConfigError as err:
    for problem in err.problems:
        print("problem:", problem)

# %%
# Run the spectrum and sweep stages into a scratch directory.
with tempfile.TemporaryDirectory() as tmp:
    cfg = Path(tmp) / "fig2.txt"
    cfg.write_text(text)
    main(["sweep", str(cfg), "--out", f"{tmp}/run", "--grid", "0.01"])
    print(sorted(p.name for p in Path(tmp, "run").iterdir()))
    summary = json.loads(Path(tmp, "run", "summary.json").read_text())
    print(json.dumps(summary["sweep"]["crossings"], indent=1))
    print("".join(Path(tmp, "run", "sweep.csv").read_text().splitlines(True)[:4]))
