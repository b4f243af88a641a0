"""The whole pipeline through the command-line interface.

synth -> forward -> eval -> stats -> inspect on the bundled procedural
fixture, all inside a temporary directory. Every step is a pure function of
its inputs and resolved configuration, so rerunning reproduces each output
byte for byte.

Run:  python3 demos/04_full_pipeline.py
"""

import tempfile
from pathlib import Path

from e2ecd.cli import main
from e2ecd.synth import make_fixture_corpus

root = Path(tempfile.mkdtemp(prefix="e2ecd_pipeline_"))
print(f"working under {root}\n")

registered = root / "registered"
make_fixture_corpus(registered, n_pairs=3, size=64, seed=7)

steps = [
    ["synth", "--input", str(registered), "--output", str(root / "corpus"),
     "--seed", "42"],
    ["forward", "--corpus", str(root / "corpus"), "--weights-seed", "0",
     "--output", str(root / "pred")],
    ["eval", "--pred", str(root / "pred"), "--gt", str(root / "corpus"),
     "--output", str(root / "report"), "--radii", "0,5", "--delta", "0.05"],
    ["stats", "--corpus", str(root / "corpus"), "--output", str(root / "stats")],
    ["inspect", "--corpus", str(root / "corpus"), "--pred", str(root / "pred"),
     "--output", str(root / "panels")],
]
for argv in steps:
    print(f"$ e2ecd {' '.join(argv)}")
    rc = main(argv)
    assert rc == 0, f"step failed with exit code {rc}"
    print()

print("metric report (untrained weights, so the numbers are weak):")
print((root / "report" / "report.csv").read_text())
print("corpus statistics:")
print((root / "stats" / "stats.csv").read_text())
print(f"inspection panels: {len(list((root / 'panels').glob('*.png')))} PNGs "
      f"under {root / 'panels'}")
