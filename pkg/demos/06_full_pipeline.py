"""
The whole pipeline in one run directory
=======================================

simulate writes a synthetic fixture tree (BOLD, events, masks, per-model
embedding tensors, truth records); the remaining stages consume it in
order and leave every product in the same directory. Running this twice
with the same seed produces byte-identical trees.
"""

import tempfile
from pathlib import Path

from brainalign.cli import main

out = Path(tempfile.mkdtemp()) / "run"
config = out.parent / "demo.ini"
config.write_text(
    "[simulate]\n"
    "n = 40\n"
    "dim = 8\n"
    "subjects = 3\n"
    "trial_spacing = 40\n"   # separated trials: exact beta recovery
)

for cmd in ("simulate", "glm", "extract-roi", "encode", "stats", "report"):
    rc = main([cmd, "--config", str(config), "--out", str(out),
               "--seed", "5", "--quiet"])
    assert rc == 0, cmd
    print(f"{cmd:12s} ok")

print(f"\nrun directory: {out}")
for rel in ("results.tsv", "best_layers.tsv", "stats.tsv",
            "report/layer_curves.tsv", "report/best_layer_orders.tsv"):
    print(f"  {rel:32s} {(out / rel).stat().st_size:6d} bytes")

print("\nstats.tsv:")
print((out / "stats.tsv").read_text())
