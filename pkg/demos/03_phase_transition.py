"""Map the recovery boundary in the (sampling rate, rank) plane.

For each grid cell, draws fresh instances and counts how often plain
gradient descent drives the relative error below 1e-8. The 50% success
contour is interpolated per rank row and drawn over the heatmap.

A scaled-down grid keeps the demo under a minute; bump trials and the
grids for smoother pictures.
"""

from pathlib import Path

import numpy as np

from lrmc import ExperimentSpec, extract_contour, run_phase
from lrmc.svgplot import plot_csv

out = Path("demo_output")
out.mkdir(exist_ok=True)

spec = ExperimentSpec(d1=80, d2=60, r=2, kappa=3.0, step=0.5, trials=8,
                      master_seed=0, max_iters=3000,
                      p_grid=tuple(np.round(np.arange(0.1, 0.91, 0.2), 2)),
                      r_grid=(2, 5, 8, 11),
                      algorithms=("VGD",))
grid = run_phase(spec, csv_path=out / "phase.csv",
                 contour_csv_path=out / "contour.csv")

header = "r\\p " + " ".join(f"{p:5.2f}" for p in grid.p_values)
print(header)
for ri, r in enumerate(grid.r_values):
    print(f"{r:4d} " + " ".join(f"{v:5.2f}" for v in grid.rates[ri]))

print("\n50% success contour:")
for r, cross, clipped in extract_contour(grid):
    note = " (already above 50% at the smallest p)" if clipped else ""
    print(f"  r={r:2d}: p = {cross if cross is not None else '---'}{note}")

plot_csv(out / "phase.csv", "heatmap", out / "phase.svg",
         contour_csv=out / "contour.csv")
print(f"\nwrote {out / 'phase.csv'}, {out / 'contour.csv'}, "
      f"{out / 'phase.svg'}")
