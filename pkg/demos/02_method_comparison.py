"""Compare the three descent variants on one instance.

Runs plain gradient descent, its ridge-penalized version at two
penalty strengths, and the variant with the explicit norm-imbalance
penalty, all from the same spectral starting point. Writes the per-step
error table to convergence.csv and renders it to convergence.svg.

The plain and imbalance-penalized methods track each other closely; the
strongly penalized ridge run settles at a plateau set by its penalty.
"""

from pathlib import Path

from lrmc import ExperimentSpec, run_convergence
from lrmc.svgplot import plot_csv

out = Path("demo_output")
out.mkdir(exist_ok=True)

spec = ExperimentSpec(d1=160, d2=100, r=5, kappa=1.0, p=0.2, step=0.5,
                      lambdas=(1e-6, 1e-10), trials=1, master_seed=0,
                      max_iters=3000, tol=1e-13,
                      algorithms=("VGD", "RGD", "BGD"))
rows = run_convergence(spec, csv_path=out / "convergence.csv",
                       compute_dist=False)

for alg, lam in (("VGD", ""), ("BGD", ""), ("RGD", repr(1e-6)),
                 ("RGD", repr(1e-10))):
    final = [r for r in rows
             if r["algorithm"] == alg and r["lambda"] == lam][-1]
    label = alg if not lam else f"{alg}(lam={float(lam):g})"
    print(f"{label:16s} k={final['k']:>5}  "
          f"rel_err={float(final['rel_err']):.3e}")

plot_csv(out / "convergence.csv", "lines", out / "convergence.svg")
print(f"\nwrote {out / 'convergence.csv'} and {out / 'convergence.svg'}")
