"""Running a small experiment batch and reading its outputs.

An experiment spec names a family of solver runs (here: the four
radius/initialization strategy variants on two grids). Each run writes its
iteration log, final control, and stationarity report into its own directory,
and the batch produces a summary table plus a manifest recording seeds and
package versions, so a rerun reproduces everything except the timings.
"""

import argparse
import csv
import json
from pathlib import Path

from slip import ExperimentSpec, run_experiment


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("demo_runs"),
                        help="directory for run outputs")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    spec = ExperimentSpec(
        experiment="strategies",
        n_values=(16, 32),
        alphas=(1e-4,),
        finest_cells=512,
        seed=7,
    )
    out_dir = run_experiment(spec, out_dir=args.out, workers=args.workers)
    print(f"outputs in {out_dir}/")

    with open(out_dir / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"\n{'variant':>8} {'N':>4} {'J':>12} {'TV':>5} {'outer':>6} "
          f"{'termination':>16}")
    for row in rows:
        print(f"{row['variant']:>8} {row['n_cells']:>4} "
              f"{float(row['objective']):>12.6e} {float(row['tv']):>5.1f} "
              f"{row['n_outer']:>6} {row['termination']:>16}")

    manifest = json.loads((out_dir / "manifest.json").read_text())
    print(f"\nmanifest: experiment={manifest['experiment']} "
          f"seed={manifest['seed']}")
    print(f"rng: {manifest['rng']}")

    one_run = out_dir / "runs" / "R0_N32"
    print(f"\nper-run files in {one_run}/:")
    for p in sorted(one_run.iterdir()):
        print(f"  {p.name}")


if __name__ == "__main__":
    main()
