"""Run the lambda-convergence sweep and print the fitted rates.

    python3 scripts/run_sweep.py [--config configs/sweep.toml] [--out out/sweep] [--threads N]
"""

import argparse
import json
from pathlib import Path

from qgswlab.config import load_config
from qgswlab.harness import run_sweep
from qgswlab.report import emit_report

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "sweep.toml")
    ap.add_argument("--out", default="out/sweep")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    rc = load_config(args.config)
    report = run_sweep(rc.sweep_config(), threads=args.threads)
    emit_report(report, args.out, rc.output["formats"])
    print(f"{'norm':<12}{'slope':>8}{'resid':>8}  sup_t error per lambda")
    for fit in report.fits:
        sups = " ".join(f"{c.sup(fit.norm):.3e}" for c in report.cases)
        print(f"{fit.norm:<12}{fit.exponent:8.3f}{fit.residual:8.3f}  {sups}")
    keep = ("c_fit", "scaling_consistent", "bound_exponent")
    print(json.dumps({k: report.checks[k] for k in keep if k in report.checks}))


if __name__ == "__main__":
    main()
