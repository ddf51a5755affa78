"""Command-line entry point: ``qgswlab {simulate,sweep,norms,patch-study,kernels}``.

Exit codes: 0 success, 1 validation, 2 numerical failure (NaN/CFL), 3 I/O.
Every failure prints a one-line JSON diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, kernels, littlewood_paley as lp
from .config import ConfigError, RunConfig, load_config, parse_config
from .patches import PatchSpec
from .report import _json_safe, emit_report
from .transport import NumericalError, read_snapshot, simulate, write_snapshot

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
OUT_ENV = "QGSWLAB_OUT"


def _fail(code: int, kind: str, message: str, **extra) -> int:
    diag = {"error": kind, "exit_code": code, "message": message, **extra}
    print(json.dumps(diag, default=str), file=sys.stderr)
    return code


def _outdir(args, cfg: RunConfig) -> Path:
    return Path(args.out or cfg.output.get("dir") or os.environ.get(OUT_ENV) or "qgswlab-out")


def _formats(args, cfg: RunConfig) -> list[str]:
    if args.format:
        fmts = [f.strip() for f in args.format.split(",") if f.strip()]
        bad = [f for f in fmts if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError(f"--format: unknown format {bad[0]!r}", key="format")
        return fmts
    return cfg.output["formats"]


def cmd_simulate(args, cfg: RunConfig) -> int:
    sim = cfg.simulate
    omega0, removed = harness.project_mean_zero(harness.initial_field(cfg.initial_data(), cfg.grid))
    times = np.linspace(0.0, sim["T"], sim["samples"])
    traj = simulate(omega0, sim["lambda"], sim["T"], cfg.solver, times)
    out = _outdir(args, cfg)
    snapdir = out / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    for i, snap in enumerate(traj.snapshots):
        write_snapshot(snapdir / f"snap_{i:04d}.qgsw", snap)
    with open(out / "diagnostics.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "mean", "l1", "l2", "l4", "linf", "hamiltonian"])
        for t, d in zip(traj.times, traj.diagnostics):
            w.writerow([repr(float(t))] + [repr(float(getattr(d, k)))
                                           for k in ("mean", "l1", "l2", "l4", "linf", "hamiltonian")])
    print(json.dumps({"command": "simulate", "lambda": sim["lambda"], "steps": traj.steps,
                      "snapshots": len(traj.snapshots), "mean_removed": removed, "out": str(out)}))
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    config = cfg.sweep_config()
    report = harness.run_sweep(config, threads=args.threads)
    paths = emit_report(report, _outdir(args, cfg), _formats(args, cfg))
    print(json.dumps({"command": "sweep", "cases": len(report.cases),
                      "files": [str(p) for p in paths],
                      "fits": {f.norm: f.exponent for f in report.fits}}))
    return EXIT_OK


def cmd_norms(args, cfg: RunConfig) -> int:
    path = args.snapshot or cfg.norms.get("snapshot")
    if not path:
        raise ConfigError("norms needs a snapshot path (norms.snapshot or --snapshot)", key="snapshot")
    f = read_snapshot(path)
    nm = cfg.norms
    spec = lp.BesovSpec(nm["s"], nm["p"], nm["q"])
    bands = lp.band_norms(f, spec.p)
    result = {
        "command": "norms",
        "snapshot": str(path),
        "n": f.grid.n,
        "length": f.grid.length,
        "mean": f.mean(),
        "besov": {"s": spec.s, "p": spec.p, "q": spec.q, "value": lp.besov_norm(f, spec)},
        "band_norms": {str(j): v for j, v in bands.items()},
    }
    if nm["xnorm"]:
        low, tail = lp.x_norm_parts(f, spec.s, spec.p, spec.q)
        result["xnorm"] = {"low": low, "tail": tail, "value": low + tail}
    out = _outdir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    result = _json_safe(result)
    (out / "norms.json").write_text(json.dumps(result, indent=2))
    print(json.dumps(result))
    return EXIT_OK


def cmd_patch_study(args, cfg: RunConfig) -> int:
    ps = cfg.patch_study
    patch = cfg.initial_data()
    if not isinstance(patch, PatchSpec):
        raise ConfigError("patch-study needs initial.kind = 'patch'", key="kind")
    rep = harness.endpoint_patch_study(patch, ps["lambda"], ps["T"], cfg.solver, cfg.grid,
                                       ps["samples"], ps["threshold"])
    result = {"command": "patch-study", "study": rep.to_dict(),
              "diverges": rep.diverges(ps["min_window"])}
    if ps["control"] and patch.shape != "disc":
        radius = patch.b if patch.shape == "ellipse" else patch.min_feature() / 2
        disc = PatchSpec("disc", patch.center, radius=radius, amplitude=patch.amplitude,
                         mollify_width=patch.mollify_width)
        ctl = harness.endpoint_patch_study(disc, ps["lambda"], ps["T"], cfg.solver, cfg.grid,
                                           ps["samples"], ps["threshold"])
        result["control"] = ctl.to_dict()
        result["control_max_sup_difference"] = float(ctl.sup_difference.max())
    out = _outdir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "patch_study.json").write_text(json.dumps(result, indent=2))
    print(json.dumps({k: v for k, v in result.items() if k not in ("study", "control")}
                     | {"window": rep.window, "max_sup_difference": float(rep.sup_difference.max())}))
    return EXIT_OK


def cmd_kernels(args, cfg: RunConfig) -> int:
    kn = cfg.kernels
    lam = kn["lambda"]
    r = np.logspace(math.log10(kn["r_min"]), math.log10(kn["r_max"]), kn["count"])
    k0 = kernels.bessel_k0(r)
    k1 = kernels.bessel_k1(r)
    comb = kernels.kernel_combined(r, lam)
    deriv = kernels.kernel_combined_derivative(r, lam)
    verdict = {
        "monotone": kernels.monotonicity_check(lam, r),
        "k0_derivative_lower_bound": kernels.k0_derivative_lower_bound_holds(r),
        "k0_derivative_plus_inverse_positive": kernels.k0_derivative_positivity_holds(r),
    }
    out = _outdir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "kernels.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "k0", "k1", "combined", "combined_derivative"])
        for row in zip(r, k0, k1, comb, deriv):
            w.writerow([repr(float(x)) for x in row])
    print(json.dumps({"command": "kernels", "lambda": lam, "points": len(r), **verdict}))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "norms": cmd_norms,
    "patch-study": cmd_patch_study,
    "kernels": cmd_kernels,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # report through the JSON diagnostic instead of argparse's usage dump
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qgswlab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--out", help=f"output directory (default: output.dir, ${OUT_ENV}, ./qgswlab-out)")
    parser.add_argument("--threads", type=int, default=1, help="concurrent sweep cases")
    parser.add_argument("--seed", type=int, default=None, help="reserved; the dynamics are deterministic")
    parser.add_argument("--format", help="comma-separated subset of csv,json,svg")
    parser.add_argument("--snapshot", help="snapshot file for the norms command")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    except UsageError as exc:
        return _fail(EXIT_VALIDATION, "usage", str(exc))
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1", key="threads")
        cfg = load_config(args.config) if args.config else parse_config("")
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc), key=exc.key, line=exc.line)
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, "numerical", str(exc))
    except FloatingPointError as exc:
        return _fail(EXIT_NUMERICAL, "numerical", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))


if __name__ == "__main__":
    sys.exit(main())
