"""CSV / JSON / SVG output for sweep reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable

from .harness import NORMS, SweepReport

CSV_COLUMNS = ("case_index", "lambda", "t") + NORMS
FORMATS = ("csv", "json", "svg")


def _fmt(x) -> str:
    return repr(float(x))


def csv_text(report: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i, case in enumerate(report.cases):
        for k, t in enumerate(case.times):
            row = [str(i), _fmt(case.lam), _fmt(t)]
            for name in NORMS:
                vals = case.series.get(name)
                row.append("" if vals is None else _fmt(vals[k]))
            w.writerow(row)
    return buf.getvalue()


def _json_safe(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _json_safe(obj.item())
    return obj


def json_text(report: SweepReport) -> str:
    return json.dumps(_json_safe(report.to_dict()), indent=2, sort_keys=False)


def load_json(text: str) -> SweepReport:
    return SweepReport.from_dict(json.loads(text))


def write_svgs(report: SweepReport, outdir: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    matplotlib.rcParams["svg.hashsalt"] = "qgswlab"
    paths = []
    for fit in report.fits:
        lams = np.array([c.lam for c in report.cases])
        errs = np.array([c.sup(fit.norm) for c in report.cases])
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.loglog(lams, errs, "o", label=fit.norm)
        ax.loglog(lams, np.exp(fit.intercept) * lams**fit.exponent, "-",
                  label=f"slope {fit.exponent:.3f}")
        ax.set_xlabel("lambda")
        ax.set_ylabel(f"sup_t {fit.norm}")
        ax.legend()
        fig.tight_layout()
        p = outdir / f"fit_{fit.norm}.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(p)
    return paths


def emit_report(report: SweepReport, outdir: str | Path, formats: Iterable[str] = ("csv", "json")) -> list[Path]:
    """Write the requested formats into ``outdir``; returns the written paths."""
    formats = list(formats)
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown report formats: {bad}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    if "csv" in formats:
        p = outdir / "sweep.csv"
        p.write_text(csv_text(report))
        paths.append(p)
    if "json" in formats:
        p = outdir / "sweep.json"
        p.write_text(json_text(report))
        paths.append(p)
    if "svg" in formats:
        paths.extend(write_svgs(report, outdir))
    return paths
