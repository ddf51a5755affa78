"""TOML run configuration with strict key checking.

Every section and key is validated before any computation starts; unknown
keys are errors (with a close-match suggestion), syntax errors carry the
line number reported by the parser.
"""

from __future__ import annotations

import difflib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli

from .harness import NORMS, GaussianBlobs, SweepConfig, ThetaRule, two_blob
from .patches import PatchSpec
from .spectral import Grid
from .transport import SolverConfig


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line


SCHEMA: dict[str, dict[str, Any]] = {
    "grid": {"n": int, "length": float},
    "solver": {
        "cfl": float,
        "filter": bool,
        "filter_alpha": float,
        "filter_order": float,
        "dt": float,
        "snapshot_cadence": float,
    },
    "initial": {
        "kind": str,
        "sigma": float,
        "amplitude": float,
        "blobs": list,
        "shape": str,
        "radius": float,
        "a": float,
        "b": float,
        "orientation": float,
        "vertices": list,
        "center": list,
        "mollify_width": float,
    },
    "sweep": {"lambdas": list, "T": float, "samples": int, "norms": list, "theta_rule": dict},
    "simulate": {"lambda": float, "T": float, "samples": int},
    "patch_study": {
        "lambda": float,
        "T": float,
        "samples": int,
        "threshold": float,
        "min_window": float,
        "control": bool,
    },
    "norms": {"snapshot": str, "s": float, "p": float, "q": float, "xnorm": bool},
    "kernels": {"lambda": float, "r_min": float, "r_max": float, "count": int},
    "output": {"dir": str, "formats": list},
}
THETA_KEYS = {"C": float, "alpha": float}


def _suggest(word: str, options) -> str:
    close = difflib.get_close_matches(word, list(options), n=1, cutoff=0.5)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _typed(section: str, key: str, value: Any, kind) -> Any:
    name = f"{section}.{key}"
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}", key=key)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}", key=key)
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{name}: expected {kind.__name__}, got {value!r}", key=key)
    return value


@dataclass
class RunConfig:
    grid: Grid = field(default_factory=lambda: Grid(128))
    solver: SolverConfig = field(default_factory=SolverConfig)
    initial: dict[str, Any] = field(default_factory=dict)
    sweep: dict[str, Any] = field(default_factory=dict)
    simulate: dict[str, Any] = field(default_factory=dict)
    patch_study: dict[str, Any] = field(default_factory=dict)
    norms: dict[str, Any] = field(default_factory=dict)
    kernels: dict[str, Any] = field(default_factory=dict)
    output: dict[str, Any] = field(default_factory=dict)

    def initial_data(self) -> GaussianBlobs | PatchSpec:
        return build_initial(self.initial, self.grid)

    def sweep_config(self) -> SweepConfig:
        s = self.sweep
        if not s.get("lambdas"):
            raise ConfigError("sweep.lambdas is required for a sweep", key="lambdas")
        return SweepConfig(
            initial_data=self.initial_data(),
            lambdas=tuple(s["lambdas"]),
            T=s["T"],
            n=self.grid.n,
            length=self.grid.length,
            solver=self.solver,
            theta_rule=ThetaRule(**s["theta_rule"]),
            norms=tuple(s["norms"]),
            samples=s["samples"],
        )


def build_initial(section: dict[str, Any], grid: Grid) -> GaussianBlobs | PatchSpec:
    kind = section.get("kind", "two_blob")
    if kind == "two_blob":
        extra = set(section) - {"kind", "sigma", "amplitude"}
        if extra:
            raise ConfigError(f"initial: keys {sorted(extra)} do not apply to kind 'two_blob'",
                              key=sorted(extra)[0])
        return two_blob(grid.length, section.get("sigma", grid.length / 16), section.get("amplitude", 1.0))
    if kind == "blobs":
        extra = set(section) - {"kind", "blobs"}
        if extra:
            raise ConfigError(f"initial: keys {sorted(extra)} do not apply to kind 'blobs'",
                              key=sorted(extra)[0])
        try:
            return GaussianBlobs(tuple(tuple(b) for b in section.get("blobs", [])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"initial.blobs: {exc}", key="blobs") from exc
    if kind == "patch":
        d = {k: v for k, v in section.items() if k != "kind"}
        d.setdefault("mollify_width", 4.0 * grid.dx)
        for k in ("sigma", "blobs"):
            if k in d:
                raise ConfigError(f"initial.{k} does not apply to kind 'patch'", key=k)
        if "center" not in d:
            d["center"] = [grid.length / 2, grid.length / 2]
        try:
            return PatchSpec.from_dict(d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"initial: {exc}", key="shape") from exc
    raise ConfigError(f"initial.kind must be 'two_blob', 'blobs' or 'patch', got {kind!r}", key="kind")


_LINE_RE = re.compile(r"line (\d+)")


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = _LINE_RE.search(str(exc))
        line = int(m.group(1)) if m else None
        raise ConfigError(f"syntax error: {exc}", line=line) from exc

    for section in raw:
        if section not in SCHEMA:
            raise ConfigError(f"unknown section {section!r}{_suggest(section, SCHEMA)}", key=section)
        if not isinstance(raw[section], dict):
            raise ConfigError(f"{section!r} must be a table", key=section)
    vals: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        out = {}
        for key, value in given.items():
            if key not in keys:
                raise ConfigError(
                    f"unknown key {section}.{key}{_suggest(key, keys)}", key=key
                )
            out[key] = _typed(section, key, value, keys[key])
        vals[section] = out

    cfg = RunConfig()
    g = vals["grid"]
    try:
        cfg.grid = Grid(g.get("n", 128), g.get("length", 2 * math.pi))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}", key="n" if "n" in str(exc) else "length") from exc
    try:
        cfg.solver = SolverConfig(**vals["solver"])
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}", key=str(exc).split()[0]) from exc

    cfg.initial = vals["initial"]
    # build once so bad initial data is reported before any computation
    cfg.initial_data()

    sw = dict(vals["sweep"])
    lams = sw.get("lambdas", [])
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in lams):
        raise ConfigError("sweep.lambdas must be a list of numbers", key="lambdas")
    lams = [float(x) for x in lams]
    if any(not x > 0 for x in lams):
        raise ConfigError("sweep.lambdas must be positive", key="lambdas")
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ConfigError("sweep.lambdas must be strictly decreasing", key="lambdas")
    sw["lambdas"] = lams
    sw.setdefault("T", 1.0)
    sw.setdefault("samples", 11)
    norms = sw.setdefault("norms", list(NORMS))
    bad = [x for x in norms if x not in NORMS]
    if bad:
        raise ConfigError(f"sweep.norms: unknown norm {bad[0]!r}{_suggest(str(bad[0]), NORMS)}", key="norms")
    theta = sw.get("theta_rule", {})
    for k, v in theta.items():
        if k not in THETA_KEYS:
            raise ConfigError(f"unknown key sweep.theta_rule.{k}{_suggest(k, THETA_KEYS)}", key=k)
        theta[k] = _typed("sweep.theta_rule", k, v, float)
    try:
        ThetaRule(**theta)
    except ValueError as exc:
        raise ConfigError(str(exc), key="theta_rule") from exc
    sw["theta_rule"] = theta
    if not sw["T"] > 0:
        raise ConfigError("sweep.T must be positive", key="T")
    if sw["samples"] < 2:
        raise ConfigError("sweep.samples must be >= 2", key="samples")
    cfg.sweep = sw

    sim = {"lambda": 0.0, "T": 1.0, "samples": 11, **vals["simulate"]}
    if sim["lambda"] < 0:
        raise ConfigError("simulate.lambda must be nonnegative", key="lambda")
    if not sim["T"] > 0:
        raise ConfigError("simulate.T must be positive", key="T")
    if sim["samples"] < 2:
        raise ConfigError("simulate.samples must be >= 2", key="samples")
    cfg.simulate = sim

    ps = {"lambda": 0.5, "T": 1.0, "samples": 41, "threshold": 0.9, "min_window": 0.2,
          "control": True, **vals["patch_study"]}
    if not ps["lambda"] > 0:
        raise ConfigError("patch_study.lambda must be positive", key="lambda")
    if not ps["T"] > 0:
        raise ConfigError("patch_study.T must be positive", key="T")
    if ps["samples"] < 2:
        raise ConfigError("patch_study.samples must be >= 2", key="samples")
    cfg.patch_study = ps

    nm = {"s": -1.0, "p": 2.0, "q": math.inf, "xnorm": True, **vals["norms"]}
    for k in ("p", "q"):
        if not nm[k] >= 1:
            raise ConfigError(f"norms.{k} must lie in [1, inf]", key=k)
    cfg.norms = nm

    kn = {"lambda": 1.0, "r_min": 1e-3, "r_max": 20.0, "count": 500, **vals["kernels"]}
    if not kn["lambda"] > 0:
        raise ConfigError("kernels.lambda must be positive", key="lambda")
    if not 0 < kn["r_min"] < kn["r_max"]:
        raise ConfigError("kernels needs 0 < r_min < r_max", key="r_min")
    if kn["count"] < 2:
        raise ConfigError("kernels.count must be >= 2", key="count")
    cfg.kernels = kn

    out = dict(vals["output"])
    fmts = out.get("formats", ["csv", "json"])
    bad = [f for f in fmts if f not in ("csv", "json", "svg")]
    if bad:
        raise ConfigError(f"output.formats: unknown format {bad[0]!r}", key="formats")
    out["formats"] = list(fmts)
    cfg.output = out
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())
