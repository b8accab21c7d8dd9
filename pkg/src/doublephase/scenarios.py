"""Scenario configs, the built-in scenario library and experiment orchestration.

A scenario is one JSON object; see ``docs/scenario-schema.md`` in the
repository for every key. Loading validates the schema and all geometric
invariants before any numerics run.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .cylinder import Cylinder, shrink_cylinder
from .exponents import ExponentSet
from .gaps import REGIMES
from .grid import GridField, read_grid
from .verification import (
    DEFAULT_ASSERTED, COLUMNS, ConvergenceReport, ConvergenceSetup,
    relative_column, run_convergence,
)
from .weights import Weight, constant_weight, grid_weight, ramp_power_weight

log = logging.getLogger(__name__)

OUT_ENV = "DPHASE_OUT"
DEFAULT_OUT = "doublephase-out"
FIELD_KINDS = ("constant", "affine", "smooth-sine", "truncated-power", "time-ramp", "front", "grid")
WEIGHT_KINDS = ("constant", "ramp-power", "grid")
_TOP_KEYS = {"name", "field", "weight", "exponents", "regime", "domain", "target", "grid", "h_sequence",
             "tolerances", "assert_columns", "strict_time", "density", "modulus_deltas", "description"}


class ScenarioError(ValueError):
    """Schema or invariant violation in a scenario config."""


def _get(d: dict, key: str, where: str, kinds=(int, float), default=...):
    if key not in d:
        if default is ...:
            raise ScenarioError(f"{where}.{key}: required key missing")
        return default
    v = d[key]
    if kinds is not None and (isinstance(v, bool) and bool not in kinds or not isinstance(v, kinds)):
        names = "/".join(k.__name__ for k in kinds)
        raise ScenarioError(f"{where}.{key}: expected {names}, got {type(v).__name__} {v!r}")
    return v


def _resolve(path: str, base: Optional[Path]) -> Path:
    p = Path(path)
    return p if p.is_absolute() or base is None else base / p


# -- test fields ------------------------------------------------------------


def _field_function(spec: dict, n: int):
    kind = spec["kind"]
    rate = float(spec.get("time_rate", 0.0))

    def ramp(T):
        return 1.0 + rate * T

    if kind == "constant":
        value = float(_get(spec, "value", "field", default=1.0))
        return lambda X, T: np.full(T.shape, value)
    if kind == "affine":
        grad = np.asarray(_get(spec, "gradient", "field", (list,)), dtype=float)
        if grad.shape != (n,):
            raise ScenarioError(f"field.gradient: expected {n} entries, got {grad.size}")
        tcoef = float(_get(spec, "time_coefficient", "field", default=0.0))
        off = float(_get(spec, "offset", "field", default=0.0))
        return lambda X, T: off + X @ grad + tcoef * T
    if kind == "smooth-sine":
        amp = float(_get(spec, "amplitude", "field", default=1.0))
        freq = float(_get(spec, "frequency", "field", default=1.0))
        return lambda X, T: amp * np.sin(math.pi * freq * X[..., 0]) * ramp(T)
    if kind == "truncated-power":
        beta = float(_get(spec, "beta", "field"))
        cap = spec.get("cap")
        if beta < 0 and cap is None:
            raise ScenarioError("field.cap: a negative power needs a truncation level")
        center = np.broadcast_to(np.asarray(spec.get("center", 0.0), dtype=float), (n,))

        def power(X, T):
            r = np.linalg.norm(X - center, axis=-1)
            with np.errstate(divide="ignore"):
                v = np.where(r > 0, r ** beta, math.inf if beta < 0 else 0.0)
            if cap is not None:
                v = np.minimum(v, float(cap))
            return v * ramp(T)
        return power
    if kind == "time-ramp":
        slope = float(_get(spec, "slope", "field", default=1.0))
        power_t = float(_get(spec, "power", "field", default=1.0))
        return lambda X, T: slope * T ** power_t
    if kind == "front":
        width = float(_get(spec, "width", "field"))
        if width <= 0:
            raise ScenarioError("field.width: must be positive")
        c = float(_get(spec, "center", "field", default=0.0))
        return lambda X, T: np.tanh((X[..., 0] - c) / width) * ramp(T)
    raise ScenarioError(f"field.kind: unknown kind {kind!r}; expected one of {FIELD_KINDS}")


def _bounded(spec: dict) -> bool:
    return not (spec["kind"] == "truncated-power" and spec.get("beta", 0) < 0 and spec.get("cap") is None)


# -- the scenario ---------------------------------------------------------


@dataclass
class Scenario:
    name: str
    field_spec: dict
    weight_spec: dict
    exps: ExponentSet
    regime: str
    domain: Cylinder
    target: Cylinder
    nx: int
    nt: int
    h_values: tuple
    tolerance: float = 1e-2
    assert_columns: tuple = DEFAULT_ASSERTED
    strict_time: bool = True
    density: int = 5
    modulus_deltas: Optional[tuple] = None
    base_dir: Optional[str] = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def dx(self) -> float:
        return 2.0 * self.domain.radius / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.domain.duration / (self.nt - 1)

    def build_field(self) -> GridField:
        if self.field_spec["kind"] == "grid":
            g = read_grid(_resolve(self.field_spec["path"], self._base()))
            if g.shape != (self.nt,) + (self.nx,) * self.exps.n or g.domain != self.domain:
                raise ScenarioError("field.path: grid file does not match the scenario's domain and grid")
            return g
        return GridField.from_function(_field_function(self.field_spec, self.exps.n), self.domain, self.nx, self.nt)

    def build_weight(self) -> Weight:
        spec, alpha = self.weight_spec, self.exps.alpha
        kind = spec["kind"]
        if kind == "constant":
            return constant_weight(float(spec.get("value", 1.0)), alpha)
        if kind == "ramp-power":
            return ramp_power_weight(float(spec.get("lam", 1.0)), alpha, float(spec.get("offset", 0.0)),
                                     int(spec.get("axis", 0)), spec.get("direction", "space"))
        g = read_grid(_resolve(spec["path"], self._base()))
        return grid_weight(g, alpha, spec.get("seminorm"))

    def _base(self) -> Optional[Path]:
        return Path(self.base_dir) if self.base_dir else None

    def setup(self) -> ConvergenceSetup:
        return ConvergenceSetup(self.name, self.build_field(), self.build_weight(), self.exps, self.regime,
                                list(self.h_values), self.target, self.strict_time, self.density,
                                self.tolerance, tuple(self.assert_columns))


def scenario_from_dict(cfg: dict, base_dir: Optional[str] = None) -> Scenario:
    """Validate a config dict and return the Scenario, defaults applied."""
    if not isinstance(cfg, dict):
        raise ScenarioError("scenario: top level must be a JSON object")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"scenario: unknown keys {sorted(unknown)}")
    name = _get(cfg, "name", "scenario", (str,))

    ex = _get(cfg, "exponents", "scenario", (dict,))
    try:
        exps = ExponentSet.from_dict(ex)
    except (KeyError, TypeError, ValueError) as err:
        raise ScenarioError(f"exponents: {err}") from None
    regime = _get(cfg, "regime", "scenario", (str,))
    if regime not in REGIMES:
        raise ScenarioError(f"regime: {regime!r} is not one of {REGIMES}")
    if regime == "s-integrable" and exps.s is None:
        raise ScenarioError("exponents.s: the s-integrable regime needs a declared s")

    fspec = dict(_get(cfg, "field", "scenario", (dict,)))
    kind = _get(fspec, "kind", "field", (str,))
    if kind not in FIELD_KINDS:
        raise ScenarioError(f"field.kind: unknown kind {kind!r}; expected one of {FIELD_KINDS}")
    if kind == "grid":
        _get(fspec, "path", "field", (str,))
    else:
        _field_function(fspec, exps.n)  # parameter validation only
    if regime == "bounded" and not _bounded(fspec):
        raise ScenarioError("field: the bounded regime needs a bounded field (give a cap)")

    wspec = dict(_get(cfg, "weight", "scenario", (dict,)))
    wkind = _get(wspec, "kind", "weight", (str,))
    if wkind not in WEIGHT_KINDS:
        raise ScenarioError(f"weight.kind: unknown kind {wkind!r}; expected one of {WEIGHT_KINDS}")
    if wkind == "grid":
        _get(wspec, "path", "weight", (str,))

    try:
        domain = Cylinder.from_dict(_get(cfg, "domain", "scenario", (dict,)))
    except (KeyError, TypeError, ValueError) as err:
        raise ScenarioError(f"domain: {err}") from None
    if domain.dim_n != exps.n:
        raise ScenarioError(f"domain: center has {domain.dim_n} coordinates but n = {exps.n}")

    grid = _get(cfg, "grid", "scenario", (dict,))
    nx = _get(grid, "nx", "grid", (int,))
    nt = _get(grid, "nt", "grid", (int,))
    if nx < 3 or nt < 2:
        raise ScenarioError(f"grid: need nx >= 3 and nt >= 2, got nx={nx}, nt={nt}")
    dx = 2.0 * domain.radius / (nx - 1)
    dt = domain.duration / (nt - 1)

    hs = _get(cfg, "h_sequence", "scenario", (dict,))
    if "h0" in hs and "h0_cells" in hs:
        raise ScenarioError("h_sequence: give either h0 or h0_cells, not both")
    h0 = float(_get(hs, "h0", "h_sequence")) if "h0" in hs else _get(hs, "h0_cells", "h_sequence") * dx
    count = _get(hs, "count", "h_sequence", (int,), default=4)
    m_start = _get(hs, "m_start", "h_sequence", (int,), default=0)
    if h0 <= 0 or count < 1 or m_start < 0:
        raise ScenarioError(f"h_sequence: need h0 > 0, count >= 1, m_start >= 0; got {h0}, {count}, {m_start}")
    h_values = tuple(h0 * 2.0 ** -m for m in range(m_start, m_start + count))
    h_max, h_min = h_values[0], h_values[-1]

    if "target" in cfg:
        try:
            target = Cylinder.from_dict(cfg["target"])
        except (KeyError, TypeError, ValueError) as err:
            raise ScenarioError(f"target: {err}") from None
    else:
        try:
            target = shrink_cylinder(domain, h_max)
        except ValueError as err:
            raise ScenarioError(f"containment: Q + Q_h0(0) cannot fit in Qtilde ({err})") from None
    if not domain.contains(target.expand(h_max), tol=1e-12):
        raise ScenarioError(
            f"containment: Q + Q_h0(0) = {target.expand(h_max)} with h0 = {h_max} is not inside Qtilde = {domain}")

    strict_time = _get(cfg, "strict_time", "scenario", (bool,), default=True)
    if h_min < 2.0 * dx * (1 - 1e-9):
        raise ScenarioError(f"resolution: smallest h = {h_min} is below 2*dx = {2 * dx}")
    if h_min ** 2 < 2.0 * dt * (1 - 1e-9):
        if strict_time:
            raise ScenarioError(f"resolution: smallest h^2 = {h_min ** 2} is below 2*dt = {2 * dt}")
        log.info("%s: h^2 >= 2*dt fails for the smallest h; affected rows are flagged", name)

    tol = _get(cfg, "tolerances", "scenario", (dict,), default={})
    tolerance = float(_get(tol, "convergence", "tolerances", default=1e-2))
    if tolerance <= 0:
        raise ScenarioError("tolerances.convergence: must be positive")
    cols = tuple(_get(cfg, "assert_columns", "scenario", (list,), default=list(DEFAULT_ASSERTED)))
    bad = [c for c in cols if c not in COLUMNS or c in ("h", "time_resolved")]
    if bad:
        raise ScenarioError(f"assert_columns: not gap columns: {bad}")
    density = _get(cfg, "density", "scenario", (int,), default=5)
    if density < 5:
        raise ScenarioError("density: need at least 5 lattice points per axis")
    deltas = cfg.get("modulus_deltas")
    if deltas is not None and (not isinstance(deltas, list) or any(not isinstance(d, (int, float)) or d < 0 for d in deltas)):
        raise ScenarioError("modulus_deltas: expected a list of nonnegative numbers")

    return Scenario(name, fspec, wspec, exps, regime, domain, target, nx, nt, h_values, tolerance, cols,
                    strict_time, density, tuple(deltas) if deltas is not None else None, base_dir,
                    copy.deepcopy(cfg))


def load_scenario(path) -> Scenario:
    path = Path(path)
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"{path}: not valid JSON ({err})") from None
    return scenario_from_dict(cfg, str(path.parent))


# -- built-in library -------------------------------------------------------


def builtin_names() -> list:
    root = resources.files("doublephase") / "builtin"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def builtin_scenario(name: str) -> Scenario:
    ref = resources.files("doublephase") / "builtin" / f"{name}.json"
    if not ref.is_file():
        raise ScenarioError(f"no built-in scenario {name!r}; available: {builtin_names()}")
    return scenario_from_dict(json.loads(ref.read_text()))


def builtin_suite() -> list:
    """The built-in suite: every regime at interior and boundary gap settings,
    each with a smooth and a rough field, plus a p = 4 smooth run."""
    return [builtin_scenario(n) for n in builtin_names() if not n.startswith("extra-")]


# -- running --------------------------------------------------------------


def output_root(out: Optional[str] = None) -> Path:
    return Path(out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _plot_data(report: ConvergenceReport) -> str:
    gap_cols = [c for c in ("norm_gap_Lp", "norm_gap_LpW1p", "norm_gap_CL2", "energy_gap_P", "energy_gap_F",
                            "l2_sup_gap", "integrand_L1_gap", "dominator_L1_gap")]
    lines = [",".join(["h"] + [f"{c}_rel" for c in gap_cols])]
    rel = [relative_column(report, c) for c in gap_cols]
    for i, h in enumerate(report.column("h")):
        lines.append(",".join([repr(float(h))] + [repr(float(r[i])) for r in rel]))
    return "\n".join(lines) + "\n"


def run(scenario: Scenario, out: Optional[str] = None) -> tuple:
    """Run one scenario; writes ``report.csv``, ``summary.json`` and
    ``plot_data.csv`` under ``<out>/<name>/``. Returns ``(exit_code, report)``."""
    report = run_convergence(scenario.setup())
    d = output_root(out) / scenario.name
    d.mkdir(parents=True, exist_ok=True)
    (d / "report.csv").write_text(report.to_csv_text())
    (d / "summary.json").write_text(report.summary_json() + "\n")
    (d / "plot_data.csv").write_text(_plot_data(report))
    return report.exit_code, report


def _run_member(args):
    scenario, out = args
    code, report = run(scenario, out)
    return scenario.name, code, report.verdicts, report.annotations


@dataclass
class SuiteResult:
    rows: list
    exit_code: int

    def table(self) -> str:
        families = sorted({k for r in self.rows for k in r["verdicts"]})
        head = ["scenario", "exit"] + families + ["annotations"]
        lines = [",".join(head)]
        for r in self.rows:
            lines.append(",".join([r["name"], str(r["exit"])] + [r["verdicts"].get(f, "") for f in families]
                                  + [";".join(r["annotations"])]))
        return "\n".join(lines) + "\n"


def aggregate_exit(codes: Sequence[int]) -> int:
    if any(c == 1 for c in codes):
        return 1
    return 2 if any(c == 2 for c in codes) else 0


def suite(scenarios: Optional[Sequence[Scenario]] = None, out: Optional[str] = None, jobs: int = 1) -> SuiteResult:
    """Run every member scenario and aggregate; any member FAIL fails the suite."""
    members = builtin_suite() if scenarios is None else list(scenarios)
    if not members:
        raise ScenarioError("suite: the scenario set is empty")
    names = [s.name for s in members]
    if len(set(names)) != len(names):
        raise ScenarioError("suite: scenario names must be unique (each gets its own output directory)")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    tasks = [(s, out) for s in members]
    if jobs == 1:
        results = [_run_member(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_member, tasks))
    rows = [{"name": n, "exit": c, "verdicts": v, "annotations": a} for n, c, v, a in results]
    res = SuiteResult(rows, aggregate_exit([r["exit"] for r in rows]))
    root = output_root(out)
    root.mkdir(parents=True, exist_ok=True)
    (root / "suite.csv").write_text(res.table())
    return res
