"""Scenario configuration, end-to-end runs, sweeps and CSV/SVG/JSON artifacts.

A run chains the two pricing phases, integrates revenues for both
allocations of the contiguous block, plays the auction over a grid of spite
coefficients and writes one CSV per requested figure. Every solved
trajectory is checked with :func:`~specgame.oracle.residual_report`; a failed
check blocks figure output unless explicitly allowed.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .asymmetric import solve_asymmetric
from .auction import AuctionInputs, run_auction
from .errors import ConfigError, SpecGameError
from .market import MarketParams
from .oracle import DEFAULT_TOLERANCES, residual_report
from .revenue import OrientationRevenue, RevenueReport, finite_revenue, infinite_revenue, swap_roles
from .riccati import Mode
from .svg import line_chart
from .symmetric import solve_symmetric

SCHEMA = "v1"
FIGURES = ("fig3", "fig4", "fig5", "fig6")
OUTPUTS = FIGURES + ("trajectories", "report")
SWEEP_AXES = ("T", "eta", "gamma", "x1_0", "rho")
SWEEP_COLUMNS = ("gain", "b1", "b2", "winner", "profit1", "profit2", "error")


class UnverifiedError(SpecGameError):
    """A residual check failed and unverified output was not allowed."""

    def __init__(self, message, report):
        self.report = report
        super().__init__(message)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".15g")
    return str(v)


def _float_list(values, path):
    if isinstance(values, (str, bytes)) or not hasattr(values, "__iter__"):
        raise ConfigError("must be a list of numbers", path)
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"must be a finite number, got {v!r}", f"{path}[{i}]")
        out.append(float(v))
    if not out:
        raise ConfigError("must not be empty", path)
    return tuple(out)


@dataclass(frozen=True)
class Fig4Grid:
    T_values: tuple = (0.5, 1.0, 1.5, 2.0)
    eta_values: tuple = (0.25, 0.5, 0.75)
    x1_0_values: tuple = (0.5, 0.6)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run needs. ``to_dict``/``from_dict`` mirror the JSON file."""

    params: MarketParams = field(default_factory=MarketParams)
    x1_0: float = 0.5
    T_values: tuple = (0.5, 1.5)
    gamma_values: tuple = tuple(round(0.05 * i, 10) for i in range(21))
    c_A: float = 0.1
    c_B: float = 0.2
    c_BS: float = 1.0
    auction_x1_0: float = 0.6
    fig4: Fig4Grid = field(default_factory=Fig4Grid)
    grid: int = 257
    sym_span: float = 10.0
    outputs: tuple = FIGURES + ("report",)
    tolerances: dict = field(default_factory=lambda: {"quad_rtol": 1e-10, **DEFAULT_TOLERANCES})
    quad_constant_mode: str = Mode.FEEDBACK.value
    on_invalid: str = "warn"
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("x1_0", "auction_x1_0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError("must lie in [0, 1]", name)
        for name in ("T_values", "gamma_values"):
            if not len(getattr(self, name)):
                raise ConfigError("must not be empty", name)
        for i, T in enumerate(self.T_values):
            if not T > 0:
                raise ConfigError("must be > 0", f"T_values[{i}]")
        for i, T in enumerate(self.fig4.T_values):
            if not T > 0:
                raise ConfigError("must be > 0", f"fig4.T_values[{i}]")
        for i, e in enumerate(self.fig4.eta_values):
            if not 0.0 <= e < 1.0:
                raise ConfigError("must lie in [0, 1)", f"fig4.eta_values[{i}]")
        for i, x in enumerate(self.fig4.x1_0_values):
            if not 0.0 <= x <= 1.0:
                raise ConfigError("must lie in [0, 1]", f"fig4.x1_0_values[{i}]")
        for i, g in enumerate(self.gamma_values):
            if not 0.0 <= g <= 1.0:
                raise ConfigError("must lie in [0, 1]", f"gamma_values[{i}]")
        for name in ("c_A", "c_B", "c_BS"):
            if not getattr(self, name) >= 0:
                raise ConfigError("must be >= 0", name)
        if self.grid < 64:
            raise ConfigError("must be at least 64", "grid")
        if not self.sym_span > 0:
            raise ConfigError("must be > 0", "sym_span")
        if not self.outputs:
            raise ConfigError("at least one output is required", "outputs")
        for i, o in enumerate(self.outputs):
            if o not in OUTPUTS:
                raise ConfigError(f"unknown output {o!r}; expected one of {list(OUTPUTS)}", f"outputs[{i}]")
        for key, v in self.tolerances.items():
            if key not in ("quad_rtol",) + tuple(DEFAULT_TOLERANCES):
                raise ConfigError("unknown tolerance", f"tolerances.{key}")
            if not v > 0:
                raise ConfigError("must be > 0", f"tolerances.{key}")
        Mode.parse(self.quad_constant_mode)
        if self.on_invalid not in ("warn", "error", "ignore"):
            raise ConfigError("must be warn, error or ignore", "on_invalid")
        for axis, values in self.sweep.items():
            if axis not in SWEEP_AXES:
                raise ConfigError(f"unknown axis; expected a subset of {list(SWEEP_AXES)}", f"sweep.{axis}")
            _float_list(values, f"sweep.{axis}")

    @property
    def mode(self) -> Mode:
        return Mode.parse(self.quad_constant_mode)

    def to_dict(self) -> dict:
        return {
            "params": {f.name: getattr(self.params, f.name) for f in dataclasses.fields(MarketParams)},
            "x1_0": self.x1_0,
            "T_values": list(self.T_values),
            "gamma_values": list(self.gamma_values),
            "c_A": self.c_A, "c_B": self.c_B, "c_BS": self.c_BS,
            "auction_x1_0": self.auction_x1_0,
            "fig4": {k: list(v) for k, v in dataclasses.asdict(self.fig4).items()},
            "grid": self.grid,
            "sym_span": self.sym_span,
            "outputs": list(self.outputs),
            "tolerances": dict(sorted(self.tolerances.items())),
            "quad_constant_mode": self.mode.value,
            "on_invalid": self.on_invalid,
            "sweep": {k: list(v) for k, v in self.sweep.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError("unknown field", key)
        kw = {}
        base = cls()
        if "params" in data:
            raw = data["params"]
            if not isinstance(raw, dict):
                raise ConfigError("must be an object", "params")
            names = {f.name for f in dataclasses.fields(MarketParams)}
            for key, v in raw.items():
                if key not in names:
                    raise ConfigError("unknown field", f"params.{key}")
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"must be a number, got {v!r}", f"params.{key}")
            try:
                kw["params"] = base.params.replace(**{k: float(v) for k, v in raw.items()})
            except ConfigError as exc:
                raise ConfigError(str(exc).split(": ", 1)[-1], f"params.{exc.field}") from None
        for name in ("T_values", "gamma_values"):
            if name in data:
                kw[name] = _float_list(data[name], name)
        for name in ("x1_0", "c_A", "c_B", "c_BS", "auction_x1_0", "sym_span"):
            if name in data:
                v = data[name]
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigError(f"must be a finite number, got {v!r}", name)
                kw[name] = float(v)
        if "grid" in data:
            if isinstance(data["grid"], bool) or not isinstance(data["grid"], int):
                raise ConfigError("must be an integer", "grid")
            kw["grid"] = data["grid"]
        if "fig4" in data:
            raw = data["fig4"]
            if not isinstance(raw, dict):
                raise ConfigError("must be an object", "fig4")
            fkw = {}
            for key, v in raw.items():
                if key not in ("T_values", "eta_values", "x1_0_values"):
                    raise ConfigError("unknown field", f"fig4.{key}")
                fkw[key] = _float_list(v, f"fig4.{key}")
            kw["fig4"] = Fig4Grid(**fkw)
        if "outputs" in data:
            if not isinstance(data["outputs"], list):
                raise ConfigError("must be a list", "outputs")
            kw["outputs"] = tuple(str(o) for o in data["outputs"])
        if "tolerances" in data:
            if not isinstance(data["tolerances"], dict):
                raise ConfigError("must be an object", "tolerances")
            tol = dict(base.tolerances)
            tol.update({k: float(v) for k, v in data["tolerances"].items()})
            kw["tolerances"] = tol
        if "quad_constant_mode" in data:
            kw["quad_constant_mode"] = Mode.parse(data["quad_constant_mode"]).value
        if "on_invalid" in data:
            kw["on_invalid"] = data["on_invalid"]
        if "sweep" in data:
            if not isinstance(data["sweep"], dict):
                raise ConfigError("must be an object", "sweep")
            kw["sweep"] = {k: _float_list(v, f"sweep.{k}") for k, v in data["sweep"].items()}
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", "config") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "config") from None
        return cls.from_dict(data)

    def override(self, **changes) -> "ScenarioConfig":
        """Copy with ``changes`` applied; ``None`` values are ignored.

        Market parameters may be given by name (``eta=0.3``).
        """
        changes = {k: v for k, v in changes.items() if v is not None}
        pnames = {f.name for f in dataclasses.fields(MarketParams)}
        pchanges = {k: changes.pop(k) for k in list(changes) if k in pnames}
        if pchanges:
            changes["params"] = self.params.replace(**pchanges)
        if "quad_constant_mode" in changes:
            changes["quad_constant_mode"] = Mode.parse(changes["quad_constant_mode"]).value
        return dataclasses.replace(self, **changes)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Chain:
    """Both phases solved from one initial share with operator 1 advantaged."""

    asym: object
    sym: object
    revenue: OrientationRevenue
    residuals: tuple


class ScenarioRunner:
    """Solves and caches phase chains for one configuration."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self._chains = {}
        self.residual_log = []
        self.invalid_samples = 0

    def chain(self, params: MarketParams, x1_0: float, T: float) -> Chain:
        key = (params, float(x1_0), float(T))
        if key in self._chains:
            return self._chains[key]
        cfg = self.config
        _, atraj = solve_asymmetric(params, x1_0, T, grid=cfg.grid, mode=cfg.mode,
                                    on_invalid=cfg.on_invalid, rtol=cfg.tolerances["quad_rtol"])
        x1_T = atraj.solution.x1_T
        times = np.linspace(T, T + cfg.sym_span, cfg.grid)
        _, straj = solve_symmetric(params, x1_T, T, times=times, mode=cfg.mode, on_invalid=cfg.on_invalid)
        ap, err = [], 0.0
        for op in (1, 2):
            v, e = finite_revenue(atraj.solution, op, rtol=cfg.tolerances["quad_rtol"])
            ap.append(v)
            err = max(err, e)
        sp = tuple(infinite_revenue(straj.solution, op) for op in (1, 2))
        rev = OrientationRevenue(1, tuple(ap), sp, (float(x1_T), 1.0 - float(x1_T)), err)
        tol = {k: v for k, v in cfg.tolerances.items() if k != "quad_rtol"}
        reports = (residual_report(atraj, tol), residual_report(straj, tol))
        for rep in reports:
            entry = {"eta": params.eta, "rho": params.rho, "x1_0": float(x1_0), "T": float(T)}
            entry.update(rep.to_dict())
            self.residual_log.append(entry)
        self.invalid_samples += int(np.size(atraj.validity_flags) - np.count_nonzero(atraj.validity_flags))
        self.invalid_samples += int(np.size(straj.validity_flags) - np.count_nonzero(straj.validity_flags))
        out = Chain(atraj, straj, rev, reports)
        self._chains[key] = out
        return out

    def revenue_report(self, params, x1_0, T) -> RevenueReport:
        a_to_1 = self.chain(params, x1_0, T).revenue
        a_to_2 = swap_roles(self.chain(params, 1.0 - x1_0, T).revenue)
        return RevenueReport(params, float(x1_0), float(T), a_to_1, a_to_2, "swap")

    def auction_inputs(self, params, x1_0, T, gamma) -> AuctionInputs:
        cfg = self.config
        rv = self.revenue_report(params, x1_0, T).auction_revenues()
        return AuctionInputs(**rv, c_A=cfg.c_A, c_B=cfg.c_B, c_BS=cfg.c_BS, gamma=float(gamma))

    @property
    def verified(self) -> bool:
        return all(e["status"] == "PASS" for e in self.residual_log)


def _csv_text(name, config, status, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# specgame {name} schema={SCHEMA}\n")
    buf.write(f"# config_hash={config.hash()}\n")
    buf.write(f"# quad_constant_mode={config.mode.value}\n")
    buf.write(f"# oracle={status}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _tag(T) -> str:
    return format(float(T), "g")


def _trajectory_rows(chain: Chain, extended: bool):
    rows = []
    for traj in (chain.asym, chain.sym):
        for i in range(len(traj)):
            row = [traj.times[i], traj.p1[i], traj.p2[i], traj.x1[i], traj.x2[i], traj.phase.tag]
            if extended:
                row += [traj.lambda1[i], traj.lambda2[i], bool(traj.validity_flags[i])]
            rows.append(row)
    return rows


@dataclass
class ArtifactBundle:
    """Output files (name to text) plus the run report."""

    files: dict
    report: dict

    @property
    def verified(self) -> bool:
        return self.report["oracle"] == "PASS"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, text in self.files.items():
            path = out / name
            path.write_text(text)
            paths.append(path)
        return paths


def _report_json(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def run_scenario(config: ScenarioConfig, allow_unverified: bool = False, svg: bool = False,
                 outputs=None) -> ArtifactBundle:
    """Compute the requested artifacts.

    Raises
    ------
    UnverifiedError
        A residual check failed and ``allow_unverified`` is False. The
        exception carries the run report.
    """
    outputs = tuple(outputs or config.outputs)
    runner = ScenarioRunner(config)
    p = config.params
    tables = {}  # name -> (columns, rows, chart spec)

    if "fig3" in outputs or "trajectories" in outputs:
        for T in config.T_values:
            ch = runner.chain(p, config.x1_0, T)
            if "fig3" in outputs:
                tables[f"fig3_T{_tag(T)}"] = (("t", "p1", "p2", "x1", "x2", "phase"),
                                             _trajectory_rows(ch, False), "fig3")
            if "trajectories" in outputs:
                tables[f"trajectories_T{_tag(T)}"] = (
                    ("t", "p1", "p2", "x1", "x2", "phase", "lambda1", "lambda2", "valid"),
                    _trajectory_rows(ch, True), None)
    if "fig4" in outputs:
        rows = []
        for T, eta, x in itertools.product(config.fig4.T_values, config.fig4.eta_values,
                                           config.fig4.x1_0_values):
            rows.append([T, eta, x, runner.revenue_report(p.replace(eta=eta), x, T).gain])
        tables["fig4"] = (("T", "eta", "x1_0", "gain"), rows, "fig4")
    if "fig5" in outputs or "fig6" in outputs:
        rows5, rows6 = [], []
        for g, T in itertools.product(config.gamma_values, config.T_values):
            inputs = runner.auction_inputs(p, config.auction_x1_0, T, g)
            o = run_auction(inputs)
            rows5.append([g, T, o.b1_star, o.b2_star])
            rows6.append([g, T, o.realized_profit_1, o.realized_profit_2, o.winner])
        if "fig5" in outputs:
            tables["fig5"] = (("gamma", "T", "b1", "b2"), rows5, "fig5")
        if "fig6" in outputs:
            tables["fig6"] = (("gamma", "T", "profit1", "profit2", "winner"), rows6, "fig6")

    status = "PASS" if runner.verified else "FAIL"
    report = {
        "schema": SCHEMA,
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "quad_constant_mode": config.mode.value,
        "oracle": status,
        "residuals": runner.residual_log,
        "invalid_samples": runner.invalid_samples,
        "revenues": [runner.revenue_report(p, config.x1_0, T).to_dict() for T in config.T_values],
        "files": sorted(f"{n}.csv" for n in tables),
    }
    if status == "FAIL" and not allow_unverified:
        failing = sum(e["status"] == "FAIL" for e in runner.residual_log)
        raise UnverifiedError(f"{failing} trajectories failed the residual checks", report)

    files = {}
    for name, (columns, rows, chart) in tables.items():
        files[f"{name}.csv"] = _csv_text(name, config, status, columns, rows)
        if svg and chart:
            files.update(_charts(name, chart, rows))
    if "report" in outputs:
        report["files"] = sorted(files) + ["report.json"]
        files["report.json"] = _report_json(report)
    return ArtifactBundle(files, report)


def _charts(name, chart, rows) -> dict:
    col = list(zip(*rows))
    if chart == "fig3":
        t = col[0]
        return {
            f"{name}_prices.svg": line_chart([("p1", t, col[1]), ("p2", t, col[2])],
                                              f"{name}: prices", "t", "price"),
            f"{name}_shares.svg": line_chart([("x1", t, col[3]), ("x2", t, col[4])],
                                              f"{name}: market shares", "t", "share"),
        }
    series = []
    if chart == "fig4":
        keys = sorted({(r[1], r[2]) for r in rows})
        for eta, x in keys:
            sel = [r for r in rows if (r[1], r[2]) == (eta, x)]
            series.append((f"eta={eta:g}, x1_0={x:g}", [r[0] for r in sel], [r[3] for r in sel]))
        return {f"{name}.svg": line_chart(series, "revenue gain", "T", "gain")}
    labels = ("b1", "b2") if chart == "fig5" else ("profit1", "profit2")
    for T in sorted({r[1] for r in rows}):
        sel = [r for r in rows if r[1] == T]
        for j, lab in enumerate(labels):
            series.append((f"{lab}, T={T:g}", [r[0] for r in sel], [r[2 + j] for r in sel]))
    ylabel = "bid" if chart == "fig5" else "realized profit"
    return {f"{name}.svg": line_chart(series, name, "gamma", ylabel)}


# -- sweeps --------------------------------------------------------------------

def _sweep_cell(args):
    config_dict, cell = args
    config = ScenarioConfig.from_dict(config_dict)
    params = config.params.replace(**{k: cell[k] for k in ("eta", "rho") if k in cell})
    T = cell.get("T", config.T_values[0])
    x1_0 = cell.get("x1_0", config.x1_0)
    gamma = cell.get("gamma", config.gamma_values[0])
    runner = ScenarioRunner(config)
    try:
        gain = runner.revenue_report(params, x1_0, T).gain
        o = run_auction(runner.auction_inputs(params, x1_0, T, gamma))
        row = [gain, o.b1_star, o.b2_star, o.winner, o.realized_profit_1, o.realized_profit_2, ""]
    except SpecGameError as exc:
        row = ["", "", "", "", "", "", f"{type(exc).__name__}: {exc}"]
    return row, runner.verified


def sweep(config: ScenarioConfig, axes: dict | None = None, workers: int = 1) -> str:
    """Cross-product sweep; one CSV row per cell in lexicographic axis order.

    Axes not swept take their baseline: the configured market parameters,
    ``x1_0``, and the first entries of ``T_values`` and ``gamma_values``.
    Cells that fail record the error and the sweep continues. The header's
    oracle status covers the residual checks of every trajectory solved.
    """
    axes = dict(axes if axes is not None else config.sweep)
    if not axes:
        raise ConfigError("at least one axis is required", "sweep")
    for name, values in axes.items():
        if name not in SWEEP_AXES:
            raise ConfigError(f"unknown axis; expected a subset of {list(SWEEP_AXES)}", f"sweep.{name}")
        axes[name] = _float_list(values, f"sweep.{name}")
    names = list(axes)
    cells = [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]
    payload = [(config.to_dict(), c) for c in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, payload))
    else:
        results = [_sweep_cell(a) for a in payload]
    rows = [[c[n] for n in names] + r for c, (r, _) in zip(cells, results)]
    status = "PASS" if all(ok for _, ok in results) else "FAIL"
    return _csv_text("sweep", config, status, tuple(names) + SWEEP_COLUMNS, rows)


def read_csv(text: str):
    """Parse a CSV written here into ``(meta, header, rows)``; rows stay strings."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    meta[k] = v
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    return meta, header, list(reader)


def default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))


__all__ = [
    "ArtifactBundle", "Fig4Grid", "ScenarioConfig", "ScenarioRunner", "UnverifiedError",
    "read_csv", "run_scenario", "sweep",
]
