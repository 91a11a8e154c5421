"""Scenario configuration, SNR sweeps over all schemes and CSV emission."""

from __future__ import annotations

import csv
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import det_equiv, power_alloc
from .errors import InvalidConfigurationError
from .precoding import PowerSplit
from .rate_mc import (
    RateReport,
    average_reports,
    chunked,
    draw_precoders,
    hrs_gains,
    hrs_rates,
    mean_sum_rate_grid,
    scheduled_rates,
    sinr_table,
    ttp_rates_from_gains,
)
from .scenario import Scenario, default_azimuths, one_ring_scenario

SCHEME_ORDER = (
    "TTP",
    "Baseline2",
    "Baseline3",
    "HRS_CLF",
    "HRS_CLF_TRACE",
    "HRS_EXS",
    "HRS_FIXED",
    "HRS_DetEquiv",
    "TTP_DetEquiv",
)
DEFAULT_SCHEMES = (
    "TTP", "Baseline2", "Baseline3", "HRS_CLF", "HRS_CLF_TRACE", "HRS_EXS", "HRS_DetEquiv", "TTP_DetEquiv",
)
CSV_HEADER = (
    "scenario", "scheme", "snr_db", "alpha", "beta", "r_oc", "r_ic", "r_p", "r_sum", "stderr", "n_draws", "wall_ms",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one sweep.

    ``azimuths`` defaults to ``-pi/2 + g pi/3``. ``power_allocation`` selects
    the split evaluated by the ``HRS_DetEquiv`` row; ``gamma_source`` selects
    how the closed-form split obtains its interference levels
    (``det_equiv`` or the trace formulas, ``closed_form``).
    """

    scenario: str = "custom"
    M: int = 100
    K: int = 12
    G: int = 4
    b_bar: int = 15
    r_d: int = 20
    tau2: float = 0.4
    spread: float = math.pi / 8
    azimuths: tuple = ()
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    n_draws: int = 500
    base_seed: int = 0
    schemes: tuple = DEFAULT_SCHEMES
    power_allocation: str = "closed_form"
    alpha: float = 1.0
    beta: float = 1.0
    grid_step: float = 0.01
    exs_objective: str = "monte_carlo"
    gamma_source: str = "det_equiv"
    workers: int = 1
    timing: bool = False

    @property
    def K_bar(self) -> int:
        return self.K // self.G

    def validate(self) -> None:
        if self.G < 1 or self.K % self.G:
            raise InvalidConfigurationError(f"K={self.K} must be divisible by G={self.G}")
        if not self.snr_db:
            raise InvalidConfigurationError("SNR list is empty")
        if self.n_draws < 1:
            raise InvalidConfigurationError("n_draws must be >= 1")
        if self.G * self.r_d > self.M:
            raise InvalidConfigurationError(f"sum rank constraint G*r^d <= M violated: {self.G * self.r_d} > {self.M}")
        if not self.K_bar <= self.b_bar:
            raise InvalidConfigurationError(f"K_bar <= b_bar violated: {self.K_bar} > {self.b_bar}")
        if self.b_bar > self.M - (self.G - 1) * self.r_d:
            raise InvalidConfigurationError(
                f"b_bar <= M - (G-1) r^d violated: {self.b_bar} > {self.M - (self.G - 1) * self.r_d}"
            )
        if self.b_bar > self.r_d:
            raise InvalidConfigurationError(f"b_bar <= r^d violated: {self.b_bar} > {self.r_d}")
        if self.azimuths and len(self.azimuths) != self.G:
            raise InvalidConfigurationError(f"need {self.G} azimuths, got {len(self.azimuths)}")
        unknown = set(self.schemes) - set(SCHEME_ORDER)
        if unknown:
            raise InvalidConfigurationError(f"unknown schemes {sorted(unknown)}; known: {SCHEME_ORDER}")
        if self.power_allocation not in ("closed_form", "exhaustive", "fixed"):
            raise InvalidConfigurationError(f"unknown power allocation {self.power_allocation!r}")
        if self.exs_objective not in ("monte_carlo", "asymptotic"):
            raise InvalidConfigurationError(f"unknown exhaustive-search objective {self.exs_objective!r}")
        if self.gamma_source not in ("det_equiv", "closed_form"):
            raise InvalidConfigurationError(f"unknown gamma source {self.gamma_source!r}")
        PowerSplit(self.alpha, self.beta, 1.0)
        power_alloc.split_grid(self.grid_step)

    def build(self) -> Scenario:
        self.validate()
        return one_ring_scenario(
            self.M, self.G, self.K_bar, self.b_bar, self.r_d, self.tau2, self.spread,
            list(self.azimuths) or default_azimuths(self.G),
        )


PRESETS = {
    "disjoint": ScenarioConfig(scenario="disjoint", spread=math.pi / 8),
    "overlapping": ScenarioConfig(scenario="overlapping", spread=math.pi / 3),
}


# Config file grammar: one ``key = value`` per line, ``#`` starts a comment,
# lists are comma separated, angles accept ``pi`` expressions such as ``pi/8``.
_PI_EXPR = re.compile(r"^\s*(-?[0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def parse_angle(text: str) -> float:
    m = _PI_EXPR.match(text)
    if m:
        coef = m.group(1)
        value = (float(coef) if coef not in ("", "-") else (-1.0 if coef == "-" else 1.0)) * math.pi
        return value / float(m.group(2)) if m.group(2) else value
    return float(text)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InvalidConfigurationError(f"not a boolean: {text!r}")


def _split_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


_CONVERTERS = {
    "scenario": str,
    "M": int, "K": int, "G": int, "b_bar": int, "r_d": int, "n_draws": int, "base_seed": int, "workers": int,
    "tau2": float, "alpha": float, "beta": float, "grid_step": float,
    "spread": parse_angle,
    "azimuths": lambda s: tuple(parse_angle(t) for t in _split_list(s)),
    "snr_db": lambda s: tuple(float(t) for t in _split_list(s)),
    "schemes": lambda s: tuple(_split_list(s)),
    "power_allocation": str, "exs_objective": str, "gamma_source": str,
    "timing": _parse_bool,
}


def config_from_mapping(values: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    base = base or ScenarioConfig()
    updates = {}
    for key, raw in values.items():
        if key not in _CONVERTERS:
            raise InvalidConfigurationError(f"unknown config key {key!r}")
        try:
            updates[key] = _CONVERTERS[key](raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise InvalidConfigurationError(f"bad value for {key}: {raw!r}") from exc
    return replace(base, **updates)


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    if "preset" in values:
        name = values.pop("preset")
        if name not in PRESETS:
            raise InvalidConfigurationError(f"unknown preset {name!r}")
        base = PRESETS[name]
    return config_from_mapping(values, base)


def dump_config(config: ScenarioConfig) -> str:
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    scheme: str
    snr_db: float
    alpha: float
    beta: float
    r_oc: float
    r_ic: float
    r_p: float
    r_sum: float
    stderr: float
    n_draws: int
    wall_ms: float = 0.0


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def get(self, scheme: str, snr_db: float) -> SweepRow:
        for row in self.rows:
            if row.scheme == scheme and row.snr_db == snr_db:
                return row
        raise KeyError((scheme, snr_db))

    def curve(self, scheme: str):
        rows = sorted((r for r in self.rows if r.scheme == scheme), key=lambda r: r.snr_db)
        return np.array([r.snr_db for r in rows]), np.array([r.r_sum for r in rows])


def _draw_bundle(args):
    scenario, P, indices, base_seed, need_baselines = args
    out = []
    for i in indices:
        draw, precoders = draw_precoders(scenario, i, base_seed, P)
        b2 = b3 = None
        if need_baselines:
            b2 = scheduled_rates(draw, scenario.B, P, "group")
            b3 = scheduled_rates(draw, scenario.B, P, "system")
        out.append((hrs_gains(draw, precoders), b2, b3))
    return out


def _hrs_report(gains_list, split: PowerSplit, scheme: str) -> RateReport:
    return average_reports([hrs_rates(sinr_table(g, split, scheme)) for g in gains_list])


def _mc_exhaustive(gains_list, P: float, step: float) -> PowerSplit:
    alpha, beta = power_alloc.grid_search(lambda a, b: mean_sum_rate_grid(gains_list, a, b, P), step)
    return PowerSplit(alpha, beta, P)


def closed_form_for(config: ScenarioConfig, scenario: Scenario, de, source: str | None = None) -> PowerSplit:
    source = source or config.gamma_source
    if source == "det_equiv":
        summary = power_alloc.det_equiv_interference_summary(de)
    else:
        summary = power_alloc.interference_summary(
            scenario.reduced_covariances(), scenario.tau2, scenario.G, config.K_bar, config.b_bar
        )
    return power_alloc.closed_form_split(summary, de.P, scenario.K, config.K_bar)


def _row(config, scheme, snr, split, report, wall):
    alpha, beta = (split.alpha, split.beta) if split is not None else (math.nan, math.nan)
    return SweepRow(
        config.scenario, scheme, float(snr), alpha, beta, report.r_oc, report.r_ic_total, report.r_p_total,
        report.r_sum, report.stderr, report.n_draws, wall if config.timing else 0.0,
    )


def run_sweep(config: ScenarioConfig, scenario: Scenario | None = None) -> SweepResult:
    """Evaluate every configured scheme at every SNR.

    Monte Carlo schemes share the same channel draws (draw ``i`` seeded from
    ``(base_seed, i)``), so the output does not depend on ``workers``.
    """
    config.validate()
    scenario = scenario or config.build()
    schemes = [s for s in SCHEME_ORDER if s in config.schemes]
    mc_schemes = {"TTP", "Baseline2", "Baseline3", "HRS_CLF", "HRS_CLF_TRACE", "HRS_EXS", "HRS_FIXED"}
    need_mc = any(s in mc_schemes for s in schemes)
    need_baselines = "Baseline2" in schemes or "Baseline3" in schemes
    powers = [10.0 ** (snr / 10.0) for snr in config.snr_db]

    bundles = {}
    if need_mc:
        chunks = chunked(config.n_draws, config.workers)
        tasks = [(scenario, P, c, config.base_seed, need_baselines) for P in powers for c in chunks]
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(_draw_bundle, tasks))
        else:
            results = [_draw_bundle(t) for t in tasks]
        for k, P in enumerate(powers):
            per_snr = results[k * len(chunks) : (k + 1) * len(chunks)]
            bundles[P] = [item for chunk in per_snr for item in chunk]

    rows = {}
    for snr, P in zip(config.snr_db, powers):
        de = det_equiv.det_equiv_for(scenario, P)
        gains = [b[0] for b in bundles.get(P, [])]
        for scheme in schemes:
            t0 = time.perf_counter()
            split = None
            if scheme == "TTP":
                split = PowerSplit(1.0, 1.0, P)
                report = average_reports([ttp_rates_from_gains(g, P) for g in gains])
            elif scheme == "Baseline2":
                report = average_reports([b[1] for b in bundles[P]])
            elif scheme == "Baseline3":
                report = average_reports([b[2] for b in bundles[P]])
            elif scheme == "HRS_CLF":
                split = closed_form_for(config, scenario, de)
                report = _hrs_report(gains, split, scheme)
            elif scheme == "HRS_CLF_TRACE":
                split = closed_form_for(config, scenario, de, "closed_form")
                report = _hrs_report(gains, split, scheme)
            elif scheme == "HRS_EXS":
                if config.exs_objective == "monte_carlo":
                    split = _mc_exhaustive(gains, P, config.grid_step)
                else:
                    split = power_alloc.exhaustive_split(scenario, P, config.grid_step, "asymptotic")
                report = _hrs_report(gains, split, scheme)
            elif scheme == "HRS_FIXED":
                split = PowerSplit(config.alpha, config.beta, P)
                report = _hrs_report(gains, split, scheme)
            elif scheme == "HRS_DetEquiv":
                if config.power_allocation == "closed_form":
                    split = closed_form_for(config, scenario, de)
                elif config.power_allocation == "exhaustive":
                    split = power_alloc.exhaustive_split(scenario, P, config.grid_step, "asymptotic")
                else:
                    split = PowerSplit(config.alpha, config.beta, P)
                ar = det_equiv.hrs_asymptotic_sinrs(de, split)
                report = RateReport(ar.r_oc, np.array([ar.r_ic]), np.array([ar.r_p]), ar.r_sum, scheme, 0, 0.0)
            else:  # TTP_DetEquiv
                split = PowerSplit(1.0, 1.0, P)
                ar = det_equiv.ttp_asymptotic_rate(de)
                report = RateReport(0.0, np.zeros(1), np.array([ar.r_sum_ttp]), ar.r_sum_ttp, scheme, 0, 0.0)
            wall = (time.perf_counter() - t0) * 1e3
            rows[(scheme, snr)] = _row(config, scheme, snr, split, report, wall)
    ordered = [rows[(s, snr)] for s in schemes for snr in sorted(config.snr_db)]
    return SweepResult(ordered)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return f"{value:.6g}"


def write_csv(result: SweepResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow([_fmt(getattr(row, name)) for name in CSV_HEADER])


def emit_csv(result: SweepResult, path) -> None:
    """Write the sweep as UTF-8 CSV with 6 significant digits per float."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_csv(result, fh)


def read_csv(path) -> SweepResult:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise InvalidConfigurationError(f"unexpected CSV header in {path}")
        rows = []
        for rec in reader:
            rows.append(SweepRow(
                rec["scenario"], rec["scheme"], float(rec["snr_db"]), float(rec["alpha"]), float(rec["beta"]),
                float(rec["r_oc"]), float(rec["r_ic"]), float(rec["r_p"]), float(rec["r_sum"]),
                float(rec["stderr"]), int(float(rec["n_draws"])), float(rec["wall_ms"]),
            ))
    return SweepResult(rows)


def emit_curves(result: SweepResult, stem) -> list:
    """Write one two-column ``snr_db r_sum`` file per scheme for gnuplot."""
    stem = Path(stem)
    paths = []
    for scheme in dict.fromkeys(r.scheme for r in result.rows):
        snr, rate = result.curve(scheme)
        path = stem.with_name(f"{stem.name}_{scheme}.dat")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# {scheme}: snr_db r_sum\n")
            for x, y in zip(snr, rate):
                fh.write(f"{x:.6g} {y:.6g}\n")
        paths.append(path)
    return paths
