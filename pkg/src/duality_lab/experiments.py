"""Scenario runners that turn simulations into plot-ready result rows."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import checks
from .discrimination import (
    DETECTORS,
    Strategy,
    detector_probabilities,
    dm_closed_form,
    measurement,
    uqsd_bound,
)
from .interferometer import ExperimentConfig, split_probs
from .montecarlo import (
    NoiseModel,
    dm_per_repeat,
    du_per_repeat,
    mi_per_repeat,
    predicted_mutual_information,
    predicted_visibility,
    sample_counts,
    visibility_per_repeat,
)

SCENARIOS = ("phase-sweep", "duality-curve", "mutual-info", "selfcheck")
CSV_COLUMNS = (
    "tan2a",
    "sin2n",
    "strategy",
    "phi",
    "quantity",
    "closed_form",
    "estimate",
    "sigma",
    "n_photons",
    "seed",
    "residual",
    "pass",
)
DEFAULT_GRID_POINTS = 15


@dataclass
class ScenarioSpec:
    scenario: str
    tan2a: list[float] | None = None
    sin2n: float | None = None
    strategy: str = "both"
    photons: float = 5000.0
    phases: int = 24
    repeats: int = 5
    seed: int = 0
    loop_visibility: float = 0.9867
    exact: bool = False
    k_sigma: float = 4.0
    abs_tol: float = 1e-9
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    perturb_hwp: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.strategy not in ("uqsd", "med", "both"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.tan2a is not None:
            if len(self.tan2a) == 0:
                raise ValueError("empty symmetry grid")
            for t in self.tan2a:
                if not 0.0 <= t <= 1.0:
                    raise ValueError(f"tan2a={t} outside [0, 1]")
        if self.sin2n is not None and not 0.0 <= self.sin2n <= 1.0:
            raise ValueError(f"sin2n={self.sin2n} outside [0, 1]")
        if self.photons <= 0:
            raise ValueError("photons must be positive")
        if self.phases < 2 or self.repeats < 1:
            raise ValueError("need >= 2 phases and >= 1 repeat")

    def strategies(self) -> list[Strategy]:
        if self.strategy == "both":
            return [Strategy.UQSD, Strategy.MED]
        return [Strategy(self.strategy)]

    def noise(self) -> NoiseModel:
        return NoiseModel(
            repeats=self.repeats,
            loop_visibility=self.loop_visibility,
            n_phases=self.phases,
            exact=self.exact,
        ).with_photons(self.photons)


@dataclass
class ResultRow:
    tan2a: float
    sin2n: float
    strategy: str
    quantity: str
    closed_form: float
    estimate: float
    sigma: float
    n_photons: float
    seed: int
    phi: float | None = None
    k_sigma: float = 4.0
    abs_tol: float = 1e-9
    residual: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.residual = float(abs(self.estimate - self.closed_form))
        self.passed = bool(self.residual <= self.k_sigma * self.sigma + self.abs_tol)

    def as_dict(self) -> dict:
        return {
            "tan2a": self.tan2a,
            "sin2n": self.sin2n,
            "strategy": self.strategy,
            "phi": self.phi,
            "quantity": self.quantity,
            "closed_form": self.closed_form,
            "estimate": self.estimate,
            "sigma": self.sigma,
            "n_photons": self.n_photons,
            "seed": self.seed,
            "residual": self.residual,
            "pass": self.passed,
        }


def default_grid(sin2n: float, n: int = DEFAULT_GRID_POINTS) -> list[float]:
    """Symmetry values spanning one panel of the duality plots.

    Small overlaps get the linear-relation range [sin2n, 1]; large ones the
    range (0, sin2n] where the linear relation fails.
    """
    if sin2n < 0.5:
        return [float(x) for x in np.linspace(sin2n, 1.0, n)]
    return [float(x) for x in np.linspace(sin2n / n, sin2n, n)]


def _grid(spec: ScenarioSpec, default_sin2n: float, default_tan2a: list[float] | None = None):
    sin2n = default_sin2n if spec.sin2n is None else spec.sin2n
    if spec.tan2a is not None:
        tan2a = spec.tan2a
    elif default_tan2a is not None:
        tan2a = default_tan2a
    else:
        tan2a = default_grid(sin2n)
    return tan2a, sin2n


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _summary(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    sigma = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(np.mean(values)), sigma


def run_phase_sweep(spec: ScenarioSpec) -> list[ResultRow]:
    """Normalized detector counts against the phase, with the model curves."""
    strategies = spec.strategies()
    if strategies != [Strategy.UQSD]:
        raise ValueError("phase-sweep runs the UQSD analyzer; use --strategy uqsd")
    tan2a, sin2n = _grid(spec, 0.2, [0.38])
    noise = spec.noise()
    labels = ("Dv", *DETECTORS[Strategy.UQSD])

    def point(args):
        idx, t = args
        config = ExperimentConfig.from_ratios(t, sin2n, loop_visibility=spec.loop_visibility)
        record = sample_counts(config, Strategy.UQSD, noise, spec.seed, stream=(idx, 0))
        povm = measurement(Strategy.UQSD, config.theta_a, config.theta_n)
        totals = sum(record.phase_counts[lab] for lab in labels)
        rows = []
        for k, phi in enumerate(record.phases):
            model = detector_probabilities(record.config.with_phi(float(phi)), povm)
            for lab in labels:
                est, sig = _summary(record.phase_counts[lab][:, k] / totals[:, k])
                rows.append(
                    ResultRow(t, sin2n, "uqsd", lab, model[lab], est, sig, noise.photons, spec.seed,
                              phi=float(phi), k_sigma=spec.k_sigma, abs_tol=spec.abs_tol)
                )
        return rows

    return [r for rows in _map(point, list(enumerate(tan2a)), spec.workers) for r in rows]


def run_duality_curve(spec: ScenarioSpec) -> list[ResultRow]:
    """Visibility, distinguishability and their duality sums over the symmetry grid."""
    tan2a, sin2n = _grid(spec, 0.2)
    noise = spec.noise()
    strategies = spec.strategies()

    def point(args):
        idx, t = args
        config = ExperimentConfig.from_ratios(t, sin2n, loop_visibility=spec.loop_visibility)
        p1, p2 = split_probs(config.theta_a)
        v_model = predicted_visibility(config, spec.loop_visibility)
        rows = []
        for s_idx, strategy in enumerate(strategies):
            record = sample_counts(config, strategy, noise, spec.seed, stream=(idx, s_idx))
            v = visibility_per_repeat(record)
            if strategy is Strategy.UQSD:
                d = du_per_repeat(record)
                d_model = uqsd_bound(p1, p2, config.theta_n)
                quantities = (("V", v, v_model), ("Du", d, d_model), ("V+Du", v + d, v_model + d_model))
            else:
                d = dm_per_repeat(record)
                d_model = dm_closed_form(p1, p2, config.theta_n)
                quantities = (
                    ("V", v, v_model),
                    ("Dm", d, d_model),
                    ("V2+Dm2", v**2 + d**2, v_model**2 + d_model**2),
                )
            for name, values, model in quantities:
                est, sig = _summary(values)
                rows.append(
                    ResultRow(t, sin2n, strategy.value, name, model, est, sig, noise.photons, spec.seed,
                              k_sigma=spec.k_sigma, abs_tol=spec.abs_tol)
                )
        return rows

    return [r for rows in _map(point, list(enumerate(tan2a)), spec.workers) for r in rows]


def run_mutual_info(spec: ScenarioSpec) -> list[ResultRow]:
    """Exact and empirical mutual information for each strategy over the grid."""
    tan2a, sin2n = _grid(spec, 0.2)
    noise = spec.noise()
    strategies = spec.strategies()

    def point(args):
        idx, t = args
        config = ExperimentConfig.from_ratios(t, sin2n, loop_visibility=spec.loop_visibility)
        rows = []
        for s_idx, strategy in enumerate(strategies):
            record = sample_counts(config, strategy, noise, spec.seed, stream=(idx, s_idx))
            est, sig = _summary(mi_per_repeat(record))
            model = predicted_mutual_information(config, strategy)
            rows.append(
                ResultRow(t, sin2n, strategy.value, "MI", model, est, sig, noise.photons, spec.seed,
                          k_sigma=spec.k_sigma, abs_tol=spec.abs_tol)
            )
        return rows

    return [r for rows in _map(point, list(enumerate(tan2a)), spec.workers) for r in rows]


def run_selfcheck(spec: ScenarioSpec | None = None) -> dict:
    """Run the invariant suite; returns a JSON-ready summary."""
    perturb = bool(spec and spec.perturb_hwp)
    results = checks.run_all(perturb_hwp=perturb)
    return {
        "passed": all(r["passed"] for r in results),
        "n_checks": len(results),
        "n_failed": sum(not r["passed"] for r in results),
        "checks": results,
    }


RUNNERS = {
    "phase-sweep": run_phase_sweep,
    "duality-curve": run_duality_curve,
    "mutual-info": run_mutual_info,
}


# --------------------------------------------------------------------------
# Serialization


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.9g}"
    return str(x)


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        d = row.as_dict()
        writer.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_value(x):
    if isinstance(x, float):
        return float(f"{x:.9g}")
    return x


def rows_to_json(rows: Iterable[ResultRow]) -> str:
    data = [{c: _json_value(row.as_dict()[c]) for c in CSV_COLUMNS} for row in rows]
    return json.dumps(data, indent=1) + "\n"


def render(rows: list[ResultRow], fmt: str) -> str:
    return rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
