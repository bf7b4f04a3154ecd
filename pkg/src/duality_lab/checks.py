"""Invariant checks behind the ``selfcheck`` command.

Each check returns a dict with ``name``, ``passed``, the worst observed
``value`` and the ``tolerance`` it was held to. Output is deterministic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import astuple

import numpy as np

from . import optics
from .discrimination import (
    Strategy,
    correct_guess_probability,
    dm_closed_form,
    helstrom,
    linear_branch,
    measurement,
    med_projectors,
    med_program,
    outcome_probabilities,
    pipeline_povm,
    strategy_mutual_information,
    unambiguous_probability,
    uqsd_bound,
    uqsd_povm,
    uqsd_program,
)
from .interferometer import (
    ExperimentConfig,
    evolve,
    evolve_pipeline,
    split_probs,
    swept_visibility,
    visibility_closed_form,
)
from .linalg import is_unitary, validate_povm, norm_sq


def _result(name: str, value: float, tol: float, passed: bool | None = None) -> dict:
    value = float(value)
    ok = value <= tol if passed is None else passed
    return {"name": name, "passed": bool(ok), "value": float(f"{value:.3e}"), "tolerance": tol}


def angle_grid(n: int = 20) -> list[tuple[float, float]]:
    """(theta_a, theta_n) pairs covering the closed domain, endpoints included."""
    ta = np.linspace(0, math.pi / 8, n)
    tn = np.linspace(0, math.pi / 4, n)
    return [(float(a), float(b)) for a, b in itertools.product(ta, tn)]


def check_first_loop(perturb_hwp: bool = False) -> dict:
    plate = optics.analyzer_hwp if perturb_hwp else optics.hwp
    worst = 0.0
    for ta, tn, phi in itertools.product(
        np.linspace(0, math.pi / 8, 5), np.linspace(0, math.pi / 4, 5), np.linspace(0, 2 * math.pi, 7)
    ):
        config = ExperimentConfig(float(ta), float(tn), float(phi))
        a, b = evolve(config), evolve_pipeline(config, plate=plate)
        worst = max(worst, np.max(np.abs(a.psi_v - b.psi_v)), np.max(np.abs(a.psi_d - b.psi_d)))
    return _result("first_loop_output_states", worst, 1e-12)


def check_unitarity() -> dict:
    mats = [optics.pbs(), optics.npbs(), optics.phase_plate(0.7), optics.mirror()]
    mats += [optics.hwp(t) for t in np.linspace(-1.5, 1.5, 7)]
    mats += [optics.second_loop(*astuple(uqsd_program(math.pi / 10, math.pi / 20)))]
    ok = all(is_unitary(m) for m in mats)
    return _result("element_unitarity", 0.0 if ok else 1.0, 0.0, ok)


def check_probability_conservation() -> dict:
    worst = 0.0
    for ta, tn in angle_grid(10):
        out = evolve(ExperimentConfig(ta, tn, 1.234))
        worst = max(worst, abs(norm_sq(out.psi_v) + norm_sq(out.psi_d) - 1))
    return _result("probability_conservation", worst, 1e-12)


def check_povm_validity() -> dict:
    worst = 0.0
    ok = True
    for ta, tn in angle_grid(10):
        for strategy in Strategy:
            report = validate_povm(measurement(strategy, ta, tn))
            ok &= report.valid
            worst = max(worst, report.completeness_residual, -min(report.min_eigenvalues))
    return _result("povm_validity", worst, 1e-10, ok and worst <= 1e-10)


def check_linear_duality() -> dict:
    worst = 0.0
    for ta, tn in angle_grid():
        p1, p2 = split_probs(ta)
        du, v = uqsd_bound(p1, p2, tn), visibility_closed_form(ta, tn)
        if linear_branch(p1, p2, tn):
            expected = 1.0
        else:
            expected = p1 * math.cos(2 * tn) ** 2 + 2 * math.sqrt(p1 * p2) * math.sin(2 * tn)
        worst = max(worst, abs(du + v - expected))
    return _result("linear_duality", worst, 1e-12)


def check_quadratic_duality() -> dict:
    worst = 0.0
    for ta, tn in angle_grid():
        p1, p2 = split_probs(ta)
        worst = max(worst, abs(dm_closed_form(p1, p2, tn) ** 2 + visibility_closed_form(ta, tn) ** 2 - 1))
    return _result("quadratic_duality", worst, 1e-12)


def check_branch_continuity() -> dict:
    worst = 0.0
    for s in np.linspace(0.05, 0.95, 19):
        # p2/p1 = s^2 at tan(2 theta_a) = s
        ta, tn = math.atan(s) / 2, math.asin(s) / 2
        p1, p2 = split_probs(ta)
        eq4 = 1 - 2 * math.sqrt(p1 * p2) * s
        eq5 = p1 * (1 - s * s)
        worst = max(worst, abs(eq4 - eq5), abs(eq4 - (p1 - p2)), abs(uqsd_bound(p1, p2, tn) - (p1 - p2)))
    return _result("branch_continuity", worst, 1e-12)


def check_measurement_bounds() -> dict:
    worst = 0.0
    for ta, tn in angle_grid():
        p1, p2 = split_probs(ta)
        povm, dec = uqsd_povm(uqsd_program(ta, tn), ta, tn)
        o = outcome_probabilities(povm, ta, tn)
        worst = max(worst, abs(unambiguous_probability(o) - uqsd_bound(p1, p2, tn)), dec.literal_mismatch)
        med = med_projectors(med_program(ta, tn).theta4)
        om = outcome_probabilities(med, ta, tn)
        worst = max(worst, abs(correct_guess_probability(om) - helstrom(p1, p2, tn)))
        pipe = pipeline_povm(med_program(ta, tn), ("D0", "D2"))
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(med.elements, pipe.elements)))
    return _result("measurement_attains_bound", worst, 1e-9)


def check_unambiguity() -> dict:
    worst = 0.0
    for ta, tn in angle_grid():
        o = outcome_probabilities(measurement(Strategy.UQSD, ta, tn), ta, tn)
        worst = max(worst, abs(o.conditional[0]["D1"]), abs(o.conditional[1]["D0"]))
    return _result("uqsd_unambiguity", worst, 1e-10)


def check_swept_visibility() -> dict:
    worst = 0.0
    for ta, tn in angle_grid(10):
        config = ExperimentConfig(ta, tn)
        worst = max(worst, abs(swept_visibility(config, 96) - visibility_closed_form(ta, tn)))
    return _result("visibility_pipeline_vs_closed_form", worst, 1e-10)


def check_mutual_information_order() -> dict:
    margin = math.inf
    for s in (0.2, 0.9):
        for t in np.linspace(0.05, 1.0, 15):
            config = ExperimentConfig.from_ratios(float(t), s)
            med = strategy_mutual_information(Strategy.MED, config.theta_a, config.theta_n)
            uq = strategy_mutual_information(Strategy.UQSD, config.theta_a, config.theta_n)
            margin = min(margin, med - uq)
    return _result("mutual_information_med_ge_uqsd", -margin, 1e-12)


def run_all(perturb_hwp: bool = False) -> list[dict]:
    return [
        check_first_loop(perturb_hwp),
        check_unitarity(),
        check_probability_conservation(),
        check_povm_validity(),
        check_linear_duality(),
        check_quadratic_duality(),
        check_branch_continuity(),
        check_measurement_bounds(),
        check_unambiguity(),
        check_swept_visibility(),
        check_mutual_information_order(),
    ]
