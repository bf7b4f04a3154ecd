"""Which-way measurement: discrimination bounds, analyzer programs and POVMs.

The analyzer loop has three detectors. Their meaning depends on the strategy:

=========  =======================  ======================
detector   UQSD                     MED
=========  =======================  ======================
D0         photon came from path 0  guess path 1
D1         photon came from path 1  (never fires)
D2         inconclusive             guess path 0
=========  =======================  ======================
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import optics
from .interferometer import ExperimentConfig, output_densities, split_probs, wwd_states
from .linalg import (
    H,
    SIGMA1,
    V,
    PovmSet,
    adjoint,
    cvec,
    inner,
    projector,
    validate_povm,
)

CLAMP_TOL = 1e-9
LITERAL_TOL = 1e-8


class Strategy(enum.Enum):
    UQSD = "uqsd"
    MED = "med"


DETECTORS = {Strategy.UQSD: ("D0", "D1", "D2"), Strategy.MED: ("D0", "D2")}

OUTCOME_MEANING = {
    Strategy.UQSD: {"D0": "path 0", "D1": "path 1", "D2": "inconclusive"},
    Strategy.MED: {"D0": "guess path 1", "D2": "guess path 0"},
}

_PORTS = {"D0": optics.D0_PORT, "D1": optics.D1_PORT, "D2": optics.D2_PORT}


@dataclass(frozen=True)
class WavePlateProgram:
    theta4: float
    theta5: float
    theta6: float = math.pi / 4
    theta7: float = 0.0


@dataclass(frozen=True)
class UqsdDecomposition:
    """d1 = alpha q1 + beta q2 and d2 = gamma q3 + delta q2 in the dilated space."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    literal_mismatch: float
    used_pipeline: bool


@dataclass(frozen=True)
class DiscriminationOutcome:
    """Conditional outcome table ``conditional[path][detector]`` plus priors."""

    priors: tuple[float, float]
    conditional: dict[int, dict[str, float]]

    def joint(self) -> dict[int, dict[str, float]]:
        return {
            j: {k: self.priors[j] * p for k, p in row.items()}
            for j, row in self.conditional.items()
        }


# --------------------------------------------------------------------------
# Closed forms


def _check_priors(p1: float, p2: float) -> None:
    if abs(p1 + p2 - 1) > 1e-12:
        raise ValueError(f"priors must sum to 1, got {p1} + {p2}")
    if p2 > p1 + 1e-15:
        raise ValueError(f"expected p2 <= p1, got p1={p1}, p2={p2}")


def linear_branch(p1: float, p2: float, theta_n: float) -> bool:
    """True where the linear relation D_u + V = 1 holds (boundary included)."""
    s = math.sin(2 * theta_n)
    return p2 >= p1 * s * s


def uqsd_bound(p1: float, p2: float, theta_n: float) -> float:
    """Optimal probability of an unambiguous answer for d1, d2 with priors p1, p2."""
    _check_priors(p1, p2)
    s = math.sin(2 * theta_n)
    if linear_branch(p1, p2, theta_n):
        return 1 - 2 * math.sqrt(p1 * p2) * s
    return p1 * (1 - s * s)


def helstrom(p1: float, p2: float, theta_n: float) -> float:
    """Largest correct-guess probability between d1 and d2."""
    _check_priors(p1, p2)
    s = math.sin(2 * theta_n)
    return (1 + math.sqrt(max(0.0, 1 - 4 * p1 * p2 * s * s))) / 2


def dm_closed_form(p1: float, p2: float, theta_n: float) -> float:
    return 2 * helstrom(p1, p2, theta_n) - 1


# --------------------------------------------------------------------------
# Analyzer programs


def _arccot(x: float) -> float:
    # principal branch (0, pi); arccot(+-inf) = 0 or pi
    return math.atan2(1.0, x)


def uqsd_program(theta_a: float, theta_n: float) -> WavePlateProgram:
    """H4 to H7 orientations that realize optimal UQSD of d1, d2."""
    t2a = math.tan(2 * theta_a)
    s2n, c2n = math.sin(2 * theta_n), math.cos(2 * theta_n)
    if t2a <= s2n:
        return WavePlateProgram(theta_n - math.pi / 4, 0.0, math.pi / 4, 0.0)

    # tan(2 theta4) = (s2n - 1/t2a) / c2n, scaled by t2a to stay accurate at small angles
    y, x = s2n * t2a - 1.0, c2n * t2a
    theta4 = 0.5 * math.atan2(y, x)
    arg = math.sqrt(s2n / t2a) * math.hypot(x, y) / c2n
    if arg > 1 + CLAMP_TOL:
        raise ValueError(f"H5 arccos argument {arg} exceeds 1")
    theta5 = 0.5 * math.acos(min(arg, 1.0))
    num = math.sin(2 * theta4)
    den = math.cos(2 * theta4) * math.sin(2 * theta5)
    x = num / den if den != 0 else math.copysign(math.inf, num)
    theta7 = 0.5 * _arccot(x)
    return WavePlateProgram(theta4, theta5, math.pi / 4, theta7)


def med_rotation_angle(theta_a: float, theta_n: float) -> float:
    """The auxiliary angle fixing H4 in the MED program (before the 1/4 scaling)."""
    p1, p2 = split_probs(theta_a)
    num = p1 + p2 * math.cos(4 * theta_n)
    den = p2 * math.sin(4 * theta_n)
    return math.atan2(num, den)


def med_program(theta_a: float, theta_n: float) -> WavePlateProgram:
    """H4 to H7 orientations for minimum-error discrimination."""
    if abs(math.sin(4 * theta_n)) < 1e-15:
        # d1, d2 orthogonal or identical: the h/v basis is optimal.
        return WavePlateProgram(0.0, 0.0, math.pi / 4, 0.0)
    phi_med = med_rotation_angle(theta_a, theta_n)
    return WavePlateProgram((math.pi / 2 - phi_med) / 4, 0.0, math.pi / 4, 0.0)


def program_for(strategy: Strategy, theta_a: float, theta_n: float) -> WavePlateProgram:
    if strategy is Strategy.UQSD:
        return uqsd_program(theta_a, theta_n)
    return med_program(theta_a, theta_n)


# --------------------------------------------------------------------------
# Measurement operators


def analyzer_unitary(program: WavePlateProgram) -> np.ndarray:
    return optics.second_loop(program.theta4, program.theta5, program.theta6, program.theta7)


def dilated_basis(program: WavePlateProgram) -> dict[str, np.ndarray]:
    """Orthonormal 4-dim states that end on each detector port, U^dag |port>."""
    u_dag = adjoint(analyzer_unitary(program))
    basis = {}
    for name, port in (*_PORTS.items(), ("idle", optics.IDLE_PORT)):
        e = np.zeros(4, dtype=complex)
        e[port] = 1.0
        basis[name] = cvec(u_dag @ e)
    return basis


def pipeline_povm(program: WavePlateProgram, detectors=("D0", "D1", "D2")) -> PovmSet:
    """Effective polarization POVM of the analyzer loop (input on path 0)."""
    basis = dilated_basis(program)
    # compress onto the input subspace: path 0 block
    elements = [projector(basis[d][:2]) for d in detectors]
    return PovmSet(tuple(elements), tuple(detectors))


def literal_uqsd_vectors(program: WavePlateProgram) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Polarization parts of q1, q2, q3 from the closed operator products.

    q1 and q3 carry the r-path tag, q2 the l-path tag.
    """
    r4 = optics.analyzer_hwp(program.theta4)
    r5 = optics.analyzer_hwp(program.theta5)
    r7 = optics.analyzer_hwp(program.theta7)
    p_h = projector(H)
    p_v = projector(V)
    mix = p_v @ SIGMA1 @ p_h + p_h @ adjoint(r5) @ p_v
    q1 = adjoint(r4) @ mix @ adjoint(r7) @ H
    q2 = adjoint(r4) @ p_h @ adjoint(r5) @ H
    q3 = adjoint(r4) @ mix @ adjoint(r7) @ V
    return cvec(q1), cvec(q2), cvec(q3)


def uqsd_povm(program: WavePlateProgram, theta_a: float, theta_n: float) -> tuple[PovmSet, UqsdDecomposition]:
    """Three-outcome UQSD measurement and the decomposition of d1, d2.

    The POVM is built from the closed operator products; the composed optical
    pipeline serves as the check and takes over if the two disagree.
    """
    q1, q2, q3 = literal_uqsd_vectors(program)
    literal = PovmSet((projector(q1), projector(q3), projector(q2)), ("D0", "D1", "D2"))
    basis = dilated_basis(program)
    pipe = {k: basis[d] for k, d in (("q1", "D0"), ("q2", "D2"), ("q3", "D1"))}

    mismatch = max(
        float(np.max(np.abs(lit - pipe[k][:2])))
        for lit, k in ((q1, "q1"), (q2, "q2"), (q3, "q3"))
    )
    report = validate_povm(literal)
    use_pipeline = mismatch > LITERAL_TOL or report.completeness_residual > LITERAL_TOL
    povm = pipeline_povm(program) if use_pipeline else literal

    d1, d2, _ = wwd_states(theta_n)
    embed = lambda d: cvec(np.concatenate([d, [0, 0]]))  # noqa: E731
    e1, e2 = embed(d1), embed(d2)
    decomposition = UqsdDecomposition(
        alpha=inner(pipe["q1"], e1),
        beta=inner(pipe["q2"], e1),
        gamma=inner(pipe["q3"], e2),
        delta=inner(pipe["q2"], e2),
        q1=pipe["q1"],
        q2=pipe["q2"],
        q3=pipe["q3"],
        literal_mismatch=mismatch,
        used_pipeline=use_pipeline,
    )
    return povm, decomposition


def med_projectors(theta4: float) -> PovmSet:
    """Rank-1 projectors after H4: D2 (h, guess path 0) and D0 (v, guess path 1)."""
    r4 = optics.analyzer_hwp(theta4)
    pi_h = adjoint(r4) @ projector(H) @ r4
    pi_v = adjoint(r4) @ projector(V) @ r4
    return PovmSet((pi_v, pi_h), ("D0", "D2"))


def measurement(strategy: Strategy, theta_a: float, theta_n: float) -> PovmSet:
    """The polarization POVM the analyzer realizes for ``strategy``."""
    if strategy is Strategy.UQSD:
        return uqsd_povm(uqsd_program(theta_a, theta_n), theta_a, theta_n)[0]
    return med_projectors(med_program(theta_a, theta_n).theta4)


# --------------------------------------------------------------------------
# Statistics


def _require_valid(povm: PovmSet) -> None:
    report = validate_povm(povm)
    if not report.valid:
        raise ValueError(f"invalid POVM: {report}")
    if povm.dim != 2:
        raise ValueError("expected a POVM on the polarization space")


def outcome_probabilities(povm: PovmSet, theta_a: float, theta_n: float, path_condition: str = "both") -> DiscriminationOutcome:
    """P(detector | path j) for the which-way states of the first loop.

    ``path_condition`` is ``"path0"``, ``"path1"`` or ``"both"`` and selects
    which conditional rows are returned.
    """
    _require_valid(povm)
    rows = {"path0": (0,), "path1": (1,), "both": (0, 1)}
    if path_condition not in rows:
        raise ValueError(f"unknown path condition {path_condition!r}")
    d1, d2, _ = wwd_states(theta_n)
    states = (d1, d2)
    table = {}
    for j in rows[path_condition]:
        d = states[j]
        table[j] = {
            label: float(np.real(np.vdot(d, e @ d))) for label, e in zip(povm.labels, povm.elements)
        }
    return DiscriminationOutcome(split_probs(theta_a), table)


def unambiguous_probability(outcome: DiscriminationOutcome) -> float:
    p1, p2 = outcome.priors
    return p1 * outcome.conditional[0]["D0"] + p2 * outcome.conditional[1]["D1"]


def correct_guess_probability(outcome: DiscriminationOutcome) -> float:
    p1, p2 = outcome.priors
    return p1 * outcome.conditional[0]["D2"] + p2 * outcome.conditional[1]["D0"]


def detector_probabilities(config: ExperimentConfig, povm: PovmSet) -> dict[str, float]:
    """Probability of each click (D_v and the analyzer detectors) at phase ``config.phi``."""
    rho_v, rho_d = output_densities(config)
    out = {"Dv": float(np.real(np.trace(rho_v)))}
    for label, e in zip(povm.labels, povm.elements):
        out[label] = float(np.real(np.trace(rho_d @ e)))
    return out


def mutual_information(priors, states, povm: PovmSet) -> float:
    """Shannon mutual information (bits) between the prepared state and the outcome.

    ``states`` are pure kets; ``0 log 0`` counts as 0.
    """
    priors = np.asarray(priors, dtype=float)
    if abs(priors.sum() - 1) > 1e-12 or np.any(priors < 0):
        raise ValueError("priors must be a probability vector")
    cond = np.array(
        [[float(np.real(np.vdot(s, e @ s))) for e in povm.elements] for s in states]
    )
    cond = np.clip(cond, 0.0, None)
    marginal = priors @ cond
    total = 0.0
    for i, p in enumerate(priors):
        for j in range(len(povm)):
            num = cond[i, j]
            if p == 0 or num <= 0:
                continue
            assert marginal[j] > 0, "outcome with support has zero marginal"
            total += p * num * math.log2(num / marginal[j])
    return max(total, 0.0)


def strategy_mutual_information(strategy: Strategy, theta_a: float, theta_n: float) -> float:
    d1, d2, _ = wwd_states(theta_n)
    return mutual_information(split_probs(theta_a), (d1, d2), measurement(strategy, theta_a, theta_n))
