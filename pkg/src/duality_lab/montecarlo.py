"""Photon-counting emulation of the two-loop experiment and the count estimators.

Every (setting, repeat) pair draws from its own Philox stream keyed by the
master seed, so a record is a pure function of its inputs no matter how the
work is scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .discrimination import (
    DETECTORS,
    Strategy,
    detector_probabilities,
    measurement,
    mutual_information,
)
from .interferometer import ExperimentConfig, split_probs, wwd_states

_PHASE_STREAM = 0
_BLOCKED_STREAM = 1
_TAGGED_STREAM = 2


@dataclass(frozen=True)
class NoiseModel:
    """Source and acquisition parameters; defaults follow the bench values."""

    mean_rate: float = 10_000.0  # photons per second
    duration: float = 0.5  # seconds per measurement
    repeats: int = 5
    loop_visibility: float = 0.9867
    n_phases: int = 24
    exact: bool = False  # use expected counts instead of sampling

    def __post_init__(self):
        if self.mean_rate < 0 or self.duration < 0:
            raise ValueError("rate and duration must be nonnegative")
        if self.repeats < 1:
            raise ValueError("need at least one repeat")
        if not 0.0 <= self.loop_visibility <= 1.0:
            raise ValueError("loop_visibility must lie in [0, 1]")
        if self.n_phases < 2:
            raise ValueError("need at least two phases")

    @property
    def photons(self) -> float:
        return self.mean_rate * self.duration

    def with_photons(self, photons: float) -> "NoiseModel":
        if self.duration <= 0:
            raise ValueError("duration must be positive to set a photon budget")
        return replace(self, mean_rate=photons / self.duration)

    def phase_grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_phases) / self.n_phases


@dataclass
class CountRecord:
    """Detector counts of one configuration.

    ``phase_counts[det]`` has shape (repeats, n_phases); ``blocked[(i, j)]``
    holds N_ij per repeat, the count at D_i with only path j open.
    """

    config: ExperimentConfig
    strategy: Strategy
    noise: NoiseModel
    seed: int
    phases: np.ndarray
    phase_counts: dict[str, np.ndarray]
    blocked: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    @property
    def repeats(self) -> int:
        return self.noise.repeats

    def n(self, i: int, j: int) -> np.ndarray:
        return self.blocked.get((i, j), np.zeros(self.repeats))


@dataclass(frozen=True)
class Estimate:
    value: float
    sigma: float


@dataclass(frozen=True)
class EstimateReport:
    visibility: Estimate
    distinguishability: Estimate
    total: Estimate  # V + D_u (UQSD) or V^2 + D_m^2 (MED)
    strategy: Strategy


def _rng(seed: int, stream: tuple[int, ...]) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=stream)
    return np.random.Generator(np.random.Philox(ss))


def _draw(probs: np.ndarray, noise: NoiseModel, rng: np.random.Generator | None) -> np.ndarray:
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    probs = probs / probs.sum()
    if noise.exact:
        return noise.photons * probs
    total = rng.poisson(noise.photons)
    return rng.multinomial(total, probs).astype(float)


def _detector_index(label: str) -> int:
    return int(label[1:])


def sample_counts(
    config: ExperimentConfig,
    strategy: Strategy,
    noise: NoiseModel = NoiseModel(),
    seed: int = 0,
    stream: tuple[int, ...] = (),
    tagged: bool = False,
) -> CountRecord:
    """Simulate the phase sweep and the path-blocked runs for one configuration.

    ``stream`` extends the seed key so that callers sweeping a grid can give
    each grid point its own streams. ``tagged=True`` replaces the blocked
    runs by ground-truth path tagging (a debugging aid).
    """
    if noise.photons <= 0:
        raise ValueError("photon budget must be positive")
    config = replace(config, loop_visibility=noise.loop_visibility)
    povm = measurement(strategy, config.theta_a, config.theta_n)
    detectors = DETECTORS[strategy]
    labels = ("Dv", *detectors)
    phases = noise.phase_grid()

    def rng_for(*key):
        return None if noise.exact else _rng(seed, (*stream, *key))

    phase_counts = {k: np.zeros((noise.repeats, len(phases))) for k in labels}
    for k, phi in enumerate(phases):
        probs = detector_probabilities(config.with_phi(float(phi)), povm)
        p = np.array([probs[lab] for lab in labels])
        for r in range(noise.repeats):
            counts = _draw(p, noise, rng_for(_PHASE_STREAM, k, r))
            for lab, c in zip(labels, counts):
                phase_counts[lab][r, k] = c

    priors = split_probs(config.theta_a)
    d1, d2, _ = wwd_states(config.theta_n)
    cond = [
        np.array([float(np.real(np.vdot(d, povm.element(lab) @ d))) for lab in detectors])
        for d in (d1, d2)
    ]
    blocked = {(_detector_index(lab), j): np.zeros(noise.repeats) for lab in detectors for j in (0, 1)}
    for j in (0, 1):
        if tagged:
            # every photon reaches the analyzer, labeled with its true path
            probs = np.concatenate([[priors[1 - j]], priors[j] * cond[j]])
        else:
            # path j open: a fraction p_j survives, half of it exits at D_v
            probs = np.concatenate([[1 - priors[j], priors[j] / 2], priors[j] / 2 * cond[j]])
        for r in range(noise.repeats):
            key = (_TAGGED_STREAM if tagged else _BLOCKED_STREAM, j, r)
            counts = _draw(probs, noise, rng_for(*key))
            analyzer = counts[-len(detectors):]
            for lab, c in zip(detectors, analyzer):
                blocked[(_detector_index(lab), j)][r] = c

    return CountRecord(config, strategy, noise, seed, phases, phase_counts, blocked)


# --------------------------------------------------------------------------
# Estimators


def _summarize(values: np.ndarray) -> Estimate:
    values = np.asarray(values, dtype=float)
    sigma = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return Estimate(float(np.mean(values)), sigma)


def visibility_per_repeat(record: CountRecord, detector: str = "Dv") -> np.ndarray:
    counts = record.phase_counts[detector]
    if len(record.phases) < 2:
        raise ValueError("need at least two phases")
    hi = counts.max(axis=1)
    lo = counts.min(axis=1)
    if np.any(hi + lo == 0):
        raise ValueError("all counts zero; visibility undefined")
    return (hi - lo) / (hi + lo)


def estimate_visibility(record: CountRecord) -> Estimate:
    """Fringe contrast at D_v, (max - min)/(max + min), averaged over repeats."""
    return _summarize(visibility_per_repeat(record))


def analytic_visibility_sigma(record: CountRecord) -> float:
    """Poisson error of the max/min contrast, averaged over repeats."""
    counts = record.phase_counts["Dv"]
    a = counts.max(axis=1)
    b = counts.min(axis=1)
    return float(np.mean(np.sqrt(4 * a * b / (a + b) ** 3)))


def du_per_repeat(record: CountRecord) -> np.ndarray:
    if record.strategy is not Strategy.UQSD:
        raise ValueError("D_u needs UQSD blocked runs")
    n = record.n
    num = n(0, 0) + n(1, 1)
    den = (n(2, 0) + n(0, 0)) + (n(2, 1) + n(1, 1))
    if np.any(den == 0):
        raise ValueError("zero denominator in D_u estimator")
    return num / den


def estimate_du(record: CountRecord) -> Estimate:
    return _summarize(du_per_repeat(record))


def dm_per_repeat(record: CountRecord) -> np.ndarray:
    if record.strategy is not Strategy.MED:
        raise ValueError("D_m needs MED blocked runs")
    n = record.n
    right = n(0, 1) + n(2, 0)
    wrong = n(0, 0) + n(2, 1)
    if np.any(right + wrong == 0):
        raise ValueError("zero denominator in D_m estimator")
    return (right - wrong) / (right + wrong)


def estimate_dm(record: CountRecord) -> Estimate:
    return _summarize(dm_per_repeat(record))


def mi_per_repeat(record: CountRecord) -> np.ndarray:
    detectors = [_detector_index(lab) for lab in DETECTORS[record.strategy]]
    out = []
    for r in range(record.repeats):
        joint = np.array([[record.n(i, j)[r] for i in detectors] for j in (0, 1)])
        total = joint.sum()
        if total == 0:
            raise ValueError("no analyzer clicks")
        joint = joint / total
        p_path = joint.sum(axis=1, keepdims=True)
        p_out = joint.sum(axis=0, keepdims=True)
        mask = joint > 0
        out.append(float(np.sum(joint[mask] * np.log2(joint[mask] / (p_path @ p_out)[mask]))))
    return np.array(out)


def empirical_mutual_information(record: CountRecord) -> Estimate:
    """Plug-in mutual information (bits) from the blocked-run counts."""
    return _summarize(mi_per_repeat(record))


def estimate_report(record: CountRecord) -> EstimateReport:
    v = visibility_per_repeat(record)
    if record.strategy is Strategy.UQSD:
        d = du_per_repeat(record)
        total = v + d
    else:
        d = dm_per_repeat(record)
        total = v**2 + d**2
    return EstimateReport(_summarize(v), _summarize(d), _summarize(total), record.strategy)


# --------------------------------------------------------------------------
# Model predictions for the simulated apparatus


def predicted_visibility(config: ExperimentConfig, loop_visibility: float) -> float:
    p1, p2 = split_probs(config.theta_a)
    return loop_visibility * 2 * math.sqrt(p1 * p2) * config.sin2n


def predicted_mutual_information(config: ExperimentConfig, strategy: Strategy) -> float:
    d1, d2, _ = wwd_states(config.theta_n)
    povm = measurement(strategy, config.theta_a, config.theta_n)
    return mutual_information(split_probs(config.theta_a), (d1, d2), povm)
