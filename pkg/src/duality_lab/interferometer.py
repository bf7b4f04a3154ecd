"""First Sagnac loop: asymmetric splitting, which-way marking and interference."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import optics
from .linalg import H, V, cvec, norm_sq, path_block

ANGLE_EPS = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    """Angles of H1 (``theta_a``) and H2 (``theta_n``), the phase ``phi`` and
    the loop contrast ``loop_visibility`` (1 is a perfect loop)."""

    theta_a: float
    theta_n: float
    phi: float = 0.0
    loop_visibility: float = 1.0

    def __post_init__(self):
        if not (-ANGLE_EPS <= self.theta_a <= math.pi / 8 + ANGLE_EPS):
            raise ValueError(f"theta_a={self.theta_a} outside [0, pi/8]; need p2 <= p1")
        if not (-ANGLE_EPS <= self.theta_n <= math.pi / 4 + ANGLE_EPS):
            raise ValueError(f"theta_n={self.theta_n} outside [0, pi/4]")
        if not (0.0 <= self.loop_visibility <= 1.0):
            raise ValueError("loop_visibility must lie in [0, 1]")
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")

    @classmethod
    def from_ratios(cls, tan2a: float, sin2n: float, phi: float = 0.0, loop_visibility: float = 1.0):
        """Build from the symmetry tan(2 theta_a) and overlap sin(2 theta_n)."""
        if not 0.0 <= tan2a <= 1.0:
            raise ValueError(f"tan2a={tan2a} outside [0, 1]")
        if not 0.0 <= sin2n <= 1.0:
            raise ValueError(f"sin2n={sin2n} outside [0, 1]")
        return cls(math.atan(tan2a) / 2, math.asin(sin2n) / 2, phi, loop_visibility)

    @property
    def tan2a(self) -> float:
        return math.tan(2 * self.theta_a)

    @property
    def sin2n(self) -> float:
        return math.sin(2 * self.theta_n)

    def with_phi(self, phi: float) -> "ExperimentConfig":
        return ExperimentConfig(self.theta_a, self.theta_n, phi, self.loop_visibility)


@dataclass(frozen=True)
class OutputPair:
    psi_v: np.ndarray
    psi_d: np.ndarray


def split_probs(theta_a: float) -> tuple[float, float]:
    """Path probabilities (p1, p2) behind H1 and the PBS half of the cBS."""
    if not (-ANGLE_EPS <= theta_a <= math.pi / 8 + ANGLE_EPS):
        raise ValueError(f"theta_a={theta_a} outside [0, pi/8]; need p2 <= p1")
    return math.cos(2 * theta_a) ** 2, math.sin(2 * theta_a) ** 2


def wwd_states(theta_n: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Which-way detector states d1, d2 and the mirrored d2_bar."""
    s, c = math.sin(2 * theta_n), math.cos(2 * theta_n)
    d1 = H
    d2 = cvec(s * H - c * V)
    d2_bar = cvec(s * H + c * V)
    return d1, d2, d2_bar


def evolve(config: ExperimentConfig) -> OutputPair:
    """Closed-form exit states of the first loop (ideal loop)."""
    c, s = math.cos(2 * config.theta_a), math.sin(2 * config.theta_a)
    d1, d2, d2_bar = wwd_states(config.theta_n)
    e = np.exp(1j * config.phi)
    r = 1 / math.sqrt(2)
    return OutputPair(cvec(r * (c * d1 - e * s * d2_bar)), cvec(r * (c * d1 + e * s * d2)))


def evolve_pipeline(config: ExperimentConfig, plate=optics.hwp) -> OutputPair:
    """Exit states obtained by composing the optical elements."""
    out = optics.first_loop(config.theta_a, config.theta_n, config.phi, plate=plate)
    return OutputPair(path_block(out, 0), path_block(out, 1))


def output_densities(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Sub-normalized polarization density matrices at the D_v and D_d exits.

    Loop imperfection scales the path cross terms by ``loop_visibility``.
    """
    c, s = math.cos(2 * config.theta_a), math.sin(2 * config.theta_a)
    d1, d2, d2_bar = wwd_states(config.theta_n)
    eta = config.loop_visibility
    e = np.exp(1j * config.phi)

    def rho(a, b, sign):
        direct = c * c * np.outer(a, a.conj()) + s * s * np.outer(b, b.conj())
        cross = sign * c * s * (np.conj(e) * np.outer(a, b.conj()) + e * np.outer(b, a.conj()))
        return (direct + eta * cross) / 2

    return rho(d1, d2_bar, -1.0), rho(d1, d2, 1.0)


def detection_prob_dd(config: ExperimentConfig) -> float:
    """Probability that the photon leaves towards the second loop."""
    p1, p2 = split_probs(config.theta_a)
    return (1 + config.loop_visibility * 2 * math.sqrt(p1 * p2) * config.sin2n * math.cos(config.phi)) / 2


def detection_prob_dv(config: ExperimentConfig) -> float:
    return 1.0 - detection_prob_dd(config)


def visibility_closed_form(theta_a: float, theta_n: float) -> float:
    p1, p2 = split_probs(theta_a)
    return 2 * math.sqrt(p1 * p2) * math.sin(2 * theta_n)


def swept_visibility(config: ExperimentConfig, n_phases: int = 720) -> float:
    """Fringe contrast of |psi_d|^2 over a phase grid, through the optics pipeline.

    ``n_phases`` must be even so the grid holds both 0 and pi.
    """
    if n_phases < 2 or n_phases % 2:
        raise ValueError("n_phases must be an even number >= 2")
    probs = [
        norm_sq(evolve_pipeline(config.with_phi(phi)).psi_d)
        for phi in np.linspace(0, 2 * np.pi, n_phases, endpoint=False)
    ]
    hi, lo = max(probs), min(probs)
    return (hi - lo) / (hi + lo)
