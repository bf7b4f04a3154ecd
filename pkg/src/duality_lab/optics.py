"""Jones-calculus optical elements and the two Sagnac-loop compositions.

Half-wave plate labeling
------------------------
Two angle origins appear on the bench. The preparation plates (H1, H2, H3)
are labeled so that a plate at ``theta`` sends ``|h>`` to
``sin(2 theta)|h> - cos(2 theta)|v>``; that is :func:`hwp`. The analyzer
plates in the second loop (H4 to H7) are labeled from the usual fast-axis
origin, ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]``; that is
:func:`analyzer_hwp`. The two differ by a fixed offset,
``analyzer_hwp(t) == hwp(t + pi/4)``.

Four-port elements act on the path-polarization space ordered as in
:mod:`duality_lab.linalg`. Mirrors are the identity: their polarization
flips are absorbed into the element conventions.
"""
from __future__ import annotations

import enum
import math
from typing import Callable

import numpy as np

from .linalg import (
    H,
    I2,
    I4,
    PATH0,
    SIGMA1,
    SIGMA3,
    block_diag,
    cmat,
    cvec,
    tensor,
)

PlateFn = Callable[[float], np.ndarray]


def normalize_angle(theta: float) -> float:
    """Map a plate orientation into (-pi/2, pi/2]; a HWP is pi-periodic."""
    t = math.remainder(theta, math.pi)
    if t <= -math.pi / 2:
        t += math.pi
    return t


def hwp(theta: float) -> np.ndarray:
    """Preparation-plate Jones matrix: ``hwp(t) @ H == sin2t H - cos2t V``.

    Real symmetric and an involution, so it is its own adjoint and inverse.
    """
    if not math.isfinite(theta):
        raise ValueError("plate angle must be finite")
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return cmat([[s, -c], [-c, -s]])


def analyzer_hwp(theta: float) -> np.ndarray:
    """Analyzer-plate Jones matrix, fast axis at ``theta`` from horizontal."""
    if not math.isfinite(theta):
        raise ValueError("plate angle must be finite")
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return cmat([[c, s], [s, -c]])


def pbs() -> np.ndarray:
    """Polarizing beam splitter: h crosses to the other path, v stays.

    Entering on path 0, the h component leaves on path 1 and the v component
    on path 0, which is the routing of the first loop.
    """
    p_h = np.diag([1, 0])
    p_v = np.diag([0, 1])
    return cmat(np.kron(SIGMA1, p_h) + np.kron(I2, p_v))


def npbs() -> np.ndarray:
    """Balanced non-polarizing splitter.

    Output port 0 (the D_v exit) receives ``(Z a0 - Z a1)/sqrt2`` with Z the
    reflection sign flip on v; output port 1 (towards the second loop)
    receives ``(a0 + a1)/sqrt2``.
    """
    r = 1 / math.sqrt(2)
    z = np.asarray(SIGMA3)
    m = np.block([[r * z, -r * z], [r * np.eye(2), r * np.eye(2)]])
    return cmat(m)


def phase_plate(phi: float) -> np.ndarray:
    """Multiply the path-1 branch by exp(i phi)."""
    return cmat(np.kron(np.diag([1, np.exp(1j * phi)]), np.eye(2)))


def mirror() -> np.ndarray:
    return I4


class ElementKind(enum.Enum):
    HWP = "hwp"
    PBS = "pbs"
    NPBS = "npbs"
    PHASE_PLATE = "phase_plate"
    MIRROR = "mirror"


def element(kind: ElementKind, param: float | None = None) -> np.ndarray:
    """4x4 matrix of an element acting on both paths (a HWP acts on each path)."""
    if kind is ElementKind.HWP:
        return tensor(I2, hwp(param))
    if kind is ElementKind.PBS:
        return pbs()
    if kind is ElementKind.NPBS:
        return npbs()
    if kind is ElementKind.PHASE_PLATE:
        return phase_plate(param)
    return mirror()


def first_loop(theta_a: float, theta_n: float, phi: float, plate: PlateFn = hwp) -> np.ndarray:
    """Propagate ``|0,h>`` through the first Sagnac loop.

    H1 at ``theta_a`` -> cBS as PBS -> H3 (0) on path 0, H2 at ``theta_n`` on
    path 1 -> phase plate -> cBS as NPBS. Path block 0 of the result is the
    state at D_v, block 1 the state sent to the second loop. ``plate`` exists
    so a wrong convention can be injected as a negative control.
    """
    state = tensor(PATH0, H)
    for op in (
        tensor(I2, plate(theta_a)),
        pbs(),
        block_diag(plate(0.0), plate(theta_n)),
        phase_plate(phi),
        mirror(),
        npbs(),
    ):
        state = op @ state
    return cvec(state)


# Detector ports of the second loop, as (path, polarization) basis indices.
D2_PORT = 0  # path l, h: inconclusive (UQSD) / guess path 0 (MED)
IDLE_PORT = 1  # path l, v: unreachable from the input subspace
D0_PORT = 2  # path r, h
D1_PORT = 3  # path r, v


def second_loop(theta4: float, theta5: float, theta6: float, theta7: float) -> np.ndarray:
    """Unitary of the polarization-analysis loop; input enters on path 0 (l).

    H4 -> PBS (h to path 1, v stays on path 0) -> H6 on path 0, H5 on path 1
    -> PBS again -> H7 on path 1 -> detection in the (path, pol) basis.
    """
    ops = (
        tensor(I2, analyzer_hwp(theta4)),
        pbs(),
        block_diag(analyzer_hwp(theta6), analyzer_hwp(theta5)),
        pbs(),
        block_diag(I2, analyzer_hwp(theta7)),
    )
    u = np.eye(4, dtype=complex)
    for op in ops:
        u = op @ u
    return cmat(u)
