import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from duality_lab import optics
from duality_lab.interferometer import ExperimentConfig, evolve, evolve_pipeline
from duality_lab.linalg import H, I2, PATH0, PATH1, V, is_unitary, path_block, tensor

angles = st.floats(min_value=-10, max_value=10, allow_nan=False)


def test_hwp_pinned_convention():
    assert np.allclose(optics.hwp(math.pi / 4) @ H, H)
    assert np.allclose(optics.hwp(0.0) @ H, -V)


def test_hwp_at_overlap_point_nine():
    theta_n = math.asin(0.9) / 2
    out = optics.hwp(theta_n) @ H
    # cos(2 theta_n) = sqrt(1 - 0.81)
    assert out == pytest.approx([0.9, -math.sqrt(0.19)], abs=1e-15)
    assert abs(out[1]) == pytest.approx(0.43589, abs=1e-5)
    assert np.linalg.norm(out) == pytest.approx(1)


@given(angles)
def test_hwp_unitary_hermitian_involution(theta):
    m = optics.hwp(theta)
    assert is_unitary(m)
    assert np.allclose(m, m.conj().T, atol=1e-15)
    assert np.allclose(m @ m, np.eye(2), atol=1e-12)


@given(angles)
def test_analyzer_plate_is_offset_label(theta):
    assert np.allclose(optics.analyzer_hwp(theta), optics.hwp(theta + math.pi / 4), atol=1e-12)


@given(angles)
def test_normalize_angle_range_and_period(theta):
    t = optics.normalize_angle(theta)
    assert -math.pi / 2 < t <= math.pi / 2
    assert np.allclose(optics.hwp(t), optics.hwp(theta), atol=1e-9)


@pytest.mark.parametrize(
    "m",
    [optics.pbs(), optics.npbs(), optics.phase_plate(1.1), optics.mirror()],
    ids=["pbs", "npbs", "phase", "mirror"],
)
def test_four_port_elements_unitary(m):
    assert is_unitary(m)


def test_pbs_routing():
    assert np.array_equal(optics.pbs() @ tensor(PATH0, H), tensor(PATH1, H))
    assert np.array_equal(optics.pbs() @ tensor(PATH0, V), tensor(PATH0, V))


def test_npbs_twice_returns_basis_state():
    out = optics.npbs() @ optics.npbs() @ tensor(PATH0, H)
    # up to the pinned phase: |0,h> -> |1,h>
    assert np.allclose(np.abs(out), np.abs(tensor(PATH1, H)))


def test_npbs_balanced():
    for basis in np.eye(4):
        out = optics.npbs() @ basis
        assert np.linalg.norm(out[:2]) ** 2 == pytest.approx(0.5)


def test_phase_plate_pi():
    assert np.allclose(optics.phase_plate(math.pi) @ tensor(PATH1, H), -tensor(PATH1, H))
    assert np.allclose(optics.phase_plate(math.pi) @ tensor(PATH0, H), tensor(PATH0, H))


def test_element_lookup():
    assert np.allclose(optics.element(optics.ElementKind.HWP, 0.3), tensor(I2, optics.hwp(0.3)))
    assert np.array_equal(optics.element(optics.ElementKind.PBS), optics.pbs())


@pytest.mark.parametrize("tan2a", [0.0, 0.38, 0.7, 1.0])
def test_h1_then_pbs_split(tan2a):
    theta_a = math.atan(tan2a) / 2
    state = optics.pbs() @ tensor(I2, optics.hwp(theta_a)) @ tensor(PATH0, H)
    p1 = np.linalg.norm(path_block(state, 0)) ** 2
    p2 = np.linalg.norm(path_block(state, 1)) ** 2
    assert p1 == pytest.approx(math.cos(2 * theta_a) ** 2, abs=1e-15)
    assert p2 == pytest.approx(math.sin(2 * theta_a) ** 2, abs=1e-15)
    # path 0 carries v, path 1 carries h
    assert abs(state[0]) < 1e-15 and abs(state[3]) < 1e-15


GRID = list(
    itertools.product(
        np.linspace(0, math.pi / 8, 6), np.linspace(0, math.pi / 4, 6), np.linspace(0, 2 * math.pi, 5)
    )
)


@pytest.mark.parametrize("theta_a,theta_n,phi", GRID)
def test_first_loop_reproduces_output_states(theta_a, theta_n, phi):
    cfg = ExperimentConfig(theta_a, theta_n, phi)
    a, b = evolve(cfg), evolve_pipeline(cfg)
    assert np.max(np.abs(a.psi_v - b.psi_v)) <= 1e-12
    assert np.max(np.abs(a.psi_d - b.psi_d)) <= 1e-12


def test_wrong_plate_convention_breaks_reproduction():
    cfg = ExperimentConfig.from_ratios(0.5, 0.5, phi=0.3)
    b = evolve_pipeline(cfg, plate=optics.analyzer_hwp)
    assert np.max(np.abs(evolve(cfg).psi_d - b.psi_d)) > 1e-3


def test_second_loop_unitary():
    assert is_unitary(optics.second_loop(0.1, 0.2, math.pi / 4, 0.3))
