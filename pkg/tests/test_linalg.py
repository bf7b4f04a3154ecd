import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from duality_lab.linalg import (
    H,
    I2,
    I4,
    PATH0,
    PATH1,
    SIGMA1,
    V,
    PovmSet,
    adjoint,
    cmat,
    cvec,
    inner,
    norm_sq,
    projector,
    tensor,
    validate_povm,
)
from duality_lab.interferometer import ExperimentConfig, evolve, wwd_states
from duality_lab.discrimination import uqsd_povm, uqsd_program

finite = st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False)
mat2 = arrays(np.float64, (2, 2, 2), elements=finite).map(lambda a: a[0] + 1j * a[1])
vec2 = arrays(np.float64, (2, 2), elements=finite).map(lambda a: a[0] + 1j * a[1])


def test_identity_tensor():
    assert np.array_equal(tensor(I2, I2), I4)


def test_basis_ordering():
    assert np.array_equal(tensor(PATH0, H), [1, 0, 0, 0])
    assert np.array_equal(tensor(PATH0, V), [0, 1, 0, 0])
    assert np.array_equal(tensor(PATH1, H), [0, 0, 1, 0])
    assert np.array_equal(tensor(PATH1, V), [0, 0, 0, 1])


def test_bit_flip_on_path():
    out = tensor(SIGMA1, I2) @ tensor(PATH0, H)
    assert np.array_equal(out, tensor(PATH1, H))


def test_dimension_errors():
    with pytest.raises(ValueError):
        tensor(I4, I2)
    with pytest.raises(ValueError):
        tensor(H, I2)
    with pytest.raises(ValueError):
        inner(H, tensor(PATH0, H))
    with pytest.raises(ValueError):
        cvec([1, 0, 0])
    with pytest.raises(ValueError):
        cmat(np.eye(3))


def test_values_are_immutable():
    with pytest.raises(ValueError):
        H[0] = 2


@settings(max_examples=50)
@given(mat2, mat2, mat2, mat2)
def test_mixed_product_property(a, b, c, d):
    lhs = tensor(a, b) @ tensor(c, d)
    rhs = tensor(a @ c, b @ d)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


@given(mat2, mat2, vec2, vec2)
def test_kron_action_on_product_vectors(a, b, x, y):
    lhs = tensor(a, b) @ tensor(x, y)
    rhs = tensor(a @ x, b @ y)
    assert np.allclose(lhs, rhs, atol=1e-12 * max(1.0, np.max(np.abs(rhs))))


@given(mat2, vec2, vec2)
def test_adjoint_and_inner_symmetry(m, a, b):
    assert np.array_equal(adjoint(adjoint(m)), m)
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-12)


def test_inner_products():
    assert inner(H, V) == 0
    _, d2, _ = wwd_states(np.arcsin(0.2) / 2)
    assert abs(inner(H, d2)) == pytest.approx(0.2, abs=1e-15)


@pytest.mark.parametrize("phi", np.linspace(0, 2 * np.pi, 9))
def test_output_states_conserve_norm(phi):
    out = evolve(ExperimentConfig.from_ratios(0.5, 0.7, phi=phi))
    assert norm_sq(out.psi_v) + norm_sq(out.psi_d) == pytest.approx(1, abs=1e-12)


def test_projector_is_outer_product():
    p = projector(cvec([1, 1j]) / np.sqrt(2))
    assert np.allclose(p @ p, p)
    assert np.allclose(p, adjoint(p))


def test_validate_hv_povm():
    report = validate_povm(PovmSet((projector(H), projector(V)), ("h", "v")))
    assert report.valid
    assert report.completeness_residual == 0
    assert min(report.min_eigenvalues) == pytest.approx(0, abs=1e-15)


def test_validate_identity_povm():
    report = validate_povm(PovmSet((I2,), ("all",)))
    assert report.valid and report.completeness_residual == 0


def test_validate_flags_bad_sets():
    incomplete = validate_povm(PovmSet((projector(H),), ("h",)))
    assert not incomplete.valid
    assert incomplete.completeness_residual == pytest.approx(1)
    negative = validate_povm(PovmSet((2 * projector(H), -projector(H) + projector(V)), ("a", "b")))
    assert not negative.valid
    assert min(negative.min_eigenvalues) == pytest.approx(-1)


def test_validate_uqsd_set():
    cfg = ExperimentConfig.from_ratios(0.38, 0.2)
    povm, _ = uqsd_povm(uqsd_program(cfg.theta_a, cfg.theta_n), cfg.theta_a, cfg.theta_n)
    report = validate_povm(povm)
    assert report.valid
    assert report.completeness_residual < 1e-10


def test_povm_rejects_mixed_shapes():
    with pytest.raises(ValueError):
        PovmSet((I2, I4), ("a", "b"))
    with pytest.raises(ValueError):
        PovmSet((), ())
