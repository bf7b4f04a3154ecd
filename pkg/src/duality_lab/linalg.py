"""Small dense complex linear algebra for the 2- and 4-dimensional spaces used here.

Vectors and matrices are plain ``numpy`` complex128 arrays. The composite
path-polarization space is ordered

    index 0: (path 0, h)
    index 1: (path 0, v)
    index 2: (path 1, h)
    index 3: (path 1, v)

so that ``tensor(path_ket, pol_ket)`` lands on the right index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

POSITIVITY_TOL = 1e-10
COMPLETENESS_TOL = 1e-10

_ALLOWED_DIMS = (2, 4)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


def cvec(entries: Sequence[complex]) -> np.ndarray:
    """Build an immutable complex vector of dimension 2 or 4."""
    v = _frozen(entries)
    if v.ndim != 1 or v.shape[0] not in _ALLOWED_DIMS:
        raise ValueError(f"vector must have dimension 2 or 4, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def cmat(entries) -> np.ndarray:
    """Build an immutable square complex matrix of dimension 2 or 4."""
    m = _frozen(entries)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in _ALLOWED_DIMS:
        raise ValueError(f"matrix must be 2x2 or 4x4, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


# Single-mode kets and common operators.
H = cvec([1, 0])
V = cvec([0, 1])
PATH0 = cvec([1, 0])
PATH1 = cvec([0, 1])
I2 = cmat(np.eye(2))
I4 = cmat(np.eye(4))
SIGMA1 = cmat([[0, 1], [1, 0]])
SIGMA3 = cmat([[1, 0], [0, -1]])


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two 2-dim vectors or two 2x2 matrices.

    The first factor is the path, the second the polarization.

    >>> tensor(PATH0, H).real.tolist()
    [1.0, 0.0, 0.0, 0.0]
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim:
        raise ValueError("cannot mix a vector and a matrix in a tensor product")
    if a.shape != (2,) * a.ndim or b.shape != (2,) * b.ndim:
        raise ValueError(f"tensor expects 2-dim factors, got {a.shape} and {b.shape}")
    return _frozen(np.kron(a, b))


def _check_same(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    _check_same(a, b)
    return complex(np.vdot(a, b))


def norm_sq(a: np.ndarray) -> float:
    return float(np.real(np.vdot(a, a)))


def adjoint(m: np.ndarray) -> np.ndarray:
    return _frozen(np.conj(np.asarray(m)).T)


def projector(a: np.ndarray) -> np.ndarray:
    """|a><a| (not normalized: a sub-normalized ket gives a scaled projector)."""
    a = np.asarray(a)
    if a.ndim != 1:
        raise ValueError("projector needs a vector")
    return _frozen(np.outer(a, np.conj(a)))


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= tol)


def embed(path: int, pol_op: np.ndarray) -> np.ndarray:
    """Lift a polarization operator acting only on ``path`` into the 4-dim space."""
    p = np.zeros((2, 2), dtype=complex)
    p[path, path] = 1.0
    return tensor(p, pol_op)


def block_diag(op0: np.ndarray, op1: np.ndarray) -> np.ndarray:
    """Path-conditional operator: ``op0`` on path 0 and ``op1`` on path 1."""
    return _frozen(np.asarray(embed(0, op0)) + np.asarray(embed(1, op1)))


def path_block(state: np.ndarray, path: int) -> np.ndarray:
    """Polarization amplitudes carried by one path of a 4-dim state."""
    if np.shape(state) != (4,):
        raise ValueError("path_block needs a 4-dim state")
    return _frozen(np.asarray(state)[2 * path : 2 * path + 2])


@dataclass(frozen=True)
class PovmSet:
    """A generalized measurement: positive operators tagged by outcome meaning."""

    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.elements) == 0:
            raise ValueError("a POVM needs at least one element")
        if len(self.elements) != len(self.labels):
            raise ValueError("every POVM element needs a label")
        dims = {np.shape(e) for e in self.elements}
        if len(dims) != 1:
            raise ValueError(f"POVM elements have mixed shapes {dims}")
        object.__setattr__(self, "elements", tuple(cmat(e) for e in self.elements))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def element(self, label: str) -> np.ndarray:
        return self.elements[self.labels.index(label)]


@dataclass(frozen=True)
class PovmReport:
    min_eigenvalues: tuple[float, ...]
    completeness_residual: float
    hermiticity_residual: float
    valid: bool = field(default=False)


def validate_povm(povm: PovmSet) -> PovmReport:
    """Report positivity and completeness of a POVM without raising."""
    min_eigs = []
    herm = 0.0
    total = np.zeros((povm.dim, povm.dim), dtype=complex)
    for e in povm.elements:
        herm = max(herm, float(np.max(np.abs(e - e.conj().T))))
        hermitian_part = (e + e.conj().T) / 2
        min_eigs.append(float(np.linalg.eigvalsh(hermitian_part)[0]))
        total += e
    residual = float(np.max(np.abs(total - np.eye(povm.dim))))
    valid = (
        min(min_eigs) >= -POSITIVITY_TOL
        and residual <= COMPLETENESS_TOL
        and herm <= COMPLETENESS_TOL
    )
    return PovmReport(tuple(min_eigs), residual, herm, valid)
