"""Dense complex linear algebra and quantum-state primitives.

States are plain 1-D complex ``numpy`` arrays, operators are 2-D complex
arrays.  Subsystem ordering follows the ion-string convention used
throughout the package: the first subsystem is the most significant
tensor factor, so ``tensor(ket1, ket0)`` is the basis state ``|10>``
(index 2 of a 4-dimensional space).

All functions are pure; nothing here keeps mutable state.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError

#: Default cap on the dimension produced by :func:`tensor`.
MAX_TENSOR_DIM = 2 ** 12

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULIS = {"I": ID2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)


def _dim(a: np.ndarray) -> int:
    return a.shape[0]


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def tensor(*factors: np.ndarray, max_dim: int = MAX_TENSOR_DIM) -> np.ndarray:
    """Kronecker product of states or operators, first factor most significant.

    Raises :class:`DimensionError` if the resulting dimension would exceed
    ``max_dim`` (default 4096).
    """
    if not factors:
        raise DimensionError("tensor() needs at least one factor")
    dim = 1
    for f in factors:
        if f.shape[0] <= 0:
            raise DimensionError("tensor factors must have positive dimension")
        dim *= f.shape[0]
    if dim > max_dim:
        raise DimensionError(
            f"tensor product dimension {dim} exceeds cap {max_dim}")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def pauli_string(letters: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. ``pauli_string("XZ")``."""
    try:
        mats = [PAULIS[c] for c in letters]
    except KeyError as exc:
        raise ValidationError(f"unknown Pauli letter {exc}") from exc
    return tensor(*mats)


def basis_state(index: int, dim: int) -> np.ndarray:
    """Computational basis vector ``|index>`` in a ``dim``-dimensional space."""
    if not 0 <= index < dim:
        raise DimensionError(f"basis index {index} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def is_hermitian(m: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(m - dag(m))) <= atol)


def expm_hermitian(h: np.ndarray, t: float = 1.0, atol: float = 1e-10) -> np.ndarray:
    """Unitary ``exp(-i t H)`` of a Hermitian ``H`` via eigendecomposition.

    Raises :class:`ValidationError` if ``H`` is not Hermitian within ``atol``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError("expm_hermitian expects a square matrix")
    if not is_hermitian(h, atol):
        raise ValidationError("matrix is not Hermitian within tolerance")
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * t * evals)) @ dag(evecs)


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """Pure-state fidelity ``<psi| rho |psi>`` of a density matrix.

    The result is clamped to be real; an imaginary part above 1e-12
    (relative) indicates a non-Hermitian ``rho`` and raises.
    """
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.shape[0], psi.shape[0]):
        raise DimensionError(
            f"dimension mismatch: rho {rho.shape}, psi {psi.shape}")
    val = np.vdot(psi, rho @ psi)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ValidationError(f"fidelity has imaginary part {val.imag:.3e}")
    return float(val.real)


def state_fidelity(phi: np.ndarray, psi: np.ndarray) -> float:
    """Squared overlap ``|<phi|psi>|^2`` of two pure states."""
    if phi.shape != psi.shape:
        raise DimensionError("state dimensions differ")
    return float(abs(np.vdot(phi, psi)) ** 2)


def partial_trace(rho: np.ndarray, keep: Iterable[int],
                  dims: Sequence[int]) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``.

    Parameters
    ----------
    rho : complex matrix of dimension ``prod(dims)``
    keep : indices of the subsystems to retain; the result orders them
        as they appear in the original system (ascending index)
    dims : dimension of each subsystem, most significant first

    Returns the reduced density matrix; Hermiticity and trace are
    preserved exactly by the contraction.
    """
    dims = list(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} invalid for {n} subsystems")
    d = int(np.prod(dims))
    if rho.shape != (d, d):
        raise DimensionError(
            f"rho has shape {rho.shape}, expected ({d}, {d}) from dims {dims}")
    reshaped = rho.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    for i in reversed(drop):
        reshaped = np.trace(reshaped, axis1=i, axis2=i + reshaped.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reshaped.reshape(d_keep, d_keep)


def check_state_vector(psi: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Validate normalization of a state vector; returns it unchanged."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError("state vector must be 1-D")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValidationError(f"state norm {norm} deviates from 1 by more than {atol}")
    return psi


def check_density_matrix(rho: np.ndarray, herm_atol: float = 1e-10,
                         trace_atol: float = 1e-10,
                         eig_floor: float = -1e-9) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError("density matrix must be square")
    if not is_hermitian(rho, herm_atol):
        raise ValidationError("density matrix is not Hermitian within tolerance")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_atol:
        raise ValidationError(f"trace {tr} deviates from 1")
    evals = np.linalg.eigvalsh((rho + dag(rho)) / 2)
    if evals.min() < eig_floor:
        raise ValidationError(f"negative eigenvalue {evals.min():.3e}")
    return rho


def check_unitary(u: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Validate ``U+ U = 1``; returns ``u`` unchanged."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError("unitary must be square")
    err = np.max(np.abs(dag(u) @ u - np.eye(u.shape[0])))
    if err > atol:
        raise ValidationError(f"unitarity violation {err:.3e} exceeds {atol}")
    return u


def projector(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Orthogonal projector onto the span of the given orthonormal vectors."""
    cols = np.stack([np.asarray(v, dtype=complex) for v in vectors], axis=1)
    return cols @ dag(cols)


def canonicalize_phase(m: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Fix the global phase so the first entry of magnitude above ``tol``
    (row-major scan) is real and positive."""
    flat = np.asarray(m, dtype=complex).ravel()
    for x in flat:
        if abs(x) > tol:
            return m * (abs(x) / x)
    return np.array(m, copy=True)


def phase_aligned(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``b`` multiplied by the phase that best aligns it with ``a``
    (least-squares optimal, phase of ``tr(b+ a)``)."""
    tr = np.trace(dag(b) @ a) if a.ndim == 2 else np.vdot(b, a)
    if abs(tr) < 1e-14:
        return np.array(b, copy=True)
    return b * (tr / abs(tr))


def max_phase_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entrywise deviation between ``a`` and ``b`` modulo a global phase."""
    return float(np.max(np.abs(a - phase_aligned(a, b))))


def unitary_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half trace-norm distance ``0.5 ||a - b||_1`` after optimal global
    phase alignment, a gate-level analogue of the state trace distance."""
    diff = a - phase_aligned(a, b)
    return float(0.5 * np.sum(np.linalg.svd(diff, compute_uv=False)))
