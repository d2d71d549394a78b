"""Measurement simulation, state and process tomography, and the
Haar-averaged gate-fidelity estimator.

The characterization pipeline mirrors the experimental procedure: prepare
each of 16 informationally complete logical inputs, run the channel on
the physical register, measure every ion in all ``3^n`` Pauli bases
(``n = 4`` ions, 81 settings, a fixed number of shots each), reconstruct
the physical density matrix by linear inversion plus projection onto the
physical set, project into the encoded subspace (recording the
permanence), and finally fit the process matrix ``chi`` defined by

    E(rho) = sum_mn chi_mn A_m rho A_n+

over the fixed logical Pauli basis ``A = {I,X,Y,Z} (x) {I,X,Y,Z}``.

Mean gate fidelity is the Haar average of
``<psi| U+ E(|psi><psi|) U |psi>`` over pure logical inputs, sampled with
normalized complex Gaussian vectors (exactly Haar for states); the
QR-based Haar unitary construction is included as a cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import linalg
from .encoding import LogicalRegister, decode_in_dfs
from .errors import (ConditioningError, CoverageError, DimensionError,
                     ValidationError)

BASIS_LETTERS = "XYZ"

_HAD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2)
_SDG = np.diag([1.0, -1.0j]).astype(complex)

#: Single-ion rotation bringing the named Pauli eigenbasis onto the
#: measured z basis: U sigma U+ = sigma_z, outcome bit 0 <-> eigenvalue +1.
MEASUREMENT_ROTATIONS = {
    "X": _HAD,
    "Y": _HAD @ _SDG,
    "Z": linalg.ID2,
}


def all_settings(n_ions: int) -> list:
    """The complete set of ``3^n`` per-ion basis labels, lexicographic."""
    return ["".join(c) for c in itertools.product(BASIS_LETTERS, repeat=n_ions)]


def _setting_rotation(setting: str) -> np.ndarray:
    try:
        mats = [MEASUREMENT_ROTATIONS[c] for c in setting]
    except KeyError as exc:
        raise ValidationError(f"invalid basis letter {exc} in setting") from exc
    return linalg.tensor(*mats)


def measurement_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Outcome distribution over bitstrings for one measurement setting."""
    dim = 2 ** len(setting)
    if rho.shape != (dim, dim):
        raise DimensionError(
            f"state dim {rho.shape} does not match setting {setting!r}")
    u = _setting_rotation(setting)
    probs = np.real(np.einsum("ij,jk,ik->i", u, rho, u.conj()))
    if probs.min() < -1e-9:
        raise ValidationError(
            f"negative outcome probability {probs.min():.3e} below -1e-9")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def simulate_measurement(rho: np.ndarray, setting: str, shots: int,
                         seed) -> dict:
    """Multinomial shot histogram for one setting, bitstring to count.

    Deterministic for a given seed; only outcomes with nonzero counts
    appear in the histogram.
    """
    if shots < 1:
        raise ValidationError("shots must be at least 1")
    probs = measurement_probabilities(rho, setting)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    n = len(setting)
    return {format(b, f"0{n}b"): int(c) for b, c in enumerate(counts) if c > 0}


@dataclass
class TomographyDataset:
    """Measurement settings with their shot histograms.

    ``shots_per_setting`` of ``None`` marks exact statistics; the
    histograms then hold outcome probabilities instead of counts.
    """

    settings: list
    counts: list
    shots_per_setting: Optional[int]

    def __post_init__(self):
        if len(self.settings) != len(self.counts):
            raise ValidationError("one histogram required per setting")
        target = 1.0 if self.shots_per_setting is None else float(self.shots_per_setting)
        for s, hist in zip(self.settings, self.counts):
            total = sum(hist.values())
            if abs(total - target) > 1e-9 * max(1.0, target):
                raise ValidationError(
                    f"histogram for {s} sums to {total}, expected {target}")

    @property
    def n_ions(self) -> int:
        return len(self.settings[0])

    def frequencies(self) -> np.ndarray:
        """Outcome frequency matrix, shape (n_settings, 2^n)."""
        n = self.n_ions
        freq = np.zeros((len(self.settings), 2 ** n))
        norm = 1.0 if self.shots_per_setting is None else float(self.shots_per_setting)
        for row, hist in enumerate(self.counts):
            for bits, c in hist.items():
                freq[row, int(bits, 2)] = c / norm
        return freq

    def to_json(self) -> dict:
        return {"settings": list(self.settings),
                "counts": [dict(sorted(h.items())) for h in self.counts],
                "shots_per_setting": self.shots_per_setting}

    @classmethod
    def from_json(cls, obj: dict) -> "TomographyDataset":
        shots = obj["shots_per_setting"]
        return cls(settings=list(obj["settings"]),
                   counts=[dict(h) for h in obj["counts"]],
                   shots_per_setting=None if shots is None else int(shots))


def acquire_dataset(rho: np.ndarray, shots: Optional[int], seed=None,
                    settings: Optional[Sequence[str]] = None) -> TomographyDataset:
    """Measure a state in every setting; ``shots=None`` records the exact
    outcome distributions instead of sampling."""
    n = rho.shape[0].bit_length() - 1
    settings = list(settings) if settings is not None else all_settings(n)
    counts = []
    for i, s in enumerate(settings):
        if shots is None:
            probs = measurement_probabilities(rho, s)
            counts.append({format(b, f"0{n}b"): float(p)
                           for b, p in enumerate(probs) if p > 0})
        else:
            counts.append(simulate_measurement(rho, s, shots, (seed, i)))
    return TomographyDataset(settings=settings, counts=counts,
                             shots_per_setting=shots)


def _parity_signs(n: int, support_mask: int) -> np.ndarray:
    b = np.arange(2 ** n)
    masked = b & support_mask
    parity = np.zeros(2 ** n, dtype=int)
    m = masked
    while np.any(m):
        parity ^= m & 1
        m >>= 1
    return 1.0 - 2.0 * parity


def linear_inversion(dataset: TomographyDataset) -> np.ndarray:
    """Raw density matrix from Pauli expectation values.

    Every Pauli string expectation is averaged over all settings whose
    basis letters match on the string's support; with exact frequencies
    the result equals the true state.  Requires the complete ``3^n``
    setting set.
    """
    n = dataset.n_ions
    if sorted(dataset.settings) != all_settings(n):
        raise CoverageError(
            f"linear inversion needs the complete {3 ** n}-setting set")
    freq = dataset.frequencies()
    settings = dataset.settings
    dim = 2 ** n
    rho = np.zeros((dim, dim), dtype=complex)
    for letters in itertools.product("IXYZ", repeat=n):
        support = [(i, c) for i, c in enumerate(letters) if c != "I"]
        if not support:
            rho += np.eye(dim, dtype=complex)
            continue
        mask = 0
        for i, _ in support:
            mask |= 1 << (n - 1 - i)
        signs = _parity_signs(n, mask)
        matching = [r for r, s in enumerate(settings)
                    if all(s[i] == c for i, c in support)]
        expval = float(np.mean(freq[matching] @ signs))
        rho += expval * linalg.pauli_string("".join(letters))
    return rho / dim


def project_to_physical(rho: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite trace-one matrix.

    Eigenvalue water-filling: drop the most negative eigenvalues and
    redistribute their weight over the rest, keeping the trace at one.
    """
    rho = (rho + linalg.dag(rho)) / 2.0
    rho = rho / np.real(np.trace(rho))
    evals, evecs = np.linalg.eigh(rho)
    if evals.min() >= 0:
        return rho
    d = evals.shape[0]
    out = np.zeros(d)
    acc = 0.0
    # eigenvalues ascending; shift from the bottom into the remaining ones
    i = 0
    while i < d and evals[i] + acc / (d - i) < 0:
        acc += evals[i]
        i += 1
    out[i:] = evals[i:] + acc / (d - i)
    return (evecs[:, i:] * out[i:]) @ linalg.dag(evecs[:, i:])


def mle_refine(rho0: np.ndarray, dataset: TomographyDataset,
               max_iter: int = 200, tol: float = 1e-10) -> np.ndarray:
    """Iterative maximum-likelihood refinement (R rho R fixed point)."""
    n = dataset.n_ions
    dim = 2 ** n
    rotations = [_setting_rotation(s) for s in dataset.settings]
    freq = dataset.frequencies()
    rho = rho0.copy()
    for _ in range(max_iter):
        r = np.zeros((dim, dim), dtype=complex)
        for u, f in zip(rotations, freq):
            probs = np.real(np.einsum("ij,jk,ik->i", u, rho, u.conj()))
            probs = np.clip(probs, 1e-12, None)
            r += linalg.dag(u) @ ((f / probs)[:, None] * u)
        new = r @ rho @ r
        new = (new + linalg.dag(new)) / 2.0
        new /= np.real(np.trace(new))
        if np.max(np.abs(new - rho)) < tol:
            return new
        rho = new
    return rho


def reconstruct_state(dataset: TomographyDataset, mle: bool = False) -> np.ndarray:
    """Physical density matrix estimate from a complete dataset.

    Linear inversion followed by projection onto the physical set; pass
    ``mle=True`` for an additional maximum-likelihood refinement.
    """
    rho = project_to_physical(linear_inversion(dataset))
    if mle:
        rho = mle_refine(rho, dataset)
    return rho


# ---------------------------------------------------------------------------
# Haar sampling

def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-random pure state (normalized complex Gaussian vector)."""
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def haar_states(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of Haar-random pure states, shape (n, dim)."""
    z = rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix.

    The R diagonal is rephased to unit modulus, which removes the QR
    gauge ambiguity and makes the distribution exactly Haar.
    """
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# Process matrix

def chi_basis_labels(n_logical: int = 2) -> list:
    return ["".join(c) for c in itertools.product("IXYZ", repeat=n_logical)]


def chi_basis(n_logical: int = 2) -> np.ndarray:
    """Operator basis of the chi representation, shape (4^n, 2^n, 2^n)."""
    return np.stack([linalg.pauli_string(lbl)
                     for lbl in chi_basis_labels(n_logical)])


@dataclass
class ChiMatrix:
    """Process matrix over the ordered logical Pauli basis."""

    entries: np.ndarray
    basis_labels: list = field(default_factory=chi_basis_labels)

    def __post_init__(self):
        d2 = len(self.basis_labels)
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (d2, d2):
            raise DimensionError(
                f"chi must be {d2}x{d2} for basis of size {d2}")

    @property
    def n_logical(self) -> int:
        return len(self.basis_labels[0])

    def superoperator(self) -> np.ndarray:
        """Row-major superoperator: ``E(rho) = (S @ rho.ravel()).reshape(d, d)``."""
        ops = chi_basis(self.n_logical)
        d = ops.shape[1]
        s = np.zeros((d * d, d * d), dtype=complex)
        for m in range(len(ops)):
            for n in range(len(ops)):
                if self.entries[m, n] != 0:
                    s += self.entries[m, n] * np.kron(ops[m], ops[n].conj())
        return s

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = 2 ** self.n_logical
        return (self.superoperator() @ rho.reshape(-1)).reshape(d, d)

    def trace_preservation_residual(self) -> float:
        """Largest deviation of ``sum_mn chi_mn A_n+ A_m`` from the identity."""
        ops = chi_basis(self.n_logical)
        d = ops.shape[1]
        acc = np.zeros((d, d), dtype=complex)
        for m in range(len(ops)):
            for n in range(len(ops)):
                acc += self.entries[m, n] * linalg.dag(ops[n]) @ ops[m]
        return float(np.max(np.abs(acc - np.eye(d))))

    def to_json(self) -> dict:
        return {"basis": list(self.basis_labels),
                "entries": matrix_to_json(self.entries)}

    @classmethod
    def from_json(cls, obj: dict) -> "ChiMatrix":
        return cls(entries=matrix_from_json(obj["entries"]),
                   basis_labels=list(obj["basis"]))


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested list of [re, im] pairs."""
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def chi_from_unitary(u: np.ndarray) -> ChiMatrix:
    """Rank-one chi matrix of a unitary channel (outer product of its
    Pauli expansion coefficients)."""
    n = u.shape[0].bit_length() - 1
    ops = chi_basis(n)
    d = u.shape[0]
    coeff = np.array([np.trace(linalg.dag(op) @ u) / d for op in ops])
    return ChiMatrix(np.outer(coeff, coeff.conj()), chi_basis_labels(n))


def project_chi_cp(chi: np.ndarray) -> np.ndarray:
    """Nearest completely positive chi: Hermitian part, eigenvalue clip,
    trace renormalized to one (trace preservation in trace)."""
    chi = (chi + linalg.dag(chi)) / 2.0
    evals, evecs = np.linalg.eigh(chi)
    evals = np.clip(evals, 0.0, None)
    if evals.sum() <= 0:
        raise ConditioningError("chi projection collapsed to zero")
    evals = evals / evals.sum()
    return (evecs * evals) @ linalg.dag(evecs)


def process_fidelity(chi: ChiMatrix, chi_ideal: ChiMatrix) -> float:
    """Overlap ``tr(chi_ideal chi)`` of two trace-normalized chi matrices."""
    return float(np.real(np.trace(chi_ideal.entries @ chi.entries)))


def preparation_states(n_logical: int = 2) -> list:
    """The informationally complete input set, per qubit
    ``|0>, |1>, |+>, |+i>``, as (label, state vector) pairs."""
    single = [
        ("0", np.array([1.0, 0.0], dtype=complex)),
        ("1", np.array([0.0, 1.0], dtype=complex)),
        ("+", np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)),
        ("+i", np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2)),
    ]
    out = []
    for combo in itertools.product(single, repeat=n_logical):
        label = ",".join(c[0] for c in combo)
        vec = combo[0][1]
        for _, v in combo[1:]:
            vec = np.kron(vec, v)
        out.append((label, vec))
    return out


def chi_linear_solve(inputs: Sequence[np.ndarray],
                     outputs: Sequence[np.ndarray],
                     n_logical: int = 2) -> np.ndarray:
    """Least-squares chi from (input, output) density-matrix pairs."""
    ops = chi_basis(n_logical)
    n_ops = len(ops)
    d = ops.shape[1]
    rows = []
    for rho in inputs:
        cols = np.empty((n_ops * n_ops, d * d), dtype=complex)
        for m in range(n_ops):
            left = ops[m] @ rho
            for n in range(n_ops):
                cols[m * n_ops + n] = (left @ linalg.dag(ops[n])).reshape(-1)
        rows.append(cols.T)
    mat = np.vstack(rows)
    b = np.concatenate([np.asarray(o, dtype=complex).reshape(-1) for o in outputs])
    sol, _, rank, _ = np.linalg.lstsq(mat, b, rcond=None)
    if rank < n_ops * n_ops:
        raise ConditioningError(
            f"chi reconstruction system is rank deficient ({rank}/{n_ops * n_ops})")
    return sol.reshape(n_ops, n_ops)


@dataclass
class ProcessCharacterization:
    """Everything the tomography pipeline measures about one channel."""

    chi: ChiMatrix
    input_labels: list
    input_states: np.ndarray
    logical_outputs: np.ndarray
    permanences: Optional[np.ndarray] = None

    def permanence_functional(self) -> np.ndarray:
        """Hermitian ``W`` with ``perm(rho) = tr(W rho)`` fitted from the
        measured per-input permanences (permanence is linear in the input)."""
        if self.permanences is None:
            raise ValidationError("no permanence data recorded")
        rows = np.stack([np.asarray(np.outer(v, v.conj())).T.reshape(-1)
                         for v in self.input_states])
        sol, _, rank, _ = np.linalg.lstsq(rows, self.permanences, rcond=None)
        if rank < rows.shape[1]:
            raise ConditioningError("permanence functional is underdetermined")
        d = self.input_states.shape[1]
        w = sol.reshape(d, d)
        return (w + linalg.dag(w)) / 2.0


def process_tomography(channel: Callable[[np.ndarray], np.ndarray],
                       shots: Optional[int] = None, seed=None,
                       register: Optional[LogicalRegister] = None,
                       mle: bool = False) -> ProcessCharacterization:
    """Reconstruct the chi matrix of a black-box channel on the logical space.

    ``channel`` maps a logical density matrix to either a logical density
    matrix (used directly) or a physical one (dimension ``4^n``), in
    which case the output is put through measurement simulation at
    ``shots`` per setting (exact statistics when ``shots`` is ``None``),
    state reconstruction, and projection into the encoded subspace with
    the permanence recorded per input.
    """
    register = register or LogicalRegister(2)
    n_logical = register.n_logical
    dim_l = 2 ** n_logical
    labels, vecs = zip(*preparation_states(n_logical))
    inputs = [np.outer(v, v.conj()) for v in vecs]
    outputs = []
    permanences = []
    for k, rho_in in enumerate(inputs):
        out = channel(rho_in)
        if out.shape == (dim_l, dim_l):
            outputs.append(out)
            continue
        if out.shape != (register.dim, register.dim):
            raise DimensionError(
                f"channel returned shape {out.shape}; expected logical "
                f"({dim_l}) or physical ({register.dim}) dimension")
        if shots is not None:
            data = acquire_dataset(out, shots, seed=(seed, k))
            out = reconstruct_state(data, mle=mle)
        rho_l, perm = decode_in_dfs(out, register)
        outputs.append(rho_l)
        permanences.append(perm)
    chi_raw = chi_linear_solve(inputs, outputs, n_logical)
    chi = ChiMatrix(project_chi_cp(chi_raw), chi_basis_labels(n_logical))
    return ProcessCharacterization(
        chi=chi, input_labels=list(labels), input_states=np.stack(vecs),
        logical_outputs=np.stack(outputs),
        permanences=np.array(permanences) if permanences else None)


# ---------------------------------------------------------------------------
# Haar-averaged figures of merit

def _channel_superoperator(channel, dim: int) -> np.ndarray:
    """Row-major superoperator of a linear channel probed on matrix units."""
    s = np.empty((dim * dim, dim * dim), dtype=complex)
    for j in range(dim):
        for k in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[j, k] = 1.0
            s[:, j * dim + k] = channel(e).reshape(-1)
    return s


def mean_gate_fidelity(channel: Union[ChiMatrix, Callable, np.ndarray],
                       ideal: np.ndarray, n_samples: int = 200_000,
                       seed=None) -> tuple:
    """Haar-averaged fidelity of a channel against an ideal unitary.

    ``channel`` may be a :class:`ChiMatrix`, a row-major superoperator,
    or a linear callable on density matrices (probed on a matrix-unit
    basis once, then evaluated in vectorized form).  Returns
    ``(mean, standard error)`` over ``n_samples`` Haar states.
    """
    if n_samples < 1000:
        raise ValidationError("need at least 1000 Haar samples")
    d = ideal.shape[0]
    if isinstance(channel, ChiMatrix):
        sop = channel.superoperator()
    elif callable(channel):
        sop = _channel_superoperator(channel, d)
    else:
        sop = np.asarray(channel, dtype=complex)
        if sop.shape != (d * d, d * d):
            raise DimensionError("superoperator has wrong shape")
    rng = np.random.default_rng(seed)
    psi = haar_states(d, n_samples, rng)
    f = _batched_fidelities(sop, ideal, psi)
    mean = float(np.mean(f))
    stderr = float(np.std(f, ddof=1) / np.sqrt(n_samples))
    return mean, stderr


def _batched_fidelities(sop: np.ndarray, ideal: np.ndarray,
                        psi: np.ndarray) -> np.ndarray:
    """``<U psi| E(|psi><psi|) |U psi>`` for a batch of pure states."""
    phi = psi @ ideal.T
    rho_vec = (psi[:, :, None] * psi.conj()[:, None, :]).reshape(psi.shape[0], -1)
    out_vec = rho_vec @ sop.T
    proj_vec = (phi.conj()[:, :, None] * phi[:, None, :]).reshape(psi.shape[0], -1)
    return np.real(np.einsum("ne,ne->n", out_vec, proj_vec))


def haar_report(chi: ChiMatrix, ideal: np.ndarray,
                permanence_w: Optional[np.ndarray] = None,
                n_samples: int = 200_000, seed=None) -> dict:
    """Mean gate fidelity, mean permanence and their product over Haar inputs.

    The permanence of an arbitrary input is evaluated through the fitted
    linear functional ``W``; the overall figure is the per-state product
    ``perm(psi) * F(psi)``, whose mean is compared against the product
    of the separate means by the caller.
    """
    if n_samples < 1000:
        raise ValidationError("need at least 1000 Haar samples")
    d = ideal.shape[0]
    rng = np.random.default_rng(seed)
    psi = haar_states(d, n_samples, rng)
    f = _batched_fidelities(chi.superoperator(), ideal, psi)
    rt = np.sqrt(float(n_samples))
    report = {
        "mean_gate_fidelity": float(np.mean(f)),
        "mean_gate_fidelity_stderr": float(np.std(f, ddof=1) / rt),
    }
    if permanence_w is not None:
        perm = np.real(np.einsum("ni,ij,nj->n", psi.conj(), permanence_w, psi))
        overall = perm * f
        report.update({
            "mean_permanence": float(np.mean(perm)),
            "mean_permanence_stderr": float(np.std(perm, ddof=1) / rt),
            "mean_overall": float(np.mean(overall)),
            "mean_overall_stderr": float(np.std(overall, ddof=1) / rt),
        })
    return report


def dfs_report(rho_physical: np.ndarray, ideal_logical: np.ndarray,
               register: Optional[LogicalRegister] = None) -> tuple:
    """Permanence, fidelity within the subspace, and their product.

    The in-subspace fidelity is evaluated against ``ideal_logical`` after
    projection and renormalization; the overall figure ``permanence *
    fidelity`` equals the plain physical-space fidelity against the
    encoded ideal state.
    """
    register = register or LogicalRegister(2)
    rho_l, perm = decode_in_dfs(rho_physical, register)
    fid = linalg.fidelity(rho_l, ideal_logical)
    return perm, fid, perm * fid
