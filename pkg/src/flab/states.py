"""Haar-random product states and their Floquet-eigenspace decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .floquet import SpectralDecomposition
from .spin_model import DEFAULT_MAX_QUBITS, check_dimension

OVERLAP_CUTOFF = 1e-14


def derive_rng(seed: int, *counters: int) -> np.random.Generator:
    """Independent generator for sample ``counters`` under a master seed."""
    return np.random.default_rng([int(seed), *map(int, counters)])


def haar_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def sample_haar_product_state(N: int, rng=None, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Tensor product of N independent Haar-random single-qubit states."""
    check_dimension(N, max_qubits)
    rng = np.random.default_rng(rng)
    state = np.ones(1, dtype=complex)
    for _ in range(N):
        state = np.kron(state, haar_qubit(rng))
    return state / np.linalg.norm(state)


def basis_state(bits, N: int | None = None) -> np.ndarray:
    """Computational-basis product state, site 1 first: ``basis_state("010")``."""
    bits = [int(b) for b in bits]
    if N is not None and len(bits) != N:
        raise ValueError("one bit per site is required")
    index = int("".join(map(str, bits)), 2) if bits else 0
    state = np.zeros(2 ** len(bits), dtype=complex)
    state[index] = 1.0
    return state


@dataclass(eq=False)
class OverlapDecomposition:
    """Weights c_j = ||Pi_j psi|| and normalized components |j> = Pi_j psi / c_j.

    ``weights`` has one entry per eigenspace. Components are kept only for
    ``indices`` (eigenspaces with c_j above 1e-14), as the columns of
    ``components``.
    """

    weights: np.ndarray
    indices: np.ndarray
    components: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights**2

    def reconstruct(self) -> np.ndarray:
        return self.components @ self.weights[self.indices]


def _amplitudes(state, decomp):
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != decomp.dim:
        raise ValueError(f"state has shape {state.shape}, expected ({decomp.dim},)")
    return decomp.basis.conj().T @ state


def eigenspace_weights(states: np.ndarray, decomp: SpectralDecomposition) -> np.ndarray:
    """c_j for one state, or a (s, n) array of c_j for the columns of ``states``."""
    probs = np.abs(_amplitudes(states, decomp)) ** 2
    summed = np.zeros((decomp.n_clusters,) + probs.shape[1:])
    np.add.at(summed, decomp.labels, probs)
    return np.sqrt(summed)


def eigenspace_overlaps(state: np.ndarray, decomp: SpectralDecomposition) -> OverlapDecomposition:
    state = np.asarray(state, dtype=complex)
    if state.shape != (decomp.dim,):
        raise ValueError(f"state has shape {state.shape}, expected ({decomp.dim},)")
    amps = _amplitudes(state, decomp)
    weights = np.sqrt(np.bincount(decomp.labels, weights=np.abs(amps) ** 2, minlength=decomp.n_clusters))
    indices = np.flatnonzero(weights > OVERLAP_CUTOFF)
    components = np.empty((decomp.dim, len(indices)), dtype=complex)
    for col, j in enumerate(indices):
        mask = decomp.labels == j
        components[:, col] = decomp.basis[:, mask] @ amps[mask] / weights[j]
    return OverlapDecomposition(weights, indices, components)


def effective_dimension(overlaps: OverlapDecomposition) -> float:
    return float(1.0 / np.sum(overlaps.weights**4))


def diagonal_ensemble_expectation(overlaps: OverlapDecomposition, decomp: SpectralDecomposition, A: np.ndarray) -> float:
    """Infinite-time average of <A> when the eigenvalue ratios are non-degenerate.

    Each eigenspace contributes c_j^2 <j|A|j> = <psi|Pi_j A Pi_j|psi>.
    """
    A = np.asarray(A)
    if A.shape != (decomp.dim, decomp.dim):
        raise ValueError(f"observable has shape {A.shape}, expected {(decomp.dim, decomp.dim)}")
    C = overlaps.components
    diag = np.einsum("ij,ij->j", C.conj(), A @ C).real
    return float(np.sum(overlaps.weights[overlaps.indices] ** 2 * diag))


def projector_weight_sum(state: np.ndarray, decomp: SpectralDecomposition) -> float:
    """sum_j <phi|Pi_j|phi>^2, i.e. the inverse effective dimension."""
    return float(np.sum(eigenspace_weights(state, decomp) ** 4))
