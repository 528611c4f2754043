"""Stroboscopic and intra-period evolution, observables and reduced states."""

from __future__ import annotations

import math

import numpy as np

from .floquet import SpectralDecomposition, apply_propagator_to
from .spin_model import DriveSchedule
from .states import OverlapDecomposition, eigenspace_overlaps

EIG_CLAMP = 1e-10


def stroboscopic_states(overlaps: OverlapDecomposition, decomp: SpectralDecomposition, ms) -> np.ndarray:
    """Columns psi(m) = sum_j c_j lambda_j^m |j> for every m in ``ms``."""
    ms = np.asarray(ms, dtype=float)
    E = decomp.quasienergies[overlaps.indices]
    coeffs = overlaps.weights[overlaps.indices][:, None] * np.exp(-1j * np.outer(E, ms))
    return overlaps.components @ coeffs


def stroboscopic_state(overlaps: OverlapDecomposition, decomp: SpectralDecomposition, m: int) -> np.ndarray:
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return stroboscopic_states(overlaps, decomp, [m])[:, 0]


def state_at(state0: np.ndarray, schedule: DriveSchedule, decomp: SpectralDecomposition, t: float) -> np.ndarray:
    """|psi(t)> = U(0, t - floor t) |psi(floor t)>."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    m = int(math.floor(t))
    psi_m = stroboscopic_state(eigenspace_overlaps(state0, decomp), decomp, m)
    return apply_propagator_to(schedule, t - m, psi_m)


def expectations(A: np.ndarray, states: np.ndarray) -> np.ndarray:
    """<psi|A|psi> for each column of ``states``."""
    return np.einsum("ij,ij->j", states.conj(), A @ states).real


def observable_expectation(A: np.ndarray, state: np.ndarray) -> float:
    state = np.asarray(state)
    if A.shape != (state.shape[0], state.shape[0]):
        raise ValueError(f"observable {A.shape} does not match state of length {state.shape[0]}")
    return float(np.vdot(state, A @ state).real)


def _subsystem_axes(subsystem, N: int) -> list[int]:
    sites = sorted(set(int(s) for s in subsystem))
    if not sites:
        raise ValueError("subsystem must not be empty")
    if sites[0] < 1 or sites[-1] > N:
        raise ValueError(f"subsystem sites must lie in 1..{N}, got {sites}")
    return [s - 1 for s in sites]


def reduced_density_matrices(states: np.ndarray, subsystem, N: int) -> np.ndarray:
    """Reduced states of the columns of ``states``, shape (n, d_S, d_S).

    Kept sites stay in chain order, so site min(S) is the most significant
    bit of the reduced index.
    """
    keep = _subsystem_axes(subsystem, N)
    rest = [a for a in range(N) if a not in keep]
    n = states.shape[1]
    psi = states.reshape([2] * N + [n])
    psi = psi.transpose([N] + keep + rest).reshape(n, 2 ** len(keep), 2 ** len(rest))
    return psi @ psi.conj().transpose(0, 2, 1)


def reduced_density_matrix(state: np.ndarray, subsystem, N: int | None = None) -> np.ndarray:
    """Partial trace of |psi><psi| over the complement of ``subsystem`` (1-based sites)."""
    state = np.asarray(state, dtype=complex)
    if N is None:
        N = int(round(math.log2(state.shape[0])))
    if state.shape != (2**N,):
        raise ValueError(f"state of length {state.shape[0]} is not a {N}-qubit state")
    return reduced_density_matrices(state[:, None], subsystem, N)[0]


def _checked_spectrum(rho: np.ndarray) -> np.ndarray:
    p = np.linalg.eigvalsh(rho)
    if p.min() < -EIG_CLAMP:
        raise ValueError(f"density matrix has eigenvalue {p.min():.3e} < -{EIG_CLAMP}")
    return np.clip(p, 0.0, None)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-sum p ln p over the spectrum of rho, with 0 ln 0 = 0."""
    p = _checked_spectrum(rho)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropies(rhos: np.ndarray) -> np.ndarray:
    """Batched :func:`von_neumann_entropy` over leading axes."""
    p = np.linalg.eigvalsh(rhos)
    if p.min() < -EIG_CLAMP:
        raise ValueError(f"density matrix has eigenvalue {p.min():.3e} < -{EIG_CLAMP}")
    p = np.clip(p, 0.0, None)
    logs = np.log(np.where(p > 0, p, 1.0))
    return -np.sum(p * logs, axis=-1)


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Trace norm ||rho1 - rho2||_1 (no factor 1/2)."""
    if rho1.shape != rho2.shape:
        raise ValueError(f"shape mismatch {rho1.shape} vs {rho2.shape}")
    diff = rho1 - rho2
    return float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def trace_distances(rhos1: np.ndarray, rhos2: np.ndarray) -> np.ndarray:
    """Batched :func:`trace_distance` over leading axes."""
    diff = rhos1 - rhos2
    diff = (diff + np.swapaxes(diff.conj(), -1, -2)) / 2
    return np.sum(np.abs(np.linalg.eigvalsh(diff)), axis=-1)


def clock_shift_basis(d_S: int) -> list[np.ndarray]:
    """Trace-orthonormal basis of d_S x d_S operators.

    Entry ``d_S * j1 + j2`` is d_S^{-1/2} sum_k exp(2 pi i j2 k / d_S)
    |(j1 + k) mod d_S><k|.
    """
    if d_S < 2:
        raise ValueError(f"d_S must be >= 2, got {d_S}")
    k = np.arange(d_S)
    ops = []
    for j1 in range(d_S):
        for j2 in range(d_S):
            A = np.zeros((d_S, d_S), dtype=complex)
            A[(j1 + k) % d_S, k] = np.exp(2j * np.pi * j2 * k / d_S)
            ops.append(A / math.sqrt(d_S))
    return ops
