"""Propagators, Floquet operators and their quasienergy structure."""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .spin_model import DEFAULT_MAX_QUBITS, DriveSchedule, build_piece_matrix

TWO_PI = 2.0 * np.pi
DEFAULT_CLUSTER_TOL = 1e-8
DEFAULT_RATIO_TOL = 1e-8
MARGINAL_FACTOR = 10.0


class NumericalError(RuntimeError):
    """A decomposition failed or its output violated a checked invariant."""


def wrap_phase(x):
    """Map angles onto the branch [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi


def check_hermitian(H: np.ndarray, tol: float = 1e-12) -> None:
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if np.max(np.abs(H - H.conj().T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")


def unitarity_error(U: np.ndarray) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def hermitian_propagator(H: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) from the eigendecomposition of H."""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    check_hermitian(H)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return (V * np.exp(-1j * w * dt)) @ V.conj().T


# Per-schedule cache of the piece Hamiltonian eigensystems. Schedules hash by
# identity, so a mutated schedule should be rebuilt rather than reused.
_SPECTRA: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def piece_hamiltonians(schedule: DriveSchedule, max_qubits: int = DEFAULT_MAX_QUBITS):
    return [build_piece_matrix(p, schedule.n_qubits, max_qubits) for p in schedule.pieces]


def piece_spectra(schedule: DriveSchedule):
    """Cached ``(eigenvalues, eigenvectors)`` of each piece Hamiltonian."""
    cached = _SPECTRA.get(schedule)
    if cached is None:
        cached = []
        for H in piece_hamiltonians(schedule):
            try:
                cached.append(np.linalg.eigh(H))
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        _SPECTRA[schedule] = cached
    return cached


def _check_x(x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return x


def apply_propagator_to(schedule: DriveSchedule, x: float, states: np.ndarray) -> np.ndarray:
    """Apply U(0, x) to a vector or to the columns of a matrix.

    Completed pieces act in full; the piece containing ``x`` acts for the
    elapsed fraction only.
    """
    x = _check_x(x)
    out = np.array(states, dtype=complex, copy=True)
    b = schedule.boundaries
    for j, (w, V) in enumerate(piece_spectra(schedule)):
        if x <= b[j]:
            break
        dt = min(x, b[j + 1]) - b[j]
        phase = np.exp(-1j * w * dt)
        coeffs = V.conj().T @ out
        out = V @ (phase[:, None] * coeffs if out.ndim == 2 else phase * coeffs)
    return out


def propagator_to(schedule: DriveSchedule, x: float) -> np.ndarray:
    """U(0, x) for 0 <= x <= 1."""
    return apply_propagator_to(schedule, x, np.eye(2**schedule.n_qubits, dtype=complex))


def floquet_operator(schedule: DriveSchedule) -> np.ndarray:
    """One-period propagator; piece 1 is the rightmost factor."""
    return propagator_to(schedule, 1.0)


def evolution_operator(schedule: DriveSchedule, t: float) -> np.ndarray:
    """U(0, t) for any t >= 0 as U(0, t - floor t) U_F^floor(t)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    m = int(math.floor(t))
    x = t - m
    Um = np.linalg.matrix_power(floquet_operator(schedule), m)
    return apply_propagator_to(schedule, x, Um)


@dataclass(eq=False)
class SpectralDecomposition:
    """Eigenspace structure of a unitary.

    Columns of ``basis`` are orthonormal eigenvectors grouped by cluster;
    ``labels[i]`` is the cluster of column i and ``eigenphases[i]`` its raw
    quasienergy E (eigenvalue exp(-iE), E in [-pi, pi)). Cluster j has the
    distinct eigenvalue ``eigenvalues[j]`` and multiplicity
    ``multiplicities[j]``.
    """

    eigenphases: np.ndarray
    labels: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    cluster_tol: float
    min_cluster_gap: float
    marginal: bool

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n_clusters(self) -> int:
        return len(self.eigenvalues)

    @property
    def quasienergies(self) -> np.ndarray:
        """One quasienergy per distinct eigenvalue, in [-pi, pi)."""
        return wrap_phase(-np.angle(self.eigenvalues))

    def cluster_basis(self, j: int) -> np.ndarray:
        return self.basis[:, self.labels == j]

    def projector(self, j: int) -> np.ndarray:
        V = self.cluster_basis(j)
        return V @ V.conj().T

    @property
    def projectors(self) -> list[np.ndarray]:
        """All projectors as dense matrices (s * 4^N memory)."""
        return [self.projector(j) for j in range(self.n_clusters)]

    @property
    def column_eigenvalues(self) -> np.ndarray:
        """Distinct eigenvalue attached to every basis column."""
        return self.eigenvalues[self.labels]

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.column_eigenvalues) @ self.basis.conj().T


def _circular_runs(sorted_vals: np.ndarray, tol: float):
    """Single-linkage runs of sorted angles on the circle.

    Returns (start, stop) index pairs into a rotated order and the rotation
    offset, plus the smallest gap that separates two runs (inf if none).
    """
    n = len(sorted_vals)
    gaps = np.empty(n)
    gaps[:-1] = np.diff(sorted_vals)
    gaps[-1] = sorted_vals[0] + TWO_PI - sorted_vals[-1]
    cuts = np.flatnonzero(gaps > tol)
    if len(cuts) == 0 or n == 1:
        # a lone point still has a self-gap of 2pi; it is one run either way
        return [(0, n)], 0, (math.inf if n == 1 or len(cuts) == 0 else float(gaps[cuts].min()))
    offset = (cuts[-1] + 1) % n
    # positions of cuts in the rotated order: run ends after each cut
    ends = np.sort((cuts - offset) % n) + 1
    starts = np.concatenate([[0], ends[:-1]])
    return list(zip(starts.tolist(), ends.tolist())), int(offset), float(gaps[cuts].min())


def spectral_decomposition(U: np.ndarray, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralDecomposition:
    """Cluster the eigenvalues of a unitary into distinct eigenspaces.

    Two eigenphases share a cluster iff they are linked by a chain of circular
    distances <= ``cluster_tol``. The decomposition is flagged ``marginal``
    when some gap between clusters is within a factor 10 of the tolerance.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be > 0")
    U = np.asarray(U, dtype=complex)
    if unitarity_error(U) > 1e-10:
        raise ValueError("input is not unitary to 1e-10")
    try:
        T, Z = scipy.linalg.schur(U, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schur decomposition failed: {exc}") from exc
    w = np.diag(T)
    phases = wrap_phase(-np.angle(w))
    order = np.argsort(phases, kind="stable")
    runs, offset, min_gap = _circular_runs(phases[order], cluster_tol)
    rotated = np.roll(order, -offset)

    clusters = []
    for start, stop in runs:
        idx = rotated[start:stop]
        mean = np.mean(w[idx] / np.abs(w[idx]))
        lam = mean / abs(mean)
        clusters.append((float(wrap_phase(-np.angle(lam))), lam, idx))
    clusters.sort(key=lambda c: c[0])

    d = U.shape[0]
    basis = np.empty((d, d), dtype=complex)
    labels = np.empty(d, dtype=int)
    eigphases = np.empty(d)
    eigenvalues = np.empty(len(clusters), dtype=complex)
    mult = np.empty(len(clusters), dtype=int)
    col = 0
    for j, (_, lam, idx) in enumerate(clusters):
        k = len(idx)
        Q, _ = np.linalg.qr(Z[:, idx])
        basis[:, col : col + k] = Q
        labels[col : col + k] = j
        eigphases[col : col + k] = phases[idx]
        eigenvalues[j] = lam
        mult[j] = k
        col += k
    marginal = min_gap < MARGINAL_FACTOR * cluster_tol
    return SpectralDecomposition(
        eigenphases=eigphases,
        labels=labels,
        basis=basis,
        eigenvalues=eigenvalues,
        multiplicities=mult,
        cluster_tol=float(cluster_tol),
        min_cluster_gap=min_gap,
        marginal=bool(marginal),
    )


@dataclass(frozen=True)
class DegeneracyMetrics:
    D1: float
    D2: int
    gap_margin: float
    marginal: bool = False


def phase_differences(quasienergies: np.ndarray) -> np.ndarray:
    """All E_k - E_j (mod 2pi, in [-pi, pi)) over ordered pairs j != k."""
    E = np.asarray(quasienergies, dtype=float)
    diff = E[None, :] - E[:, None]
    return wrap_phase(diff[~np.eye(len(E), dtype=bool)])


def degeneracy_metrics(decomp: SpectralDecomposition, ratio_tol: float = DEFAULT_RATIO_TOL) -> DegeneracyMetrics:
    """D1 and D2 of a decomposition.

    D2 counts the ordered pairs in the largest group of coinciding eigenvalue
    ratios; coincidence is single-linkage in circular phase distance with
    threshold ``ratio_tol``. ``gap_margin`` is the smallest separation between
    two non-coinciding phase differences.
    """
    if ratio_tol <= 0:
        raise ValueError("ratio_tol must be > 0")
    d_j = decomp.multiplicities.astype(float)
    D1 = float(np.sum(d_j**2) / decomp.dim)
    if decomp.n_clusters < 2:
        return DegeneracyMetrics(D1, 1, math.inf, decomp.marginal)
    diffs = np.sort(phase_differences(decomp.quasienergies))
    runs, _, margin = _circular_runs(diffs, ratio_tol)
    D2 = max(stop - start for start, stop in runs)
    return DegeneracyMetrics(D1, int(D2), margin, decomp.marginal)


def spectral_report(decomp: SpectralDecomposition, metrics: DegeneracyMetrics) -> dict:
    return {
        "eigenphases": decomp.quasienergies.tolist(),
        "multiplicities": decomp.multiplicities.tolist(),
        "D1": metrics.D1,
        "D2": metrics.D2,
        "gap_margin": metrics.gap_margin,
        "cluster_tol": decomp.cluster_tol,
        "marginal": metrics.marginal,
    }


def analyze(schedule: DriveSchedule, cluster_tol=DEFAULT_CLUSTER_TOL, ratio_tol=DEFAULT_RATIO_TOL):
    """Floquet operator, its decomposition and degeneracy metrics in one call."""
    U = floquet_operator(schedule)
    decomp = spectral_decomposition(U, cluster_tol)
    return U, decomp, degeneracy_metrics(decomp, ratio_tol)
