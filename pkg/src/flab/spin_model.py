"""Dense qubit-chain Hamiltonians and piecewise-constant drive schedules.

Qubit ordering: site 1 is the most significant bit of the computational-basis
index, i.e. a state vector reshaped to ``(2,) * N`` has site 1 on axis 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

AXES = "xyz"
DEFAULT_MAX_QUBITS = 14
DEFAULT_BOUNDS = (-20.0, 20.0)

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DimensionCapError(ValueError):
    """Requested system is larger than the configured dense-matrix budget."""


def check_dimension(N: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> None:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > max_qubits:
        raise DimensionCapError(
            f"N={N} exceeds the dense-matrix cap of {max_qubits} qubits"
        )


@dataclass(eq=False)
class PieceSpec:
    """Coefficients of one constant piece of the drive.

    ``on_site_coeffs[l, u]`` multiplies sigma^u on site l+1, and
    ``coupling_coeffs[l, u, v]`` multiplies sigma^u_{l+1} sigma^v_{l+2}.
    """

    on_site_coeffs: np.ndarray
    coupling_coeffs: np.ndarray
    duration: float

    def __post_init__(self):
        self.on_site_coeffs = np.asarray(self.on_site_coeffs, dtype=float)
        self.coupling_coeffs = np.asarray(self.coupling_coeffs, dtype=float)
        self.duration = float(self.duration)
        if self.on_site_coeffs.ndim != 2 or self.on_site_coeffs.shape[1] != 3:
            raise ValueError(
                f"on_site_coeffs must have shape (N, 3), got {self.on_site_coeffs.shape}"
            )
        N = self.on_site_coeffs.shape[0]
        if self.coupling_coeffs.shape != (max(N - 1, 0), 3, 3):
            raise ValueError(
                f"coupling_coeffs must have shape ({max(N - 1, 0)}, 3, 3), "
                f"got {self.coupling_coeffs.shape}"
            )
        if not (np.all(np.isfinite(self.on_site_coeffs)) and np.all(np.isfinite(self.coupling_coeffs))):
            raise ValueError("coefficients must be finite")
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")

    @property
    def n_qubits(self) -> int:
        return self.on_site_coeffs.shape[0]

    @classmethod
    def zeros(cls, N: int, duration: float) -> PieceSpec:
        return cls(np.zeros((N, 3)), np.zeros((max(N - 1, 0), 3, 3)), duration)


@dataclass(eq=False)
class DriveSchedule:
    """One period (normalized to 1) of a piecewise-constant Hamiltonian.

    ``boundaries`` are the switching times 0 = t_0 < t_1 < ... < t_n = 1 and
    piece j acts on [t_{j-1}, t_j). Piece durations are re-derived from the
    boundaries so that serialization round-trips exactly.
    """

    n_qubits: int
    pieces: list[PieceSpec]
    boundaries: np.ndarray = field(default=None)

    def __post_init__(self):
        self.pieces = list(self.pieces)
        if not self.pieces:
            raise ValueError("a schedule needs at least one piece")
        for p in self.pieces:
            if p.n_qubits != self.n_qubits:
                raise ValueError(
                    f"piece acts on {p.n_qubits} qubits, schedule has {self.n_qubits}"
                )
        durations = np.array([p.duration for p in self.pieces])
        if self.boundaries is None:
            if abs(durations.sum() - 1.0) > 1e-12:
                raise ValueError(f"piece durations sum to {durations.sum()!r}, not 1")
            b = np.concatenate([[0.0], np.cumsum(durations)])
            b[-1] = 1.0
            self.boundaries = b
        else:
            b = np.asarray(self.boundaries, dtype=float)
            if b.shape != (len(self.pieces) + 1,):
                raise ValueError("need one more boundary than pieces")
            if b[0] != 0.0 or b[-1] != 1.0:
                raise ValueError("boundaries must start at 0 and end at 1")
            if np.any(np.diff(b) <= 0):
                raise ValueError("boundaries must be strictly increasing")
            if np.max(np.abs(np.diff(b) - durations)) > 1e-12:
                raise ValueError("boundaries inconsistent with piece durations")
            self.boundaries = b
        for p, d in zip(self.pieces, np.diff(self.boundaries)):
            p.duration = float(d)

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "boundaries": self.boundaries.tolist(),
            "pieces": [
                {
                    "on_site": p.on_site_coeffs.tolist(),
                    "coupling": p.coupling_coeffs.reshape(-1, 9).tolist(),
                }
                for p in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> DriveSchedule:
        N = int(data["n_qubits"])
        b = np.asarray(data["boundaries"], dtype=float)
        pieces = []
        for p, d in zip(data["pieces"], np.diff(b)):
            coupling = np.asarray(p["coupling"], dtype=float).reshape(max(N - 1, 0), 3, 3)
            pieces.append(PieceSpec(np.asarray(p["on_site"], dtype=float).reshape(N, 3), coupling, d))
        return cls(N, pieces, b)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> DriveSchedule:
        return cls.from_dict(json.loads(text))


def site_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    """Embed a 2x2 operator acting on ``site`` (1-based) into the N-qubit space."""
    if not 1 <= site <= N:
        raise ValueError(f"site {site} out of range 1..{N}")
    return np.kron(np.kron(np.eye(2 ** (site - 1)), op), np.eye(2 ** (N - site)))


def pauli_string(paulis: str, sites, N: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Dense matrix of a Pauli string, e.g. ``pauli_string("zz", [1, 2], N)``."""
    check_dimension(N, max_qubits)
    sites = list(sites)
    if len(paulis) != len(sites):
        raise ValueError("one Pauli letter per site is required")
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    factors = [PAULI["i"]] * N
    for letter, site in zip(paulis.lower(), sites):
        if letter not in PAULI:
            raise ValueError(f"unknown Pauli letter {letter!r}")
        if not 1 <= site <= N:
            raise ValueError(f"site {site} out of range 1..{N}")
        factors[site - 1] = PAULI[letter]
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def build_piece_matrix(piece: PieceSpec, N: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Dense Hamiltonian sum_l sum_u h_l^u s_l^u + sum_l sum_uv J_l^uv s_l^u s_{l+1}^v."""
    check_dimension(N, max_qubits)
    if piece.n_qubits != N:
        raise ValueError(f"piece is for {piece.n_qubits} qubits, asked for N={N}")
    dim = 2**N
    H = np.zeros((dim, dim), dtype=complex)
    for l in range(N):
        local = sum(piece.on_site_coeffs[l, a] * PAULI[u] for a, u in enumerate(AXES))
        if np.any(local):
            H += site_operator(local, l + 1, N)
    for l in range(N - 1):
        c = piece.coupling_coeffs[l]
        if not np.any(c):
            continue
        bond = np.zeros((4, 4), dtype=complex)
        for a, u in enumerate(AXES):
            for b, v in enumerate(AXES):
                if c[a, b]:
                    bond += c[a, b] * np.kron(PAULI[u], PAULI[v])
        H += np.kron(np.kron(np.eye(2**l), bond), np.eye(2 ** (N - l - 2)))
    return H


def make_model_b(h, J, N: int) -> DriveSchedule:
    """Two-step kicked Ising drive.

    Arguments:
        h: 2N field values ordered (h_1^x, h_1^z, h_2^x, h_2^z, ...); an
            (N, 2) array with columns (x, z) is accepted as well.
        J: N-1 nearest-neighbour zz couplings.
        N: number of qubits.

    Returns:
        Schedule with the z fields and zz couplings on [0, 1/2) and the x
        fields on [1/2, 1).
    """
    h = np.asarray(h, dtype=float)
    J = np.asarray(J, dtype=float).reshape(-1)
    if h.size != 2 * N:
        raise ValueError(f"h must hold 2N={2 * N} values, got {h.size}")
    if J.size != N - 1:
        raise ValueError(f"J must hold N-1={N - 1} values, got {J.size}")
    h = h.reshape(N, 2)
    first = PieceSpec.zeros(N, 0.5)
    first.on_site_coeffs[:, 2] = h[:, 1]
    first.coupling_coeffs[:, 2, 2] = J
    second = PieceSpec.zeros(N, 0.5)
    second.on_site_coeffs[:, 0] = h[:, 0]
    return DriveSchedule(N, [first, second], np.array([0.0, 0.5, 1.0]))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Which term types are switched on in each of the n pieces.

    ``alpha[j, u]`` flags on-site sigma^u terms and ``gamma[j, u, v]`` flags
    sigma^u sigma^v bonds in piece j+1; ``T`` holds the switching times.
    """

    n: int
    T: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        alpha = np.asarray(self.alpha, dtype=int).reshape(self.n, 3)
        gamma = np.asarray(self.gamma, dtype=int).reshape(self.n, 3, 3)
        if T.shape != (self.n + 1,):
            raise ValueError(f"T must have n+1={self.n + 1} entries")
        if T[0] != 0.0 or T[-1] != 1.0 or np.any(np.diff(T) <= 0):
            raise ValueError("T must increase strictly from 0 to 1")
        if not (np.isin(alpha, (0, 1)).all() and np.isin(gamma, (0, 1)).all()):
            raise ValueError("alpha and gamma flags must be 0 or 1")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def model_b(cls) -> Ensemble:
        alpha = np.zeros((2, 3), dtype=int)
        gamma = np.zeros((2, 3, 3), dtype=int)
        alpha[0, 2] = gamma[0, 2, 2] = alpha[1, 0] = 1
        return cls(2, np.array([0.0, 0.5, 1.0]), alpha, gamma)

    def satisfies_generic_condition(self) -> bool:
        """True when piece 1 carries x and z fields and zz bonds."""
        return bool(self.alpha[0, 0] and self.alpha[0, 2] and self.gamma[0, 2, 2])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "T": self.T.tolist(),
            "alpha": self.alpha.tolist(),
            "gamma": self.gamma.tolist(),
        }


def make_ensemble_schedule(n: int, T, alpha, gamma, h, J, N: int) -> DriveSchedule:
    """Schedule of the flagged ensemble; h has shape (n, N, 3), J (n, N-1, 3, 3)."""
    ens = Ensemble(n, T, alpha, gamma)
    h = np.asarray(h, dtype=float)
    J = np.asarray(J, dtype=float)
    if h.shape != (n, N, 3):
        raise ValueError(f"h must have shape {(n, N, 3)}, got {h.shape}")
    if J.shape != (n, max(N - 1, 0), 3, 3):
        raise ValueError(f"J must have shape {(n, max(N - 1, 0), 3, 3)}, got {J.shape}")
    durations = np.diff(ens.T)
    pieces = [
        PieceSpec(
            ens.alpha[j][None, :] * h[j],
            ens.gamma[j][None, :, :] * J[j],
            durations[j],
        )
        for j in range(n)
    ]
    return DriveSchedule(N, pieces, ens.T)


def sample_parameters(shape, N: int, bounds=DEFAULT_BOUNDS, rng=None):
    """Draw every coefficient independently and uniformly from ``bounds``.

    ``shape`` is either the string ``"model_b"``, giving ``(h, J)`` with
    shapes (N, 2) and (N-1,), or an :class:`Ensemble`, giving arrays shaped
    as :func:`make_ensemble_schedule` expects. Flags are not applied here.
    """
    lo, hi = map(float, bounds)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ValueError(f"empty or non-finite interval [{lo}, {hi}]")
    rng = np.random.default_rng(rng)
    if isinstance(shape, str):
        if shape != "model_b":
            raise ValueError(f"unknown ensemble descriptor {shape!r}")
        h_shape, J_shape = (N, 2), (N - 1,)
    else:
        h_shape, J_shape = (shape.n, N, 3), (shape.n, N - 1, 3, 3)
    h = rng.uniform(lo, hi, size=h_shape)
    J = rng.uniform(lo, hi, size=J_shape)
    return h, J


def random_model_b(N: int, bounds=DEFAULT_BOUNDS, rng=None) -> DriveSchedule:
    h, J = sample_parameters("model_b", N, bounds, rng)
    return make_model_b(h, J, N)


def zero_schedule(N: int) -> DriveSchedule:
    return make_model_b(np.zeros(2 * N), np.zeros(N - 1), N)
