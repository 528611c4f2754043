"""Finite-M estimators of approximate periodicity with the driving period.

A trajectory is sampled on M periods times K midpoint offsets. The reference
profile is the per-offset time average, so the resulting epsilon_hat is an
upper bound on the best epsilon any reference profile could achieve.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import expectations, reduced_density_matrices, stroboscopic_states, trace_distances
from .floquet import SpectralDecomposition, apply_propagator_to
from .spin_model import DriveSchedule
from .states import eigenspace_overlaps

DEFAULT_K = 32
MAX_EVALUATIONS = 10_000_000
SUBSYSTEM_FRACTION = 0.29248


@dataclass(eq=False)
class PeriodSampledSignal:
    """Trajectory values[m, k] = f(m + offsets[k]); matrix signals add two axes."""

    values: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        self.offsets = np.asarray(self.offsets, dtype=float)
        if self.values.ndim not in (2, 4):
            raise ValueError("values must be (M, K) or (M, K, d, d)")
        if self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError("need M >= 1 and K >= 1")
        if self.offsets.shape != (self.values.shape[1],):
            raise ValueError("one offset per sample column is required")
        if np.any(np.diff(self.offsets) <= 0) or self.offsets[0] < 0 or self.offsets[-1] >= 1:
            raise ValueError("offsets must increase strictly within [0, 1)")

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return self.values.shape[1]

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == 4

    def reblock(self, period: int) -> PeriodSampledSignal:
        """View the signal with a period of ``period`` driving periods.

        Trailing periods that do not fill a block are dropped.
        """
        if period < 1:
            raise ValueError("period must be >= 1")
        M = (self.M // period) * period
        if M == 0:
            raise ValueError(f"signal of {self.M} periods is shorter than one block")
        shape = (M // period, period * self.K) + self.values.shape[2:]
        offsets = ((np.arange(period)[:, None] + self.offsets[None, :]) / period).ravel()
        return PeriodSampledSignal(self.values[:M].reshape(shape), offsets)


def midpoint_grid(K: int, schedule: DriveSchedule | None = None) -> np.ndarray:
    """Offsets (k + 1/2)/K; warns if one lands on a switching time."""
    if K < 1:
        raise ValueError("K must be >= 1")
    x = (np.arange(K) + 0.5) / K
    if schedule is not None:
        inner = schedule.boundaries[1:-1]
        if inner.size and np.min(np.abs(x[:, None] - inner[None, :])) < 1e-12:
            warnings.warn(
                f"midpoint grid with K={K} hits a switching time of the drive",
                stacklevel=2,
            )
    return x


def _check_budget(M: int, K: int, budget: int):
    if M < 1 or K < 1:
        raise ValueError("need M >= 1 and K >= 1")
    if M * K > budget:
        raise ValueError(f"M*K={M * K} evaluations exceed the budget of {budget}")


def _trajectory_blocks(state0, schedule, decomp, M, K):
    """Yield (k, states at m + x_k for m = 0..M-1) one offset at a time."""
    overlaps = eigenspace_overlaps(state0, decomp)
    strobe = stroboscopic_states(overlaps, decomp, np.arange(M))
    for k, x in enumerate(midpoint_grid(K, schedule)):
        yield k, x, apply_propagator_to(schedule, x, strobe)


def sample_scalar_signal(state0, schedule: DriveSchedule, decomp: SpectralDecomposition, A: np.ndarray,
                         M: int, K: int = DEFAULT_K, budget: int = MAX_EVALUATIONS) -> PeriodSampledSignal:
    """values[m, k] = <psi(m + x_k)|A|psi(m + x_k)> on the midpoint grid."""
    _check_budget(M, K, budget)
    values = np.empty((M, K))
    offsets = np.empty(K)
    for k, x, states in _trajectory_blocks(state0, schedule, decomp, M, K):
        values[:, k] = expectations(A, states)
        offsets[k] = x
    return PeriodSampledSignal(values, offsets)


def sample_rdm_signal(state0, schedule: DriveSchedule, decomp: SpectralDecomposition, subsystem,
                      M: int, K: int = DEFAULT_K, budget: int = MAX_EVALUATIONS) -> PeriodSampledSignal:
    """Reduced density matrices of ``subsystem`` on the midpoint grid."""
    _check_budget(M, K, budget)
    N = schedule.n_qubits
    d_S = 2 ** len(set(subsystem))
    values = np.empty((M, K, d_S, d_S), dtype=complex)
    offsets = np.empty(K)
    for k, x, states in _trajectory_blocks(state0, schedule, decomp, M, K):
        values[:, k] = reduced_density_matrices(states, subsystem, N)
        offsets[k] = x
    return PeriodSampledSignal(values, offsets)


def reference_profile(signal: PeriodSampledSignal) -> np.ndarray:
    """Per-offset average over all periods.

    Averaged as deviations from the first period, so a signal that repeats
    exactly gets exactly that period back.
    """
    if signal.M < 2:
        raise ValueError("a reference profile needs M >= 2 periods")
    first = signal.values[0]
    return first + (signal.values - first[None]).mean(axis=0)


def period_distances(signal: PeriodSampledSignal, profile: np.ndarray) -> np.ndarray:
    """Midpoint-rule distance of each period from the profile.

    Scalar signals integrate the squared deviation; matrix signals integrate
    the (unsquared) trace norm of the deviation.
    """
    profile = np.asarray(profile)
    if profile.shape != signal.values.shape[1:]:
        raise ValueError(f"profile shape {profile.shape} does not match signal {signal.values.shape[1:]}")
    if signal.is_matrix:
        return trace_distances(signal.values, profile[None]).mean(axis=1)
    return (np.abs(signal.values - profile[None]) ** 2).mean(axis=1)


def epsilon_hat(distances) -> float:
    """Smallest eps >= 0 with |{m : d_m <= eps}| / M >= 1 - eps.

    With d_(0) = 0 <= d_(1) <= ... <= d_(M) sorted, the answer is
    min_i max(d_(i), 1 - i/M).
    """
    d = np.sort(np.asarray(distances, dtype=float))
    M = d.size
    if M < 1:
        raise ValueError("need at least one distance")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be finite and non-negative")
    ranked = np.concatenate([[0.0], d])
    candidates = np.maximum(ranked, 1.0 - np.arange(M + 1) / M)
    return float(candidates.min())


def good_fraction(distances, eps: float) -> float:
    d = np.asarray(distances)
    return float(np.mean(d <= eps))


def theory_bound_scalar(D2: float, D_eff: float) -> float:
    if D2 < 1 or D_eff < 1:
        raise ValueError("need D2 >= 1 and D_eff >= 1")
    return math.sqrt(D2 / D_eff)


def theory_bound_rdm(d_S: float, D2: float, D_eff: float) -> float:
    if d_S < 2:
        raise ValueError("d_S must be >= 2")
    if D2 < 1 or D_eff < 1:
        raise ValueError("need D2 >= 1 and D_eff >= 1")
    return (d_S**2 * D2 / D_eff) ** 0.25


def finite_m_slack(D2: float, D_eff: float, M: int) -> float:
    """Allowance for the finite time average: 5 (D2 + 1) / (D_eff sqrt M)."""
    return 5.0 * (D2 / D_eff + 1.0 / D_eff) / math.sqrt(M)


def scalar_bound_with_slack(D2: float, D_eff: float, M: int) -> float:
    """sqrt(D2/D_eff + slack): epsilon_hat <= sqrt(mean distance) always holds."""
    return math.sqrt(D2 / D_eff + finite_m_slack(D2, D_eff, M))


def rdm_bound_with_slack(d_S: float, D2: float, D_eff: float, M: int) -> float:
    return (d_S**2 * (D2 / D_eff + finite_m_slack(D2, D_eff, M))) ** 0.25


def rdm_size_warning(L: int, N: int) -> bool:
    """True when a subsystem of L sites exceeds 0.29248 N."""
    return L > SUBSYSTEM_FRACTION * N


@dataclass(eq=False)
class PeriodicityReport:
    per_period_distance: np.ndarray
    epsilon_hat: float
    reference_profile: np.ndarray
    theory_bound: float
    bound_satisfied: bool
    M: int
    K: int
    extra: dict = field(default_factory=dict)

    def good_fraction_at(self, eps: float) -> float:
        return good_fraction(self.per_period_distance, eps)

    @property
    def mean_distance(self) -> float:
        return float(np.mean(self.per_period_distance))

    def to_dict(self) -> dict:
        out = {
            "M": self.M,
            "K": self.K,
            "epsilon_hat": self.epsilon_hat,
            "theory_bound": self.theory_bound,
            "bound_satisfied": self.bound_satisfied,
            "mean_distance": self.mean_distance,
            "distances": self.per_period_distance.tolist(),
        }
        out.update(self.extra)
        return out


def periodicity_report(signal: PeriodSampledSignal, theory_bound: float, **extra) -> PeriodicityReport:
    profile = reference_profile(signal)
    distances = period_distances(signal, profile)
    eps = epsilon_hat(distances)
    return PeriodicityReport(
        per_period_distance=distances,
        epsilon_hat=eps,
        reference_profile=profile,
        theory_bound=float(theory_bound),
        bound_satisfied=bool(eps <= theory_bound),
        M=signal.M,
        K=signal.K,
        extra=extra,
    )
