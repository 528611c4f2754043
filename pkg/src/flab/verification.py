"""Executable checks of the equilibration, effective-dimension and stability bounds.

Every check returns a :class:`VerificationReport` carrying the raw measured
numbers next to the bound they were compared with, so pass thresholds can be
re-audited from the output alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import spin_model
from .dynamics import expectations, stroboscopic_states
from .floquet import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_RATIO_TOL,
    NumericalError,
    analyze,
    evolution_operator,
    floquet_operator,
    hermitian_propagator,
    piece_hamiltonians,
    wrap_phase,
)
from .periodicity import (
    PeriodSampledSignal,
    finite_m_slack,
    periodicity_report,
    sample_scalar_signal,
    scalar_bound_with_slack,
)
from .spin_model import Ensemble, make_ensemble_schedule, make_model_b, pauli_string, sample_parameters
from .states import (
    basis_state,
    derive_rng,
    effective_dimension,
    eigenspace_overlaps,
    eigenspace_weights,
    sample_haar_product_state,
)

PASS_FRACTION = 0.95
SE_MULTIPLIER = 3.0
SLOPE_TARGET = 2.0
SLOPE_TOL = 0.2
PROPAGATOR_ATOL = 1e-9
EIGENSOLVER_TOL = 1e-12
GAP_MARGIN_THRESHOLD = 1e-6


@dataclass
class VerificationReport:
    check: str
    measured: float
    bound: float
    passed: bool
    samples: int
    seed: int | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "measured": self.measured,
            "bound": self.bound,
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "details": self.details,
        }

    def csv_row(self) -> list:
        return [self.check, self.measured, self.bound, self.passed, self.seed]


def deff_threshold(N: int, d_loc: int = 2) -> float:
    return ((d_loc + 1) / 2 - 1e-6) ** N


def _operator_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


def _haar_states(N: int, samples: int, seed: int):
    return [sample_haar_product_state(N, derive_rng(seed, i)) for i in range(samples)]


def _require_clean(decomp, allow_marginal: bool):
    if decomp.marginal and not allow_marginal:
        raise NumericalError(
            f"spectral clusters are separated by {decomp.min_cluster_gap:.3e}, "
            f"within 10x of cluster_tol={decomp.cluster_tol:.1e}"
        )


def verify_equilibration_bound(schedule, A, samples: int, M: int, K: int, seed: int = 0,
                               initial_states=None, cluster_tol=DEFAULT_CLUSTER_TOL,
                               ratio_tol=DEFAULT_RATIO_TOL, allow_marginal=False) -> VerificationReport:
    """Mean per-period squared distance against D2/D_eff + slack(M), per initial state.

    Passes when at least 95% of the initial states satisfy the bound. The
    epsilon_hat of each run is recorded alongside, with its own bound
    sqrt(D2/D_eff + slack(M)).
    """
    if abs(_operator_norm(A) - 1.0) > 1e-9:
        raise ValueError("observable must have operator norm 1")
    _, decomp, metrics = analyze(schedule, cluster_tol, ratio_tol)
    _require_clean(decomp, allow_marginal)
    N = schedule.n_qubits
    states = initial_states if initial_states is not None else _haar_states(N, samples, seed)
    rows = []
    for psi in states:
        D_eff = effective_dimension(eigenspace_overlaps(psi, decomp))
        signal = sample_scalar_signal(psi, schedule, decomp, A, M, K)
        bound = metrics.D2 / D_eff + finite_m_slack(metrics.D2, D_eff, M)
        eps_bound = scalar_bound_with_slack(metrics.D2, D_eff, M)
        report = periodicity_report(signal, eps_bound)
        rows.append({
            "D_eff": D_eff,
            "mean_distance": report.mean_distance,
            "bound": bound,
            "ok": report.mean_distance <= bound,
            "epsilon_hat": report.epsilon_hat,
            "epsilon_bound": eps_bound,
            "epsilon_ok": report.bound_satisfied,
        })
    ok = np.array([r["ok"] for r in rows])
    frac = float(ok.mean())
    ratios = [r["mean_distance"] / r["bound"] for r in rows]
    return VerificationReport(
        check="equilibration_bound",
        measured=frac,
        bound=PASS_FRACTION,
        passed=frac >= PASS_FRACTION,
        samples=len(rows),
        seed=seed,
        details={
            "N": N, "M": M, "K": K, "D1": metrics.D1, "D2": metrics.D2,
            "gap_margin": metrics.gap_margin, "max_ratio": float(max(ratios)), "runs": rows,
        },
    )


def verify_haar_projector_bound(decomp, N: int, samples: int, seed: int = 0,
                                batch: int = 1000) -> VerificationReport:
    """Monte Carlo mean of sum_j <phi|Pi_j|phi>^2 against D1 2^N / 3^N + 3 SE."""
    if samples < 1000:
        raise ValueError("at least 1000 samples are required")
    if decomp.dim != 2**N:
        raise ValueError("decomposition does not match N")
    values = np.empty(samples)
    for start in range(0, samples, batch):
        stop = min(start + batch, samples)
        block = np.stack([sample_haar_product_state(N, derive_rng(seed, i)) for i in range(start, stop)], axis=1)
        values[start:stop] = np.sum(eigenspace_weights(block, decomp) ** 4, axis=0)
    D1 = float(np.sum(decomp.multiplicities.astype(float) ** 2) / decomp.dim)
    bound = D1 * 2.0**N / 3.0**N
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(samples))
    return VerificationReport(
        check="haar_projector_bound",
        measured=mean,
        bound=bound,
        passed=mean <= bound + SE_MULTIPLIER * se,
        samples=samples,
        seed=seed,
        details={"N": N, "D1": D1, "standard_error": se, "ratio": mean / bound},
    )


def deff_threshold_experiment(decomp, N: int, samples: int, seed: int = 0,
                              initial_states=None) -> VerificationReport:
    """Fraction of product states whose D_eff exceeds (3/2 - 1e-6)^N."""
    states = initial_states if initial_states is not None else _haar_states(N, samples, seed)
    D_eff = np.array([effective_dimension(eigenspace_overlaps(psi, decomp)) for psi in states])
    threshold = deff_threshold(N)
    frac = float(np.mean(D_eff > threshold))
    D1 = float(np.sum(decomp.multiplicities.astype(float) ** 2) / decomp.dim)
    return VerificationReport(
        check="deff_threshold",
        measured=frac,
        bound=PASS_FRACTION,
        passed=frac >= PASS_FRACTION,
        samples=len(D_eff),
        seed=seed,
        details={
            "N": N, "D1": D1, "threshold": threshold,
            "median_D_eff": float(np.median(D_eff)), "min_D_eff": float(D_eff.min()),
        },
    )


def _draw_schedule(ensemble, N, bounds, rng, interacting=True):
    h, J = sample_parameters(ensemble, N, bounds, rng)
    if not interacting:
        J = np.zeros_like(J)
    if isinstance(ensemble, str):
        return make_model_b(h, J, N)
    return make_ensemble_schedule(ensemble.n, ensemble.T, ensemble.alpha, ensemble.gamma, h, J, N)


def nondegeneracy_scan(ensemble, N: int, n_samples: int, seed: int = 0,
                       bounds=spin_model.DEFAULT_BOUNDS, cluster_tol=DEFAULT_CLUSTER_TOL,
                       ratio_tol=DEFAULT_RATIO_TOL, margin_threshold=GAP_MARGIN_THRESHOLD,
                       control: bool = True) -> VerificationReport:
    """Fraction of uniform parameter draws with D1 = D2 = 1, plus a J = 0 control.

    Passes when every non-marginal draw has D1 = D2 = 1 with gap_margin above
    ``margin_threshold`` and every non-interacting control draw has D2 >= 2.
    Marginal decompositions are tallied separately.
    """
    if isinstance(ensemble, str):
        if ensemble != "model_b":
            raise ValueError(f"unknown ensemble {ensemble!r}")
    elif not ensemble.satisfies_generic_condition():
        raise ValueError("ensemble must switch on x, z fields and zz bonds in piece 1")

    def scan(interacting, stream):
        rows = []
        for i in range(n_samples):
            schedule = _draw_schedule(ensemble, N, bounds, derive_rng(seed, stream, i), interacting)
            _, decomp, m = analyze(schedule, cluster_tol, ratio_tol)
            rows.append({"D1": m.D1, "D2": m.D2, "gap_margin": m.gap_margin, "marginal": m.marginal})
        return rows

    generic = scan(True, 0)
    clean = [r for r in generic if not r["marginal"]]
    nondeg = [r["D1"] == 1.0 and r["D2"] == 1 for r in clean]
    with_margin = [ok and r["gap_margin"] > margin_threshold for ok, r in zip(nondeg, clean)]
    frac = float(np.mean(nondeg)) if clean else 0.0
    frac_margin = float(np.mean(with_margin)) if clean else 0.0
    margins = np.array([r["gap_margin"] for r in generic])
    details = {
        "N": N,
        "fraction_nondegenerate": frac,
        "fraction_with_margin": frac_margin,
        "margin_threshold": margin_threshold,
        "n_marginal": len(generic) - len(clean),
        "gap_margin_quantiles": np.quantile(margins, [0.0, 0.05, 0.5, 0.95, 1.0]).tolist(),
        "draws": generic,
    }
    passed = bool(clean) and frac == 1.0 and frac_margin == 1.0
    if control:
        controls = scan(False, 1)
        ctrl_frac = float(np.mean([r["D2"] >= 2 for r in controls]))
        details["control_fraction_degenerate"] = ctrl_frac
        details["control_min_D2"] = int(min(r["D2"] for r in controls))
        passed = passed and ctrl_frac == 1.0
    return VerificationReport(
        check="nondegeneracy_scan",
        measured=frac_margin,
        bound=1.0,
        passed=passed,
        samples=n_samples,
        seed=seed,
        details=details,
    )


def _sorted_quasienergies(U):
    T = scipy.linalg.schur(U, output="complex")[0]
    return np.sort(wrap_phase(-np.angle(np.diag(T))))


def quasienergy_perturbation_scaling(g, K, eps_list) -> VerificationReport:
    """Split-step versus combined-generator quasienergies as the drive shrinks.

    ``g`` holds (g_l^x, g_l^z) pairs and ``K`` the zz couplings; all are scaled
    by each eps. Quasienergies are matched in sorted order and the log-log
    slope of max_j |E_j - E'_j| against eps is fit and compared with 2.
    The operator-norm distance of the two unitaries is reported as well.
    """
    g = np.asarray(g, dtype=float)
    K = np.asarray(K, dtype=float).reshape(-1)
    N = K.size + 1
    eps_list = np.asarray(eps_list, dtype=float)
    if g.size != 2 * N:
        raise ValueError("g must hold 2N values")
    diffs, norms = [], []
    for eps in eps_list:
        schedule = make_model_b(eps * g, eps * K, N)
        split = floquet_operator(schedule)
        H1, H2 = piece_hamiltonians(schedule)
        combined = hermitian_propagator(H1 + H2, 0.5)
        E = _sorted_quasienergies(split)
        Ep = _sorted_quasienergies(combined)
        if max(np.abs(E).max(), np.abs(Ep).max()) >= np.pi / 2:
            raise ValueError(f"eps={eps} is too large: quasienergies reach pi/2")
        diff = float(np.abs(E - Ep).max())
        if diff > EIGENSOLVER_TOL and Ep.size > 1 and np.diff(Ep).min() < 10 * EIGENSOLVER_TOL:
            raise NumericalError(f"ambiguous quasienergy matching at eps={eps}")
        diffs.append(diff)
        norms.append(float(np.linalg.norm(split - combined, 2)))
    diffs = np.array(diffs)
    positive = (eps_list > 0) & (diffs > 1e-14)
    slope = norm_slope = None
    if positive.sum() >= 2:
        slope = float(np.polyfit(np.log(eps_list[positive]), np.log(diffs[positive]), 1)[0])
        norm_slope = float(np.polyfit(np.log(eps_list[positive]), np.log(np.array(norms)[positive]), 1)[0])
    if positive.any() and slope is None:
        raise ValueError("need at least two nonzero eps values to fit a slope")
    passed = slope is None or abs(slope - SLOPE_TARGET) <= SLOPE_TOL
    return VerificationReport(
        check="quasienergy_perturbation_scaling",
        measured=float("nan") if slope is None else slope,
        bound=SLOPE_TARGET,
        passed=bool(passed),
        samples=len(eps_list),
        seed=None,
        details={
            "eps": eps_list.tolist(),
            "max_quasienergy_difference": diffs.tolist(),
            "operator_norm_difference": norms,
            "operator_norm_slope": norm_slope,
            "slope_tolerance": SLOPE_TOL,
        },
    )


def propagator_distance_bound(schedule1, schedule2, t_grid) -> VerificationReport:
    """||U1(0,t) - U2(0,t)|| <= eps t with eps the largest piecewise norm gap."""
    if schedule1.n_qubits != schedule2.n_qubits:
        raise ValueError("schedules act on different numbers of qubits")
    if schedule1.boundaries.shape != schedule2.boundaries.shape or np.any(schedule1.boundaries != schedule2.boundaries):
        raise ValueError("schedules must share their switching times")
    eps = max(
        _operator_norm(H1 - H2)
        for H1, H2 in zip(piece_hamiltonians(schedule1), piece_hamiltonians(schedule2))
    )
    rows = []
    for t in t_grid:
        dist = _operator_norm(evolution_operator(schedule1, t) - evolution_operator(schedule2, t))
        bound = eps * t
        rows.append({
            "t": float(t),
            "distance": dist,
            "bound": bound,
            "ok": dist <= bound + PROPAGATOR_ATOL,
            "tightness": dist / bound if bound > 0 else 0.0,
        })
    worst = max(rows, key=lambda r: r["distance"] - r["bound"])
    return VerificationReport(
        check="propagator_distance_bound",
        measured=worst["distance"],
        bound=worst["bound"],
        passed=all(r["ok"] for r in rows),
        samples=len(rows),
        seed=None,
        details={"eps_pert": eps, "points": rows},
    )


def stroboscopic_signal(state0, schedule, decomp, A, M: int) -> PeriodSampledSignal:
    """values[m, 0] = <psi(m)|A|psi(m)>, sampled at integer times only."""
    states = stroboscopic_states(eigenspace_overlaps(state0, decomp), decomp, np.arange(M))
    return PeriodSampledSignal(expectations(A, states)[:, None], np.zeros(1))


def classify_dtc(eps1: float, eps2: float, threshold: float = 0.1) -> str:
    if eps1 <= threshold:
        return "period-1"
    if eps2 <= threshold:
        return "period-2"
    return "aperiodic"


def dtc_subharmonic_experiment(h, J, M: int, state0=None, seed: int | None = None,
                               cluster_tol=DEFAULT_CLUSTER_TOL, ratio_tol=DEFAULT_RATIO_TOL) -> VerificationReport:
    """Period-1 versus period-2 epsilon_hat of the stroboscopic <sigma_1^z>.

    The period-2 statistic re-blocks the same sequence into pairs of driving
    periods. The pass flag reports whether the period-1 epsilon_hat obeys
    sqrt(D2/D_eff + slack(M)) with D2 measured at ``ratio_tol``. The default
    initial state is |0...0>.
    """
    J = np.asarray(J, dtype=float).reshape(-1)
    N = J.size + 1
    schedule = make_model_b(h, J, N)
    _, decomp, metrics = analyze(schedule, cluster_tol, ratio_tol)
    if state0 is None:
        state0 = basis_state("0" * N)
    A = pauli_string("z", [1], N)
    D_eff = effective_dimension(eigenspace_overlaps(state0, decomp))
    signal = stroboscopic_signal(state0, schedule, decomp, A, M)
    bound = scalar_bound_with_slack(metrics.D2, D_eff, M)
    period1 = periodicity_report(signal, bound)
    period2 = periodicity_report(signal.reblock(2), bound)
    z = signal.values[:, 0]
    return VerificationReport(
        check="dtc_subharmonic",
        measured=period1.epsilon_hat,
        bound=bound,
        passed=period1.bound_satisfied,
        samples=M,
        seed=seed,
        details={
            "N": N,
            "z0": float(z[0]),
            "epsilon_hat_period1": period1.epsilon_hat,
            "epsilon_hat_period2": period2.epsilon_hat,
            "min_distance_period1": float(period1.per_period_distance.min()),
            "D1": metrics.D1,
            "D2": metrics.D2,
            "D_eff": D_eff,
            "classification": classify_dtc(period1.epsilon_hat, period2.epsilon_hat),
            "z": z.tolist(),
        },
    )
