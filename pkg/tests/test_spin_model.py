import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flab.spin_model import (
    PAULI,
    DimensionCapError,
    DriveSchedule,
    Ensemble,
    PieceSpec,
    build_piece_matrix,
    make_ensemble_schedule,
    make_model_b,
    pauli_string,
    sample_parameters,
)

AX = "xyz"


def kron_all(ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def kron_oracle(piece, N):
    """Sum every term as an explicit N-fold Kronecker product."""
    H = np.zeros((2**N, 2**N), dtype=complex)
    for l in range(N):
        for a in range(3):
            ops = [PAULI["i"]] * N
            ops[l] = PAULI[AX[a]]
            H += piece.on_site_coeffs[l, a] * kron_all(ops)
    for l in range(N - 1):
        for a in range(3):
            for b in range(3):
                ops = [PAULI["i"]] * N
                ops[l], ops[l + 1] = PAULI[AX[a]], PAULI[AX[b]]
                H += piece.coupling_coeffs[l, a, b] * kron_all(ops)
    return H


def random_piece(rng, N, duration=1.0):
    return PieceSpec(rng.normal(size=(N, 3)), rng.normal(size=(N - 1, 3, 3)), duration)


coeff = st.floats(-5, 5, allow_nan=False)


@st.composite
def pieces(draw, max_n=4):
    N = draw(st.integers(1, max_n))
    on = np.array(draw(st.lists(coeff, min_size=3 * N, max_size=3 * N))).reshape(N, 3)
    cp = np.array(draw(st.lists(coeff, min_size=9 * (N - 1), max_size=9 * (N - 1)))).reshape(N - 1, 3, 3)
    return PieceSpec(on, cp, 1.0)


class TestBuildPieceMatrix:
    def test_zero_piece(self):
        assert np.array_equal(build_piece_matrix(PieceSpec.zeros(2, 1.0), 2), np.zeros((4, 4)))

    def test_single_z_field(self):
        p = PieceSpec.zeros(1, 1.0)
        p.on_site_coeffs[0, 2] = 1.0
        assert np.allclose(build_piece_matrix(p, 1), np.diag([1, -1]), atol=0)

    def test_matches_kron_oracle(self, rng):
        p = random_piece(rng, 3)
        assert np.max(np.abs(build_piece_matrix(p, 3) - kron_oracle(p, 3))) < 1e-12

    def test_site_one_is_most_significant_bit(self):
        # sigma^z on site 1 is -1 on the lower half of the basis
        Z1 = pauli_string("z", [1], 3)
        assert np.allclose(np.diag(Z1).real, [1, 1, 1, 1, -1, -1, -1, -1])

    def test_dimension_cap(self):
        with pytest.raises(DimensionCapError):
            build_piece_matrix(PieceSpec.zeros(3, 1.0), 3, max_qubits=2)

    @given(pieces())
    def test_hermitian(self, p):
        H = build_piece_matrix(p, p.n_qubits)
        assert np.max(np.abs(H - H.conj().T)) < 1e-12

    @given(pieces(max_n=3), pieces(max_n=3), coeff, coeff)
    def test_linear_in_coefficients(self, p1, p2, a, b):
        if p1.n_qubits != p2.n_qubits:
            return
        N = p1.n_qubits
        comb = PieceSpec(a * p1.on_site_coeffs + b * p2.on_site_coeffs,
                         a * p1.coupling_coeffs + b * p2.coupling_coeffs, 1.0)
        lhs = build_piece_matrix(comb, N)
        rhs = a * build_piece_matrix(p1, N) + b * build_piece_matrix(p2, N)
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.abs(rhs).max())

    @given(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2), st.floats(0.1, 3))
    def test_local_terms_commute_with_distant_paulis(self, l, a, b, c):
        N = 5
        p = PieceSpec.zeros(N, 1.0)
        p.coupling_coeffs[l, a, b] = c
        p.on_site_coeffs[l, a] = c
        H = build_piece_matrix(p, N)
        for m in set(range(N)) - {l, l + 1}:
            for w in AX:
                S = pauli_string(w, [m + 1], N)
                assert np.max(np.abs(H @ S - S @ H)) < 1e-12


class TestModelB:
    def test_pi_kick_single_qubit(self):
        from flab.floquet import floquet_operator

        U = floquet_operator(make_model_b([np.pi, 0.0], [], 1))
        assert np.allclose(U, -1j * PAULI["x"], atol=1e-12)

    def test_all_zero(self):
        s = make_model_b(np.zeros(4), [0.0], 2)
        for p in s.pieces:
            assert not build_piece_matrix(p, 2).any()

    def test_piece_one_spectrum(self):
        s = make_model_b([0.0, 0.3, 0.0, 0.7], [0.0], 2)
        w = np.linalg.eigvalsh(build_piece_matrix(s.pieces[0], 2))
        # direct sums +-h1 +- h2
        expected = sorted(s1 * 0.3 + s2 * 0.7 for s1 in (1, -1) for s2 in (1, -1))
        assert np.allclose(w, expected, atol=1e-12)

    def test_layout(self, rng):
        h, J = rng.normal(size=(3, 2)), rng.normal(size=2)
        s = make_model_b(h, J, 3)
        assert np.array_equal(s.boundaries, [0.0, 0.5, 1.0])
        H1, H2 = (build_piece_matrix(p, 3) for p in s.pieces)
        ref1 = sum(h[l, 1] * pauli_string("z", [l + 1], 3) for l in range(3))
        ref1 = ref1 + sum(J[l] * pauli_string("zz", [l + 1, l + 2], 3) for l in range(2))
        ref2 = sum(h[l, 0] * pauli_string("x", [l + 1], 3) for l in range(3))
        assert np.allclose(H1, ref1, atol=1e-12) and np.allclose(H2, ref2, atol=1e-12)

    def test_rejects_wrong_sizes(self):
        with pytest.raises(ValueError):
            make_model_b(np.zeros(3), [0.0], 2)
        with pytest.raises(ValueError):
            make_model_b(np.zeros(4), [0.0, 0.0], 2)


class TestEnsemble:
    def test_model_b_flags_reproduce_model_b(self, rng):
        N = 3
        ens = Ensemble.model_b()
        h, J = rng.normal(size=(2, N, 3)), rng.normal(size=(2, N - 1, 3, 3))
        s = make_ensemble_schedule(2, ens.T, ens.alpha, ens.gamma, h, J, N)
        ref = make_model_b(np.stack([h[1, :, 0], h[0, :, 2]], axis=1), J[0, :, 2, 2], N)
        for p, q in zip(s.pieces, ref.pieces):
            assert np.array_equal(build_piece_matrix(p, N), build_piece_matrix(q, N))
        assert np.array_equal(s.boundaries, ref.boundaries)

    def test_all_flags_off(self, rng):
        s = make_ensemble_schedule(2, [0, 0.5, 1], np.zeros((2, 3)), np.zeros((2, 3, 3)),
                                   rng.normal(size=(2, 2, 3)), rng.normal(size=(2, 1, 3, 3)), 2)
        assert all(not build_piece_matrix(p, 2).any() for p in s.pieces)

    def test_single_generic_piece(self, rng):
        alpha = np.array([[1, 0, 1]])
        gamma = np.zeros((1, 3, 3), dtype=int)
        gamma[0, 2, 2] = 1
        ens = Ensemble(1, [0.0, 1.0], alpha, gamma)
        assert ens.satisfies_generic_condition()
        s = make_ensemble_schedule(1, ens.T, alpha, gamma, rng.normal(size=(1, 3, 3)),
                                   rng.normal(size=(1, 2, 3, 3)), 3)
        p = s.pieces[0]
        assert s.n_pieces == 1 and p.duration == 1.0
        assert np.all(p.on_site_coeffs[:, 1] == 0) and np.all(p.on_site_coeffs[:, [0, 2]] != 0)
        mask = np.zeros((3, 3), dtype=bool)
        mask[2, 2] = True
        assert np.all(p.coupling_coeffs[:, ~mask] == 0) and np.all(p.coupling_coeffs[:, 2, 2] != 0)

    def test_model_b_is_not_single_piece_generic(self):
        assert not Ensemble.model_b().satisfies_generic_condition()

    def test_bad_times(self):
        with pytest.raises(ValueError):
            Ensemble(2, [0, 0.7, 0.5], np.zeros((2, 3)), np.zeros((2, 3, 3)))


class TestSampling:
    def test_degenerate_interval(self):
        h, J = sample_parameters("model_b", 4, (0, 0), np.random.default_rng(0))
        assert not h.any() and not J.any()

    def test_within_default_box(self):
        h, J = sample_parameters("model_b", 6, (-20, 20), np.random.default_rng(0))
        both = np.concatenate([h.ravel(), J])
        assert both.size == 3 * 6 - 1
        assert np.all(both >= -20) and np.all(both <= 20)

    def test_deterministic(self):
        a = sample_parameters(Ensemble.model_b(), 3, rng=np.random.default_rng(5))
        b = sample_parameters(Ensemble.model_b(), 3, rng=np.random.default_rng(5))
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            sample_parameters("model_b", 2, (1, -1))


class TestSchedule:
    def test_json_round_trip_is_bit_exact(self, rng):
        alpha = rng.integers(0, 2, size=(3, 3))
        gamma = rng.integers(0, 2, size=(3, 3, 3))
        T = [0.0, 0.1 + 1e-17, np.nextafter(0.7, 1), 1.0]
        s = make_ensemble_schedule(3, T, alpha, gamma, rng.normal(size=(3, 4, 3)) * 1e3,
                                   rng.normal(size=(3, 3, 3, 3)) / 7, 4)
        back = DriveSchedule.from_json(s.to_json())
        assert np.array_equal(back.boundaries, s.boundaries)
        for p, q in zip(s.pieces, back.pieces):
            assert np.array_equal(p.on_site_coeffs, q.on_site_coeffs)
            assert np.array_equal(p.coupling_coeffs, q.coupling_coeffs)
            assert p.duration == q.duration
        assert json.loads(back.to_json()) == json.loads(s.to_json())

    def test_boundaries_validated(self):
        with pytest.raises(ValueError):
            DriveSchedule(1, [PieceSpec.zeros(1, 0.5), PieceSpec.zeros(1, 0.5)], np.array([0.0, 0.6, 0.5]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            PieceSpec(np.array([[np.nan, 0, 0]]), np.zeros((0, 3, 3)), 1.0)
