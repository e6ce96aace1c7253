import numpy as np
import pytest

from symplectiq.core import SymplecticError
from symplectiq.discrete import (
    LocalRingElement,
    NonInvertibleBlock,
    circuit_compose,
    crt_split,
    dv_inverse,
    dv_omega,
    dv_symplectic_basis_check,
    dv_teleport_transform,
    feedforward_correction,
    fourier_gate,
    fourier_symplectic,
    gate_teleport_partition,
    gate_to_symplectic,
    is_dv_symplectic,
    pauli_operator,
    pauli_phase,
    ring_diff,
    sum_gate,
    sum_symplectic,
    teleport_partition,
)

TELEPORT_CIRCUIT = [("H", 1), ("CNOT", 2, 1), ("CNOT", 1, 0), ("H", 0)]

TELEPORT_S = np.array([
    [0, 1, 1, 0, 0, 1],
    [1, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0],
    [0, 0, 1, 0, 0, 1],
    [0, 0, 0, 1, 1, 0],
    [0, 0, 0, 0, 0, 1],
], dtype=np.int64)

GATE_TELEPORT_CIRCUIT = [("H", 1), ("CNOT", 2, 1), ("CNOT", 1, 0), ("CNOT", 3, 2)]

GATE_TELEPORT_S = np.array([
    [1, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 1, 0, 0],
    [1, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 1, 0, 0],
    [0, 0, 0, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 1, 1, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 1],
], dtype=np.int64)

S_C = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 1],
    [1, 0, 1, 0],
    [0, 0, 0, 1],
], dtype=np.int64)


def test_pauli_phase_basics():
    assert pauli_phase([1, 0], [0, 1], 2) == 1   # Z vs X anticommute
    assert pauli_phase([1, 1], [1, 1], 2) == 0   # sigma(u, u) = 0
    assert pauli_phase([1, 0, 0, 1], [0, 1, 1, 0], 3) == (1 - 1) % 3


def test_pauli_phase_antisymmetry_and_bilinearity():
    rng = np.random.default_rng(0)
    for d in (2, 3, 5, 6):
        for _ in range(20):
            u = rng.integers(0, d, size=4)
            v = rng.integers(0, d, size=4)
            w = rng.integers(0, d, size=4)
            a = int(rng.integers(0, d))
            assert (pauli_phase(u, v, d) + pauli_phase(v, u, d)) % d == 0
            assert pauli_phase((u + w) % d, v, d) == \
                (pauli_phase(u, v, d) + pauli_phase(w, v, d)) % d
            assert pauli_phase((a * u) % d, v, d) == (a * pauli_phase(u, v, d)) % d


def test_pauli_phase_against_clock_shift_commutation():
    """Brute-force oracle: D_u D_v = omega^{sigma(u,v)} D_v D_u."""
    rng = np.random.default_rng(1)
    for d in (2, 3, 5):
        om = np.exp(2j * np.pi / d)
        for _ in range(10):
            u = rng.integers(0, d, size=2)
            v = rng.integers(0, d, size=2)
            Du = pauli_operator(u, d)
            Dv = pauli_operator(v, d)
            lhs = Du @ Dv
            rhs = om ** pauli_phase(u, v, d) * (Dv @ Du)
            assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_is_dv_symplectic_identity_and_paper_example():
    for d in (2, 3, 4, 6, 9, 12):
        assert is_dv_symplectic(np.eye(2, dtype=np.int64), d)
    S6 = np.array([
        [5, 4, 0, 0],
        [3, 5, 0, 0],
        [0, 0, 5, 3],
        [0, 0, 2, 5],
    ])
    assert is_dv_symplectic(S6, 6)
    # componentwise CRT images of the same matrix
    assert is_dv_symplectic(S6 % 2, 2)
    assert is_dv_symplectic(S6 % 3, 3)


def test_is_dv_symplectic_differential_counterexample():
    """det = 1 mod 9 but the first differential condition fails."""
    S9 = np.diag([4, 7]).astype(np.int64)
    assert (4 * 7) % 9 == 1
    assert not is_dv_symplectic(S9, 9)
    # l = 0 alone is satisfied: the residues multiply to 1 mod 3
    assert is_dv_symplectic(np.diag([1, 1]), 9)
    shear = np.array([[1, 0], [3, 1]], dtype=np.int64)
    assert is_dv_symplectic(shear, 9)


def test_dv_group_closure_and_inverse():
    rng = np.random.default_rng(2)
    d = 5
    Om = dv_omega(2, d)
    mats = []
    while len(mats) < 6:
        cand = rng.integers(0, d, size=(4, 4))
        if is_dv_symplectic(cand, d):
            mats.append(cand)
    for A in mats:
        for B in mats:
            assert is_dv_symplectic((A @ B) % d, d)
        inv = (dv_omega(2, d) @ A.T @ dv_omega(2, d) * (d - 1)) % d
        assert np.array_equal((A @ inv) % d, np.eye(4, dtype=np.int64) % d)
        assert is_dv_symplectic(inv, d)
        assert np.array_equal(dv_inverse(A, d), inv % d)


def test_gate_tableaus():
    assert np.array_equal(gate_to_symplectic(("H", 0), 1),
                          np.array([[0, 1], [1, 0]]))
    assert np.array_equal(gate_to_symplectic(("CNOT", 1, 0), 2), S_C)
    sq = (S_C @ S_C) % 2
    assert np.array_equal(sq, np.eye(4, dtype=np.int64))
    with pytest.raises(SymplecticError):
        gate_to_symplectic(("CNOT", 0, 0), 2)
    with pytest.raises(SymplecticError):
        gate_to_symplectic(("TOFFOLI", 0, 1), 3)


def test_teleportation_circuit_composition():
    S = circuit_compose(TELEPORT_CIRCUIT, 3)
    assert np.array_equal(S, TELEPORT_S)
    assert is_dv_symplectic(S, 2)
    empty = circuit_compose([], 3)
    assert np.array_equal(empty, np.eye(6, dtype=np.int64))


def test_teleportation_transform():
    S = circuit_compose(TELEPORT_CIRCUIT, 3)
    St, Fst = dv_teleport_transform(S, teleport_partition(3))
    assert np.array_equal(St, np.eye(2, dtype=np.int64))
    assert np.array_equal(Fst, np.array([[0, 1], [1, 0]]))


def test_teleportation_feedforward_semantics():
    S = circuit_compose(TELEPORT_CIRCUIT, 3)
    _, Fst = dv_teleport_transform(S, teleport_partition(3))
    corr = feedforward_correction(Fst, [0, 1])
    assert np.array_equal(corr, [1, 0])   # label of a Pauli Z


def test_gate_teleportation_circuit_and_transform():
    S = circuit_compose(GATE_TELEPORT_CIRCUIT, 4)
    assert np.array_equal(S, GATE_TELEPORT_S)
    St, Fst = dv_teleport_transform(S, gate_teleport_partition())
    assert np.array_equal(St, S_C)
    assert np.array_equal(Fst, np.array([[0, 0], [0, 1], [1, 0], [0, 0]]))


def test_dv_transform_rejects_noninvertible_block():
    part = teleport_partition(3)
    with pytest.raises(NonInvertibleBlock):
        dv_teleport_transform(np.eye(6, dtype=np.int64), part)


def test_gate_conjugation_oracle_qubits():
    """Dense conjugation matches the tableau action on all generators."""
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    S_H = gate_to_symplectic(("H", 0), 1)
    _assert_conjugation(H, S_H, 2, 1)
    CN = np.zeros((4, 4))
    CN[0, 0] = CN[1, 1] = CN[3, 2] = CN[2, 3] = 1
    S_CN = gate_to_symplectic(("CNOT", 0, 1), 2)
    _assert_conjugation(CN, S_CN, 2, 2)


def _assert_conjugation(U, S, d, n):
    for u in np.eye(2 * n, dtype=np.int64):
        A = U @ pauli_operator(u, d) @ U.conj().T
        B = pauli_operator((S @ u) % d, d)
        M = A @ B.conj().T
        phase = M[0, 0]
        assert abs(abs(phase) - 1.0) < 1e-10
        assert np.max(np.abs(M - phase * np.eye(M.shape[0]))) < 1e-10


def test_gate_conjugation_oracle_qudits():
    for d in (2, 3, 4, 5):
        _assert_conjugation(fourier_gate(d), fourier_symplectic(d), d, 1)
        _assert_conjugation(sum_gate(d), sum_symplectic(d), d, 2)
        if d in (2, 3, 5):
            # the digit-differential membership test is stricter than the
            # Clifford conjugation action for prime-power moduli
            assert is_dv_symplectic(fourier_symplectic(d), d)
            assert is_dv_symplectic(sum_symplectic(d), d)


def test_two_qudit_circuit_oracle():
    """Composounds of SUM and Fourier agree with dense conjugation, N = 2."""
    for d in (2, 3, 5):
        F1 = np.kron(fourier_gate(d), np.eye(d))
        S_F1 = np.eye(4, dtype=np.int64)
        S_F1[:2, :2] = fourier_symplectic(d)
        U = sum_gate(d) @ F1
        S = (sum_symplectic(d) @ S_F1) % d
        _assert_conjugation(U, S, d, 2)


def test_crt_split_and_combine():
    rep = crt_split(6)
    assert rep.moduli == (2, 3)
    assert rep.combine(rep.split(np.array(5))) == 5
    # worked arithmetic: 2 * 5 = (0,2)*(1,2) = (0,1) = 4 mod 6
    a, b = rep.split(np.array(2)), rep.split(np.array(5))
    prod = tuple((x * y) % m for x, y, m in zip(a, b, rep.moduli))
    assert prod == (0, 1)
    assert rep.combine(prod) == 4
    # prime modulus: single factor
    assert crt_split(7).moduli == (7,)
    assert crt_split(12).moduli == (4, 3)


def test_local_ring_arithmetic_and_differential():
    el = LocalRingElement.from_int(5, 3, 2)   # 5 = 2 + 1*3 -> 2 + x
    assert el.coeffs == (2, 1)
    sq = el * el                               # (2+x)^2 = 4 + 4x + x^2 -> 1 + x
    assert sq.coeffs == (1, 1)
    d1 = ring_diff(el)
    assert d1.coeffs == (1, 0)
    # Leibniz holds modulo x^{r-1}: the product is truncated at x^r, so one
    # differentiated degree is lost at the top
    x = LocalRingElement.from_int(3, 3, 2)     # the generator x
    prod = el * x
    lhs = ring_diff(prod)
    rhs_coeffs = [(ring_diff(el) * x).coeffs[k] + (el * ring_diff(x)).coeffs[k]
                  for k in range(2)]
    assert lhs.coeffs[0] == rhs_coeffs[0] % 3
    # linearity is exact
    el2 = LocalRingElement.from_int(7, 3, 2)
    assert ring_diff(el + el2).coeffs == (ring_diff(el) + ring_diff(el2)).coeffs


def test_differential_obstruction_example():
    """sigma(u, v) = x * x vanishes in the ring but its differential does not."""
    p, r = 3, 2
    x = LocalRingElement.from_int(p, p, r)
    prod = x * x
    assert prod.coeffs == (0, 0)          # x^2 = 0 in the truncated ring
    # computed in F_p[x] first, d(x * x) = 2x dx survives the truncation, so
    # u = (x, 0) and v = (0, x) cannot sit in one symplectic basis
    S = np.array([[3, 0], [0, 3]], dtype=np.int64)
    ok, cert = dv_symplectic_basis_check([S[:, 0], S[:, 1]], 9)
    assert not ok


def test_dv_symplectic_basis_check_examples():
    for d in (2, 3, 6, 9):
        ok, _ = dv_symplectic_basis_check(
            [np.array([1, 0]), np.array([0, 1])], d)
        assert ok
    ok, cert = dv_symplectic_basis_check([np.array([5, 3]), np.array([2, 5])], 6)
    assert ok
    assert pauli_phase([5, 3], [2, 5], 6) == 1
    bad, cert = dv_symplectic_basis_check([np.array([2, 0]), np.array([0, 3])], 6)
    assert not bad
    assert cert["reason"] == "not a basis"


def test_dv_inverse_prime_power():
    rng = np.random.default_rng(3)
    for d in (4, 9, 8):
        for _ in range(10):
            while True:
                A = rng.integers(0, d, size=(3, 3))
                try:
                    inv = dv_inverse(A, d)
                    break
                except NonInvertibleBlock:
                    continue
            assert np.array_equal((A @ inv) % d, np.eye(3, dtype=np.int64))


def test_exactness_no_floats():
    S = circuit_compose(TELEPORT_CIRCUIT, 3)
    assert S.dtype == np.int64
    St, Fst = dv_teleport_transform(S, teleport_partition(3))
    assert St.dtype == np.int64 and Fst.dtype == np.int64


def test_dv_wigner_single_qudit():
    """Covariance of the discrete Wigner function with displacements, N = 1."""
    from symplectiq.discrete import dv_characteristic, dv_wigner
    for d in (2, 3):
        # |0><0| is the stabilizer state of Z
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        # chi(0) = 1/d and Wigner values are real and sum to 1
        assert dv_characteristic(rho, [0, 0], d) == pytest.approx(1.0 / d)
        total = 0.0
        for a in range(d):
            for b in range(d):
                w = dv_wigner(rho, [a, b], d)
                assert abs(w.imag) < 1e-12
                total += w.real
        assert total == pytest.approx(1.0)
        # displacement covariance: W_{D rho D^dag}(u) = W_rho(u + v)
        v = np.array([1, 1])
        Dv = pauli_operator(v, d)
        rho_moved = Dv @ rho @ Dv.conj().T
        for a in range(d):
            for b in range(d):
                u = np.array([a, b])
                lhs = dv_wigner(rho_moved, u, d)
                rhs = dv_wigner(rho, (u + v) % d, d)
                assert lhs == pytest.approx(rhs, abs=1e-10)
    with pytest.raises(SymplecticError):
        dv_wigner(np.eye(4, dtype=complex) / 4, [0, 0, 0, 0], 2)
