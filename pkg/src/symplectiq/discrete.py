"""Discrete-variable symplectic geometry over Z/dZ, exact arithmetic only.

Vectors are exponent labels of generalized Pauli operators in interleaved
layout ``(z1, x1, z2, x2, ...)``; the discrete symplectic form is
``sigma(u, v) = sum_j u[2j] v[2j+1] - u[2j+1] v[2j]  (mod d)``.

For prime-power moduli ``p**r`` the symplectic-homomorphism test follows the
local-ring formalism: entries are read as base-p digit polynomials in
``F_p[x]/(x^r)`` and all formal differentials of the form values must match.
Composite moduli are handled componentwise through the Chinese remainder
theorem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from symplectiq.core import SymplecticError


class NonInvertibleBlock(SymplecticError):
    """A required submatrix is not invertible over the ring."""


def _as_mod(a, d: int) -> np.ndarray:
    arr = np.asarray(a)
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if np.max(np.abs(arr - rounded)) > 0:
            raise SymplecticError("modular data must be integral")
        arr = rounded.astype(np.int64)
    return np.mod(arr.astype(np.int64), d)


def dv_omega(n_modes: int, d: int) -> np.ndarray:
    """Discrete symplectic form: blockdiag([[0, 1], [-1, 0]]) mod d."""
    Om = np.zeros((2 * n_modes, 2 * n_modes), dtype=np.int64)
    for j in range(n_modes):
        Om[2 * j, 2 * j + 1] = 1
        Om[2 * j + 1, 2 * j] = d - 1
    return Om


def pauli_phase(u, v, d: int) -> int:
    """Commutation phase exponent sigma(u, v) mod d of two Pauli labels."""
    u = _as_mod(u, d)
    v = _as_mod(v, d)
    if u.shape != v.shape or u.size % 2:
        raise SymplecticError("labels must be equal-length even vectors")
    total = 0
    for j in range(u.size // 2):
        total += int(u[2 * j]) * int(v[2 * j + 1]) - int(u[2 * j + 1]) * int(v[2 * j])
    return total % d


def factorize(d: int):
    """Prime-power factorization [(p, r), ...] of d >= 2."""
    if d < 2:
        raise SymplecticError("modulus must be >= 2")
    out = []
    rest = d
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            r = 0
            while rest % p == 0:
                rest //= p
                r += 1
            out.append((p, r))
        p += 1
    if rest > 1:
        out.append((rest, 1))
    return out


@dataclass(frozen=True)
class CRTRep:
    """Chinese-remainder splitting of Z/dZ into coprime prime-power factors."""

    d: int
    moduli: tuple

    @staticmethod
    def of(d: int) -> "CRTRep":
        return CRTRep(d, tuple(p ** r for p, r in factorize(d)))

    def split(self, a):
        a = np.asarray(a)
        return tuple(_as_mod(a, m) for m in self.moduli)

    def combine(self, parts):
        """Inverse of split via the constructive CRT."""
        d = self.d
        result = np.zeros_like(np.asarray(parts[0], dtype=np.int64))
        for m, part in zip(self.moduli, parts):
            q = d // m
            inv = pow(q % m, -1, m)
            result = (result + np.asarray(part, dtype=np.int64) * q * inv) % d
        return result


def crt_split(d: int) -> CRTRep:
    return CRTRep.of(d)


# ---------------------------------------------------------------------------
# the local ring F_p[x]/(x^r)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalRingElement:
    """Base-p digit polynomial ``sum a_j x^j`` representing an element of Z/p^rZ."""

    coeffs: tuple
    p: int

    @staticmethod
    def from_int(a: int, p: int, r: int) -> "LocalRingElement":
        a = a % (p ** r)
        digits = []
        for _ in range(r):
            digits.append(a % p)
            a //= p
        return LocalRingElement(tuple(digits), p)

    @property
    def r(self) -> int:
        return len(self.coeffs)

    def __add__(self, other):
        return LocalRingElement(
            tuple((a + b) % self.p for a, b in zip(self.coeffs, other.coeffs)), self.p)

    def __neg__(self):
        return LocalRingElement(tuple((-a) % self.p for a in self.coeffs), self.p)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Digit-polynomial product truncated at x^r (no carries)."""
        r = self.r
        out = [0] * r
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j < r:
                    out[i + j] = (out[i + j] + a * b) % self.p
        return LocalRingElement(tuple(out), self.p)

    def residue(self) -> int:
        """Value at the closed point (the constant digit)."""
        return self.coeffs[0]


def ring_diff(b: LocalRingElement, order: int = 1) -> LocalRingElement:
    """Formal differential d^order of a digit polynomial, computed in F_p[x].

    Each application maps ``sum a_j x^j`` to ``sum j a_j x^{j-1}`` with
    coefficients reduced mod p; the result is truncated back to degree < r.
    """
    coeffs = list(b.coeffs)
    for _ in range(order):
        coeffs = [(j * coeffs[j]) % b.p for j in range(1, len(coeffs))] + [0]
    return LocalRingElement(tuple(coeffs), b.p)


def _digits(a: int, p: int, r: int):
    """Base-p digit polynomial of a mod p^r, as a coefficient list."""
    a = a % (p ** r)
    out = []
    for _ in range(r):
        out.append(a % p)
        a //= p
    return out


def _poly_mul(a, b, p):
    """Product in F_p[x] without degree truncation."""
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _poly_add(a, b, p, sign=1):
    out = [0] * max(len(a), len(b))
    for i, ai in enumerate(a):
        out[i] = (out[i] + ai) % p
    for j, bj in enumerate(b):
        out[j] = (out[j] + sign * bj) % p
    return out


def _poly_diff(a, p, order=1):
    for _ in range(order):
        a = [(j * a[j]) % p for j in range(1, len(a))] or [0]
    return a


def _poly_trunc_eq(a, b, p, r):
    """Equality of two F_p[x] polynomials modulo x^r."""
    a = (a + [0] * r)[:r]
    b = (b + [0] * r)[:r]
    return all((x - y) % p == 0 for x, y in zip(a, b))


def _sigma_poly_full(S, p, r, i, j, n):
    """sigma(S e_i, S e_j) computed in F_p[x] before the quotient."""
    acc = [0]
    for m in range(n):
        a = _digits(int(S[2 * m, i]), p, r)
        b = _digits(int(S[2 * m + 1, j]), p, r)
        c = _digits(int(S[2 * m + 1, i]), p, r)
        e = _digits(int(S[2 * m, j]), p, r)
        acc = _poly_add(acc, _poly_mul(a, b, p), p)
        acc = _poly_add(acc, _poly_mul(c, e, p), p, sign=-1)
    return acc


def _is_symplectic_prime(S: np.ndarray, p: int) -> bool:
    n = S.shape[0] // 2
    Om = dv_omega(n, p)
    return bool(np.array_equal(_as_mod(S.T @ Om @ S, p), Om))


def _is_symplectic_prime_power(S: np.ndarray, p: int, r: int) -> bool:
    """All r differential conditions on the digit-polynomial form values.

    The form values are expanded in F_p[x] first (the footnoted convention:
    differentiate before passing to the quotient), then each differential is
    compared modulo x^r.
    """
    n = S.shape[0] // 2
    d = p ** r
    S = _as_mod(S, d)
    Om = dv_omega(n, d)
    for i in range(2 * n):
        for j in range(i + 1, 2 * n):
            lhs = _sigma_poly_full(S, p, r, i, j, n)
            rhs = _digits(int(Om[i, j]), p, r)
            for order in range(r):
                if not _poly_trunc_eq(_poly_diff(lhs, p, order),
                                      _poly_diff(rhs, p, order), p, r):
                    return False
    return True


def is_dv_symplectic(S, d: int) -> bool:
    """Symplectic test mod d: exact congruence for primes, differential
    conditions for prime powers, CRT componentwise for composites."""
    S = _as_mod(S, d)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise SymplecticError("expected a square even-dimensional matrix")
    for p, r in factorize(d):
        Sp = _as_mod(S, p ** r)
        if r == 1:
            if not _is_symplectic_prime(Sp, p):
                return False
        else:
            if not _is_symplectic_prime_power(Sp, p, r):
                return False
    return True


def dv_inverse(S, d: int) -> np.ndarray:
    """Exact inverse of a matrix over Z/dZ (CRT componentwise)."""
    S = _as_mod(S, d)
    rep = CRTRep.of(d)
    parts = []
    for m, (p, r) in zip(rep.moduli, factorize(d)):
        parts.append(_inverse_mod_prime_power(_as_mod(S, m), p, r))
    return rep.combine(parts)


def _inverse_mod_prime(S: np.ndarray, p: int) -> np.ndarray:
    n = S.shape[0]
    A = np.concatenate([S % p, np.eye(n, dtype=np.int64)], axis=1)
    row = 0
    for col in range(n):
        piv = None
        for rr in range(row, n):
            if A[rr, col] % p:
                piv = rr
                break
        if piv is None:
            raise NonInvertibleBlock(f"matrix not invertible mod {p}")
        A[[row, piv]] = A[[piv, row]]
        inv = pow(int(A[row, col]), -1, p)
        A[row] = (A[row] * inv) % p
        for rr in range(n):
            if rr != row and A[rr, col]:
                A[rr] = (A[rr] - A[rr, col] * A[row]) % p
        row += 1
    return A[:, n:] % p


def _inverse_mod_prime_power(S: np.ndarray, p: int, r: int) -> np.ndarray:
    """Hensel lift of the mod-p inverse to mod p^r."""
    m = p ** r
    X = _inverse_mod_prime(S % p, p).astype(np.int64)
    k = 1
    while k < r:
        k = min(2 * k, r)
        mod = p ** k
        X = (X @ (2 * np.eye(S.shape[0], dtype=np.int64) - (S % mod) @ X)) % mod
    return X % m


# ---------------------------------------------------------------------------
# gates and circuits over Z/2Z
# ---------------------------------------------------------------------------

def gate_to_symplectic(gate, n_qubits: int) -> np.ndarray:
    """Mod-2 symplectic matrix of a Clifford gate on ``n_qubits``.

    ``gate`` is ``("H", k)``, ``("CNOT", control, target)`` or
    ``("custom", table)`` with ``table`` a full 2n x 2n mod-2 matrix.  Exponent
    labels transform as ``u -> S u``; the conventions are fixed by
    ``H: Z <-> X`` and ``CNOT: Z_t -> Z_c Z_t, X_c -> X_c X_t``.
    """
    n = n_qubits
    S = np.eye(2 * n, dtype=np.int64)
    kind = gate[0].upper() if isinstance(gate[0], str) else None
    if kind == "H":
        k = gate[1]
        S[2 * k, 2 * k] = 0
        S[2 * k + 1, 2 * k + 1] = 0
        S[2 * k, 2 * k + 1] = 1
        S[2 * k + 1, 2 * k] = 1
        return S
    if kind == "CNOT":
        ctrl, tgt = gate[1], gate[2]
        if ctrl == tgt:
            raise SymplecticError("control and target must differ")
        # Z_tgt -> Z_ctrl Z_tgt ; X_ctrl -> X_ctrl X_tgt
        S[2 * ctrl, 2 * tgt] = 1
        S[2 * tgt + 1, 2 * ctrl + 1] = 1
        return S
    if kind == "CUSTOM":
        table = _as_mod(gate[1], 2)
        if table.shape != (2 * n, 2 * n):
            raise SymplecticError("custom table must be a full 2n x 2n matrix")
        if not is_dv_symplectic(table, 2):
            raise SymplecticError("custom table is not symplectic mod 2")
        return table
    raise SymplecticError(f"unknown gate {gate!r}")


def circuit_compose(gates, n_qubits: int, d: int = 2) -> np.ndarray:
    """Ordered product of gate matrices; first gate in the list acts first."""
    S = np.eye(2 * n_qubits, dtype=np.int64)
    for gate in gates:
        G = gate if isinstance(gate, np.ndarray) else gate_to_symplectic(gate, n_qubits)
        S = (G @ S) % d
    if not is_dv_symplectic(S, d):
        raise SymplecticError("composed circuit is not symplectic")
    return S


@dataclass(frozen=True)
class DVPartition:
    """Index sets (0-based coordinates in the interleaved layout) for the
    discrete teleportation transform."""

    in_idx: tuple
    out_idx: tuple
    z_idx: tuple
    zp_idx: tuple
    h_idx: tuple
    hp_idx: tuple


def teleport_partition(n_qubits: int = 3) -> DVPartition:
    """Single-qubit teleportation: input qubit 0, ancillas 1-2, output qubit 2."""
    if n_qubits != 3:
        raise SymplecticError("the standard teleportation circuit uses 3 qubits")
    return DVPartition(
        in_idx=(0, 1), out_idx=(4, 5),
        z_idx=(2, 4), zp_idx=(3, 5),
        h_idx=(0, 2), hp_idx=(1, 3),
    )


def gate_teleport_partition() -> DVPartition:
    """Gate teleportation: data qubits 0 and 3, ancilla pair 1-2."""
    return DVPartition(
        in_idx=(0, 1, 6, 7), out_idx=(0, 1, 6, 7),
        z_idx=(2, 4), zp_idx=(3, 5),
        h_idx=(2, 5), hp_idx=(3, 4),
    )


def dv_teleport_transform(S, part: DVPartition, d: int = 2):
    """Exact modular teleportation transform.

    Returns ``(S_tilde, F_star)`` with
    ``S_tilde = S_oi - S_oz' (S_hz')^{-1} S_hi`` and
    ``F_star = S_oz' (S_hz')^{-1}`` over Z/dZ.
    """
    S = _as_mod(S, d)
    sub = lambda rows, cols: S[np.ix_(rows, cols)]
    S_h_zp = sub(part.h_idx, part.zp_idx)
    try:
        inv = _crt_matrix_inverse(S_h_zp, d)
    except NonInvertibleBlock:
        raise NonInvertibleBlock("S_{h,z'} is not invertible mod d")
    S_tilde = (sub(part.out_idx, part.in_idx)
               - sub(part.out_idx, part.zp_idx) @ inv @ sub(part.h_idx, part.in_idx)) % d
    F_star = (sub(part.out_idx, part.zp_idx) @ inv) % d
    return S_tilde, F_star


def _crt_matrix_inverse(M: np.ndarray, d: int) -> np.ndarray:
    rep = CRTRep.of(d)
    parts = [_inverse_mod_prime_power(_as_mod(M, m), p, r)
             for m, (p, r) in zip(rep.moduli, factorize(d))]
    return rep.combine(parts)


def feedforward_correction(F_star: np.ndarray, syndrome, d: int = 2) -> np.ndarray:
    """Pauli label D(F_star @ syndrome) applied after the syndrome measurement."""
    syndrome = _as_mod(syndrome, d)
    return (_as_mod(F_star, d) @ syndrome) % d


# ---------------------------------------------------------------------------
# symplectic bases over general moduli
# ---------------------------------------------------------------------------

def dv_symplectic_basis_check(vectors, d: int):
    """Check that 2N vectors form a symplectic basis of the rank-2N module.

    Componentwise over the CRT factors; prime-power components additionally
    satisfy the differential conditions.  Returns ``(ok, certificate)``.
    """
    V = _as_mod(np.column_stack([np.asarray(v) for v in vectors]), d)
    if V.shape[1] % 2 or V.shape[0] != V.shape[1]:
        raise SymplecticError("need 2N vectors of length 2N")
    n = V.shape[0] // 2
    # arrange as columns of a candidate symplectic matrix (e_j, f_j) pairs
    for p, r in factorize(d):
        m = p ** r
        Vm = _as_mod(V, m)
        try:
            _inverse_mod_prime_power(Vm, p, r)
        except NonInvertibleBlock:
            return False, {"factor": m, "reason": "not a basis"}
        if r == 1:
            if not _is_symplectic_prime(Vm, p):
                return False, {"factor": m, "reason": "form not preserved"}
        else:
            if not _is_symplectic_prime_power(Vm, p, r):
                return False, {"factor": m, "reason": "differential condition fails"}
    return True, {"factors": tuple(m for m, _ in
                                   zip(CRTRep.of(d).moduli, factorize(d)))}


# ---------------------------------------------------------------------------
# dense clock/shift oracle helpers (used by the verification suite)
# ---------------------------------------------------------------------------

def clock_shift(d: int):
    """Dense d x d clock (Z) and shift (X) matrices with omega = exp(2 pi i/d)."""
    om = np.exp(2j * np.pi / d)
    Z = np.diag(om ** np.arange(d))
    X = np.zeros((d, d), dtype=complex)
    for j in range(d):
        X[(j + 1) % d, j] = 1.0
    return Z, X


def pauli_operator(label, d: int) -> np.ndarray:
    """Dense operator of the label: tensor product of Z^q X^p per qudit."""
    label = _as_mod(label, d)
    Z, X = clock_shift(d)
    n = label.size // 2
    out = np.ones((1, 1), dtype=complex)
    for j in range(n):
        q, p = int(label[2 * j]), int(label[2 * j + 1])
        out = np.kron(out, np.linalg.matrix_power(Z, q) @ np.linalg.matrix_power(X, p))
    return out


def dv_characteristic(rho: np.ndarray, u, d: int) -> complex:
    """Discrete characteristic function (1/d) Tr[D(-u) rho], single qudit only.

    The multi-qudit normalization is left open; inputs with more than one
    qudit are rejected.
    """
    u = _as_mod(u, d)
    if u.size != 2:
        raise SymplecticError("discrete characteristic evaluation covers one qudit only")
    rho = np.asarray(rho, dtype=complex)
    D = pauli_operator((-u) % d, d)
    return complex(np.trace(D @ rho) / d)


def dv_wigner(rho: np.ndarray, u, d: int) -> complex:
    """Discrete Wigner function (1/d) sum_v omega^{sigma(u, v)} chi(v), one qudit."""
    u = _as_mod(u, d)
    if u.size != 2:
        raise SymplecticError("discrete Wigner evaluation covers one qudit only")
    om = np.exp(2j * np.pi / d)
    total = 0.0 + 0.0j
    for a in range(d):
        for b in range(d):
            v = np.array([a, b])
            total += om ** pauli_phase(u, v, d) * dv_characteristic(rho, v, d)
    return complex(total / d)


def fourier_gate(d: int) -> np.ndarray:
    """Dense qudit Fourier gate (X -> Z, Z -> X^{-1} under conjugation)."""
    om = np.exp(2j * np.pi / d)
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return om ** (j * k) / np.sqrt(d)


def fourier_symplectic(d: int) -> np.ndarray:
    """Mod-d tableau of the Fourier gate: labels map by [[0, 1], [-1, 0]]."""
    return np.array([[0, 1], [d - 1, 0]], dtype=np.int64)


def sum_symplectic(d: int) -> np.ndarray:
    """Mod-d tableau of the two-qudit SUM gate (control first)."""
    S = np.eye(4, dtype=np.int64)
    S[3, 1] = 1        # X_ctrl -> X_ctrl X_tgt
    S[0, 2] = d - 1    # Z_tgt -> Z_ctrl^{-1} Z_tgt
    return S


def sum_gate(d: int) -> np.ndarray:
    """Dense two-qudit SUM gate |a, b> -> |a, a + b mod d>."""
    U = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            U[a * d + (a + b) % d, a * d + b] = 1.0
    return U
