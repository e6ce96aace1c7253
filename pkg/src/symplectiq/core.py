"""Symplectic linear algebra over real phase space.

Conventions used throughout the package:

* A system of ``n`` bosonic modes lives on the ``2n``-dimensional real phase
  space.  The canonical ordering of coordinates is *interleaved*,
  ``(q1, p1, q2, p2, ...)``; the *grouped* ordering ``(q1, ..., qn, p1, ..., pn)``
  is supported through explicit permutations.
* The symplectic form in interleaved ordering is the block diagonal matrix
  with ``[[0, -1], [1, 0]]`` per mode.
* A matrix ``S`` is symplectic when ``S.T @ Omega @ S == Omega``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import expm, schur

TOL_SYMPLECTIC = 1e-9

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


class SymplecticError(ValueError):
    """Base class for domain errors raised by this package."""


class SingularShift(SymplecticError):
    """Cayley transform input with det(M + Id/2) = 0."""


class NotPositiveDefinite(SymplecticError):
    """Matrix expected to be strictly positive definite is not."""


class RankDeficient(SymplecticError):
    """Matrix does not have the required rank."""


class RangeError(SymplecticError):
    """Input outside the guaranteed-accuracy range of a kernel."""


class ModeOrdering(str, Enum):
    INTERLEAVED = "interleaved"
    GROUPED = "grouped"


@dataclass(frozen=True)
class SymplecticForm:
    """The symplectic form of an ``n_modes``-mode phase space."""

    n_modes: int
    ordering: ModeOrdering = ModeOrdering.INTERLEAVED

    @property
    def matrix(self) -> np.ndarray:
        return omega(self.n_modes, self.ordering)


def omega(n_modes: int, ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> np.ndarray:
    """Matrix of the symplectic form for ``n_modes`` modes."""
    if n_modes < 1:
        raise SymplecticError("n_modes must be >= 1")
    ordering = ModeOrdering(ordering)
    n = n_modes
    if ordering is ModeOrdering.INTERLEAVED:
        out = np.zeros((2 * n, 2 * n))
        for j in range(n):
            out[2 * j:2 * j + 2, 2 * j:2 * j + 2] = _J2
        return out
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = -np.eye(n)
    out[n:, :n] = np.eye(n)
    return out


def ordering_permutation(n_modes: int) -> np.ndarray:
    """Permutation P with x_grouped = P @ x_interleaved; P.T inverts it."""
    P = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        P[j, 2 * j] = 1.0
        P[n_modes + j, 2 * j + 1] = 1.0
    return P


def to_grouped(M: np.ndarray, n_modes: int) -> np.ndarray:
    """Re-express an interleaved-ordered matrix in grouped ordering."""
    P = ordering_permutation(n_modes)
    return P @ M @ P.T


def to_interleaved(M: np.ndarray, n_modes: int) -> np.ndarray:
    """Re-express a grouped-ordered matrix in interleaved ordering."""
    P = ordering_permutation(n_modes)
    return P.T @ M @ P


def vector_to_grouped(v: np.ndarray, n_modes: int) -> np.ndarray:
    return ordering_permutation(n_modes) @ v


def vector_to_interleaved(v: np.ndarray, n_modes: int) -> np.ndarray:
    return ordering_permutation(n_modes).T @ v


def q_indices(modes) -> np.ndarray:
    """Interleaved coordinate indices of the q quadratures of ``modes``."""
    return np.asarray([2 * m for m in modes], dtype=int)


def p_indices(modes) -> np.ndarray:
    """Interleaved coordinate indices of the p quadratures of ``modes``."""
    return np.asarray([2 * m + 1 for m in modes], dtype=int)


def mode_indices(modes) -> np.ndarray:
    """All interleaved coordinate indices of ``modes``, q before p per mode."""
    out = []
    for m in modes:
        out.extend((2 * m, 2 * m + 1))
    return np.asarray(out, dtype=int)


def sigma(u: np.ndarray, v: np.ndarray,
          ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> float:
    """Symplectic form value u^T Omega v."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0] // 2
    return float(u @ omega(n, ordering) @ v)


def is_symplectic(S: np.ndarray, tol: float = TOL_SYMPLECTIC,
                  ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> bool:
    """True iff ``max|S^T Omega S - Omega| <= tol``."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise SymplecticError(f"expected square even-dimensional matrix, got {S.shape}")
    Om = omega(S.shape[0] // 2, ordering)
    return bool(np.max(np.abs(S.T @ Om @ S - Om)) <= tol)


def symplectic_residual(S: np.ndarray,
                        ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> float:
    """max-norm of S^T Omega S - Omega."""
    S = np.asarray(S, dtype=float)
    Om = omega(S.shape[0] // 2, ordering)
    return float(np.max(np.abs(S.T @ Om @ S - Om)))


def assert_symplectic(S: np.ndarray, tol: float = TOL_SYMPLECTIC,
                      ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> None:
    res = symplectic_residual(S, ordering)
    if res > tol:
        raise SymplecticError(f"matrix is not symplectic (residual {res:.3e} > {tol:.1e})")


def inverse(S: np.ndarray,
            ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> np.ndarray:
    """Inverse of a symplectic matrix, S^{-1} = -Omega S^T Omega."""
    S = np.asarray(S, dtype=float)
    Om = omega(S.shape[0] // 2, ordering)
    return -Om @ S.T @ Om


def is_sp_algebra_element(M: np.ndarray, tol: float = TOL_SYMPLECTIC) -> bool:
    """True iff M Omega + Omega M^T = 0, i.e. M generates a symplectic flow."""
    M = np.asarray(M, dtype=float)
    Om = omega(M.shape[0] // 2)
    return bool(np.max(np.abs(M @ Om + Om @ M.T)) <= tol)


def exp_map(H: np.ndarray, t: float, max_norm: float = 50.0) -> np.ndarray:
    """Symplectic flow generated by the symmetric matrix ``H``: expm(t * Omega H).

    Inputs with ``||t * Omega H||_2 > max_norm`` are rejected; below that the
    scaling-and-squaring kernel is accurate to better than 1e-12 relative.
    """
    H = np.asarray(H, dtype=float)
    if np.max(np.abs(H - H.T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise SymplecticError("generator H must be symmetric")
    Om = omega(H.shape[0] // 2)
    A = t * (Om @ H)
    if np.linalg.norm(A, 2) > max_norm:
        raise RangeError(f"||t * Omega H|| exceeds {max_norm}; rescale the flow")
    return expm(A)


def cayley(M: np.ndarray) -> np.ndarray:
    """Symplectic Cayley transform S = Id - (M + Id/2)^{-1} of an sp element M."""
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    shift = M + 0.5 * np.eye(d)
    det = np.linalg.det(shift)
    if abs(det) < 1e-300 or not np.isfinite(det):
        raise SingularShift("det(M + Id/2) = 0; Cayley transform undefined")
    cond = np.linalg.cond(shift)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularShift("M + Id/2 is numerically singular")
    return np.eye(d) - np.linalg.inv(shift)


def random_symplectic(n_modes: int, seed: int, squeeze_bound: float = 2.0) -> np.ndarray:
    """Deterministic random symplectic matrix, R Z R' with Haar-like rotations.

    The Euler Z-factor entries are log-uniform in [1/squeeze_bound, squeeze_bound].
    """
    if squeeze_bound < 1.0:
        raise SymplecticError("squeeze_bound must be >= 1")
    rng = np.random.default_rng(seed)
    R1 = random_orthogonal_symplectic(n_modes, rng)
    R2 = random_orthogonal_symplectic(n_modes, rng)
    if squeeze_bound == 1.0:
        return R1 @ R2
    logs = rng.uniform(-np.log(squeeze_bound), np.log(squeeze_bound), size=n_modes)
    Z = np.zeros((2 * n_modes, 2 * n_modes))
    for j, z in enumerate(np.exp(logs)):
        Z[2 * j, 2 * j] = z
        Z[2 * j + 1, 2 * j + 1] = 1.0 / z
    return R1 @ Z @ R2


def random_orthogonal_symplectic(n_modes: int, rng) -> np.ndarray:
    """Random element of Sp(2n) ∩ O(2n) (the unitary subgroup)."""
    n = n_modes
    A = rng.normal(size=(n, n))
    B = rng.normal(size=(n, n))
    her_re = (A + A.T) / 2
    her_im = (B - B.T) / 2
    # real representation of the Hermitian matrix her_re + i*her_im; it commutes
    # with Omega, so Omega @ Hs is both skew and in sp -> exp is in Sp ∩ O.
    Hs = np.zeros((2 * n, 2 * n))
    for j in range(n):
        for k in range(n):
            Hs[2 * j, 2 * k] = her_re[j, k]
            Hs[2 * j + 1, 2 * k + 1] = her_re[j, k]
            Hs[2 * j, 2 * k + 1] = -her_im[j, k]
            Hs[2 * j + 1, 2 * k] = her_im[j, k]
    return expm(omega(n) @ Hs)


# ---------------------------------------------------------------------------
# subspace machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubspaceBasis:
    """Subspace of phase space spanned by the columns of ``F``.

    ``kind`` is one of "isotropic", "lagrangian", "symplectic", "general".
    """

    F: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        object.__setattr__(self, "F", F)
        if F.ndim != 2:
            raise SymplecticError("basis must be a 2-D matrix of column vectors")
        if np.linalg.matrix_rank(F) < F.shape[1]:
            raise SymplecticError("basis columns must be linearly independent")
        n = F.shape[0] // 2
        G = F.T @ omega(n) @ F
        scale = max(1.0, float(np.max(np.abs(F)))) ** 2
        if self.kind == "isotropic":
            if np.max(np.abs(G)) > 1e-10 * scale:
                raise SymplecticError("columns do not span an isotropic subspace")
        elif self.kind == "lagrangian":
            if F.shape[1] != n:
                raise SymplecticError("a Lagrangian plane has exactly n_modes columns")
            if np.max(np.abs(G)) > 1e-10 * scale:
                raise SymplecticError("columns do not span a Lagrangian plane")
        elif self.kind == "symplectic":
            if F.shape[1] % 2 or np.linalg.matrix_rank(G) < F.shape[1]:
                raise SymplecticError("columns do not span a symplectic subspace")
        elif self.kind != "general":
            raise SymplecticError(f"unknown subspace kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.F.shape[1]

    @staticmethod
    def from_indices(indices, n_modes: int, kind: str = "general") -> "SubspaceBasis":
        """Coordinate subspace spanned by canonical basis vectors ``indices``."""
        F = np.zeros((2 * n_modes, len(indices)))
        for col, idx in enumerate(indices):
            F[idx, col] = 1.0
        return SubspaceBasis(F, kind)


def submatrix(S: np.ndarray, rows: SubspaceBasis, cols: SubspaceBasis) -> np.ndarray:
    """Compression F_rows^T S F_cols of S between two subspaces."""
    S = np.asarray(S, dtype=float)
    if rows.F.shape[0] != S.shape[0] or cols.F.shape[0] != S.shape[1]:
        raise SymplecticError("basis dimensions do not match the matrix")
    return rows.F.T @ S @ cols.F


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------

def skew_canonical_form(K: np.ndarray, tol: float = 1e-12):
    """Orthogonal canonical form of a real skew-symmetric matrix.

    Returns ``(U, mus)`` with ``U`` orthogonal and ``U.T @ K @ U`` equal to
    ``blockdiag(mus[0]*J, mus[1]*J, ..., 0, ...)`` where ``J = [[0,-1],[1,0]]``
    and ``mus`` are positive and sorted descending.
    """
    K = np.asarray(K, dtype=float)
    scale = max(1.0, float(np.max(np.abs(K))))
    T, Z = schur(K)
    n = K.shape[0]
    mus, pairs, zero_cols = [], [], []
    j = 0
    while j < n:
        if j + 1 < n and abs(T[j + 1, j]) > tol * scale:
            b = T[j, j + 1]
            u1, u2 = Z[:, j], Z[:, j + 1]
            if b > 0:  # arrange each block as [[0, -mu], [mu, 0]] with mu > 0
                u1, u2 = u2, u1
                b = -b
            mus.append(-b)
            pairs.append((u1, u2))
            j += 2
        else:
            zero_cols.append(Z[:, j])
            j += 1
    order = np.argsort(mus)[::-1]
    mus = [mus[i] for i in order]
    pairs = [pairs[i] for i in order]
    cols = [c for p in pairs for c in p] + zero_cols
    U = np.column_stack(cols) if cols else np.eye(n)
    return U, np.asarray(mus)


def _sqrt_psd(V: np.ndarray, power: float) -> np.ndarray:
    w, Q = np.linalg.eigh(V)
    if np.min(w) <= 0:
        raise NotPositiveDefinite("matrix is not strictly positive definite")
    return Q @ np.diag(w ** power) @ Q.T


def williamson(V: np.ndarray):
    """Williamson normal form of a positive definite matrix.

    Returns ``(S, nus)`` with ``S`` symplectic, ``nus`` ascending, and
    ``S @ V @ S.T = diag(nus[0], nus[0], nus[1], nus[1], ...)``.
    """
    V = np.asarray(V, dtype=float)
    if np.max(np.abs(V - V.T)) > 1e-10 * max(1.0, np.max(np.abs(V))):
        raise NotPositiveDefinite("covariance must be symmetric")
    n = V.shape[0] // 2
    Vmh = _sqrt_psd(V, -0.5)
    W = Vmh @ omega(n) @ Vmh
    U, mus = skew_canonical_form(W)
    if len(mus) != n:
        raise NotPositiveDefinite("degenerate symplectic spectrum; matrix not positive definite")
    nus = 1.0 / mus  # mus descending -> nus ascending
    D_sqrt = np.diag(np.sqrt(np.repeat(nus, 2)))
    S = D_sqrt @ U.T @ Vmh
    return S, nus


def euler_decompose(S: np.ndarray):
    """Euler (polar) decomposition S = R @ Z @ Rp.

    ``R`` and ``Rp`` are orthogonal symplectic, ``Z`` is diagonal symplectic
    with (z, 1/z) pairs per mode.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    Om = omega(n)
    P2 = S @ S.T
    P = _sqrt_psd(P2, 0.5)          # positive-definite symplectic polar factor
    Uo = np.linalg.solve(P, S)      # orthogonal symplectic
    w, Q = np.linalg.eigh(P)
    order = np.argsort(w)[::-1]
    w, Q = w[order], Q[:, order]
    taken: list[tuple[np.ndarray, np.ndarray]] = []
    for k in range(2 * n):
        if len(taken) == n:
            break
        if w[k] < 1.0 - 1e-12:
            continue
        u = Q[:, k]
        for (uc, vc) in taken:  # project out already-paired directions
            u = u - (uc @ u) * uc - (vc @ u) * vc
        nrm = np.linalg.norm(u)
        if nrm < 1e-8:
            continue
        u = u / nrm
        taken.append((u, Om @ u))
    if len(taken) != n:
        raise SymplecticError("failed to pair the eigenvectors of the polar factor")
    R = np.zeros((2 * n, 2 * n))
    Z = np.zeros((2 * n, 2 * n))
    for j, (u, v) in enumerate(taken):
        R[:, 2 * j] = u
        R[:, 2 * j + 1] = v
        Z[2 * j, 2 * j] = u @ P @ u
        Z[2 * j + 1, 2 * j + 1] = v @ P @ v
    Rp = R.T @ Uo
    return R, Z, Rp


def pre_iwasawa(S: np.ndarray):
    """Pre-Iwasawa decomposition of a grouped-ordering symplectic matrix.

    Returns ``(P, L, V, W)`` where::

        S = [[Id, 0], [P, Id]] @ [[L.T, 0], [0, inv(L)]] @ [[V, W], [-W, V]]

    with P symmetric, L symmetric positive definite and V + iW unitary.  All
    three factors are symplectic in grouped ordering.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    A, B = S[:n, :n], S[:n, n:]
    C, D = S[n:, :n], S[n:, n:]
    X = A @ A.T + B @ B.T
    Xh = _sqrt_psd(X, 0.5)
    Xmh = _sqrt_psd(X, -0.5)
    L = Xh
    V = Xmh @ A
    W = Xmh @ B
    P = (C @ A.T + D @ B.T) @ np.linalg.inv(X)
    return P, L, V, W


def pre_iwasawa_factors(P: np.ndarray, L: np.ndarray, V: np.ndarray, W: np.ndarray):
    """The three grouped-ordering factor matrices of the pre-Iwasawa form."""
    n = P.shape[0]
    Idn = np.eye(n)
    Z = np.zeros((n, n))
    F1 = np.block([[Idn, Z], [P, Idn]])
    F2 = np.block([[L.T, Z], [Z, np.linalg.inv(L)]])
    F3 = np.block([[V, W], [-W, V]])
    return F1, F2, F3


def symplectic_svd(M: np.ndarray):
    """Symplectic singular value decomposition of a full-column-rank matrix.

    For M of shape (2m, n) with rank n, returns ``(S, lam, Q)`` with ``S``
    symplectic, ``lam`` positive of length n, ``Q`` orthogonal (n x n), and::

        M = S @ vstack([diag(lam), zeros]) @ Q

    The packing into the leading n phase-space coordinates requires the range
    of M to carry a symplectic form of maximal rank (isotropy defect at most
    one direction); other inputs raise RankDeficient.
    """
    M = np.asarray(M, dtype=float)
    m2, nc = M.shape
    if m2 % 2:
        raise SymplecticError("row dimension must be even")
    if np.linalg.matrix_rank(M) < nc:
        raise RankDeficient("matrix must have full column rank")
    n = m2 // 2
    Om = omega(n)
    H = M @ M.T

    w_eig, Q_eig = np.linalg.eigh(H)
    order = np.argsort(w_eig)[::-1]
    w_eig, Q_eig = w_eig[order], Q_eig[:, order]
    ker = Q_eig[:, nc:]                       # orthonormal basis of ker(H)

    # trailing modes: symplectic pairs inside ker(H); at most one leftover
    # radical direction can straddle the leading/trailing boundary
    ker_pairs: list[tuple[np.ndarray, np.ndarray]] = []
    kappa = None
    if ker.shape[1]:
        G_ker = ker.T @ Om @ ker
        U_k, mus_k = skew_canonical_form(G_ker, tol=1e-11)
        k_rad = ker.shape[1] - 2 * len(mus_k)
        if k_rad > 1:
            raise RankDeficient(
                "kernel of M M^T is too isotropic for the contiguous packing")
        for j, mu in enumerate(mus_k):
            ker_pairs.append((ker @ U_k[:, 2 * j] / np.sqrt(mu),
                              ker @ U_k[:, 2 * j + 1] / np.sqrt(mu)))
        if k_rad:
            kappa = ker @ U_k[:, -1]
    k = 0 if kappa is None else 1
    if (nc - k) % 2:
        raise RankDeficient("kernel isotropy defect does not match the column parity")

    # ambient space for the leading modes: sigma-complement of the kernel pairs
    if ker_pairs:
        rows = np.asarray([c @ Om for pair in ker_pairs for c in pair])
        _, sv, VT = np.linalg.svd(rows)
        B_amb = VT[np.sum(sv > 1e-11 * max(1.0, sv[0])):, :].T
    else:
        B_amb = np.eye(2 * n)
    h_amb = B_amb.T @ H @ B_amb
    w_amb = B_amb.T @ Om @ B_amb

    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    diag_vals: list[float] = []
    straddle = None
    if k:
        # parabolic block: generalized null vector with h delta = w_amb kappa
        kap = B_amb.T @ kappa
        delta, *_ = np.linalg.lstsq(h_amb, w_amb @ kap, rcond=None)
        s = float(kap @ w_amb @ delta)        # = -sigma(delta, kappa)
        if abs(s) < 1e-10:
            raise RankDeficient("parabolic pairing degenerates; input not generic")
        kap = kap / s                          # now sigma(delta, kappa) = -1
        # leading complement: sigma-orthogonal to both kappa and delta
        cond_rows = np.vstack([kap @ w_amb, delta @ w_amb])
        _, sv, VT = np.linalg.svd(cond_rows)
        W_basis = VT[np.sum(sv > 1e-11 * max(1.0, sv[0])):, :].T
        straddle = (B_amb @ delta, B_amb @ kap)
    else:
        W_basis = np.eye(B_amb.shape[1])

    if W_basis.shape[1]:
        B_w = B_amb @ W_basis
        w_w = B_w.T @ Om @ B_w
        U_w, mus_w = skew_canonical_form(w_w, tol=1e-11)
        if 2 * len(mus_w) != B_w.shape[1]:
            raise RankDeficient("leading block carries a degenerate form")
        cols = []
        for j, mu in enumerate(mus_w):
            cols.append(B_w @ U_w[:, 2 * j] / np.sqrt(mu))
            cols.append(B_w @ U_w[:, 2 * j + 1] / np.sqrt(mu))
        Fs = np.column_stack(cols)
        Hs = Fs.T @ H @ Fs                    # positive definite on the leading block
        Sw, _ = williamson(Hs)
        Fs = Fs @ Sw.T
        for j in range(Fs.shape[1] // 2):
            u, v = Fs[:, 2 * j], Fs[:, 2 * j + 1]
            pairs.append((u, v))
            diag_vals.extend((float(u @ H @ u), float(v @ H @ v)))
    if straddle is not None:
        d_, k_ = straddle
        pairs.append((d_, k_))
        diag_vals.append(float(d_ @ H @ d_))
    pairs.extend(ker_pairs)

    T = np.zeros((2 * n, 2 * n))
    for j, (u, v) in enumerate(pairs):
        T[:, 2 * j] = u
        T[:, 2 * j + 1] = v
    # columns of T form a symplectic basis: S1 = T^T gives S1 H S1^T diagonal
    S1 = T.T
    Gtop = (S1 @ M)[:nc, :]
    lam = np.sqrt(np.asarray(diag_vals))
    Q = (Gtop.T / lam).T
    S = np.linalg.inv(S1)
    return S, lam, Q


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def matrix_to_json(M: np.ndarray, n_modes: int,
                   ordering: ModeOrdering | str = ModeOrdering.INTERLEAVED) -> str:
    M = np.asarray(M, dtype=float)
    return json.dumps({
        "n_modes": n_modes,
        "ordering": ModeOrdering(ordering).value,
        "data": M.reshape(-1).tolist(),
    })


def matrix_from_json(text: str):
    obj = json.loads(text)
    n = int(obj["n_modes"])
    data = np.asarray(obj["data"], dtype=float)
    side = int(round(np.sqrt(data.size)))
    return data.reshape(side, side), n, ModeOrdering(obj["ordering"])
