"""Gaussian channels (T, N, d) and their symplectic dilations."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from symplectiq.core import SymplecticError, omega, skew_canonical_form
from symplectiq.states import GaussianState


class SingularIdMinusT(SymplecticError):
    """det(Id - T) = 0 and the channel could not be factored around it."""


class NoPhysicalEnv(SymplecticError):
    """No positive semidefinite environment covariance reproduces N."""


class SingularLocalProduct(SymplecticError):
    """det(Id - S_b S_b') = 0 in the Cayley form of a dilation."""


@dataclass(frozen=True)
class GaussianChannel:
    """Channel acting as x -> T x + d, V -> T V T^T + N."""

    T: np.ndarray
    N: np.ndarray
    d: np.ndarray | None = None

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        N = np.asarray(self.N, dtype=float)
        if N.shape != (T.shape[0], T.shape[0]):
            raise SymplecticError("N must be square with the output dimension of T")
        if np.max(np.abs(N - N.T)) > 1e-9 * max(1.0, np.max(np.abs(N))):
            raise SymplecticError("N must be symmetric")
        d = np.zeros(T.shape[0]) if self.d is None else np.asarray(self.d, dtype=float)
        if d.size != T.shape[0]:
            raise SymplecticError("d must have the output dimension of T")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "N", (N + N.T) / 2)
        object.__setattr__(self, "d", d)

    @property
    def n_in(self) -> int:
        return self.T.shape[1] // 2

    @property
    def n_out(self) -> int:
        return self.T.shape[0] // 2

    def cp_defect(self) -> float:
        """Smallest eigenvalue of N + i(Omega_out - T Omega_in T^T); >= 0 iff CP."""
        Om_out = omega(self.n_out)
        Om_in = omega(self.n_in)
        M = self.N + 1j * (Om_out - self.T @ Om_in @ self.T.T)
        return float(np.min(np.linalg.eigvalsh(M)))

    def is_cp(self, tol: float = 1e-8) -> bool:
        return self.cp_defect() >= -tol

    def to_json(self) -> str:
        return json.dumps({
            "T": self.T.reshape(-1).tolist(),
            "N": self.N.reshape(-1).tolist(),
            "d": self.d.tolist(),
            "shape": list(self.T.shape),
        })

    @staticmethod
    def from_json(text: str) -> "GaussianChannel":
        obj = json.loads(text)
        r, c = obj["shape"]
        return GaussianChannel(
            np.asarray(obj["T"], dtype=float).reshape(r, c),
            np.asarray(obj["N"], dtype=float).reshape(r, r),
            np.asarray(obj["d"], dtype=float),
        )


def identity_channel(n_modes: int) -> GaussianChannel:
    d = 2 * n_modes
    return GaussianChannel(np.eye(d), np.zeros((d, d)))


def unitary_channel(S: np.ndarray, d: np.ndarray | None = None) -> GaussianChannel:
    S = np.asarray(S, dtype=float)
    return GaussianChannel(S, np.zeros_like(S), d)


def apply(channel: GaussianChannel, state: GaussianState) -> GaussianState:
    if channel.T.shape[1] != state.x.size:
        raise SymplecticError("channel input dimension does not match the state")
    x = channel.T @ state.x + channel.d
    V = channel.T @ state.V @ channel.T.T + channel.N
    return GaussianState(x, V, state.ordering)


def compose(c2: GaussianChannel, c1: GaussianChannel) -> GaussianChannel:
    """Channel equal to applying ``c1`` then ``c2``."""
    if c2.T.shape[1] != c1.T.shape[0]:
        raise SymplecticError("inner dimensions do not match")
    T = c2.T @ c1.T
    N = c2.T @ c1.N @ c2.T.T + c2.N
    d = c2.T @ c1.d + c2.d
    return GaussianChannel(T, N, d)


def juxtapose(c1: GaussianChannel, c2: GaussianChannel) -> GaussianChannel:
    """Block direct sum of two channels on disjoint mode sets."""
    ro, ri = c1.T.shape
    so, si = c2.T.shape
    T = np.zeros((ro + so, ri + si))
    T[:ro, :ri] = c1.T
    T[ro:, ri:] = c2.T
    N = np.zeros((ro + so, ro + so))
    N[:ro, :ro] = c1.N
    N[ro:, ro:] = c2.N
    d = np.concatenate([c1.d, c2.d])
    return GaussianChannel(T, N, d)


# ---------------------------------------------------------------------------
# dilation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DilationResult:
    """Symplectic dilation of a Gaussian channel, with audit intermediates."""

    S: np.ndarray                 # symplectic on system ⊕ environment
    env_cov: np.ndarray           # V_b
    n_sys: int
    n_env: int
    M: np.ndarray
    M_s: np.ndarray
    M_a: np.ndarray
    R: np.ndarray
    L: np.ndarray
    S_prime: np.ndarray
    factors: tuple = ()           # chain of DilationResult when the channel was split

    @property
    def sys_idx(self) -> np.ndarray:
        return np.arange(2 * self.n_sys)

    @property
    def env_idx(self) -> np.ndarray:
        return np.arange(2 * self.n_sys, 2 * (self.n_sys + self.n_env))

    def to_json(self) -> str:
        def arr(a):
            return np.asarray(a, dtype=float).reshape(-1).tolist()
        return json.dumps({
            "n_sys": self.n_sys,
            "n_env": self.n_env,
            "S": arr(self.S),
            "env_cov": arr(self.env_cov),
            "M": arr(self.M), "M_s": arr(self.M_s), "M_a": arr(self.M_a),
            "R": arr(self.R), "L": arr(self.L), "S_prime": arr(self.S_prime),
        })


def from_dilation(S: np.ndarray, n_sys: int, env_cov: np.ndarray) -> GaussianChannel:
    """Channel obtained by feeding environment modes with covariance ``env_cov``.

    T is the system block of S; N = S_{a,b} V_b S_{a,b}^T with S_{a,b} the
    system-environment block.
    """
    S = np.asarray(S, dtype=float)
    d = S.shape[0]
    ia = np.arange(2 * n_sys)
    ib = np.arange(2 * n_sys, d)
    env_cov = np.asarray(env_cov, dtype=float)
    if env_cov.shape != (len(ib), len(ib)):
        raise SymplecticError("environment covariance has the wrong dimension")
    T = S[np.ix_(ia, ia)]
    Sab = S[np.ix_(ia, ib)]
    N = Sab @ env_cov @ Sab.T
    return GaussianChannel(T, N)


def stinespring_apply(S: np.ndarray, n_sys: int, env_cov: np.ndarray,
                      state: GaussianState) -> GaussianState:
    """Oracle route: embed, evolve unitarily, trace out the environment."""
    from symplectiq import states as st
    n_env = S.shape[0] // 2 - n_sys
    env = GaussianState(np.zeros(2 * n_env), np.asarray(env_cov, dtype=float))
    joint = st.tensor(state, env)
    out = st.apply_gaussian_unitary(joint, S)
    return st.partial_trace(out, range(n_sys))


def dilate(channel: GaussianChannel, *, resid_tol: float = 1e-6) -> DilationResult:
    """Symplectic dilation of a CP channel with d = 0.

    When ``det(Id - T) = 0`` the channel is first factored into two channels
    that each avoid the unit eigenvalue; the returned dilation is then the
    composition of the two stage dilations (environments stacked).
    """
    if np.max(np.abs(channel.d)) > 0:
        raise SymplecticError("dilate expects a channel with zero displacement")
    T, N = channel.T, channel.N
    if T.shape[0] != T.shape[1]:
        raise SymplecticError("dilation requires equal input/output dimension")
    d = T.shape[0]
    if abs(np.linalg.det(np.eye(d) - T)) < 1e-9:
        return _dilate_split(channel, resid_tol)
    return _dilate_regular(T, N, resid_tol)


def _dilate_regular(T, N, resid_tol) -> DilationResult:
    na = T.shape[0] // 2
    Oa = omega(na)
    Id = np.eye(2 * na)
    inv_ImS = np.linalg.inv(Id - T)
    M = Oa @ (0.5 * Id - inv_ImS)
    M_s = (M + M.T) / 2
    M_a = (M - M.T) / 2
    K = 2 * Oa @ M_a @ Oa
    U, mus = skew_canonical_form(K, tol=1e-12)
    nb = len(mus)
    if nb == 0:
        if np.max(np.abs(N)) > resid_tol:
            raise NoPhysicalEnv("channel has no antisymmetric defect but nonzero noise")
        R = np.zeros((2 * na, 0))
        L = np.zeros((0, 2 * na))
        Sp = np.zeros((0, 0))
        return DilationResult(T.copy(), np.zeros((0, 0)), na, 0, M, M_s, M_a, R, L, Sp)
    Ob = omega(nb)
    cols = []
    for j, mu in enumerate(mus):
        cols.append(np.sqrt(mu) * U[:, 2 * j])
        cols.append(np.sqrt(mu) * U[:, 2 * j + 1])
    R = np.column_stack(cols)
    L = -Ob @ R.T @ Oa
    # (Oa M + Id/2) = inv(Id - T), so S' = Id - L (Id - T) R
    Sp = np.eye(2 * nb) - L @ ((Id - T) @ R)
    S_big = np.block([[T, (Id - T) @ R], [L @ (Id - T), Sp]])
    # environment covariance solving N = (Id-T) R V_b R^T (Id-T)^T
    A = (Id - T) @ R
    AxA = np.kron(A, A)
    v, *_ = np.linalg.lstsq(AxA, N.reshape(-1), rcond=None)
    Vb = v.reshape(2 * nb, 2 * nb)
    Vb = (Vb + Vb.T) / 2
    resid = np.max(np.abs(A @ Vb @ A.T - N))
    if resid > resid_tol:
        raise NoPhysicalEnv(f"no environment covariance matches N (residual {resid:.2e})")
    wmin = float(np.min(np.linalg.eigvalsh(Vb)))
    if wmin < -resid_tol:
        # PSD projection, then re-check the reconstruction
        w, Q = np.linalg.eigh(Vb)
        Vb = Q @ np.diag(np.clip(w, 0.0, None)) @ Q.T
        resid = np.max(np.abs(A @ Vb @ A.T - N))
        if resid > resid_tol:
            raise NoPhysicalEnv("noise matrix requires a non-physical environment")
    return DilationResult(S_big, Vb, na, nb, M, M_s, M_a, R, L, Sp)


def _dilate_split(channel: GaussianChannel, resid_tol) -> DilationResult:
    """Factor G_{T,N} = G_{T G^-1, N} ∘ G_{G, 0} around det(Id - T) = 0."""
    T, N = channel.T, channel.N
    d = T.shape[0]
    for beta in (2.0, 0.5, 3.0):
        G = beta * np.eye(d)
        T2 = T @ np.linalg.inv(G)
        if (abs(np.linalg.det(np.eye(d) - G)) > 1e-9
                and abs(np.linalg.det(np.eye(d) - T2)) > 1e-9):
            c1 = GaussianChannel(G, np.zeros((d, d)))
            c2 = GaussianChannel(T2, N)
            break
    else:
        raise SingularIdMinusT("could not factor the channel around det(Id - T) = 0")
    d1 = dilate(c1, resid_tol=resid_tol)
    d2 = dilate(c2, resid_tol=resid_tol)
    na = channel.n_in
    nb = d1.n_env + d2.n_env
    ntot = na + nb
    # stack: first d1 acts on (sys, env1), then d2 on (sys, env2)
    S_big = np.eye(2 * ntot)
    idx1 = np.concatenate([np.arange(2 * na),
                           np.arange(2 * na, 2 * (na + d1.n_env))])
    S1 = np.eye(2 * ntot)
    S1[np.ix_(idx1, idx1)] = d1.S
    idx2 = np.concatenate([np.arange(2 * na),
                           np.arange(2 * (na + d1.n_env), 2 * ntot)])
    S2 = np.eye(2 * ntot)
    S2[np.ix_(idx2, idx2)] = d2.S
    S_big = S2 @ S1
    Vb = np.zeros((2 * nb, 2 * nb))
    if d1.n_env:
        Vb[:2 * d1.n_env, :2 * d1.n_env] = d1.env_cov
    if d2.n_env:
        Vb[2 * d1.n_env:, 2 * d1.n_env:] = d2.env_cov
    return DilationResult(S_big, Vb, na, nb, d2.M, d2.M_s, d2.M_a, d2.R, d2.L,
                          d2.S_prime, factors=(d1, d2))


def dilation_cayley_form(result: DilationResult, S_b: np.ndarray, S_bp: np.ndarray):
    """Cayley generator of the dressed dilation D = (Id ⊕ S_b) S (Id ⊕ S_b').

    Returns ``(M_tilde, D)`` with ``D = Id - (Omega M_tilde + Id/2)^{-1}``.
    Requires det(Id - S_b S_b') != 0.
    """
    S_b = np.asarray(S_b, dtype=float)
    S_bp = np.asarray(S_bp, dtype=float)
    nb = result.n_env
    if S_b.shape != (2 * nb, 2 * nb) or S_bp.shape != (2 * nb, 2 * nb):
        raise SymplecticError("local factors must act on the environment block")
    prod = S_b @ S_bp
    if abs(np.linalg.det(np.eye(2 * nb) - prod)) < 1e-9:
        raise SingularLocalProduct("det(Id - S_b S_b') = 0")
    na = result.n_sys
    ntot = na + nb
    lift_b = np.eye(2 * ntot)
    lift_b[2 * na:, 2 * na:] = S_b
    lift_bp = np.eye(2 * ntot)
    lift_bp[2 * na:, 2 * na:] = S_bp
    D = lift_b @ result.S @ lift_bp
    Oa = omega(na)
    inv_loc = np.linalg.inv(np.eye(2 * nb) - prod)
    # blocks of Omega M_tilde + Id/2 (assembled so that block inversion gives D)
    A = Oa @ result.M + 0.5 * np.eye(2 * na) + result.R @ S_bp @ inv_loc @ S_b @ result.L
    B = result.R @ S_bp @ inv_loc
    C = inv_loc @ S_b @ result.L
    Dm = inv_loc
    block = np.block([[A, B], [C, Dm]])
    Om = omega(ntot)
    M_tilde = -Om @ (block - 0.5 * np.eye(2 * ntot))
    return M_tilde, D
