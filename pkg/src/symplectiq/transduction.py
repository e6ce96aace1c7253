"""Generalized teleportation and adaptive quantum transduction.

A multimode symplectic coupler ``S`` is split two ways: the input side into
signal and ancilla modes, the output side into output and idler modes.  With
squeezed ancillas, homodyne idler measurements and linear feedforward, the
coupler turns into a Gaussian channel whose noise is controlled by two scalar
imperfection coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from symplectiq import channels, core
from symplectiq.core import SymplecticError, mode_indices, omega


class SingularFeedforward(SymplecticError):
    """The measured-block response S_{h,z'} is not invertible."""


@dataclass(frozen=True)
class PartitionSpec:
    """Mode splits and quadrature planes for the teleportation transform.

    ``in_modes`` / ``anc_modes`` split the input side; ``out_modes`` /
    ``idl_modes`` the output side.  ``z_plane`` lists, per ancilla mode, "q" or
    "p" for the squeezed quadrature; ``h_plane`` does the same for the measured
    idler quadratures.  Both default to all-q.
    """

    n_modes: int
    in_modes: tuple
    anc_modes: tuple
    out_modes: tuple
    idl_modes: tuple
    z_plane: tuple = ()
    h_plane: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "in_modes", tuple(self.in_modes))
        object.__setattr__(self, "anc_modes", tuple(self.anc_modes))
        object.__setattr__(self, "out_modes", tuple(self.out_modes))
        object.__setattr__(self, "idl_modes", tuple(self.idl_modes))
        all_modes = set(range(self.n_modes))
        if set(self.in_modes) | set(self.anc_modes) != all_modes \
                or set(self.in_modes) & set(self.anc_modes):
            raise SymplecticError("in/anc must partition the modes")
        if set(self.out_modes) | set(self.idl_modes) != all_modes \
                or set(self.out_modes) & set(self.idl_modes):
            raise SymplecticError("out/idl must partition the modes")
        z = self.z_plane or ("q",) * len(self.anc_modes)
        h = self.h_plane or ("q",) * len(self.idl_modes)
        if len(z) != len(self.anc_modes) or len(h) != len(self.idl_modes):
            raise SymplecticError("plane selectors must match the mode counts")
        if not set(z) <= {"q", "p"} or not set(h) <= {"q", "p"}:
            raise SymplecticError("plane selectors must be 'q' or 'p'")
        object.__setattr__(self, "z_plane", tuple(z))
        object.__setattr__(self, "h_plane", tuple(h))

    # coordinate index helpers (interleaved ordering) ----------------------
    @property
    def in_idx(self) -> np.ndarray:
        return mode_indices(self.in_modes)

    @property
    def out_idx(self) -> np.ndarray:
        return mode_indices(self.out_modes)

    @property
    def anc_idx(self) -> np.ndarray:
        return mode_indices(self.anc_modes)

    @property
    def idl_idx(self) -> np.ndarray:
        return mode_indices(self.idl_modes)

    def _plane_idx(self, modes, selectors, conjugate: bool) -> np.ndarray:
        out = []
        for m, s in zip(modes, selectors):
            use_q = (s == "q") != conjugate
            out.append(2 * m if use_q else 2 * m + 1)
        return np.asarray(out, dtype=int)

    @property
    def z_idx(self) -> np.ndarray:
        return self._plane_idx(self.anc_modes, self.z_plane, False)

    @property
    def zp_idx(self) -> np.ndarray:
        return self._plane_idx(self.anc_modes, self.z_plane, True)

    @property
    def h_idx(self) -> np.ndarray:
        return self._plane_idx(self.idl_modes, self.h_plane, False)

    @property
    def hp_idx(self) -> np.ndarray:
        return self._plane_idx(self.idl_modes, self.h_plane, True)


def default_partition(n_modes: int) -> PartitionSpec:
    """Mode 0 carries the signal in and out; the rest are ancilla/idler."""
    rest = tuple(range(1, n_modes))
    return PartitionSpec(n_modes, (0,), rest, (0,), rest)


@dataclass(frozen=True)
class ImperfectionCoefficients:
    """Scalar imperfection summaries nu (ancilla) and mu (measurement).

    Either given directly or derived from raw parameters: squeezing ``xi`` and
    thermal occupation ``n_z`` of the ancillas give ``nu = exp(-2 xi)(2 n_z + 1)``;
    fictitious-beamsplitter transmittance ``tau`` and environment occupation
    ``n_h`` give ``mu = tau/(1-tau) (2 n_h + 1)``.
    """

    nu: float
    mu: float
    xi: float | None = None
    n_z: float | None = None
    tau: float | None = None
    n_h: float | None = None

    def __post_init__(self):
        if self.nu < 0 or self.mu < 0:
            raise SymplecticError("imperfection coefficients must be nonnegative")

    @staticmethod
    def from_raw(xi: float, n_z: float, tau: float, n_h: float) -> "ImperfectionCoefficients":
        if not 0 <= tau < 1:
            raise SymplecticError("transmittance tau must lie in [0, 1)")
        nu = np.exp(-2 * xi) * (2 * n_z + 1)
        mu = tau / (1 - tau) * (2 * n_h + 1)
        return ImperfectionCoefficients(nu, mu, xi=xi, n_z=n_z, tau=tau, n_h=n_h)


def _sub(S, rows, cols):
    return S[np.ix_(rows, cols)]


def teleport_transform(S: np.ndarray, part: PartitionSpec, cond_max: float = 1e12):
    """Effective map and feedforward/backward matrices of the protocol.

    Returns ``(S_tilde, F, B)``:

    * ``S_tilde``: symplectic map from the input block to the output block
      realized by the protocol,
    * ``F``: feedforward matrix turning measured outcomes into output
      displacements,
    * ``B``: backward transmission from the squeezed ancilla plane into the
      input block.
    """
    S = np.asarray(S, dtype=float)
    S_h_zp = _sub(S, part.h_idx, part.zp_idx)
    if S_h_zp.size == 0 or np.linalg.cond(S_h_zp) > cond_max:
        raise SingularFeedforward("S_{h,z'} is not invertible")
    S_out_in = _sub(S, part.out_idx, part.in_idx)
    S_out_zp = _sub(S, part.out_idx, part.zp_idx)
    S_h_in = _sub(S, part.h_idx, part.in_idx)
    S_tilde = S_out_in - S_out_zp @ np.linalg.solve(S_h_zp, S_h_in)
    F = -S_out_zp @ np.linalg.inv(S_h_zp)
    S_inv = core.inverse(S)
    Si_in_hp = _sub(S_inv, part.in_idx, part.hp_idx)
    Si_z_hp = _sub(S_inv, part.z_idx, part.hp_idx)
    B = -Si_in_hp @ np.linalg.inv(Si_z_hp)
    return S_tilde, F, B


def reverse_transform(S: np.ndarray, part: PartitionSpec) -> np.ndarray:
    """The inverse-direction map built from S^{-1} submatrices."""
    S_inv = core.inverse(np.asarray(S, dtype=float))
    Si_in_out = _sub(S_inv, part.in_idx, part.out_idx)
    Si_in_hp = _sub(S_inv, part.in_idx, part.hp_idx)
    Si_z_hp = _sub(S_inv, part.z_idx, part.hp_idx)
    Si_z_out = _sub(S_inv, part.z_idx, part.out_idx)
    return Si_in_out - Si_in_hp @ np.linalg.solve(Si_z_hp, Si_z_out)


def adaptive_channel(S: np.ndarray, part: PartitionSpec,
                     coeffs: ImperfectionCoefficients) -> channels.GaussianChannel:
    """Adaptive-transduction channel after post-processing by S_tilde^{-1}.

    Returns the Gaussian channel ``G_{Id, N'}`` with
    ``N' = nu B B^T + mu C C^T`` where ``C = S_tilde^{-1} S_{out,z'} S_{h,z'}^{-1}``.
    """
    S_tilde, F, B = teleport_transform(S, part)
    C = np.linalg.solve(S_tilde, -F)
    N = coeffs.nu * (B @ B.T) + coeffs.mu * (C @ C.T)
    d = N.shape[0]
    return channels.GaussianChannel(np.eye(d), N)


def feedforward_unitary(F: np.ndarray, part: PartitionSpec) -> np.ndarray:
    """Symplectic model of measure-and-displace with feedforward matrix ``F``.

    Acts on the full output-side space; the output block picks up ``F`` times
    the measured plane, the conjugate plane absorbs the back-action.
    """
    n = part.n_modes
    Om = omega(n)
    out_idx, h_idx, hp_idx = part.out_idx, part.h_idx, part.hp_idx
    Om_hp_h = _sub(Om, hp_idx, h_idx)
    Om_out = _sub(Om, out_idx, out_idx)
    X = -Om_hp_h @ F.T @ Om_out
    Y = 0.5 * Om_hp_h @ F.T @ Om_out @ F
    A = np.eye(2 * n)
    A[np.ix_(out_idx, h_idx)] = F
    A[np.ix_(hp_idx, out_idx)] = -X
    A[np.ix_(hp_idx, h_idx)] = Y
    return A


def simulate_adaptive(S: np.ndarray, part: PartitionSpec,
                      coeffs: ImperfectionCoefficients,
                      antisqueeze_floor: float = 1e4) -> channels.GaussianChannel:
    """Empirical adaptive channel from explicit moment propagation.

    Builds the three-stage pipeline (coupler, fictitious measurement loss,
    feedforward) as symplectic matrices on system plus environment modes,
    propagates the ancilla and environment covariances through it, and returns
    the channel on the signal block after post-processing by S_tilde^{-1}.
    """
    if coeffs.tau is not None:
        tau, n_h = coeffs.tau, coeffs.n_h
        xi, n_z = coeffs.xi, coeffs.n_z
        anti = np.exp(2 * xi) * (2 * n_z + 1)
        nu = coeffs.nu
    else:
        # realize the coefficients with a convenient raw parameterization
        nu = coeffs.nu
        n_h = 0.0
        tau = coeffs.mu / (1.0 + coeffs.mu)
        anti = antisqueeze_floor if nu == 0 else max((2 * 0 + 1) ** 2 / nu, 1.0)
    n = part.n_modes
    n_env = len(part.idl_modes)
    ntot = n + n_env
    S_tilde, F, _ = teleport_transform(S, part)
    F_star = F / np.sqrt(1 - tau)

    S_big = np.eye(2 * ntot)
    S_big[:2 * n, :2 * n] = S
    H_big = np.eye(2 * ntot)
    c, s = np.sqrt(1 - tau), np.sqrt(tau)
    for j, m in enumerate(part.idl_modes):
        e = n + j
        for off in (0, 1):
            i1, i2 = 2 * m + off, 2 * e + off
            H_big[i1, i1] = c
            H_big[i1, i2] = s
            H_big[i2, i1] = -s
            H_big[i2, i2] = c
    A_small = feedforward_unitary(F_star, part)
    A_big = np.eye(2 * ntot)
    A_big[:2 * n, :2 * n] = A_small
    total = A_big @ H_big @ S_big

    in_idx = part.in_idx
    out_idx = part.out_idx
    rest_idx = np.asarray([i for i in range(2 * ntot) if i not in set(in_idx)])
    V_rest = np.zeros((2 * ntot, 2 * ntot))
    for m, sel in zip(part.anc_modes, part.z_plane):
        zi = 2 * m if sel == "q" else 2 * m + 1
        zpi = 2 * m + 1 if sel == "q" else 2 * m
        V_rest[zi, zi] = nu
        V_rest[zpi, zpi] = anti
    for j in range(n_env):
        e = n + j
        V_rest[2 * e, 2 * e] = 2 * n_h + 1
        V_rest[2 * e + 1, 2 * e + 1] = 2 * n_h + 1
    V_rest = V_rest[np.ix_(rest_idx, rest_idx)]

    T = total[np.ix_(out_idx, in_idx)]
    Lmat = total[np.ix_(out_idx, rest_idx)]
    N = Lmat @ V_rest @ Lmat.T
    raw = channels.GaussianChannel(T, N)
    post = channels.unitary_channel(np.linalg.inv(S_tilde))
    return channels.compose(post, raw)


def direct_channel(S: np.ndarray, part: PartitionSpec,
                   post: bool = True) -> channels.GaussianChannel:
    """Direct transduction: vacuum ancillas, idlers dropped.

    With ``post=True`` the output is corrected by a channel ``G_{T^{-1}, N'}``
    whose noise ``N'`` is the smallest complete-positivity-compatible diagonal,
    refined by coordinate descent to maximize the average fidelity.
    """
    S = np.asarray(S, dtype=float)
    T = _sub(S, part.out_idx, part.in_idx)
    S_out_anc = _sub(S, part.out_idx, part.anc_idx)
    N = S_out_anc @ S_out_anc.T
    raw = channels.GaussianChannel(T, N)
    if not post:
        return raw
    d = T.shape[0]
    if abs(np.linalg.det(T)) < 1e-12:
        raise SymplecticError("post-processing requires invertible T")
    Ti = np.linalg.inv(T)
    n_out = d // 2
    Om = omega(n_out)
    cp_gap = 1j * (Om - Ti @ Om @ Ti.T)
    floor = max(0.0, float(np.max(np.abs(np.linalg.eigvalsh(cp_gap)))))
    K = Ti @ N @ Ti.T
    diag = _optimize_diag_noise(K, cp_gap, floor, d)
    return channels.GaussianChannel(np.eye(d), K + np.diag(diag))


def _optimize_diag_noise(K, cp_gap, floor, d):
    """Coordinate descent over feasible diagonal N' minimizing det(2Id + K + N')."""
    def feasible(diag):
        M = np.diag(diag) + cp_gap
        return float(np.min(np.linalg.eigvalsh(M))) >= -1e-12 and np.all(diag >= -1e-15)

    def objective(diag):
        return float(np.linalg.det(2 * np.eye(d) + K + np.diag(diag)))

    best = np.full(d, floor)
    if not feasible(best):  # should not happen; floor is the symmetric feasible point
        best = np.full(d, floor * (1 + 1e-9))
    best_val = objective(best)
    for _ in range(40):
        improved = False
        for i in range(d):
            for step in (0.25, 0.05, 0.01):
                for sgn in (-1.0, 1.0):
                    cand = best.copy()
                    cand[i] = max(0.0, cand[i] * (1 + sgn * step) + (sgn * step if cand[i] == 0 else 0))
                    if not feasible(cand):
                        continue
                    val = objective(cand)
                    if val < best_val - 1e-14 * max(1.0, abs(best_val)):
                        best, best_val = cand, val
                        improved = True
        if not improved:
            break
    return best


def average_fidelity(channel: channels.GaussianChannel, tol: float = 1e-10) -> float:
    """Average fidelity over uniformly distributed coherent inputs.

    ``2 / sqrt(det(2 Id + N))`` when ``T = Id``; zero otherwise.
    """
    if channel.n_in != 1 or channel.n_out != 1:
        raise SymplecticError("average fidelity is defined for single-mode channels")
    if np.max(np.abs(channel.T - np.eye(2))) > tol:
        return 0.0
    return float(2.0 / np.sqrt(np.linalg.det(2 * np.eye(2) + channel.N)))


def beats_classical(channel: channels.GaussianChannel) -> bool:
    """Classical threshold test: det(Id + N/2) < 4 for an identity-T channel."""
    return float(np.linalg.det(np.eye(2) + channel.N / 2)) < 4.0


# ---------------------------------------------------------------------------
# two-mode coupler examples
# ---------------------------------------------------------------------------

def passive_example(C: float) -> np.ndarray:
    """Beamsplitter-like two-mode coupler with cooperativity ``C > 0``.

    ``r = (C-1)/(C+1)``, ``t = 2 sqrt(C)/(C+1)`` satisfy ``r^2 + t^2 = 1``.
    """
    if C <= 0:
        raise SymplecticError("cooperativity must be positive")
    r = (C - 1) / (C + 1)
    t = 2 * np.sqrt(C) / (C + 1)
    return np.array([
        [0, -t, r, 0],
        [t, 0, 0, r],
        [r, 0, 0, -t],
        [0, r, t, 0],
    ])


def active_example(C: float) -> np.ndarray:
    """Two-mode-squeezer-like coupler; ``r'^2 - t'^2 = 1``; diverges at C = 1."""
    if C <= 0:
        raise SymplecticError("cooperativity must be positive")
    if abs(C - 1) < 1e-12:
        raise SymplecticError("active coupler diverges at C = 1")
    rp = (C + 1) / (C - 1)
    tp = 2 * np.sqrt(C) / (1 - C)
    return np.array([
        [0, tp, rp, 0],
        [tp, 0, 0, rp],
        [rp, 0, 0, tp],
        [0, rp, tp, 0],
    ])


def passive_coefficients(C: float):
    r = (C - 1) / (C + 1)
    t = 2 * np.sqrt(C) / (C + 1)
    return r, t


def active_coefficients(C: float):
    rp = (C + 1) / (C - 1)
    tp = 2 * np.sqrt(C) / (1 - C)
    return rp, tp


def passive_adaptive_fidelity(t_sq: float, mu: float, nu: float) -> float:
    """Closed form for the passive coupler: 1/sqrt((1 + (1-t^2) mu/2)(1 + (1-t^2) nu/(2 t^2)))."""
    return float(1.0 / np.sqrt((1 + (1 - t_sq) * mu / 2)
                               * (1 + (1 - t_sq) * nu / (2 * t_sq))))


def active_adaptive_fidelity(tp_sq: float, mu: float, nu: float) -> float:
    return float(1.0 / np.sqrt((1 + (1 + tp_sq) * mu / 2)
                               * (1 + (1 + tp_sq) * nu / (2 * tp_sq))))
