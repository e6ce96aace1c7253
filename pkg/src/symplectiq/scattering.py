"""Frequency-domain bosonic scattering matrices from coupled-mode data.

Builders for symplectic matrices out of a quadratic Hamiltonian (beamsplitter
part ``Y`` hermitian, squeezing part ``W`` symmetric) and input-output coupling
matrices.  Passive processes are handled at a single frequency on the
``2N``-dimensional quadrature space; active processes pair the ``+omega`` and
``-omega`` sidebands into a ``4N``-dimensional space organized by a real
representation of the Clifford algebra Cl(3,0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from symplectiq import core
from symplectiq.core import SymplecticError, omega


class SingularResolvent(SymplecticError):
    """The passive scattering resolvent is singular at this frequency."""


class SingularAssembly(SymplecticError):
    """The Clifford-assembled active scattering matrix is singular."""


class SingularIdMinusS(SymplecticError):
    """det(Id - S) = 0: no Cayley generator exists."""


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Quadratic Hamiltonian data: Y hermitian (beamsplitter), W symmetric (squeezing)."""

    Y: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=complex)
        W = np.asarray(self.W, dtype=complex)
        scale = max(1.0, np.max(np.abs(Y)), np.max(np.abs(W)))
        if np.max(np.abs(Y - Y.conj().T)) > 1e-10 * scale:
            raise SymplecticError("Y must be Hermitian")
        if np.max(np.abs(W - W.T)) > 1e-10 * scale:
            raise SymplecticError("W must be symmetric")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "W", W)

    @property
    def n_modes(self) -> int:
        return self.Y.shape[0]


@dataclass(frozen=True)
class CouplingData:
    """Mode-basis coupling data for a scattering process.

    ``B`` is the damping matrix (diagonal, rate convention ``B = 2 kappa``),
    ``C`` and ``D`` the input and output coupling matrices; ``omega_probe`` the
    probe frequency in rad/s.  ``Theta = omega_probe * B^{-1}`` and
    ``Gamma = C^{-1} B D^{-1} / 2`` feed the active formula; the process has no
    intrinsic loss exactly when ``Gamma = Id/2``.
    """

    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    omega_probe: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        object.__setattr__(self, "C", np.asarray(self.C, dtype=float))
        object.__setattr__(self, "D", np.asarray(self.D, dtype=float))
        if self.omega_probe < 0:
            raise SymplecticError("probe frequency must be nonnegative")

    @property
    def Theta(self) -> np.ndarray:
        return self.omega_probe * np.linalg.inv(self.B)

    @property
    def Gamma(self) -> np.ndarray:
        return 0.5 * np.linalg.inv(self.C) @ self.B @ np.linalg.inv(self.D)


def quadrature_generator(ham: QuadraticHamiltonian) -> np.ndarray:
    """Grouped-ordering sp generator of the Hamiltonian flow.

    ``[[Im(Y+W), Re(Y-W)], [-Re(Y+W), Im(Y-W)]]``.
    """
    Y, W = ham.Y, ham.W
    return np.block([
        [np.imag(Y + W), np.real(Y - W)],
        [-np.real(Y + W), np.imag(Y - W)],
    ])


def hamiltonian_flow(Y, W, t: float) -> np.ndarray:
    """Symplectic flow of the quadratic Hamiltonian, grouped ordering."""
    ham = QuadraticHamiltonian(Y, W)
    return expm(quadrature_generator(ham) * t)


def _expand_mode_diag(M: np.ndarray) -> np.ndarray:
    """Real mode-basis matrix acting identically on q and p, grouped quadratures."""
    n = M.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = M
    out[n:, n:] = M
    return out


def passive_scattering(Y, B, C, D, omega_probe: float = 0.0) -> np.ndarray:
    """Passive frequency-domain scattering matrix, grouped ordering.

    ``S = Id + D (K_Y + omega Omega + B/2)^{-1} C`` with ``K_Y`` the quadrature
    generator of the beamsplitter Hamiltonian.  ``B``, ``C``, ``D`` are real
    mode-basis matrices acting identically on both quadratures.  The result is
    symplectic when the couplings carry no intrinsic loss.
    """
    ham = QuadraticHamiltonian(Y, np.zeros_like(np.asarray(Y)))
    n = ham.n_modes
    K = quadrature_generator(ham)
    Om_g = omega(n, core.ModeOrdering.GROUPED)
    Bq = _expand_mode_diag(np.asarray(B, dtype=float))
    Cq = _expand_mode_diag(np.asarray(C, dtype=float))
    Dq = _expand_mode_diag(np.asarray(D, dtype=float))
    A = K + omega_probe * Om_g + Bq / 2
    if abs(np.linalg.det(A)) < 1e-14 or np.linalg.cond(A) > 1e13:
        raise SingularResolvent("scattering resolvent is singular")
    return np.eye(2 * n) + Dq @ np.linalg.solve(A, Cq)


# ---------------------------------------------------------------------------
# Clifford algebra Cl(3,0) representations
# ---------------------------------------------------------------------------

def clifford_basis():
    """Two 4x4 representations of the Cl(3,0) generators and the change of basis.

    Returns ``(eps1, eps2, eps3, e1, e2, e3, U)`` with exact anticommutation
    ``g_i g_j + g_j g_i = 2 delta_ij Id`` for both triples and
    ``e_k = U^{-1} eps_k U``.
    """
    eps1 = 1j * np.array([[0, 1, 0, 0],
                          [-1, 0, 0, 0],
                          [0, 0, 0, 1],
                          [0, 0, -1, 0]], dtype=complex)
    eps2 = np.array([[0, 1, 0, 0],
                     [1, 0, 0, 0],
                     [0, 0, 0, 1],
                     [0, 0, 1, 0]], dtype=complex)
    eps3 = np.array([[1, 0, 0, 0],
                     [0, -1, 0, 0],
                     [0, 0, -1, 0],
                     [0, 0, 0, 1]], dtype=complex)
    e1 = np.array([[0, 0, 0, 1],
                   [0, 0, 1, 0],
                   [0, 1, 0, 0],
                   [1, 0, 0, 0]], dtype=float)
    e2 = np.array([[0, 0, 1, 0],
                   [0, 0, 0, -1],
                   [1, 0, 0, 0],
                   [0, -1, 0, 0]], dtype=float)
    e3 = np.array([[1, 0, 0, 0],
                   [0, 1, 0, 0],
                   [0, 0, -1, 0],
                   [0, 0, 0, -1]], dtype=float)
    U = np.array([[1, 1j, 0, 0],
                  [0, 0, 1, -1j],
                  [0, 0, 1, 1j],
                  [1, -1j, 0, 0]], dtype=complex) / np.sqrt(2)
    return eps1, eps2, eps3, e1, e2, e3, U


def sideband_form(n_modes: int) -> np.ndarray:
    """Symplectic form e1 e2 ⊗ Id on the sideband-doubled quadrature space."""
    _, _, _, e1, e2, _, _ = clifford_basis()
    return np.kron(e1 @ e2, np.eye(n_modes))


def active_scattering(Y, W, Theta, Gamma) -> np.ndarray:
    """Active scattering matrix on the sideband-doubled quadrature space.

    With normalized Hamiltonian blocks ``Y = C^{-1} Y_raw D^{-1}`` and
    ``W = C^{-1} W_raw D^{-1}``, damping ``Gamma = C^{-1} B D^{-1}/2`` and
    ``Theta = omega B^{-1}``::

        S = Id - (Id ⊗ (Im Y + Gamma) - e1 ⊗ Re W + e2 ⊗ Im W
                  - e1 e2 ⊗ Re Y + e1 e2 e3 ⊗ Theta)^{-1}

    The coordinates are ``(Q[w], P[w], Q[-w], P[-w])`` blocks of all modes.
    ``S`` is symplectic for the form ``e1 e2 ⊗ Id`` exactly when
    ``Gamma = Id/2``; lossy couplings still return the (non-symplectic) matrix.
    """
    Y = np.asarray(Y, dtype=complex)
    W = np.asarray(W, dtype=complex)
    Theta = np.asarray(Theta, dtype=float)
    Gamma = np.asarray(Gamma, dtype=float)
    n = Y.shape[0]
    eps1, eps2, eps3, e1, e2, e3, _ = clifford_basis()
    A = (np.kron(np.eye(4), np.imag(Y) + Gamma)
         - np.kron(e1, np.real(W))
         + np.kron(e2, np.imag(W))
         - np.kron(e1 @ e2, np.real(Y))
         + np.kron(e1 @ e2 @ e3, Theta))
    if abs(np.linalg.det(A)) < 1e-14 or np.linalg.cond(A) > 1e13:
        raise SingularAssembly("active scattering assembly is singular")
    return np.eye(4 * n) - np.linalg.inv(A)


def collapse_zero_frequency(S4: np.ndarray, n_modes: int) -> np.ndarray:
    """Fold the sideband-doubled matrix at ``omega = 0`` onto (Q, P) blocks.

    At zero frequency the two sidebands are the same operators; the physical
    grouped-ordering scattering matrix is read off the upper blocks with the
    lower sideband columns folded in.
    """
    n = n_modes
    blocks = [S4[i * n:(i + 1) * n, j * n:(j + 1) * n] for i in range(4)
              for j in range(4)]

    def b(i, j):
        return S4[i * n:(i + 1) * n, j * n:(j + 1) * n]

    top = np.block([[b(0, 0) + b(0, 2), b(0, 1) + b(0, 3)],
                    [b(1, 0) + b(1, 2), b(1, 1) + b(1, 3)]])
    return top


# ---------------------------------------------------------------------------
# the two-mode coupler examples (single source of truth with transduction)
# ---------------------------------------------------------------------------

def _port_swap_interleaved(S: np.ndarray) -> np.ndarray:
    """Relabel the two output ports of a two-mode interleaved matrix."""
    P = np.zeros((4, 4))
    P[0, 2] = P[1, 3] = P[2, 0] = P[3, 1] = 1.0
    return P @ S


def passive_coupler(g: float, kappa1: float, kappa2: float) -> np.ndarray:
    """Interleaved two-mode passive coupler, transmission-labeled ports.

    Built from the passive scattering formula with damping ``B = diag(2 k)``
    and couplings ``+/- sqrt(2 k)`` (the input coupling carries the
    input-output minus sign), then converted to interleaved ordering with the
    transmitted port relabeled first.  Equals
    :func:`symplectiq.transduction.passive_example` at ``C = g^2/(k1 k2)``.
    """
    Y = np.array([[0.0, -g], [-g, 0.0]])
    B = np.diag([2 * kappa1, 2 * kappa2])
    C = -np.diag([np.sqrt(2 * kappa1), np.sqrt(2 * kappa2)])
    D = np.diag([np.sqrt(2 * kappa1), np.sqrt(2 * kappa2)])
    S_grouped = passive_scattering(Y, B, C, D, 0.0)
    S_inter = core.to_interleaved(S_grouped, 2)
    return _port_swap_interleaved(S_inter)


def active_coupler(g: float, kappa1: float, kappa2: float) -> np.ndarray:
    """Interleaved two-mode active coupler at zero frequency.

    Built from the Clifford-assembled active formula with no intrinsic loss
    (``Gamma = Id/2``), sidebands folded at ``omega = 0``, converted to
    interleaved ordering and port-relabeled.  Equals
    :func:`symplectiq.transduction.active_example` at ``C = g^2/(k1 k2)``.
    """
    Ceff = np.diag([np.sqrt(2 * kappa1), np.sqrt(2 * kappa2)])
    W_raw = np.array([[0.0, -g], [-g, 0.0]])
    Weff = np.linalg.inv(Ceff) @ W_raw @ np.linalg.inv(Ceff)
    S4 = active_scattering(np.zeros((2, 2)), Weff, np.zeros((2, 2)),
                           0.5 * np.eye(2))
    S_grouped = collapse_zero_frequency(S4, 2)
    S_inter = core.to_interleaved(S_grouped, 2)
    return _port_swap_interleaved(S_inter)


def cayley_hamiltonian(S: np.ndarray) -> np.ndarray:
    """Dimensionless quadratic Hamiltonian generating S by the Cayley transform.

    Returns the symmetric matrix ``M`` with ``Omega M + Id/2 = (Id - S)^{-1}``,
    so that ``core.cayley(Omega @ M)`` reproduces ``S``.
    """
    S = np.asarray(S, dtype=float)
    d = S.shape[0]
    ImS = np.eye(d) - S
    if abs(np.linalg.det(ImS)) < 1e-12:
        raise SingularIdMinusS("det(Id - S) = 0; no Cayley generator")
    Om = omega(d // 2)
    M = -Om @ (np.linalg.inv(ImS) - 0.5 * np.eye(d))
    return M
