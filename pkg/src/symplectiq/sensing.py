"""Gaussian Fisher information and exceptional-point sensing models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from symplectiq.core import SymplecticError, omega, to_interleaved
from symplectiq.states import GaussianState


class SingularResponse(SymplecticError):
    """The response matrix G_theta has a pole at the requested parameter."""


class SingularSigma(SymplecticError):
    """Outcome covariance is singular."""


class IllConditionedSolve(SymplecticError):
    """The implicit QFI equation is numerically unsolvable."""


class SingularFactor(SymplecticError):
    """A Cayley factor (Omega M +/- Id/2) is singular: diverging sensitivity."""


@dataclass
class ProbeModel:
    """Scattering probe with parameter-dependent response.

    ``x_out = (Id - G(theta)) x_in`` and
    ``V_out = (Id - G) V_in (Id - G)^T + G R V_env R^T G^T``.

    ``G_of_theta`` maps a parameter value to the response matrix; ``dG_of_theta``
    optionally supplies the analytic derivative.  ``stability_tol`` rejects
    parameter values where the response denominator degenerates.
    """

    G_of_theta: callable
    R: np.ndarray
    V_env: np.ndarray
    x_in: np.ndarray
    V_in: np.ndarray
    dG_of_theta: callable | None = None
    stability_tol: float = 1e-8

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        self.V_env = np.asarray(self.V_env, dtype=float)
        self.x_in = np.asarray(self.x_in, dtype=float)
        self.V_in = np.asarray(self.V_in, dtype=float)

    @property
    def dim(self) -> int:
        return self.x_in.size


def output_state(model: ProbeModel, theta: float) -> GaussianState:
    """Output Gaussian state of the probe at parameter ``theta``."""
    try:
        G = np.asarray(model.G_of_theta(theta), dtype=float)
    except np.linalg.LinAlgError as exc:
        raise SingularResponse(f"response undefined at theta={theta}") from exc
    if not np.all(np.isfinite(G)):
        raise SingularResponse(f"response diverges at theta={theta}")
    Id = np.eye(model.dim)
    x = (Id - G) @ model.x_in
    noise = G @ model.R @ model.V_env @ model.R.T @ G.T
    V = (Id - G) @ model.V_in @ (Id - G).T + noise
    return GaussianState(x, V)


def output_derivatives(model: ProbeModel, theta: float, h: float | None = None):
    """(dx/dtheta, dV/dtheta) by analytic dG when available, else central differences."""
    if model.dG_of_theta is not None:
        G = np.asarray(model.G_of_theta(theta), dtype=float)
        dG = np.asarray(model.dG_of_theta(theta), dtype=float)
        Id = np.eye(model.dim)
        dx = -dG @ model.x_in
        A = Id - G
        RV = model.R @ model.V_env @ model.R.T
        dV = (-dG @ model.V_in @ A.T - A @ model.V_in @ dG.T
              + dG @ RV @ G.T + G @ RV @ dG.T)
        return dx, dV
    h = h or 1e-6 * max(1.0, abs(theta))
    sp, sm = output_state(model, theta + h), output_state(model, theta - h)
    sp2, sm2 = output_state(model, theta + h / 2), output_state(model, theta - h / 2)
    # Richardson refinement of the central difference
    dx1 = (sp.x - sm.x) / (2 * h)
    dx2 = (sp2.x - sm2.x) / h
    dV1 = (sp.V - sm.V) / (2 * h)
    dV2 = (sp2.V - sm2.V) / h
    return (4 * dx2 - dx1) / 3, (4 * dV2 - dV1) / 3


def classical_fisher(mu, Sigma, dmu, dSigma):
    """Fisher information of a Gaussian outcome distribution.

    Returns ``(I_mu, I_sigma)`` with
    ``I_mu = dmu^T Sigma^{-1} dmu`` and
    ``I_sigma = Tr[Sigma^{-1} dSigma Sigma^{-1} dSigma] / 2``.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    det = np.linalg.det(Sigma)
    if det <= 0 or not np.isfinite(det):
        raise SingularSigma("outcome covariance must be positive definite")
    dmu = np.asarray(dmu, dtype=float)
    dSigma = np.asarray(dSigma, dtype=float)
    Si_dmu = np.linalg.solve(Sigma, dmu)
    I_mu = float(dmu @ Si_dmu)
    SdS = np.linalg.solve(Sigma, dSigma)
    I_sigma = 0.5 * float(np.trace(SdS @ SdS))
    return I_mu, I_sigma


def heterodyne_fisher(state: GaussianState, dx, dV):
    """Classical Fisher information of ideal heterodyne on every mode.

    The outcome distribution has mean ``x`` and covariance ``V + Id``.
    """
    Sigma = state.V + np.eye(state.x.size)
    return classical_fisher(state.x, Sigma, dx, dV)


@dataclass(frozen=True)
class FisherResult:
    theta: float
    I_mu: float
    I_sigma: float
    qfi_xbar: float
    qfi_V: float
    approx_used: bool = False

    @property
    def classical_total(self) -> float:
        return self.I_mu + self.I_sigma

    @property
    def quantum_total(self) -> float:
        return self.qfi_xbar + self.qfi_V


def solve_phi(V: np.ndarray, dV: np.ndarray, approx_threshold: float = 1e6,
              residual_tol: float = 1e-10):
    """Solve ``dV = V Phi V - Omega Phi Omega^T`` for the symmetric matrix Phi.

    Uses the exact linear solve on the vectorized equation; when
    ``det(V) > approx_threshold`` the large-noise closed form
    ``Phi = V^{-1} dV V^{-1}`` is returned instead (flagged).  Returns
    ``(Phi, approx_used)``.
    """
    V = np.asarray(V, dtype=float)
    dV = np.asarray(dV, dtype=float)
    if np.max(np.abs(dV - dV.T)) > 1e-9 * max(1.0, np.max(np.abs(dV))):
        raise SymplecticError("dV must be symmetric")
    n = V.shape[0] // 2
    if np.linalg.det(V) > approx_threshold:
        Phi = np.linalg.solve(V, np.linalg.solve(V, dV.T).T)
        return (Phi + Phi.T) / 2, True
    Om = omega(n)
    A = np.kron(V, V) - np.kron(Om, Om)
    try:
        phi = np.linalg.solve(A, dV.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise IllConditionedSolve("implicit QFI equation is singular") from exc
    Phi = phi.reshape(V.shape)
    Phi = (Phi + Phi.T) / 2
    resid = np.max(np.abs(V @ Phi @ V - Om @ Phi @ Om.T - dV))
    if resid > residual_tol * max(1.0, np.max(np.abs(dV))):
        raise IllConditionedSolve(f"Phi residual {resid:.2e} too large")
    return Phi, False


def quantum_fisher(state: GaussianState, dx, dV,
                   approx_threshold: float = 1e6):
    """Quantum Fisher information of a Gaussian family at one parameter point.

    Returns ``(qfi_xbar, qfi_V, Phi, approx_used)`` with
    ``qfi_xbar = dx^T V^{-1} dx`` and ``qfi_V = Tr[Phi dV] / 2``.
    """
    dx = np.asarray(dx, dtype=float)
    dV = np.asarray(dV, dtype=float)
    Phi, approx = solve_phi(state.V, dV, approx_threshold)
    qfi_x = float(dx @ np.linalg.solve(state.V, dx))
    qfi_V = 0.5 * float(np.trace(Phi @ dV))
    return qfi_x, qfi_V, Phi, approx


def fisher_point(model: ProbeModel, theta: float) -> FisherResult:
    """All four Fisher components of a probe model at ``theta``."""
    state = output_state(model, theta)
    dx, dV = output_derivatives(model, theta)
    I_mu, I_sigma = heterodyne_fisher(state, dx, dV)
    qx, qV, _, approx = quantum_fisher(state, dx, dV)
    return FisherResult(theta, I_mu, I_sigma, qx, qV, approx)


# ---------------------------------------------------------------------------
# the two-mode exceptional-point example
# ---------------------------------------------------------------------------

def ep_two_mode_model(kappa: float, g: float, eta1: float | None = None,
                      eta2: float | None = None, x_in=None, V_in=None,
                      strict_ep: bool = True) -> ProbeModel:
    """Two coupled modes with balanced loss/gain tuned to an exceptional point.

    The exceptional-point condition fixes ``eta1 = 2g - kappa`` and
    ``eta2 = 2g + kappa``; passing inconsistent values with ``strict_ep`` set
    raises.  The response and coupling matrices are the standard ones for this
    probe, expressed in interleaved ordering.
    """
    if kappa <= 0 or g <= 0:
        raise SymplecticError("kappa and g must be positive")
    ep1, ep2 = 2 * g - kappa, 2 * g + kappa
    if eta1 is None:
        eta1 = ep1
    if eta2 is None:
        eta2 = ep2
    if strict_ep and (abs(eta1 - ep1) > 1e-12 or abs(eta2 - ep2) > 1e-12):
        raise SymplecticError("loss/gain values violate the exceptional-point condition")
    if eta1 < 0 or eta2 < 0:
        raise SymplecticError("loss and gain rates must be nonnegative")

    def G_grouped(theta):
        M = np.array([
            [-1.0, 0.0, -theta, 1.0],
            [0.0, 1.0, 1.0, -theta],
            [theta, -1.0, -1.0, 0.0],
            [-1.0, theta, 0.0, 1.0],
        ])
        # stability guard: reject inside the divergence region
        if np.min(np.abs(np.linalg.eigvals(M))) < 1e-8:
            raise SingularResponse(f"EP response matrix singular at theta={theta}")
        return (kappa / (2 * g)) * np.linalg.inv(M)

    def G_inter(theta):
        return to_interleaved(G_grouped(theta), 2)

    R_grouped = np.diag([np.sqrt(eta1 / kappa), -np.sqrt(eta2 / kappa),
                         np.sqrt(eta1 / kappa), np.sqrt(eta2 / kappa)])
    R = to_interleaved(R_grouped, 2)
    if x_in is None:
        x_in = np.array([3.0, 0.0, 0.0, 0.0])
    if V_in is None:
        V_in = np.eye(4)
    return ProbeModel(G_inter, R, np.eye(4), np.asarray(x_in, dtype=float),
                      np.asarray(V_in, dtype=float))


def general_ep_model(Pi: np.ndarray, M: np.ndarray, R: np.ndarray,
                     V_env: np.ndarray, x_in: np.ndarray,
                     V_in: np.ndarray | None = None,
                     stability_tol: float = 1e-8) -> ProbeModel:
    """Probe with response ``G_theta = (theta Pi - M)^{-1}``, ``Pi`` full rank.

    The divergence order is set by the nilpotent structure of ``Pi^{-1} M``;
    the order is never computed here, only realized numerically.  Inside the
    stability region, ``G^{-1} V_out G^{-T}`` converges to
    ``(Id + M) V_in (Id + M)^T + R V_env R^T`` as theta -> 0.
    """
    Pi = np.asarray(Pi, dtype=float)
    M = np.asarray(M, dtype=float)
    if abs(np.linalg.det(Pi)) < 1e-12:
        raise SymplecticError("Pi must be full rank")
    d = Pi.shape[0]

    def G(theta):
        A = theta * Pi - M
        if np.min(np.abs(np.linalg.eigvals(A))) < stability_tol:
            raise SingularResponse(f"response pole at theta={theta}")
        return np.linalg.inv(A)

    if V_in is None:
        V_in = np.eye(d)
    return ProbeModel(G, np.asarray(R, dtype=float), np.asarray(V_env, dtype=float),
                      np.asarray(x_in, dtype=float), np.asarray(V_in, dtype=float),
                      stability_tol=stability_tol)


def conventional_model(pole_strength: float = 1.0, x_in=None) -> ProbeModel:
    """Diagonalizable single-pole control model: G = (pole_strength/theta) Id."""
    if x_in is None:
        x_in = np.array([3.0, 0.0, 0.0, 0.0])
    x_in = np.asarray(x_in, dtype=float)
    d = x_in.size

    def G(theta):
        if theta == 0:
            raise SingularResponse("pole at theta = 0")
        return (pole_strength / theta) * np.eye(d)

    return ProbeModel(G, np.zeros((d, d)), np.eye(d), x_in, np.eye(d))


def scaling_exponent(model: ProbeModel, theta_grid, quantity: str = "qfi_xbar"):
    """Least-squares slope of log(quantity) against log(theta).

    Returns ``(slope, stderr, values)``.  Requires at least six grid points and
    positive quantities; points in the unstable region raise.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if thetas.size < 6:
        raise SymplecticError("scaling fits need at least six grid points")
    vals = []
    for th in thetas:
        res = fisher_point(model, th)
        v = getattr(res, quantity)
        if v <= 0 or not np.isfinite(v):
            raise SymplecticError(f"nonpositive quantity at theta={th}")
        vals.append(v)
    lx = np.log(thetas)
    ly = np.log(np.asarray(vals))
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, res_sum, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope = float(coef[0])
    dof = max(1, thetas.size - 2)
    resid = ly - A @ coef
    var = float(resid @ resid) / dof
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    stderr = float(np.sqrt(var / sxx))
    return slope, stderr, np.asarray(vals)


# ---------------------------------------------------------------------------
# unitary bound
# ---------------------------------------------------------------------------

def sensitivity_matrix(S_of_theta, theta: float, h: float = 1e-6) -> np.ndarray:
    """Sensitivity W = S^{-1} dS/dtheta of a differentiable symplectic family."""
    Sp = np.asarray(S_of_theta(theta + h), dtype=float)
    Sm = np.asarray(S_of_theta(theta - h), dtype=float)
    S0 = np.asarray(S_of_theta(theta), dtype=float)
    dS = (Sp - Sm) / (2 * h)
    return np.linalg.solve(S0, dS)


def sensitivity_matrix_cayley(M_of_theta, theta: float, h: float = 1e-6,
                              singular_tol: float = 1e-10):
    """Cayley form of the sensitivity for S = cayley(Omega M_theta).

    ``W = (Omega M - Id/2)^{-1} Omega dM/dtheta (Omega M + Id/2)^{-1}``.
    Returns ``(W, min_sv_minus, min_sv_plus)``; a singular factor signals the
    squeezing-divergence regime and raises SingularFactor.
    """
    M0 = np.asarray(M_of_theta(theta), dtype=float)
    Mp = np.asarray(M_of_theta(theta + h), dtype=float)
    Mm = np.asarray(M_of_theta(theta - h), dtype=float)
    dM = (Mp - Mm) / (2 * h)
    d = M0.shape[0]
    Om = omega(d // 2)
    minus = Om @ M0 - 0.5 * np.eye(d)
    plus = Om @ M0 + 0.5 * np.eye(d)
    sv_minus = float(np.min(np.linalg.svd(minus, compute_uv=False)))
    sv_plus = float(np.min(np.linalg.svd(plus, compute_uv=False)))
    if sv_minus < singular_tol or sv_plus < singular_tol:
        raise SingularFactor(
            f"Cayley factor singular (min sv {min(sv_minus, sv_plus):.2e}); "
            "sensitivity diverges")
    W = np.linalg.solve(minus, Om @ dM @ np.linalg.inv(plus))
    return W, sv_minus, sv_plus
