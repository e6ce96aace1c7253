"""Gaussian states as (first moments, covariance) pairs, plus Gaussian measurements.

States are normalized so that the vacuum covariance is the identity.  All
arrays use the interleaved coordinate ordering of :mod:`symplectiq.core`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from symplectiq import core
from symplectiq.core import (
    ModeOrdering,
    SubspaceBasis,
    SymplecticError,
    mode_indices,
    omega,
    q_indices,
)


class SingularCovariance(SymplecticError):
    """Covariance matrix is singular where an inverse is required."""


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state with first moments ``x`` and covariance ``V``."""

    x: np.ndarray
    V: np.ndarray
    ordering: ModeOrdering = ModeOrdering.INTERLEAVED

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        V = np.asarray(self.V, dtype=float)
        if V.shape != (x.size, x.size) or x.size % 2:
            raise SymplecticError("moments must be a 2n vector and 2n x 2n matrix")
        if np.max(np.abs(V - V.T)) > 1e-9 * max(1.0, np.max(np.abs(V))):
            raise SymplecticError("covariance must be symmetric")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "V", (V + V.T) / 2)

    @property
    def n_modes(self) -> int:
        return self.x.size // 2

    def physicality(self) -> float:
        """Smallest eigenvalue of V + i*Omega (>= 0 up to tolerance when physical)."""
        Om = omega(self.n_modes, self.ordering)
        return float(np.min(np.linalg.eigvalsh(self.V + 1j * Om)))

    def is_physical(self, tol: float = 1e-8) -> bool:
        return self.physicality() >= -tol

    def to_json(self) -> str:
        return json.dumps({
            "x_bar": self.x.tolist(),
            "V": self.V.reshape(-1).tolist(),
            "ordering": self.ordering.value,
        })

    @staticmethod
    def from_json(text: str) -> "GaussianState":
        obj = json.loads(text)
        x = np.asarray(obj["x_bar"], dtype=float)
        V = np.asarray(obj["V"], dtype=float).reshape(x.size, x.size)
        return GaussianState(x, V, ModeOrdering(obj["ordering"]))


@dataclass(frozen=True)
class InfSqueezedProjector:
    """Ideal projector onto eigenvalue ``eta`` of the quadratures spanning ``plane``."""

    plane: SubspaceBasis
    eta: np.ndarray

    def __post_init__(self):
        if self.plane.kind != "lagrangian":
            raise SymplecticError("projector plane must be Lagrangian")
        eta = np.asarray(self.eta, dtype=float).reshape(-1)
        if eta.size != self.plane.dim:
            raise SymplecticError("eta must have one entry per plane direction")
        object.__setattr__(self, "eta", eta)


@dataclass(frozen=True)
class MeasurementSpec:
    """Gaussian measurement: ideal homodyne, ideal heterodyne, or general-dyne.

    * ``kind="homodyne"``: ideal quadrature measurement along ``plane``.
    * ``kind="heterodyne"``: POVM of Gaussian states with identity covariance.
    * ``kind="general_dyne"``: the measured modes are first mixed with an
      environment state by the symplectic matrix ``mix`` and the plane of the
      retained outputs is homodyned.
    """

    kind: str
    plane: SubspaceBasis | None = None
    mix: np.ndarray | None = None
    env: GaussianState | None = None

    def __post_init__(self):
        if self.kind not in ("homodyne", "heterodyne", "general_dyne"):
            raise SymplecticError(f"unknown measurement kind {self.kind!r}")
        if self.kind == "homodyne" and self.plane is None:
            raise SymplecticError("homodyne requires a plane")
        if self.kind == "general_dyne" and (self.mix is None or self.env is None
                                            or self.plane is None):
            raise SymplecticError("general_dyne requires mix, env and plane")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def vacuum(n_modes: int) -> GaussianState:
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def coherent(x: np.ndarray) -> GaussianState:
    x = np.asarray(x, dtype=float)
    return GaussianState(x, np.eye(x.size))


def thermal(nbar) -> GaussianState:
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    if np.any(nbar < 0):
        raise SymplecticError("thermal occupation must be nonnegative")
    diag = np.repeat(2 * nbar + 1, 2)
    return GaussianState(np.zeros(diag.size), np.diag(diag))


def squeezed_vacuum(xi) -> GaussianState:
    """Vacuum squeezed per mode: V = diag(e^{-2 xi}, e^{+2 xi})."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    diag = np.concatenate([[np.exp(-2 * s), np.exp(2 * s)] for s in xi])
    return GaussianState(np.zeros(diag.size), np.diag(diag))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def apply_gaussian_unitary(state: GaussianState, S: np.ndarray,
                           shift: np.ndarray | None = None) -> GaussianState:
    """Transform moments by a Gaussian unitary: x -> S x + shift, V -> S V S^T."""
    S = np.asarray(S, dtype=float)
    if S.shape[0] != state.x.size:
        raise SymplecticError("dimension mismatch between state and matrix")
    v = np.zeros(state.x.size) if shift is None else np.asarray(shift, dtype=float)
    return GaussianState(S @ state.x + v, S @ state.V @ S.T, state.ordering)


def wigner_eval(state: GaussianState, u: np.ndarray) -> float:
    """Wigner function value at phase-space point ``u``."""
    u = np.asarray(u, dtype=float)
    n = state.n_modes
    det = np.linalg.det(state.V)
    if det <= 0 or not np.isfinite(det):
        raise SingularCovariance("covariance is singular")
    d = u - state.x
    expo = -0.5 * d @ np.linalg.solve(state.V, d)
    return float(np.exp(expo) / ((2 * np.pi) ** n * np.sqrt(det)))


def characteristic_eval(state: GaussianState, v: np.ndarray) -> complex:
    """Characteristic function chi(v) = exp(i (Omega v).x - (Omega v).V.(Omega v)/2)."""
    v = np.asarray(v, dtype=float)
    Om = omega(state.n_modes, state.ordering)
    w = Om @ v
    return complex(np.exp(1j * w @ state.x - 0.5 * w @ state.V @ w))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    x = np.concatenate([a.x, b.x])
    V = np.zeros((x.size, x.size))
    V[:a.x.size, :a.x.size] = a.V
    V[a.x.size:, a.x.size:] = b.V
    return GaussianState(x, V, a.ordering)


def partial_trace(state: GaussianState, keep) -> GaussianState:
    """Reduced state on the modes in ``keep``."""
    keep = list(keep)
    if not keep:
        raise SymplecticError("keep set must be nonempty")
    idx = mode_indices(keep)
    return GaussianState(state.x[idx], state.V[np.ix_(idx, idx)], state.ordering)


def _plane_matrix(plane: SubspaceBasis, measured, n_modes: int) -> np.ndarray:
    """Plane basis as a (2N x M) matrix acting on the measured-mode block."""
    F = plane.F
    if F.shape[0] == 2 * n_modes:
        return F
    if F.shape[0] == 2 * len(measured):
        big = np.zeros((2 * n_modes, F.shape[1]))
        big[mode_indices(measured), :] = F
        return big
    raise SymplecticError("plane dimension matches neither system nor measured block")


def condition_on_homodyne(state: GaussianState, measured, plane: SubspaceBasis,
                          outcome: np.ndarray):
    """Ideal homodyne of the quadratures spanning ``plane`` on modes ``measured``.

    Returns ``(density, conditional_state)``: the Gaussian outcome density at
    ``outcome`` (in the plane's own coordinates) and the posterior state of the
    remaining modes.  An exactly singular measured-block covariance falls back
    to a rank-revealing pseudo-inverse, returning the limiting posterior.
    """
    measured = sorted(measured)
    keep = [m for m in range(state.n_modes) if m not in measured]
    eta = np.asarray(outcome, dtype=float).reshape(-1)
    B = _plane_matrix(plane, measured, state.n_modes).T      # (M, 2N)
    if eta.size != B.shape[0]:
        raise SymplecticError("outcome length must match the plane dimension")
    mean_y = B @ state.x
    cov_y = B @ state.V @ B.T
    scale = max(np.max(np.abs(state.V)), 1.0)
    rank_cut = 1e-12 * scale
    if np.linalg.cond(cov_y) > 1 / rank_cut or np.linalg.det(cov_y) <= 0:
        cov_y_inv = np.linalg.pinv(cov_y, rcond=1e-12)
        dens = _degenerate_density(eta - mean_y, cov_y)
    else:
        cov_y_inv = np.linalg.inv(cov_y)
        d = eta - mean_y
        dens = float(np.exp(-0.5 * d @ cov_y_inv @ d)
                     / np.sqrt((2 * np.pi) ** eta.size * np.linalg.det(cov_y)))
    if not keep:
        return dens, None
    gain = state.V @ B.T @ cov_y_inv
    x_post = state.x + gain @ (eta - mean_y)
    V_post = state.V - gain @ B @ state.V
    idx = mode_indices(keep)
    return dens, GaussianState(x_post[idx], V_post[np.ix_(idx, idx)], state.ordering)


def _degenerate_density(d: np.ndarray, cov: np.ndarray) -> float:
    """Density of a (possibly rank-deficient) Gaussian at displacement d."""
    w, Q = np.linalg.eigh(cov)
    keep = w > 1e-12 * max(1.0, np.max(np.abs(w)))
    y = Q.T @ d
    if np.any(np.abs(y[~keep]) > 1e-6 * max(1.0, np.linalg.norm(d))):
        return 0.0
    wk = w[keep]
    if wk.size == 0:
        return float("inf")
    return float(np.exp(-0.5 * np.sum(y[keep] ** 2 / wk))
                 / np.sqrt((2 * np.pi) ** wk.size * np.prod(wk)))


def condition_on_projector(state: GaussianState, measured,
                           projector: InfSqueezedProjector):
    """Condition on an exact infinitely squeezed projector."""
    return condition_on_homodyne(state, measured, projector.plane, projector.eta)


def heterodyne_density(state: GaussianState, measured, outcome: np.ndarray):
    """Ideal heterodyne of ``measured`` modes: POVM of identity-covariance states.

    Returns ``(density, conditional_state)`` with the outcome a full phase-space
    vector on the measured modes.
    """
    measured = sorted(measured)
    keep = [m for m in range(state.n_modes) if m not in measured]
    eta = np.asarray(outcome, dtype=float).reshape(-1)
    idx = mode_indices(measured)
    B = np.zeros((len(idx), 2 * state.n_modes))
    for row, i in enumerate(idx):
        B[row, i] = 1.0
    mean_y = B @ state.x
    cov_y = B @ state.V @ B.T + np.eye(len(idx))   # POVM covariance = Id
    d = eta - mean_y
    dens = float(np.exp(-0.5 * d @ np.linalg.solve(cov_y, d))
                 / np.sqrt((2 * np.pi) ** eta.size * np.linalg.det(cov_y)))
    if not keep:
        return dens, None
    gain = state.V @ B.T @ np.linalg.inv(cov_y)
    x_post = state.x + gain @ d
    V_post = state.V - gain @ B @ state.V
    kidx = mode_indices(keep)
    return dens, GaussianState(x_post[kidx], V_post[np.ix_(kidx, kidx)], state.ordering)


def general_dyne(state: GaussianState, measured, spec: MeasurementSpec,
                 outcome: np.ndarray):
    """General-dyne measurement built from mixing with an environment state.

    The measured modes are mixed with ``spec.env`` through ``spec.mix`` and the
    ``spec.plane`` quadratures of the measured block are ideally homodyned.
    """
    if spec.kind != "general_dyne":
        raise SymplecticError("spec must be of kind 'general_dyne'")
    measured = sorted(measured)
    n = state.n_modes
    n_env = spec.env.n_modes
    joint = tensor(state, spec.env)
    S_mix = np.asarray(spec.mix, dtype=float)
    meas_env = list(measured) + [n + j for j in range(n_env)]
    if S_mix.shape[0] != 2 * len(meas_env):
        raise SymplecticError("mix matrix must act on measured + environment modes")
    S_big = np.eye(2 * (n + n_env))
    idx = mode_indices(meas_env)
    S_big[np.ix_(idx, idx)] = S_mix
    mixed = apply_gaussian_unitary(joint, S_big)
    dens, post = condition_on_homodyne(mixed, meas_env, spec.plane, outcome)
    return dens, post


def measure(state: GaussianState, measured, spec: MeasurementSpec,
            outcome: np.ndarray):
    """Dispatch a Gaussian measurement per its spec."""
    if spec.kind == "homodyne":
        return condition_on_homodyne(state, measured, spec.plane, outcome)
    if spec.kind == "heterodyne":
        return heterodyne_density(state, measured, outcome)
    return general_dyne(state, measured, spec, outcome)


def approx_inf_squeezed(state: GaussianState, plane: SubspaceBasis,
                        zeta: float) -> GaussianState:
    """Squeeze towards the infinitely squeezed limit along ``plane``.

    The plane quadratures are scaled by ``zeta`` (variance by ``zeta**2``);
    their symplectic conjugates by ``1/zeta``.  ``zeta = 1`` is the identity.
    """
    if not 0 < zeta <= 1:
        raise SymplecticError("zeta must lie in (0, 1]")
    n = state.n_modes
    F = plane.F
    if F.shape[0] != 2 * n:
        raise SymplecticError("plane must be given in full phase-space coordinates")
    Om = omega(n)
    Fc = Om @ F
    S = np.eye(2 * n) + (zeta - 1.0) * F @ F.T + (1.0 / zeta - 1.0) * Fc @ Fc.T
    core.assert_symplectic(S, tol=1e-8)
    return apply_gaussian_unitary(state, S)


def outcomes_to_csv(outcomes, densities) -> str:
    """Measurement records as CSV rows: outcome components, then the density."""
    outcomes = np.atleast_2d(np.asarray(outcomes, dtype=float))
    densities = np.asarray(densities, dtype=float).reshape(-1)
    if outcomes.shape[0] != densities.size:
        raise SymplecticError("one density per outcome row required")
    header = ",".join([f"eta_{k + 1}" for k in range(outcomes.shape[1])] + ["density"])
    rows = [header]
    for row, dens in zip(outcomes, densities):
        rows.append(",".join(format(v, ".17g") for v in (*row, dens)))
    return "\n".join(rows) + "\n"


def q_plane(modes, n_modes: int) -> SubspaceBasis:
    """Lagrangian plane of the q quadratures of ``modes`` (within that block)."""
    kind = "lagrangian" if len(modes) == n_modes else "isotropic"
    return SubspaceBasis.from_indices(q_indices(modes), n_modes, kind)


def p_plane(modes, n_modes: int) -> SubspaceBasis:
    kind = "lagrangian" if len(modes) == n_modes else "isotropic"
    return SubspaceBasis.from_indices(p_indices(modes), n_modes, kind)
