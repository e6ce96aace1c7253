"""Interference-based Gaussian control with local (single-mode) symplectics.

Given generic copies of a multimode symplectic coupler, carefully chosen
per-mode symplectic operations interleaved between the copies decouple a mode,
transduce one mode into another, or swap two modes.  The support-map machinery
classifies the non-generic couplers for which this fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from symplectiq.core import SymplecticError, omega

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


class BlockwiseMismatch(SymplecticError):
    """Connector source and target differ in which mode blocks vanish."""

    def __init__(self, modes):
        self.modes = tuple(modes)
        super().__init__(f"source/target blocks mismatch at modes {self.modes}")


class GenericityFailure(SymplecticError):
    """A sandwich construction hit a non-generic configuration."""


@dataclass(frozen=True)
class LocalSymplectic:
    """Direct sum of single-mode symplectic blocks."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        for b in blocks:
            if b.shape != (2, 2):
                raise SymplecticError("local blocks must be 2x2")
            if abs(np.linalg.det(b) - 1.0) > 1e-9:
                raise SymplecticError("local blocks must have unit determinant")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_modes(self) -> int:
        return len(self.blocks)

    @property
    def matrix(self) -> np.ndarray:
        n = self.n_modes
        L = np.zeros((2 * n, 2 * n))
        for j, b in enumerate(self.blocks):
            L[2 * j:2 * j + 2, 2 * j:2 * j + 2] = b
        return L

    @staticmethod
    def identity(n_modes: int) -> "LocalSymplectic":
        return LocalSymplectic(tuple(np.eye(2) for _ in range(n_modes)))


def _rotation_to_q_axis(w: np.ndarray) -> np.ndarray:
    wn = w / np.linalg.norm(w)
    return np.array([[wn[0], wn[1]], [-wn[1], wn[0]]])


def _block_connector(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """2x2 symplectic (det 1) mapping u to v, built as rotation-squeeze-rotation."""
    Ru = _rotation_to_q_axis(u)
    Rv = _rotation_to_q_axis(v).T
    lam = np.linalg.norm(v) / np.linalg.norm(u)
    return Rv @ np.diag([lam, 1.0 / lam]) @ Ru


def local_connector(u: np.ndarray, v: np.ndarray, c: float = 1.0,
                    zero_tol: float = 1e-12) -> LocalSymplectic:
    """Local symplectic L with ``L u = c v``.

    Requires each per-mode block of ``u`` and ``c v`` to be both zero or both
    nonzero; offending modes are reported in :class:`BlockwiseMismatch`.
    """
    if c == 0:
        raise SymplecticError("scale c must be nonzero")
    u = np.asarray(u, dtype=float)
    v = c * np.asarray(v, dtype=float)
    n = u.size // 2
    scale = max(np.max(np.abs(u)), np.max(np.abs(v)), 1.0)
    bad = []
    blocks = []
    for j in range(n):
        ub, vb = u[2 * j:2 * j + 2], v[2 * j:2 * j + 2]
        nu, nv = np.linalg.norm(ub), np.linalg.norm(vb)
        if nu <= zero_tol * scale and nv <= zero_tol * scale:
            blocks.append(np.eye(2))
        elif nu <= zero_tol * scale or nv <= zero_tol * scale:
            bad.append(j)
            blocks.append(np.eye(2))
        else:
            blocks.append(_block_connector(ub, vb))
    if bad:
        raise BlockwiseMismatch(bad)
    return LocalSymplectic(tuple(blocks))


def _stage1(S_left: np.ndarray, S_right: np.ndarray, a: int, b: int,
            c: float = 1.0, min_block: float = 1e-8):
    """Sandwich S_left @ L @ S_right pinning one quadrature.

    The connector maps column ``2b`` (0-based ``2b-2``... here ``a``, ``b`` are
    0-based mode indices) of ``S_right`` onto ``-c * Omega @ row`` of ``S_left``,
    producing a product whose row ``2a`` is supported only at column ``2b+1``
    (value ``1/c``) and whose column ``2b`` is supported only at row ``2a+1``
    (value ``-c``).
    """
    n = S_left.shape[0] // 2
    Om = omega(n)
    y = S_right[:, 2 * b]
    z = S_left[2 * a, :]
    target = -Om @ z
    _check_generic_pairing(y, target, min_block)
    L = local_connector(y, target, c)
    return S_left @ L.matrix @ S_right, L


def _check_generic_pairing(u, v, min_block):
    n = u.size // 2
    for j in range(n):
        nu = np.linalg.norm(u[2 * j:2 * j + 2])
        nv = np.linalg.norm(v[2 * j:2 * j + 2])
        if (nu < min_block) != (nv < min_block):
            raise GenericityFailure(
                f"connector precondition fails at mode {j}: block norms {nu:.2e}/{nv:.2e}")
        if nu < min_block and nv < min_block:
            raise GenericityFailure(
                f"vanishing mode-{j} block (norms {nu:.2e}/{nv:.2e}); input not generic")


def _join(S_left: np.ndarray, S_right: np.ndarray, a: int, b: int,
          min_block: float = 1e-8):
    """Second-stage sandwich aligning a full mode.

    ``S_right`` must carry the stage-1 structure at column-mode ``b`` (its
    column ``2b`` supported at row ``2b+1`` only) and ``S_left`` at row-mode
    ``a`` against column-mode ``b`` (its row ``2a`` supported at column
    ``2b+1`` only).  The product ``S_left @ L @ S_right`` then maps mode ``b``
    onto mode ``a`` and the complement onto the complement.
    """
    n = S_left.shape[0] // 2
    Om = omega(n)
    bi, ai = 2 * b, 2 * a
    y1 = S_right[:, bi]
    y2 = S_right[:, bi + 1]
    z1 = S_left[ai, :]
    z2 = S_left[ai + 1, :]
    if np.max(np.abs(np.delete(y1, bi + 1))) > 1e-7 * max(1.0, abs(y1[bi + 1])):
        raise GenericityFailure("right factor lacks the pinned-column structure")
    if np.max(np.abs(np.delete(z1, bi + 1))) > 1e-7 * max(1.0, abs(z1[bi + 1])):
        raise GenericityFailure("left factor lacks the pinned-row structure")
    Oz1 = Om @ z1
    Oz2 = Om @ z2
    Lb = _J2
    Mb = np.column_stack([Oz2[bi:bi + 2], Oz1[bi:bi + 2]])
    if abs(np.linalg.det(Mb)) < min_block:
        raise GenericityFailure("mode-b alignment system is singular")
    alpha, delta = np.linalg.solve(Mb, Lb @ y2[bi:bi + 2])
    if abs(alpha) < min_block:
        raise GenericityFailure("degenerate alignment scale")
    blocks = []
    for j in range(n):
        if j == b:
            blocks.append(Lb)
            continue
        ub = y2[2 * j:2 * j + 2]
        vb = alpha * Oz2[2 * j:2 * j + 2]
        nu, nv = np.linalg.norm(ub), np.linalg.norm(vb)
        if nu < min_block or nv < min_block:
            raise GenericityFailure(f"join blocked by vanishing mode-{j} block")
        blocks.append(_block_connector(ub, vb))
    L = LocalSymplectic(tuple(blocks))
    return S_left @ L.matrix @ S_right, L


def sandwich_chain(S_d: np.ndarray, S_c: np.ndarray, S_b: np.ndarray,
                   S_a: np.ndarray, from_mode: int, to_mode: int):
    """Four copies and three locals: route mode ``from_mode`` to ``to_mode``.

    Computes ``S_a @ L3 @ S_b @ L2 @ S_c @ L1 @ S_d`` such that the result maps
    the phase plane of ``from_mode`` onto that of ``to_mode`` and the
    complementary modes onto the complementary modes.  ``from_mode == to_mode``
    decouples that mode.  Returns ``(result, (L1, L2, L3))``.
    """
    mats = [np.asarray(M, dtype=float) for M in (S_d, S_c, S_b, S_a)]
    n = mats[0].shape[0] // 2
    for M in mats:
        if M.shape != (2 * n, 2 * n):
            raise SymplecticError("all four copies must have the same dimension")
    A, L1 = _stage1(mats[1], mats[0], from_mode, from_mode)
    B, L3 = _stage1(mats[3], mats[2], to_mode, from_mode)
    result, L2 = _join(B, A, to_mode, from_mode)
    return result, (L1, L2, L3)


def sandwich_decouple(S_a, S_b, S_c, S_d, mode: int = 0):
    """Decouple ``mode`` from the rest: result = S_a L3 S_b L2 S_c L1 S_d.

    Returns ``(L1, L2, L3, result)`` with the result block diagonal between
    ``mode`` and its complement.
    """
    result, (L1, L2, L3) = sandwich_chain(S_d, S_c, S_b, S_a, mode, mode)
    return L1, L2, L3, result


def sandwich_transduce(S_a, S_b, S_c, S_d, from_mode: int, to_mode: int):
    """Map ``from_mode`` onto ``to_mode`` (and complement onto complement)."""
    result, locs = sandwich_chain(S_d, S_c, S_b, S_a, from_mode, to_mode)
    return locs, result


def _pad_local(L: LocalSymplectic, modes, n: int) -> np.ndarray:
    out = np.eye(2 * n)
    for j_sub, m in enumerate(modes):
        out[2 * m:2 * m + 2, 2 * m:2 * m + 2] = L.blocks[j_sub]
    return out


def sandwich_swap(S_copies, n_modes: int | None = None):
    """Swap modes 0 and N-1 using sixteen copies and fifteen locals.

    The sequence is one transduction chain (modes 0 -> N-1), three chains that
    decouple mode N-1, and three glue locals acting on modes 0..N-2, assembled
    as ``D3 L_c D2 L_b D1 L_a W``.  Returns ``(locals, result)`` where
    ``locals`` is the list of fifteen per-stage local symplectics (as full
    matrices, in application order) and the result has the anti-diagonal block
    structure exchanging the first and last modes.
    """
    S_copies = [np.asarray(M, dtype=float) for M in S_copies]
    if len(S_copies) != 16:
        raise SymplecticError("swap construction uses exactly sixteen copies")
    n = n_modes or S_copies[0].shape[0] // 2
    if n < 2:
        raise SymplecticError("swap needs at least two modes")
    last = n - 1
    W, (w1, w2, w3) = sandwich_chain(*S_copies[0:4], from_mode=0, to_mode=last)
    D1, (d11, d12, d13) = sandwich_chain(*S_copies[4:8], from_mode=last, to_mode=last)
    D2, (d21, d22, d23) = sandwich_chain(*S_copies[8:12], from_mode=last, to_mode=last)
    D3, (d31, d32, d33) = sandwich_chain(*S_copies[12:16], from_mode=last, to_mode=last)

    sub = np.arange(0, 2 * (n - 1))          # coords of modes 0..n-2
    shifted = np.arange(2, 2 * n)            # coords of modes 1..n-1
    Wr = W[np.ix_(sub, shifted)]             # complement block of the transducer
    D1r = D1[np.ix_(sub, sub)]
    D2r = D2[np.ix_(sub, sub)]
    D3r = D3[np.ix_(sub, sub)]
    m = n - 2                                # 0-based last mode of the reduced space
    A, La = _stage1(D1r, Wr, m, m)
    B, Lc = _stage1(D3r, D2r, 0, m)
    _, Lb = _join(B, A, 0, m)

    La_f = _pad_local(La, range(n - 1), n)
    Lb_f = _pad_local(Lb, range(n - 1), n)
    Lc_f = _pad_local(Lc, range(n - 1), n)
    total = D3 @ Lc_f @ D2 @ Lb_f @ D1 @ La_f @ W
    locals_seq = [w1.matrix, w2.matrix, w3.matrix, La_f,
                  d11.matrix, d12.matrix, d13.matrix, Lb_f,
                  d21.matrix, d22.matrix, d23.matrix, Lc_f,
                  d31.matrix, d32.matrix, d33.matrix]
    return locals_seq, total


def swap_pattern_residual(S: np.ndarray, n_modes: int) -> float:
    """Max norm outside the [[0,0,S1],[0,Sr,0],[S2,0,0]] swap pattern."""
    n = n_modes
    worst = 0.0
    for i in range(n):
        for j in range(n):
            blk = S[2 * i:2 * i + 2, 2 * j:2 * j + 2]
            allowed = ((i == 0 and j == n - 1) or (i == n - 1 and j == 0)
                       or (0 < i < n - 1 and 0 < j < n - 1))
            if not allowed:
                worst = max(worst, float(np.max(np.abs(blk))))
    return worst


# ---------------------------------------------------------------------------
# support maps and edge-case classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportMap:
    """0/1 matrix marking which 2x2 mode blocks of a symplectic are nonzero."""

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=int)
        if not np.isin(f, (0, 1)).all():
            raise SymplecticError("support entries must be 0 or 1")
        object.__setattr__(self, "f", f)

    @property
    def n_modes(self) -> int:
        return self.f.shape[0]


def support_map(S: np.ndarray, support_tol: float | None = None) -> SupportMap:
    """Blockwise support f(S): 1 where the 2x2 mode block is nonzero."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    tol = 1e-10 * np.max(np.abs(S)) if support_tol is None else support_tol
    f = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            if np.max(np.abs(S[2 * i:2 * i + 2, 2 * j:2 * j + 2])) > tol:
                f[i, j] = 1
    return SupportMap(f)


def boolean_power(f: np.ndarray, k: int) -> np.ndarray:
    """k-th Boolean matrix power (OR of AND products)."""
    f = np.asarray(f, dtype=bool)
    out = np.eye(f.shape[0], dtype=bool)
    for _ in range(k):
        out = (out.astype(int) @ f.astype(int)) > 0
    return out.astype(int)


def _is_equivalence(f: np.ndarray) -> bool:
    f = np.asarray(f, dtype=bool)
    if not np.all(np.diag(f)):
        return False
    if not np.array_equal(f, f.T):
        return False
    closure = (f.astype(int) @ f.astype(int)) > 0
    return np.array_equal(closure, f)


def _summands(f: np.ndarray):
    """Connected blocks of an equivalence-relation support matrix."""
    n = f.shape[0]
    seen = np.zeros(n, dtype=bool)
    blocks = []
    for i in range(n):
        if seen[i]:
            continue
        members = tuple(np.nonzero(f[i])[0])
        for m in members:
            seen[m] = True
        blocks.append(members)
    return blocks


def _permutation_of_power(fp: np.ndarray, blocks) -> list | None:
    """Permutation of summands realized by a stabilized power; None if unclean."""
    n_blocks = len(blocks)
    perm = [None] * n_blocks
    for k, cols in enumerate(blocks):
        targets = set()
        for j, rows in enumerate(blocks):
            sub = fp[np.ix_(rows, cols)]
            if np.all(sub):
                targets.add(j)
            elif np.any(sub):
                return None
        if len(targets) != 1:
            return None
        perm[k] = targets.pop()
    if sorted(perm) != list(range(n_blocks)):
        return None
    return perm


@dataclass(frozen=True)
class StabilizationResult:
    c: int
    d: int
    summands: tuple
    permutations: dict  # power -> tuple permutation (summand index map)


def stabilize(S_or_f, support_tol: float | None = None) -> StabilizationResult:
    """Smallest power c with a stable self-decomposition, plus the power group.

    Accepts a symplectic matrix or a 0/1 support matrix.  Returns the stable
    decomposition of the Boolean power ``f(S)^c`` (an equivalence relation on
    modes) and the permutations of its summands realized by powers ``c..d``,
    where ``d`` closes the cyclic group.
    """
    f = _as_support(S_or_f, support_tol)
    n = f.shape[0]
    bound = n * (n + 1)
    c = None
    for k in range(1, bound + 1):
        fk = boolean_power(f, k)
        if _is_equivalence(fk):
            blocks = _summands(fk)
            # the next powers must act as clean permutations of these summands
            if _permutation_of_power(boolean_power(f, k + 1), blocks) is not None:
                c = k
                break
    if c is None:
        raise SymplecticError(f"support map did not stabilize within {bound} powers")
    blocks = _summands(boolean_power(f, c))
    gen = _permutation_of_power(boolean_power(f, c + 1), blocks)
    perms = {c: tuple(range(len(blocks)))}
    cur = tuple(gen)
    power = c + 1
    seen = {perms[c]}
    d = c
    while cur not in seen:
        perms[power] = cur
        seen.add(cur)
        d = power
        cur = tuple(gen[i] for i in cur)
        power += 1
    return StabilizationResult(c=c, d=d, summands=tuple(blocks), permutations=perms)


def _as_support(S_or_f, support_tol):
    arr = np.asarray(S_or_f)
    if arr.dtype.kind in "iub" and np.isin(arr, (0, 1)).all():
        return arr.astype(int)
    return support_map(arr.astype(float), support_tol).f


def classify_swappable(S_or_f, j: int, k: int, support_tol: float | None = None):
    """Whether modes j and k can be swapped with copies of S, with certificate.

    True when both modes share a stable summand, or some power between c and d
    exchanges their summands.  Returns ``(answer, certificate)``.
    """
    stab = stabilize(S_or_f, support_tol)
    loc = {}
    for idx, block in enumerate(stab.summands):
        for m in block:
            loc[m] = idx
    bj, bk = loc[j], loc[k]
    if bj == bk:
        return True, {"reason": "same_summand", "summand": bj}
    for power, perm in stab.permutations.items():
        if perm[bj] == bk and perm[bk] == bj:
            return True, {"reason": "power_swap", "power": power,
                          "summands": (bj, bk)}
    return False, {"reason": "no_swap", "summands": (bj, bk),
                   "c": stab.c, "d": stab.d}
