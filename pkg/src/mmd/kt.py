"""Kac-Takesaki operators W (on l2(G x G)) and V (on l2(Ĝ x Ĝ)), the coupling
U(W) of a representation, its Fourier transform and the relations between them.

Two-leg spaces are indexed ``a * |G| + b``.  Coupled spaces are ``H (x) l2(G)``
indexed ``i * |G| + u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import DualGroup, FiniteAbelianGroup, fourier_matrix
from .operators import (SpectralMeasure, UnitaryRep, apply_on_legs, embed,
                        embed_permutation, permutation_matrix, snag_decompose, tensor)


@dataclass(frozen=True)
class KTOperator:
    """Permutation unitary; ``perm[src] = dst``."""

    group: FiniteAbelianGroup
    kind: str  # "W" or "V"
    perm: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return permutation_matrix(self.perm)

    @property
    def adjoint_perm(self) -> np.ndarray:
        return np.argsort(self.perm)


@dataclass(frozen=True)
class CouplingOperator:
    rep: UnitaryRep
    form: str  # "U(W)", "~U(W)" or "~U(V)"
    matrix: np.ndarray = field(repr=False)

    @property
    def dims(self) -> list[int]:
        return [self.rep.dim, self.rep.group.order]

    def adjoint(self) -> "CouplingOperator":
        flipped = {"~U(W)": "~U(V)", "~U(V)": "~U(W)"}.get(self.form, self.form + "*")
        return CouplingOperator(self.rep, flipped, self.matrix.conj().T)


def kt_w(G: FiniteAbelianGroup) -> KTOperator:
    """``W delta_(a, b) = delta_(a + b, b)``."""
    n = G.order
    a, b = np.divmod(np.arange(n * n), n)
    return KTOperator(G, "W", G.add_table[a, b] * n + b)


def kt_v(dual: FiniteAbelianGroup) -> KTOperator:
    """``V delta_(g, c) = delta_(g, g + c)``; the copy map ``V|g>|iota> = |g>|g>``."""
    if not isinstance(dual, DualGroup):
        dual = DualGroup(dual.orders)
    n = dual.order
    g, c = np.divmod(np.arange(n * n), n)
    return KTOperator(dual, "V", g * n + dual.add_table[g, c])


def kt_v_fourier(G: FiniteAbelianGroup) -> np.ndarray:
    """Second route to V: ``(F (x) F) W* (F (x) F)^-1`` as a dense matrix."""
    F = fourier_matrix(G)
    FF = np.kron(F, F)
    return FF @ kt_w(G).matrix.T @ FF.conj().T


def regular_rep(G: FiniteAbelianGroup) -> UnitaryRep:
    """Left translations ``lambda_u delta_v = delta_(u + v)``."""
    n = G.order
    mats = np.zeros((n, n, n), dtype=complex)
    for u in range(n):
        mats[u, G.add_table[u], np.arange(n)] = 1.0
    return UnitaryRep(G, mats)


def coupling_uw(rep: UnitaryRep) -> CouplingOperator:
    """``U(W) = sum_u U_u (x) |u><u|``, block diagonal over the pointer index."""
    n, d = rep.group.order, rep.dim
    M = np.einsum("uab,uv->aubv", rep.matrices, np.eye(n)).reshape(d * n, d * n)
    return CouplingOperator(rep, "U(W)", M)


def fourier_coupling(c: CouplingOperator) -> CouplingOperator:
    """``~U(W) = (1 (x) F) U(W) (1 (x) F)^-1``."""
    if c.form != "U(W)":
        raise ValueError(f"expected a U(W)-form coupling, got {c.form}")
    F = fourier_matrix(c.rep.group)
    X = tensor(np.eye(c.rep.dim), F)
    return CouplingOperator(c.rep, "~U(W)", X @ c.matrix @ X.conj().T)


def spectral_coupling(E: SpectralMeasure, rep: UnitaryRep, adjoint: bool = False) -> CouplingOperator:
    """``sum_chi E(chi) (x) lambda_chi*`` (or ``~U(V) = sum E(chi) (x) lambda_chi``)."""
    lam = regular_rep(E.dual).matrices
    if not adjoint:
        lam = lam.conj().transpose(0, 2, 1)
    d, n = E.projections.shape[1], E.dual.order
    M = np.einsum("kab,kuv->aubv", E.projections, lam).reshape(d * n, d * n)
    return CouplingOperator(rep, "~U(V)" if adjoint else "~U(W)", M)


def coupling_v(rep: UnitaryRep, seed: int = 0) -> CouplingOperator:
    """``~U(V) = ~U(W)*``, acting as ``xi (x) |g> -> sum_chi E(chi) xi (x) |chi g>``."""
    return spectral_coupling(snag_decompose(rep, seed=seed), rep, adjoint=True)


# --- relation residuals ------------------------------------------------------

def _perm_residual(p, q) -> float:
    # ||P - Q||_F for permutation matrices: each differing column contributes 2.
    return float(np.sqrt(2.0 * np.count_nonzero(np.asarray(p) != np.asarray(q))))


def _pentagon_sides(k12, k23, k13, form):
    # perm composition: (A B)[i] = A[B[i]], i.e. ``a[b]``.
    if form == "W":  # W12 W23 = W23 W13 W12
        return k12[k23], k23[k13[k12]]
    # V is the Fourier transform of W*, so the adjoint relation holds:
    # V23 V12 = V12 V13 V23.
    return k23[k12], k12[k13[k23]]


def pentagon_residual(K: KTOperator, form: str | None = None) -> float:
    """Pentagon residual on ``l2(G)^{x3}``, computed exactly on index maps.

    ``form="W"`` checks ``K12 K23 = K23 K13 K12`` and ``form="V"`` checks
    ``K23 K12 = K12 K13 K23``; the default is the form the operator satisfies.
    """
    form = K.kind if form is None else form
    n = K.group.order
    dims = [n, n, n]
    k12 = embed_permutation(K.perm, dims, [0, 1])
    k23 = embed_permutation(K.perm, dims, [1, 2])
    k13 = embed_permutation(K.perm, dims, [0, 2])
    lhs, rhs = _pentagon_sides(k12, k23, k13, form)
    return _perm_residual(lhs, rhs)


def pentagon_residual_dense(K: KTOperator, form: str | None = None) -> float:
    """Same relation with explicit dense matrices (small groups only)."""
    form = K.kind if form is None else form
    n = K.group.order
    dims = [n, n, n]
    M = K.matrix
    a, b, c = embed(M, dims, [0, 1]), embed(M, dims, [1, 2]), embed(M, dims, [0, 2])
    if form == "W":
        return float(np.linalg.norm(a @ b - b @ c @ a))
    return float(np.linalg.norm(b @ a - a @ c @ b))


def modified_pentagon_residual(c: CouplingOperator) -> float:
    """``||U(W)_12 W_23 - W_23 U(W)_13 U(W)_12||_F`` on ``H (x) l2(G) (x) l2(G)``."""
    G = c.rep.group
    d, n = c.rep.dim, G.order
    dims = [d, n, n]
    w23 = embed_permutation(kt_w(G).perm, dims, [1, 2])
    X = np.eye(d * n * n, dtype=complex)
    # Apply each side to the identity, rightmost factor first.
    lhs = apply_on_legs(c.matrix, _permute_rows(w23, X), dims, [0, 1])
    rhs = apply_on_legs(c.matrix, X, dims, [0, 1])
    rhs = apply_on_legs(c.matrix, rhs, dims, [0, 2])
    rhs = _permute_rows(w23, rhs)
    return float(np.linalg.norm(lhs - rhs))


def intertwining_residual(c: CouplingOperator) -> float:
    """``max_u ||U(W)(1 (x) lambda_u) - (U_u (x) lambda_u) U(W)||_F``."""
    rep = c.rep
    lam = regular_rep(rep.group).matrices
    I = np.eye(rep.dim)
    worst = 0.0
    for u in range(rep.group.order):
        lhs = c.matrix @ np.kron(I, lam[u])
        rhs = np.kron(rep.matrices[u], lam[u]) @ c.matrix
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def unitarity_residual(M) -> float:
    M = np.asarray(M)
    return float(np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0])))


def _permute_rows(perm, X):
    out = np.empty_like(X)
    out[perm] = X
    return out


def verify_relations(rep: UnitaryRep, seed: int = 0, tol: float = 1e-10, dense_limit: int = 4) -> list[dict]:
    """Full relation suite for the group of ``rep`` and its coupling."""
    G = rep.group
    W, V = kt_w(G), kt_v(G.dual())
    uw = coupling_uw(rep)
    tuw = fourier_coupling(uw)
    E = snag_decompose(rep, seed=seed)
    spectral = spectral_coupling(E, rep)
    out = [
        ("pentagon_W", pentagon_residual(W)),
        ("pentagon_V", pentagon_residual(V)),
        ("modified_pentagon", modified_pentagon_residual(uw)),
        ("intertwining", intertwining_residual(uw)),
        ("V_kernel_vs_fourier", float(np.linalg.norm(V.matrix - kt_v_fourier(G)))),
        ("UW_fourier_vs_spectral", float(np.linalg.norm(tuw.matrix - spectral.matrix))),
        ("unitary_UW", unitarity_residual(uw.matrix)),
        ("unitary_tilde_UW", unitarity_residual(tuw.matrix)),
        ("snag_reconstruction", float(np.max(np.linalg.norm(E.reconstruct() - rep.matrices, axis=(1, 2))))),
    ]
    if G.order <= dense_limit:
        out.append(("pentagon_W_dense", pentagon_residual_dense(W)))
        out.append(("pentagon_V_dense", pentagon_residual_dense(V)))
    return [{"relation": name, "residual": r, "tolerance": tol, "pass": bool(r <= tol)} for name, r in out]
