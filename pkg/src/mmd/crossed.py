"""Crossed product ``M x|_alpha U`` on ``H (x) l2(U)`` in the Schrödinger and
Heisenberg constructions, the ``Ad(U(W))`` map between them, the convolution
representation, and the centre of the decoupled algebra ``M (x) A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (MatrixStarAlgebra, center, conjugate, generate, is_factor,
                      same_subspace, subspace_distance, tensor_algebra, scalars)
from .errors import DimensionError, DomainError, EquivalenceError, PreconditionError
from .kt import coupling_uw, regular_rep
from .operators import UnitaryRep

EQUIV_TOL = 1e-9


@dataclass(frozen=True)
class CrossedProduct:
    algebra: MatrixStarAlgebra = field(repr=False)
    picture: str  # "schrodinger" | "heisenberg"
    system: MatrixStarAlgebra = field(repr=False)
    rep: UnitaryRep = field(repr=False)

    @property
    def dim(self) -> int:
        return self.algebra.dim


def _check(M: MatrixStarAlgebra, rep: UnitaryRep):
    if M.n != rep.dim:
        raise DimensionError(f"system algebra acts on C^{M.n}, representation on C^{rep.dim}")


def build_schrodinger(M: MatrixStarAlgebra, rep: UnitaryRep) -> CrossedProduct:
    """``(M (x) 1) v {U_u (x) lambda_u}``."""
    _check(M, rep)
    n = rep.group.order
    lam = regular_rep(rep.group).matrices
    gens = [np.kron(m, np.eye(n)) for m in M.basis]
    gens += [np.kron(rep.matrices[g], lam[g]) for g in rep.group.generator_indices]
    return CrossedProduct(generate(gens, n=M.n * n), "schrodinger", M, rep)


def build_heisenberg(M: MatrixStarAlgebra, rep: UnitaryRep) -> CrossedProduct:
    """``pi_alpha(M) v (1 (x) lambda(U))`` with ``pi_alpha(m) = U(W)* (m (x) 1) U(W)``."""
    _check(M, rep)
    n = rep.group.order
    UW = coupling_uw(rep).matrix
    lam = regular_rep(rep.group).matrices
    gens = [UW.conj().T @ np.kron(m, np.eye(n)) @ UW for m in M.basis]
    gens += [np.kron(np.eye(M.n), lam[g]) for g in rep.group.generator_indices]
    return CrossedProduct(generate(gens, n=M.n * n), "heisenberg", M, rep)


def alpha_w_equivalence(cp_s: CrossedProduct, cp_h: CrossedProduct, rep: UnitaryRep,
                        tol: float = EQUIV_TOL) -> dict:
    """Check ``Ad(U(W)^-1)`` maps the Schrödinger algebra onto the Heisenberg one and back."""
    UW = coupling_uw(rep).matrix
    forward = subspace_distance(conjugate(cp_s.algebra, UW.conj().T), cp_h.algebra)
    backward = subspace_distance(conjugate(cp_h.algebra, UW), cp_s.algebra)
    report = {"forward": forward, "backward": backward, "tolerance": tol,
              "pass": bool(max(forward, backward) <= tol)}
    if not report["pass"]:
        raise EquivalenceError(f"Ad(U(W)) equivalence residual {max(forward, backward):.3g} exceeds {tol:g}")
    return report


def convolution_rep(F, rep: UnitaryRep, M: MatrixStarAlgebra | None = None) -> np.ndarray:
    """``lambda^M(F) = sum_u (F(u) (x) 1)(U_u (x) lambda_u)`` (counting measure)."""
    F = np.asarray(F, dtype=complex)
    G = rep.group
    if F.shape != (G.order, rep.dim, rep.dim):
        raise DimensionError(f"expected ({G.order}, {rep.dim}, {rep.dim}) values, got {F.shape}")
    if M is not None:
        for u in range(G.order):
            if not M.contains(F[u]):
                raise DomainError(f"value at {G.element(u)} is not in the system algebra")
    lam = regular_rep(G).matrices
    n = G.order
    return sum(np.kron(F[u], np.eye(n)) @ np.kron(rep.matrices[u], lam[u]) for u in range(n))


def convolve(F1, F2, rep: UnitaryRep) -> np.ndarray:
    """``(F1 * F2)(u) = sum_v F1(v) alpha_v(F2(u - v))`` with ``alpha_v = Ad(U_v)``."""
    F1, F2 = np.asarray(F1, dtype=complex), np.asarray(F2, dtype=complex)
    G = rep.group
    U = rep.matrices
    out = np.zeros_like(F1)
    for u in range(G.order):
        for v in range(G.order):
            w = G.add_table[u, G.neg_table[v]]
            out[u] += F1[v] @ U[v] @ F2[w] @ U[v].conj().T
    return out


def coupled_center(M: MatrixStarAlgebra, A: MatrixStarAlgebra) -> MatrixStarAlgebra:
    """Centre of the algebra generated by ``M (x) 1`` and ``1 (x) A``."""
    if not is_factor(M):
        raise PreconditionError("M must be a factor")
    if not A.is_abelian():
        raise PreconditionError("A must be abelian")
    gens = [np.kron(m, np.eye(A.n)) for m in M.basis] + [np.kron(np.eye(M.n), a) for a in A.basis]
    return center(generate(gens, n=M.n * A.n))


def coupled_center_residual(M: MatrixStarAlgebra, A: MatrixStarAlgebra) -> float:
    Z = coupled_center(M, A)
    return subspace_distance(Z, tensor_algebra(scalars(M.n), A))


def crossed_report(M: MatrixStarAlgebra, rep: UnitaryRep, A: MatrixStarAlgebra | None = None) -> dict:
    """Dimensions and centres of ``M (x) A``, both crossed-product pictures, and their equivalence."""
    cp_s, cp_h = build_schrodinger(M, rep), build_heisenberg(M, rep)
    UW = coupling_uw(rep).matrix
    residual = max(subspace_distance(conjugate(cp_s.algebra, UW.conj().T), cp_h.algebra),
                   subspace_distance(conjugate(cp_h.algebra, UW), cp_s.algebra))
    if A is None:
        # decoupled algebra M (x) l-infinity(U) acting on H (x) l2(U)
        n = rep.group.order
        diag = np.zeros((n, n, n), dtype=complex)
        diag[np.arange(n), np.arange(n), np.arange(n)] = 1.0
        A = MatrixStarAlgebra(n, diag)
    tensor_gens = [np.kron(m, np.eye(A.n)) for m in M.basis] + [np.kron(np.eye(M.n), a) for a in A.basis]
    tens = generate(tensor_gens, n=M.n * A.n)
    return {
        "dims": {"schrodinger": cp_s.dim, "heisenberg": cp_h.dim, "tensor": tens.dim},
        "equivalence_residual": residual,
        "center_dims": {"schrodinger": center(cp_s.algebra).dim,
                        "heisenberg": center(cp_h.algebra).dim,
                        "tensor": center(tens).dim},
        "same_subspace": same_subspace(conjugate(cp_s.algebra, UW.conj().T), cp_h.algebra),
    }
