"""Finite-dimensional *-algebras of matrices: generated algebras, commutants,
centres, MASA certification and central (sector) decomposition.

An algebra is stored as a Hilbert-Schmidt orthonormal basis of its span inside
``M_n``.  Matrices are vectorised row-major, so ``<A, B> = vec(A)^H vec(B)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContainmentError, DimensionError, ToleranceError

SUBSPACE_TOL = 1e-9
RANK_TOL = 1e-9
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class MatrixStarAlgebra:
    """Span of ``basis`` (shape ``(k, n, n)``, HS-orthonormal) inside ``M_n``.

    ``generators`` is kept when the algebra came out of :func:`generate`; the
    commutant of an algebra equals the commutant of any generating set, which is
    much cheaper than using the whole basis.
    """

    n: int
    basis: np.ndarray = field(repr=False)
    generators: tuple = field(default=(), repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        return self.basis.reshape(self.dim, self.n * self.n)

    def project(self, X) -> np.ndarray:
        """Orthogonal (HS) projection of ``X`` onto the span."""
        X = np.asarray(X, dtype=complex)
        v = X.reshape(-1, self.n * self.n)
        B = self.vectors
        out = (v @ B.conj().T) @ B
        return out.reshape(X.shape)

    def residual(self, X) -> float:
        X = np.asarray(X, dtype=complex)
        return float(np.linalg.norm(X - self.project(X)))

    def contains(self, X, tol: float = SUBSPACE_TOL) -> bool:
        X = np.asarray(X, dtype=complex)
        return self.residual(X) <= tol * max(1.0, float(np.linalg.norm(X)))

    def random_element(self, rng: np.random.Generator, hermitian: bool = True) -> np.ndarray:
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        X = np.tensordot(c, self.basis, axes=1)
        return (X + X.conj().T) / 2 if hermitian else X

    def is_abelian(self, tol: float = SUBSPACE_TOL) -> bool:
        B = self.basis
        comm = np.einsum("iab,jbc->ijac", B, B) - np.einsum("jab,ibc->ijac", B, B)
        return bool(np.linalg.norm(comm) <= tol)

    def closure_residual(self) -> float:
        """Largest distance of a basis product from the span (``0`` for a genuine algebra)."""
        B = self.basis
        prods = np.einsum("iab,jbc->ijac", B, B).reshape(-1, self.n, self.n)
        adj = B.conj().transpose(0, 2, 1)
        return max(float(np.max(np.linalg.norm(prods - self.project(prods), axis=(1, 2)), initial=0.0)),
                   float(np.max(np.linalg.norm(adj - self.project(adj), axis=(1, 2)), initial=0.0)))


def _orthonormal_extend(basis: np.ndarray, candidates: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """New orthonormal rows spanning ``candidates`` modulo ``span(basis)``."""
    if candidates.shape[0] == 0:
        return candidates
    # One global scale: normalising rows one by one would blow products that
    # vanish up to rounding back up to unit length.
    scale = float(np.linalg.norm(candidates, axis=1).max())
    if scale == 0.0:
        return candidates[:0]
    C = candidates / scale
    for _ in range(2):  # re-orthogonalise once for stability
        if basis.shape[0]:
            C = C - (C @ basis.conj().T) @ basis
    _, s, Vh = np.linalg.svd(C, full_matrices=False)
    keep = s > tol * max(1.0, np.sqrt(C.shape[0]))
    new = Vh[keep]
    if basis.shape[0] and new.shape[0]:
        new = new - (new @ basis.conj().T) @ basis
        new /= np.linalg.norm(new, axis=1, keepdims=True)
    return new


def span(matrices, n: int | None = None) -> MatrixStarAlgebra:
    """Orthonormal basis of the linear span (no algebra closure)."""
    mats = np.asarray(matrices, dtype=complex)
    if n is None:
        n = mats.shape[-1]
    vecs = _orthonormal_extend(np.zeros((0, n * n), dtype=complex), mats.reshape(-1, n * n))
    return MatrixStarAlgebra(n, vecs.reshape(-1, n, n))


def generate(generators: Sequence, n: int | None = None, max_rounds: int | None = None) -> MatrixStarAlgebra:
    """Smallest unital *-subalgebra of ``M_n`` containing ``generators``.

    Closure by words: the span starts at ``{1, g, g*}`` and each round multiplies
    the newly added directions on the right by every ``g`` and ``g*``.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if n is None:
        if not gens:
            raise DimensionError("ambient dimension needed when no generators are given")
        n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise DimensionError(f"generator of shape {g.shape} in ambient M_{n}")
    letters = []
    for g in gens:
        letters.append(g)
        if np.linalg.norm(g - g.conj().T) > 1e-14 * max(1.0, np.linalg.norm(g)):
            letters.append(g.conj().T)
    nn = n * n
    start = np.array([np.eye(n, dtype=complex)] + letters).reshape(-1, nn)
    basis = _orthonormal_extend(np.zeros((0, nn), dtype=complex), start)
    frontier = basis
    cap = 2 * nn if max_rounds is None else max_rounds
    rounds = 0
    while frontier.shape[0] and letters:
        rounds += 1
        if rounds > cap:
            raise ToleranceError(f"span closure did not stabilise within {cap} rounds")
        F = frontier.reshape(-1, n, n)
        cand = np.concatenate([(F @ L).reshape(-1, nn) for L in letters])
        frontier = _orthonormal_extend(basis, cand)
        basis = np.concatenate([basis, frontier])
        if basis.shape[0] >= nn:
            break
    return MatrixStarAlgebra(n, basis.reshape(-1, n, n), tuple(gens))


def full_algebra(n: int) -> MatrixStarAlgebra:
    return MatrixStarAlgebra(n, np.eye(n * n, dtype=complex).reshape(n * n, n, n))


def scalars(n: int) -> MatrixStarAlgebra:
    return MatrixStarAlgebra(n, (np.eye(n, dtype=complex) / np.sqrt(n))[None])


def diagonal_algebra(n: int) -> MatrixStarAlgebra:
    basis = np.zeros((n, n, n), dtype=complex)
    basis[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    return MatrixStarAlgebra(n, basis)


def block_algebra(dims: Sequence[int], multiplicities: Sequence[int] | None = None) -> MatrixStarAlgebra:
    """``M_{d_1} (x) 1_{m_1} (+) ... (+) M_{d_k} (x) 1_{m_k}`` in block-diagonal position."""
    dims = list(dims)
    mult = [1] * len(dims) if multiplicities is None else list(multiplicities)
    n = sum(d * m for d, m in zip(dims, mult))
    mats, off = [], 0
    for d, m in zip(dims, mult):
        for i in range(d):
            for j in range(d):
                X = np.zeros((n, n), dtype=complex)
                e = np.zeros((d, d))
                e[i, j] = 1.0
                X[off:off + d * m, off:off + d * m] = np.kron(e, np.eye(m))
                mats.append(X)
        off += d * m
    return span(mats, n)


def tensor_algebra(A: MatrixStarAlgebra, B: MatrixStarAlgebra) -> MatrixStarAlgebra:
    basis = np.einsum("iab,jcd->ijacbd", A.basis, B.basis).reshape(A.dim * B.dim, A.n * B.n, A.n * B.n)
    return MatrixStarAlgebra(A.n * B.n, basis)


def conjugate(A: MatrixStarAlgebra, U) -> MatrixStarAlgebra:
    """``Ad(U)(A) = U A U*`` for unitary ``U`` (orthonormality is preserved)."""
    U = np.asarray(U, dtype=complex)
    return MatrixStarAlgebra(A.n, U @ A.basis @ U.conj().T,
                             tuple(U @ g @ U.conj().T for g in A.generators))


def _nullspace(K: np.ndarray, tol: float) -> np.ndarray:
    if K.shape[0] == 0:
        return np.eye(K.shape[1], dtype=complex)
    _, s, Vh = np.linalg.svd(K, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * max(1.0, smax)))
    return Vh[rank:].conj()


def _commutation_map(X: np.ndarray) -> np.ndarray:
    # vec(Y X - X Y) for row-major vec:  (I (x) X^T - X (x) I) vec(Y).
    n = X.shape[0]
    I = np.eye(n)
    return np.kron(I, X.T) - np.kron(X, I)


def commutant(A: MatrixStarAlgebra, tol: float = RANK_TOL) -> MatrixStarAlgebra:
    n = A.n
    elems = A.generators if A.generators else tuple(A.basis)
    K = np.concatenate([_commutation_map(X) for X in elems]) if elems else np.zeros((0, n * n))
    # Gram form keeps the SVD at n^2 x n^2 whatever the number of generators.
    if K.shape[0] > n * n:
        G = K.conj().T @ K
        w, V = np.linalg.eigh(G)
        # eigh resolves zero eigenvalues only to ~eps * |G|; singular values of a
        # commutation map are either 0 or O(1), so a loose cut is safe here.
        keep = w <= 1e-11 * max(1.0, w[-1])
        null = V[:, keep].T
    else:
        null = _nullspace(K, tol)
    # Row vectors of ``null`` are vec(Y) with conj from the SVD convention.
    vecs = _orthonormal_extend(np.zeros((0, n * n), dtype=complex), null)
    return MatrixStarAlgebra(n, vecs.reshape(-1, n, n))


def intersect(A: MatrixStarAlgebra, B: MatrixStarAlgebra, tol: float = SUBSPACE_TOL) -> MatrixStarAlgebra:
    """Subspace intersection via principal angles."""
    if A.n != B.n:
        raise DimensionError("algebras live in different ambient spaces")
    if A.dim == 0 or B.dim == 0:
        return MatrixStarAlgebra(A.n, np.zeros((0, A.n, A.n), dtype=complex))
    M = A.vectors.conj() @ B.vectors.T  # <a_i, b_j>
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    keep = s >= 1 - tol
    vecs = U[:, keep].T @ A.vectors
    vecs = _orthonormal_extend(np.zeros((0, A.n * A.n), dtype=complex), vecs)
    return MatrixStarAlgebra(A.n, vecs.reshape(-1, A.n, A.n))


def subspace_distance(A: MatrixStarAlgebra, B: MatrixStarAlgebra) -> float:
    """Spectral norm of ``P_A - P_B`` (``1`` when the dimensions differ)."""
    if A.n != B.n:
        raise DimensionError("algebras live in different ambient spaces")
    if A.dim != B.dim:
        return 1.0
    if A.dim == 0:
        return 0.0
    # ||(1 - P_A) P_B|| directly; sqrt(1 - cos^2) would lose half the digits.
    a, b = A.vectors, B.vectors
    ra = b - (b @ a.conj().T) @ a
    rb = a - (a @ b.conj().T) @ b
    return float(max(np.linalg.norm(ra, 2), np.linalg.norm(rb, 2)))


def same_subspace(A: MatrixStarAlgebra, B: MatrixStarAlgebra, tol: float = SUBSPACE_TOL) -> bool:
    return subspace_distance(A, B) <= tol


def is_subalgebra(A: MatrixStarAlgebra, M: MatrixStarAlgebra, tol: float = SUBSPACE_TOL) -> bool:
    return A.n == M.n and bool(np.max(np.linalg.norm(A.basis - M.project(A.basis), axis=(1, 2)), initial=0.0) <= tol)


def center(A: MatrixStarAlgebra) -> MatrixStarAlgebra:
    return intersect(A, commutant(A))


def is_factor(A: MatrixStarAlgebra) -> bool:
    return center(A).dim == 1


def is_masa(A: MatrixStarAlgebra, M: MatrixStarAlgebra) -> bool:
    """``A`` abelian and ``A = A' (intersection) M`` (maximal abelian *in M*)."""
    if not is_subalgebra(A, M):
        raise ContainmentError("A is not contained in M")
    if not A.is_abelian():
        return False
    return same_subspace(A, intersect(commutant(A), M))


@dataclass(frozen=True)
class Sector:
    projection: np.ndarray = field(repr=False)
    dim: int
    multiplicity: int
    label: int


@dataclass(frozen=True)
class SectorDecomposition:
    sectors: list[Sector]
    center_dim: int
    seed: int

    @property
    def is_factor(self) -> bool:
        return self.center_dim == 1

    def projections(self) -> np.ndarray:
        return np.array([s.projection for s in self.sectors])


def compress(M: MatrixStarAlgebra, P) -> MatrixStarAlgebra:
    """``P M P`` restricted to the range of the projection ``P``."""
    w, V = np.linalg.eigh(P)
    Q = V[:, w > 0.5]
    r = Q.shape[1]
    return span(Q.conj().T @ M.basis @ Q, r)


def sector_decompose(M: MatrixStarAlgebra, seed: int = 0) -> SectorDecomposition:
    """Minimal central projections of ``M`` with block dimensions and multiplicities."""
    Z = center(M)
    rng = np.random.default_rng(seed)
    z = Z.random_element(rng)
    w, V = np.linalg.eigh(z)
    groups, cur = [], [0]
    for i in range(1, len(w)):
        if w[i] - w[cur[-1]] <= CLUSTER_TOL:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    if len(groups) != Z.dim:
        raise ToleranceError(f"found {len(groups)} eigenvalue clusters for a centre of dimension {Z.dim}")
    projs = [V[:, g] @ V[:, g].conj().T for g in groups]
    # Label sectors by where their support starts, not by the random eigenvalue order.
    projs.sort(key=lambda P: int(np.argmax(np.abs(np.diag(P)) > 1e-8)))
    sectors = []
    for label, P in enumerate(projs):
        g = range(int(round(np.trace(P).real)))
        if not Z.contains(P, tol=1e-8):
            raise ToleranceError("eigenprojection of a central element left the centre")
        block = compress(M, P)
        if not is_factor(block):
            raise ToleranceError("compressed block is not a factor")
        d = int(round(np.sqrt(block.dim)))
        m = int(round(np.sqrt(commutant(block).dim)))
        if d * d != block.dim or d * m != len(g):
            raise ToleranceError(f"block of rank {len(g)} is not M_{d} (x) 1_{m}")
        sectors.append(Sector(P, d, m, label))
    return SectorDecomposition(sectors, Z.dim, seed)


def intertwiners(pa: Sequence, pb: Sequence, tol: float = RANK_TOL) -> np.ndarray:
    """Basis of ``{T : T pa(x) = pb(x) T for all x}`` as ``(k, db, da)`` matrices."""
    pa = [np.asarray(x, dtype=complex) for x in pa]
    pb = [np.asarray(x, dtype=complex) for x in pb]
    da, db = pa[0].shape[0], pb[0].shape[0]
    # vec(T A - B T) = (I_b (x) A^T - B (x) I_a) vec(T), T of shape (db, da).
    K = np.concatenate([np.kron(np.eye(db), a.T) - np.kron(b, np.eye(da)) for a, b in zip(pa, pb)])
    null = _nullspace(K, tol)
    return null.reshape(-1, db, da)
