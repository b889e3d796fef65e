"""Dense operators on labelled tensor-product spaces, unitary representations and
their SNAG (character) decomposition.

Operators and states are plain complex ndarrays.  The tensor signature (list of
factor dimensions) travels alongside as ``dims`` wherever legs matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionError, DomainError, RepresentationError, SpectralMismatch
from .groups import DualGroup, FiniteAbelianGroup

UNITARY_TOL = 1e-10
CLUSTER_TOL = 1e-8
ROOT_TOL = 1e-8


# --- tensor plumbing ---------------------------------------------------------

def tensor(*factors) -> np.ndarray:
    """Kronecker product of operators or of state vectors (left factor slowest)."""
    if not factors:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def _check_legs(dims, legs):
    legs = list(legs)
    if len(set(legs)) != len(legs) or any(not 0 <= l < len(dims) for l in legs):
        raise DomainError(f"invalid legs {legs} for signature {list(dims)}")
    return legs


def embed(op, dims: Sequence[int], legs: Sequence[int]) -> np.ndarray:
    """Full-space matrix of ``op`` acting on ``legs`` (in that order), identity elsewhere.

    ``embed(W, [n, n, n], [0, 2])`` is the leg-subscripted ``W_13``.
    """
    dims = [int(d) for d in dims]
    legs = _check_legs(dims, legs)
    op = np.asarray(op, dtype=complex)
    k = int(np.prod([dims[l] for l in legs]))
    if op.shape != (k, k):
        raise DimensionError(f"operator shape {op.shape} does not fit legs {legs} of {dims}")
    rest = [i for i in range(len(dims)) if i not in legs]
    r = int(np.prod([dims[i] for i in rest])) if rest else 1
    big = np.kron(op, np.eye(r)).reshape([dims[l] for l in legs + rest] * 2)
    order = legs + rest
    L = len(dims)
    inv = np.argsort(order)
    big = big.transpose(list(inv) + [L + i for i in inv])
    D = int(np.prod(dims))
    return big.reshape(D, D)


def apply_on_legs(op, x, dims: Sequence[int], legs: Sequence[int]) -> np.ndarray:
    """``embed(op, dims, legs) @ x`` without forming the full matrix.

    ``x`` is a vector of length ``prod(dims)`` or a matrix whose rows are indexed
    by the tensor basis.
    """
    dims = [int(d) for d in dims]
    legs = _check_legs(dims, legs)
    x = np.asarray(x, dtype=complex)
    D = int(np.prod(dims))
    if x.shape[0] != D:
        raise DimensionError(f"operand has {x.shape[0]} rows, signature {dims} needs {D}")
    extra = x.shape[1:]
    L = len(dims)
    t = x.reshape(dims + list(extra))
    ldims = [dims[l] for l in legs]
    op = np.asarray(op, dtype=complex).reshape(ldims * 2)
    out = np.tensordot(op, t, axes=(list(range(len(legs), 2 * len(legs))), legs))
    # tensordot puts the contracted legs first; move them back.
    rest = [i for i in range(L) if i not in legs]
    order = legs + rest + list(range(L, L + len(extra)))
    out = np.moveaxis(out, list(range(len(order))), order)
    return out.reshape(x.shape)


def permutation_matrix(perm) -> np.ndarray:
    """Dense matrix of ``e_src -> e_perm[src]``."""
    perm = np.asarray(perm, dtype=np.int64)
    P = np.zeros((perm.size, perm.size))
    P[perm, np.arange(perm.size)] = 1.0
    return P


def apply_permutation(perm, x) -> np.ndarray:
    x = np.asarray(x)
    out = np.empty_like(x)
    out[perm] = x
    return out


def embed_permutation(perm, dims: Sequence[int], legs: Sequence[int]) -> np.ndarray:
    """Index form of :func:`embed` for permutation operators."""
    legs = _check_legs(dims, legs)
    return _kernels.embed_perm(perm, dims, legs)


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    dims = [int(d) for d in dims]
    keep = sorted(_check_legs(dims, keep))
    rho = np.asarray(rho, dtype=complex)
    D = int(np.prod(dims))
    if rho.shape != (D, D):
        raise DimensionError(f"density matrix shape {rho.shape} does not match signature {dims}")
    L = len(dims)
    t = rho.reshape(dims * 2)
    drop = [i for i in range(L) if i not in keep]
    letters = [chr(ord("a") + i) for i in range(2 * L)]
    for i in drop:
        letters[L + i] = letters[i]
    out_idx = [letters[i] for i in keep] + [letters[L + i] for i in keep]
    res = np.einsum("".join(letters) + "->" + "".join(out_idx), t)
    k = int(np.prod([dims[i] for i in keep])) if keep else 1
    return res.reshape(k, k)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    return bool(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) <= tol)


def check_state_vector(psi, tol: float = 1e-10) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError("state vector must be one-dimensional")
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise DomainError(f"state vector norm {np.linalg.norm(psi):.3g} is not 1")
    return psi


def check_density(rho, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    if np.linalg.norm(rho - rho.conj().T) > tol:
        raise DomainError("density matrix is not self-adjoint")
    if abs(np.trace(rho) - 1) > tol:
        raise DomainError(f"density matrix trace {np.trace(rho).real:.3g} is not 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise DomainError("density matrix is not positive semidefinite")
    return rho


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    X = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


# --- representations ---------------------------------------------------------

@dataclass(frozen=True)
class UnitaryRep:
    """``u -> U_u`` stored for every group element, index order of ``group.elements``."""

    group: FiniteAbelianGroup
    matrices: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[0] != self.group.order or m.shape[1] != m.shape[2]:
            raise DimensionError(f"expected ({self.group.order}, d, d) matrices, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, u) -> np.ndarray:
        return self.matrices[self.group.index(u)]

    @property
    def generators(self) -> list[np.ndarray]:
        return [self.matrices[i] for i in self.group.generator_indices]

    def validate(self, tol: float = UNITARY_TOL) -> "UnitaryRep":
        G, m = self.group, self.matrices
        I = np.eye(self.dim)
        if np.linalg.norm(m[0] - I) > tol:
            raise RepresentationError("U at the identity element is not the identity operator")
        for U in m:
            if np.linalg.norm(U.conj().T @ U - I) > tol:
                raise RepresentationError("representation contains a non-unitary operator")
        prods = np.einsum("iab,jbc->ijac", m, m)
        target = m[G.add_table]
        if np.linalg.norm(prods - target) > tol * G.order:
            raise RepresentationError("U_u U_v != U_{uv}: map is not a homomorphism")
        return self

    @classmethod
    def from_generators(cls, group: FiniteAbelianGroup, generators: Sequence, validate: bool = True) -> "UnitaryRep":
        """Build ``U_u = prod_i g_i^{u_i}`` from one matrix per cyclic factor."""
        gens = [np.asarray(g, dtype=complex) for g in generators]
        if len(gens) != group.rank:
            raise RepresentationError(f"need {group.rank} generator matrices, got {len(gens)}")
        d = gens[0].shape[0] if gens else 1
        for g in gens:
            if g.shape != (d, d):
                raise DimensionError("generator matrices must be square and of equal size")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if np.linalg.norm(a @ b - b @ a) > UNITARY_TOL * max(1.0, d):
                    raise RepresentationError("generators do not commute")
            if np.linalg.norm(np.linalg.matrix_power(a, group.orders[i]) - np.eye(d)) > 1e-9:
                raise RepresentationError(f"generator {i} does not have order dividing {group.orders[i]}")
        powers = [[np.linalg.matrix_power(g, k) for k in range(n)] for g, n in zip(gens, group.orders)]
        mats = np.empty((group.order, d, d), dtype=complex)
        for idx, u in enumerate(group.elements):
            mats[idx] = reduce(np.matmul, [powers[i][u[i]] for i in range(group.rank)], np.eye(d, dtype=complex))
        rep = cls(group, mats)
        return rep.validate() if validate else rep


def trivial_rep(group: FiniteAbelianGroup, dim: int = 1) -> UnitaryRep:
    return UnitaryRep(group, np.broadcast_to(np.eye(dim, dtype=complex), (group.order, dim, dim)).copy())


def character_rep(group: FiniteAbelianGroup, labels: Sequence[Sequence[int]], basis=None) -> UnitaryRep:
    """``U_u = Q diag(conj(chi_i(u))) Q*`` for the listed character labels."""
    X = group.dual().table
    idx = [group.dual().index(c) for c in labels]
    diag = X[idx].conj().T  # (|G|, d)
    mats = np.einsum("ui,ij->uij", diag, np.eye(len(idx)))
    if basis is not None:
        Q = np.asarray(basis, dtype=complex)
        mats = Q @ mats @ Q.conj().T
    return UnitaryRep(group, mats)


def random_rep(group: FiniteAbelianGroup, dim: int, rng: np.random.Generator) -> UnitaryRep:
    """Seeded random representation: random characters in a random unitary frame."""
    labels = [group.dual().element(int(i)) for i in rng.integers(0, group.order, size=dim)]
    return character_rep(group, labels, random_unitary(dim, rng))


def rep_tensor(r1: UnitaryRep, r2: UnitaryRep) -> UnitaryRep:
    if r1.group != r2.group:
        raise DomainError("representations of different groups")
    return UnitaryRep(r1.group, np.einsum("uab,ucd->uacbd", r1.matrices, r2.matrices)
                      .reshape(r1.group.order, r1.dim * r2.dim, r1.dim * r2.dim))


def rep_power(r: UnitaryRep, m: int) -> UnitaryRep:
    out = r
    for _ in range(m - 1):
        out = rep_tensor(out, r)
    return out


# --- spectral measure --------------------------------------------------------

@dataclass(frozen=True)
class SpectralMeasure:
    """Projections ``E(chi)`` with ``U_u = sum_chi conj(chi(u)) E(chi)``.

    ``projections[k]`` belongs to the k-th element of ``dual`` (zero off the support).
    """

    dual: DualGroup
    projections: np.ndarray = field(repr=False)

    @cached_property
    def ranks(self) -> np.ndarray:
        return np.rint(np.einsum("kii->k", self.projections).real).astype(int)

    @property
    def support(self) -> list[tuple[int, ...]]:
        return [self.dual.element(k) for k in np.flatnonzero(self.ranks)]

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.ranks)

    def __getitem__(self, chi) -> np.ndarray:
        return self.projections[self.dual.index(chi)]

    def reconstruct(self) -> np.ndarray:
        """``(|G|, d, d)`` array of ``sum_chi conj(chi(u)) E(chi)``."""
        return np.einsum("ku,kab->uab", self.dual.table.conj(), self.projections)


def snag_decompose(rep: UnitaryRep, seed: int = 0, attempts: int = 4) -> SpectralMeasure:
    """Joint eigenprojections of the commuting unitaries of ``rep``.

    A seeded random Hermitian combination of the generators is diagonalised;
    eigenvalue clusters (at ``CLUSTER_TOL``) are labelled by reading off each
    generator's eigenvalue on the cluster.  A cluster on which some generator is
    not scalar (an accidental degeneracy) triggers a retry with fresh coefficients.
    """
    G = rep.group
    dual = G.dual()
    gens = rep.generators
    d = rep.dim
    for g in gens:
        if np.linalg.norm(g.conj().T @ g - np.eye(d)) > 1e-9:
            raise RepresentationError("generator is not unitary")
    for i, a in enumerate(gens):
        for b in gens[i + 1:]:
            if np.linalg.norm(a @ b - b @ a) > 1e-9:
                raise RepresentationError("representation operators do not commute")
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        H = np.zeros((d, d), dtype=complex)
        for g in gens:
            r, s = rng.uniform(0.5, 1.5, size=2)
            H += r * (g + g.conj().T) + 1j * s * (g - g.conj().T)
        w, Q = np.linalg.eigh(H)
        clusters = _clusters(w, CLUSTER_TOL)
        projections = np.zeros((G.order, d, d), dtype=complex)
        ok = True
        for block in clusters:
            q = Q[:, block]
            label = []
            for i, g in enumerate(gens):
                B = q.conj().T @ g @ q
                z = np.trace(B) / len(block)
                if np.linalg.norm(B - z * np.eye(len(block))) > 1e-8:
                    ok = False
                    break
                label.append(_root_label(z, G.orders[i]))
            if not ok:
                break
            projections[dual.index(label)] += q @ q.conj().T
        if ok:
            break
    else:
        raise SpectralMismatch("could not separate joint eigenspaces; input may not be a representation")
    E = SpectralMeasure(dual, projections)
    if np.max(np.linalg.norm(E.reconstruct() - rep.matrices, axis=(1, 2))) > 1e-9:
        raise RepresentationError("spectral reconstruction failed; map is not a homomorphism")
    return E


def _clusters(w, tol):
    out, cur = [], [0]
    for i in range(1, len(w)):
        if w[i] - w[cur[-1]] <= tol:
            cur.append(i)
        else:
            out.append(cur)
            cur = [i]
    out.append(cur)
    return out


def _root_label(z: complex, order: int) -> int:
    # U_g has eigenvalue conj(chi(g)) = exp(-2 pi i chi_g / order).
    if abs(abs(z) - 1) > ROOT_TOL:
        raise SpectralMismatch(f"eigenvalue {z:.6g} is not of unit modulus")
    k = int(np.rint(-np.angle(z) * order / (2 * np.pi))) % order
    if abs(z - np.exp(-2j * np.pi * k / order)) > ROOT_TOL:
        raise SpectralMismatch(f"eigenvalue {z:.6g} is not an {order}-th root of unity")
    return k


def rep_multiplicities(rep: UnitaryRep, seed: int = 0) -> dict[tuple[int, ...], int]:
    E = snag_decompose(rep, seed=seed)
    return {E.dual.element(k): int(r) for k, r in enumerate(E.ranks)}


def quasi_equivalent(r1: UnitaryRep, r2: UnitaryRep, seed: int = 0) -> bool:
    """Equal character supports: unitary equivalence up to multiplicity."""
    if r1.group != r2.group:
        raise DomainError("quasi-equivalence compares representations of the same group")
    s1 = {chi for chi, m in rep_multiplicities(r1, seed).items() if m}
    s2 = {chi for chi, m in rep_multiplicities(r2, seed).items() if m}
    return s1 == s2
