"""The measurement instrument ``I(Delta|omega)`` built from a coupling ~U(W),
its outcome probabilities and posterior states, the induced POVM, and the
Naimark dilation of a POVM.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import MatrixStarAlgebra, full_algebra, generate, is_factor, is_masa
from .errors import ConditioningError, DimensionError, DomainError, InvalidPOVM, PreconditionError
from .kt import CouplingOperator, coupling_uw, fourier_coupling
from .operators import SpectralMeasure, UnitaryRep, dm, snag_decompose

logger = logging.getLogger(__name__)

POVM_TOL = 1e-10


@dataclass(frozen=True)
class Instrument:
    rep: UnitaryRep
    spectral: SpectralMeasure = field(repr=False)
    coupling: CouplingOperator = field(repr=False)
    system: MatrixStarAlgebra = field(repr=False)
    measured: MatrixStarAlgebra = field(repr=False)
    masa: bool | None = None

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def dual(self):
        return self.spectral.dual

    @property
    def pointer(self) -> np.ndarray:
        """Neutral position ``|iota>``: the Fourier image of the invariant mean's uniform vector."""
        v = np.zeros(self.dual.order, dtype=complex)
        v[0] = 1.0
        return v

    # -- internals -------------------------------------------------------------

    def _delta(self, delta: Iterable) -> list[int]:
        idx = []
        support = set(self.spectral.support_indices.tolist())
        for chi in delta:
            k = self.dual.index(chi)
            if k not in support:
                raise DomainError(f"character {tuple(chi)} is outside the spectral support")
            idx.append(k)
        return sorted(set(idx))

    def _density(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=complex)
        rho = dm(omega) if omega.ndim == 1 else omega
        if rho.shape != (self.dim, self.dim):
            raise DimensionError(f"state of shape {rho.shape} on a system of dimension {self.dim}")
        return rho

    def _evolved_blocks(self, X) -> np.ndarray:
        """Blocks ``[a, chi, b, chi']`` of ``~U(W)* (X (x) |iota><iota|) ~U(W)``."""
        n = self.dual.order
        P = np.zeros((n, n))
        P[0, 0] = 1.0
        U = self.coupling.matrix
        S = U.conj().T @ np.kron(X, P) @ U
        return S.reshape(self.dim, n, self.dim, n)

    def _functional(self, X, idx: Sequence[int]) -> np.ndarray:
        # M -> (omega (x) m_U)(~U(W)(M (x) chi_Delta)~U(W)*) equals tr(R M) with this R.
        S = self._evolved_blocks(X)
        return sum((S[:, k, :, k] for k in idx), np.zeros((self.dim, self.dim), dtype=complex))

    # -- public ----------------------------------------------------------------

    def apply(self, omega, delta, M) -> complex:
        """``I(Delta|omega)(M) = (omega (x) m_U)(~U(W)(M (x) chi_Delta)~U(W)*)``."""
        idx = self._delta(delta)
        rho = self._density(omega)
        M = np.asarray(M, dtype=complex)
        n = self.dual.order
        chi = np.zeros(n)
        chi[idx] = 1.0
        U = self.coupling.matrix
        X = U @ np.kron(M, np.diag(chi)) @ U.conj().T
        return complex(np.trace(np.kron(rho, np.outer(self.pointer, self.pointer.conj())) @ X))

    def probability(self, omega, delta) -> float:
        idx = self._delta(delta)
        return float(np.trace(self._functional(self._density(omega), idx)).real)

    def posterior(self, omega, delta, min_probability: float = 1e-12) -> np.ndarray:
        idx = self._delta(delta)
        R = self._functional(self._density(omega), idx)
        p = float(np.trace(R).real)
        if p <= min_probability:
            raise ConditioningError(f"outcome set has probability {p:.3g}; posterior undefined")
        R = R / p
        return (R + R.conj().T) / 2

    def distribution(self, omega) -> dict[tuple[int, ...], float]:
        rho = self._density(omega)
        S = self._evolved_blocks(rho)
        return {self.dual.element(k): float(np.trace(S[:, k, :, k]).real)
                for k in self.spectral.support_indices}

    def choi(self, delta) -> np.ndarray:
        """Choi matrix of the unnormalised map ``omega -> I(Delta|omega)``."""
        idx = self._delta(delta)
        d = self.dim
        C = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                E = np.zeros((d, d), dtype=complex)
                E[i, j] = 1.0
                C[i * d:(i + 1) * d, j * d:(j + 1) * d] = self._functional(E, idx)
        return C  # block (i, j) is R(|i><j|), i.e. sum |i><j| (x) R(|i><j|)


def make_instrument(rep: UnitaryRep, system: MatrixStarAlgebra | None = None,
                    declare_masa: bool = False, seed: int = 0) -> Instrument:
    """Bundle the spectral data and coupling of ``rep`` with the system algebra.

    ``system`` defaults to the full matrix algebra and must be a factor.  With
    ``declare_masa`` the measured algebra ``A = U''`` is certified to be maximal
    abelian in ``system``; otherwise the check is skipped (``masa=None``).
    """
    d = rep.dim
    system = full_algebra(d) if system is None else system
    if system.n != d:
        raise DimensionError(f"system algebra acts on C^{system.n}, representation on C^{d}")
    if system.dim != d * d and not is_factor(system):
        raise PreconditionError("system algebra must be a factor")
    E = snag_decompose(rep, seed=seed)
    measured = generate(rep.generators, n=d)
    masa = None
    if declare_masa:
        masa = is_masa(measured, system)
        if not masa:
            logger.warning("measured algebra is abelian but not maximal in the system algebra")
    coupling = fourier_coupling(coupling_uw(rep))
    return Instrument(rep, E, coupling, system, measured, masa)


def instrument_apply(inst: Instrument, omega, delta, M) -> complex:
    return inst.apply(omega, delta, M)


def probability(inst: Instrument, omega, delta) -> float:
    return inst.probability(omega, delta)


def posterior(inst: Instrument, omega, delta) -> np.ndarray:
    return inst.posterior(omega, delta)


# --- POVMs -------------------------------------------------------------------

@dataclass(frozen=True)
class POVM:
    labels: tuple
    effects: np.ndarray = field(repr=False)

    def __post_init__(self):
        F = np.asarray(self.effects, dtype=complex)
        if F.ndim != 3 or F.shape[1] != F.shape[2] or F.shape[0] != len(self.labels):
            raise InvalidPOVM(f"effects of shape {F.shape} for {len(self.labels)} labels")
        object.__setattr__(self, "effects", F)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def validate(self, tol: float = POVM_TOL) -> "POVM":
        d = self.dim
        for lab, F in zip(self.labels, self.effects):
            if np.linalg.norm(F - F.conj().T) > tol:
                raise InvalidPOVM(f"effect {lab!r} is not self-adjoint")
            w = np.linalg.eigvalsh(F)
            if w.min() < -tol or w.max() > 1 + tol:
                raise InvalidPOVM(f"effect {lab!r} is not between 0 and 1")
        if np.linalg.norm(self.effects.sum(axis=0) - np.eye(d)) > tol:
            raise InvalidPOVM("effects do not sum to the identity")
        return self

    def probabilities(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=complex)
        rho = dm(omega) if omega.ndim == 1 else omega
        return np.einsum("ab,kba->k", rho, self.effects).real


def povm_effects(inst: Instrument) -> POVM:
    """Effects ``F_chi`` with ``p({chi}|omega) = tr(omega F_chi)``, read off the coupling."""
    d, n = inst.dim, inst.dual.order
    U = inst.coupling.matrix
    iota = np.kron(np.eye(d), inst.pointer[:, None])  # 1 (x) |iota>
    labels, effects = [], []
    for k in inst.spectral.support_indices:
        chi = np.zeros((n, n))
        chi[k, k] = 1.0
        F = iota.conj().T @ U @ np.kron(np.eye(d), chi) @ U.conj().T @ iota
        labels.append(inst.dual.element(k))
        effects.append((F + F.conj().T) / 2)
    return POVM(tuple(labels), np.array(effects))


@dataclass(frozen=True)
class NaimarkDilation:
    """Isometry ``V xi = sum_i sqrt(F_i) xi (x) e_i`` into ``H (x) C^k``."""

    povm: POVM
    isometry: np.ndarray = field(repr=False)

    @property
    def outcomes(self) -> int:
        return len(self.povm.labels)

    def projection(self, i: int) -> np.ndarray:
        k = self.outcomes
        e = np.zeros((k, k))
        e[i, i] = 1.0
        return np.kron(np.eye(self.povm.dim), e)

    def compressed(self, i: int) -> np.ndarray:
        V = self.isometry
        return V.conj().T @ self.projection(i) @ V


def psd_sqrt(F, tol: float = POVM_TOL) -> np.ndarray:
    F = np.asarray(F, dtype=complex)
    w, Q = np.linalg.eigh((F + F.conj().T) / 2)
    if w.min(initial=0.0) < -tol:
        raise InvalidPOVM(f"effect has negative eigenvalue {w.min():.3g}")
    return (Q * np.sqrt(np.clip(w, 0.0, None))) @ Q.conj().T


def naimark_dilate(povm: POVM) -> NaimarkDilation:
    effects = povm.effects
    for F in effects:
        if np.linalg.eigvalsh((F + F.conj().T) / 2).min() < -POVM_TOL:
            raise InvalidPOVM("effect is not positive semidefinite")
    povm.validate()
    d, k = povm.dim, len(povm.labels)
    roots = np.array([psd_sqrt(F) for F in effects])  # (k, d, d)
    # row index s * k + i  <->  e_s (x) e_i
    V = roots.transpose(1, 0, 2).reshape(d * k, d)
    return NaimarkDilation(povm, V)


def trine_povm() -> POVM:
    angles = np.deg2rad([0.0, 120.0, 240.0])
    phis = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return POVM(("0", "120", "240"), np.array([2 / 3 * np.outer(p, p) for p in phis], dtype=complex))


def random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> POVM:
    """Random full-rank POVM: ``F_i = S^{-1/2} A_i S^{-1/2}`` with ``S = sum A_i``."""
    A = []
    for _ in range(outcomes):
        X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        A.append(X @ X.conj().T)
    A = np.array(A)
    w, Q = np.linalg.eigh(A.sum(axis=0))
    S = (Q / np.sqrt(w)) @ Q.conj().T
    return POVM(tuple(str(i) for i in range(outcomes)), S @ A @ S)
