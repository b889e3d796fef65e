"""The N-register amplification cascade ``V_{N,N+1} ... V_23 ~U(V)_12``.

Legs are ``(sys, p_1, ..., p_N)`` with dims ``(d, n, ..., n)``, ``n = |Û|``.  The
dense path evolves a full state vector (``~U(V)`` by a leg contraction, each V by
an index shift); the analytic path writes the branch form
``sum_g E(g) xi (x) |g>^{x N}`` directly and works for any N.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionCapExceeded, DomainError, ShapeError
from .instrument import Instrument
from .kt import kt_v, spectral_coupling
from .operators import apply_on_legs, check_state_vector, tensor

DEFAULT_MAX_DIM = 2 ** 14


def max_dim() -> int:
    return int(os.environ.get("MMD_MAX_DIM", DEFAULT_MAX_DIM))


@dataclass(frozen=True)
class CascadeConfig:
    inst: Instrument
    stages: int
    cap: int | None = None

    def __post_init__(self):
        if int(self.stages) < 1:
            raise DomainError("cascade needs at least one pointer register (N >= 1)")

    @property
    def n(self) -> int:
        return self.inst.dual.order

    @property
    def dims(self) -> list[int]:
        return [self.inst.dim] + [self.n] * self.stages

    @property
    def total_dim(self) -> int:
        return self.inst.dim * self.n ** self.stages

    @property
    def dense_ok(self) -> bool:
        return self.total_dim <= (max_dim() if self.cap is None else self.cap)

    def require_dense(self):
        if not self.dense_ok:
            raise DimensionCapExceeded(
                f"dim(H)|Û|^N = {self.total_dim} exceeds the dense cap; use the analytic path")

    @property
    def utilde_v(self) -> np.ndarray:
        """``~U(V) = sum_chi E(chi) (x) lambda_chi`` on ``(sys, p_1)``."""
        return spectral_coupling(self.inst.spectral, self.inst.rep, adjoint=True).matrix


@dataclass(frozen=True)
class CascadeState:
    vector: np.ndarray = field(repr=False)
    dims: tuple[int, ...]

    @property
    def stages(self) -> int:
        return len(self.dims) - 1

    def tensor_view(self) -> np.ndarray:
        return self.vector.reshape(self.dims)


@dataclass(frozen=True)
class Branch:
    gamma: tuple[int, ...]
    amplitude: float
    component: np.ndarray = field(repr=False)


def _shift(psi, cfg: CascadeConfig, k: int, inverse: bool = False) -> np.ndarray:
    """V (or V*) on pointer registers ``(p_k, p_{k+1})``, 1-based k.

    ``psi`` may carry trailing column axes (rows = tensor basis).
    """
    n, d, N = cfg.n, cfg.inst.dim, cfg.stages
    cols = int(np.prod(np.shape(psi)[1:], dtype=np.int64))
    dual = cfg.inst.dual
    # V (a, b) -> (a, a + b); V* (a, c) -> (a, c - a).
    table = dual.add_table[dual.neg_table] if inverse else dual.add_table
    pre = d * n ** (k - 1)
    post = n ** (N - k - 1) * cols
    return _kernels.pair_shift(np.ravel(psi), table, pre, n, post).reshape(np.shape(psi))


def amplify(xi, cfg: CascadeConfig, path: str = "dense"):
    """Run the cascade on ``xi (x) |iota>^{x N}``.

    ``path="dense"`` returns a :class:`CascadeState`; ``path="analytic"`` returns
    the list of :class:`Branch` entries.
    """
    xi = check_state_vector(xi)
    if xi.shape != (cfg.inst.dim,):
        raise DomainError(f"system vector of length {xi.shape[0]}, expected {cfg.inst.dim}")
    if path == "analytic":
        return analytic_branches(xi, cfg)
    if path != "dense":
        raise ValueError(f"unknown path {path!r}")
    cfg.require_dense()
    n, N = cfg.n, cfg.stages
    psi = tensor(xi, *[_iota(n)] * N)
    psi = apply_on_legs(cfg.utilde_v, psi, cfg.dims, [0, 1])
    for k in range(1, N):
        psi = _shift(psi, cfg, k)
    return CascadeState(psi, tuple(cfg.dims))


def _iota(n: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[0] = 1.0
    return v


def analytic_branches(xi, cfg: CascadeConfig, tol: float = 1e-12) -> list[Branch]:
    """``c_g xi_g = E(g) xi`` for every ``g`` with non-negligible weight."""
    xi = np.asarray(xi, dtype=complex)
    out = []
    for k in cfg.inst.spectral.support_indices:
        v = cfg.inst.spectral.projections[k] @ xi
        c = float(np.linalg.norm(v))
        if c > tol:
            out.append(Branch(cfg.inst.dual.element(k), c, v / c))
    return out


def branches_to_vector(branches: Sequence[Branch], cfg: CascadeConfig) -> np.ndarray:
    cfg.require_dense()
    dual = cfg.inst.dual
    out = np.zeros(cfg.total_dim, dtype=complex)
    for b in branches:
        e = np.zeros(cfg.n, dtype=complex)
        e[dual.index(b.gamma)] = 1.0
        out += b.amplitude * tensor(b.component, *[e] * cfg.stages)
    return out


def branch_decompose(s: CascadeState, dual, tol: float = 1e-9) -> list[Branch]:
    """Split a cascade state into ``(gamma, c_gamma, xi_gamma)`` along ``|gamma>^{x N}``."""
    t = s.tensor_view()
    N = s.stages
    out, captured = [], 0.0
    for k in range(dual.order):
        v = t[(slice(None),) + (k,) * N]
        c = float(np.linalg.norm(v))
        captured += c * c
        if c > 1e-12:
            out.append(Branch(dual.element(k), c, v / c))
    total = float(np.vdot(s.vector, s.vector).real)
    if total - captured > tol:
        raise ShapeError(f"state carries weight {total - captured:.3g} off the aligned pointer configurations")
    return out


def recover(s: CascadeState, cfg: CascadeConfig) -> np.ndarray:
    """Inverse cascade ``~U(V)*_12 V*_23 ... V*_{N,N+1}``."""
    psi = s.vector
    for k in range(cfg.stages - 1, 0, -1):
        psi = _shift(psi, cfg, k, inverse=True)
    return apply_on_legs(cfg.utilde_v.conj().T, psi, cfg.dims, [0, 1])


def roundtrip_fidelity(xi, cfg: CascadeConfig) -> float:
    xi = np.asarray(xi, dtype=complex)
    out = recover(amplify(xi, cfg), cfg)
    target = tensor(xi, *[_iota(cfg.n)] * cfg.stages)
    return float(abs(np.vdot(target, out)) ** 2)


def decohered_state(xi, cfg: CascadeConfig) -> np.ndarray:
    """System density matrix after tracing out every pointer register."""
    psi = amplify(xi, cfg).vector.reshape(cfg.inst.dim, -1)
    return psi @ psi.conj().T


def register_distribution(s: CascadeState, register: int) -> np.ndarray:
    """Outcome distribution of pointer ``p_register`` (1-based)."""
    p = np.abs(s.tensor_view()) ** 2
    axes = tuple(i for i in range(len(s.dims)) if i != register)
    return p.sum(axis=axes)


def joint_distribution(s: CascadeState, r1: int, r2: int) -> np.ndarray:
    p = np.abs(s.tensor_view()) ** 2
    axes = tuple(i for i in range(len(s.dims)) if i not in (r1, r2))
    return p.sum(axis=axes)


def consensus_offdiagonal(s: CascadeState) -> float:
    """Largest probability mass on disagreeing outcomes over all register pairs."""
    worst = 0.0
    for i in range(1, s.stages + 1):
        for j in range(i + 1, s.stages + 1):
            J = joint_distribution(s, i, j)
            worst = max(worst, float(J[~np.eye(J.shape[0], dtype=bool)].sum()))
    return worst


# --- Heisenberg picture ------------------------------------------------------

def _check_multiplication(f, n: int) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.ndim == 1:
        f = np.diag(f)
    if f.shape != (n, n):
        raise DomainError(f"pointer observable of shape {f.shape}, expected ({n}, {n})")
    if np.linalg.norm(f - np.diag(np.diag(f))) > 0:
        raise DomainError("pointer observable must be a multiplication (diagonal) operator")
    return f


def cascade_unitary(cfg: CascadeConfig) -> np.ndarray:
    """Dense ``V_{N,N+1} ... V_23 ~U(V)_12``."""
    cfg.require_dense()
    D = cfg.total_dim
    X = apply_on_legs(cfg.utilde_v, np.eye(D, dtype=complex), cfg.dims, [0, 1])
    for k in range(1, cfg.stages):
        X = _shift(X, cfg, k)
    return X


def heisenberg_chain(A, fs: Sequence, cfg: CascadeConfig) -> np.ndarray:
    """``C* (A (x) f_2 (x) ... (x) f_{N+1}) C`` with ``C`` the cascade unitary."""
    n = cfg.n
    if len(fs) != cfg.stages:
        raise DomainError(f"need {cfg.stages} pointer observables, got {len(fs)}")
    fs = [_check_multiplication(f, n) for f in fs]
    C = cascade_unitary(cfg)
    return C.conj().T @ tensor(A, *fs) @ C


def heisenberg_chain_nested(A, fs: Sequence, cfg: CascadeConfig) -> np.ndarray:
    """``Ad(~U(V)*)(A (x) Ad(V*)(f_2 (x) Ad(V*)(... (f_N (x) f_{N+1}))))``, built inside out."""
    n = cfg.n
    fs = [_check_multiplication(f, n) for f in fs]
    if len(fs) != cfg.stages:
        raise DomainError(f"need {cfg.stages} pointer observables, got {len(fs)}")
    V = kt_v(cfg.inst.dual).matrix
    inner = fs[-1]
    for f in reversed(fs[:-1]):
        m = inner.shape[0]
        Vbig = np.kron(V, np.eye(m // n))
        X = np.kron(f, inner)
        inner = Vbig.conj().T @ X @ Vbig
    U = np.kron(cfg.utilde_v, np.eye(inner.shape[0] // n))
    return U.conj().T @ np.kron(A, inner) @ U
