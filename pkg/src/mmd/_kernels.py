"""Index-permutation kernels behind the Kac-Takesaki operators and the cascade.

Both W and V are permutation operators, so the expensive parts of the package
(multi-leg embeddings on l2(G)^{x3}, pointer shifts on N-register states) reduce
to integer index arithmetic.  Each kernel has a numba version and a pure numpy
version.  ``MMD_NUMBA=0`` forces numpy; numba is also skipped when not
importable.

Permutation convention: ``perm[src] = dst``, i.e. the operator sends the basis
vector ``e_src`` to ``e_dst``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("MMD_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


# --- numpy -------------------------------------------------------------------

def _embed_perm_numpy(perm, dims, legs):
    dims = np.asarray(dims, dtype=np.int64)
    legs = np.asarray(legs, dtype=np.int64)
    D = int(np.prod(dims))
    idx = np.array(np.unravel_index(np.arange(D, dtype=np.int64), tuple(dims)))
    sub_dims = dims[legs]
    sub = np.ravel_multi_index(tuple(idx[legs]), tuple(sub_dims))
    new_sub = np.array(np.unravel_index(perm[sub], tuple(sub_dims)))
    idx[legs] = new_sub
    return np.ravel_multi_index(tuple(idx), tuple(dims)).astype(np.int64)


def _pair_shift_numpy(psi, add_table, pre, n, post):
    # (x, a, b, y) -> (x, a, a+b, y): the K-T operator V on two adjacent legs.
    src = psi.reshape(pre, n, n, post)
    out = np.empty_like(src)
    a = np.arange(n)[:, None]
    out[:, a, add_table, :] = src
    return out.reshape(psi.shape)


# --- numba -------------------------------------------------------------------

if HAVE_NUMBA:
    @numba.njit(cache=True)
    def _embed_perm_numba(perm, dims, legs):
        L = dims.shape[0]
        D = 1
        for i in range(L):
            D *= dims[i]
        strides = np.empty(L, dtype=np.int64)
        s = 1
        for i in range(L - 1, -1, -1):
            strides[i] = s
            s *= dims[i]
        k = legs.shape[0]
        sub_strides = np.empty(k, dtype=np.int64)
        s = 1
        for j in range(k - 1, -1, -1):
            sub_strides[j] = s
            s *= dims[legs[j]]
        out = np.empty(D, dtype=np.int64)
        for flat in range(D):
            sub = 0
            for j in range(k):
                sub += ((flat // strides[legs[j]]) % dims[legs[j]]) * sub_strides[j]
            new_sub = perm[sub]
            target = flat
            for j in range(k):
                leg = legs[j]
                old = (flat // strides[leg]) % dims[leg]
                new = (new_sub // sub_strides[j]) % dims[leg]
                target += (new - old) * strides[leg]
            out[flat] = target
        return out

    @numba.njit(cache=True)
    def _pair_shift_numba(psi, add_table, pre, n, post):
        out = np.empty_like(psi)
        block = n * post
        for x in range(pre):
            base = x * n * block
            for a in range(n):
                for b in range(n):
                    src = base + a * block + b * post
                    dst = base + a * block + add_table[a, b] * post
                    for y in range(post):
                        out[dst + y] = psi[src + y]
        return out
else:  # pragma: no cover
    _embed_perm_numba = None
    _pair_shift_numba = None


def embed_perm(perm, dims, legs, backend: str | None = None) -> np.ndarray:
    """Lift a permutation of the ``legs`` sub-basis to the full tensor basis."""
    perm = np.ascontiguousarray(perm, dtype=np.int64)
    dims_a = np.ascontiguousarray(dims, dtype=np.int64)
    legs_a = np.ascontiguousarray(legs, dtype=np.int64)
    if _pick(backend) == "numba":
        return _embed_perm_numba(perm, dims_a, legs_a)
    return _embed_perm_numpy(perm, dims_a, legs_a)


def pair_shift(psi, add_table, pre: int, n: int, post: int, backend: str | None = None) -> np.ndarray:
    """Apply ``(x, a, b, y) -> (x, a, a+b, y)`` to a flat complex vector."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    add_table = np.ascontiguousarray(add_table, dtype=np.int64)
    if _pick(backend) == "numba":
        return _pair_shift_numba(psi, add_table, pre, n, post)
    return _pair_shift_numpy(psi, add_table, pre, n, post)


def _pick(backend):
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def active_backend() -> str:
    return _pick(None)
