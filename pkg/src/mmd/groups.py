"""Finite abelian groups, their duals, characters and the unitary Fourier transform.

Elements are tuples ``(u_1, ..., u_k)`` with ``0 <= u_i < d_i``.  The group is
enumerated lexicographically (last coordinate fastest), and that order fixes the
basis of every ``l2(G)`` space used elsewhere in the package.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InvalidPresentation

Element = tuple[int, ...]


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Direct product ``Z_{d_1} x ... x Z_{d_k}`` with counting Haar measure."""

    orders: tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(d) for d in self.orders)
        if not orders:
            raise InvalidPresentation("group presentation needs at least one cyclic factor")
        if any(d < 1 for d in orders):
            raise InvalidPresentation(f"cyclic orders must be >= 1, got {list(orders)}")
        object.__setattr__(self, "orders", orders)

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.orders)})"

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def identity(self) -> Element:
        return (0,) * self.rank

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.orders, 1)

    @cached_property
    def elements(self) -> np.ndarray:
        """``(|G|, k)`` integer array of elements in lexicographic order."""
        return np.array(list(itertools.product(*(range(d) for d in self.orders))),
                        dtype=np.int64).reshape(self.order, self.rank)

    @cached_property
    def _strides(self) -> np.ndarray:
        strides = np.ones(self.rank, dtype=np.int64)
        for i in range(self.rank - 2, -1, -1):
            strides[i] = strides[i + 1] * self.orders[i + 1]
        return strides

    def element(self, index: int) -> Element:
        return tuple(int(x) for x in self.elements[index])

    def index(self, g: Sequence[int]) -> int:
        g = self._check(g)
        return int(np.dot(g, self._strides))

    def _check(self, g: Sequence[int]) -> np.ndarray:
        g = np.asarray(tuple(g), dtype=np.int64)
        if g.shape != (self.rank,):
            raise DomainError(f"element {tuple(g.tolist())} does not match presentation {list(self.orders)}")
        if np.any(g < 0) or np.any(g >= np.asarray(self.orders)):
            raise DomainError(f"element {tuple(g.tolist())} out of range for {list(self.orders)}")
        return g

    def op(self, g: Sequence[int], h: Sequence[int]) -> Element:
        g, h = self._check(g), self._check(h)
        return tuple(int(x) for x in (g + h) % np.asarray(self.orders))

    def inverse(self, g: Sequence[int]) -> Element:
        g = self._check(g)
        return tuple(int(x) for x in (-g) % np.asarray(self.orders))

    def element_order(self, g: Sequence[int]) -> int:
        g = self._check(g)
        return reduce(math.lcm, (d // math.gcd(int(x), d) for x, d in zip(g, self.orders)), 1)

    @cached_property
    def add_table(self) -> np.ndarray:
        """``add_table[i, j]`` is the index of ``g_i + g_j``."""
        el = self.elements
        s = (el[:, None, :] + el[None, :, :]) % np.asarray(self.orders)
        return (s @ self._strides).astype(np.int64)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return ((-self.elements) % np.asarray(self.orders)) @ self._strides

    @cached_property
    def generator_indices(self) -> tuple[int, ...]:
        """Index of the unit vector ``e_i`` of each cyclic factor."""
        return tuple(int(self._strides[i]) % self.order if self.orders[i] > 1 else 0
                     for i in range(self.rank))

    def dual(self) -> "DualGroup":
        return DualGroup(self.orders)

    def label(self, g: Sequence[int]) -> str:
        return ",".join(str(int(x)) for x in g)


class DualGroup(FiniteAbelianGroup):
    """Character group, presented with the same cyclic orders as the primal group.

    ``gamma`` acts as ``gamma(u) = exp(2 pi i sum_j gamma_j u_j / d_j)``.
    """

    def dual(self) -> FiniteAbelianGroup:
        return FiniteAbelianGroup(self.orders)

    def character(self, gamma: Sequence[int], u: Sequence[int]) -> complex:
        return character_value(gamma, u, self.orders)

    @cached_property
    def phase_table(self) -> np.ndarray:
        """Integer phases ``k[gamma, u]`` with ``gamma(u) = exp(2 pi i k / exponent)``."""
        L = self.exponent
        weights = np.array([L // d for d in self.orders], dtype=np.int64)
        el = self.elements
        return ((el * weights) @ el.T) % L

    @cached_property
    def table(self) -> np.ndarray:
        """Character table ``X[gamma, u] = gamma(u)``."""
        return _root_of_unity(self.phase_table, self.exponent)


def _root_of_unity(k, L: int):
    # Exact values at the quarter turns keep Z_2 / Z_4 tables free of rounding noise.
    k = np.asarray(k) % L
    angle = 2 * np.pi * k / L
    out = np.exp(1j * angle)
    quarter = (4 * k) % L == 0
    if np.any(quarter):
        q = (4 * k[quarter] // L) % 4
        out[quarter] = np.array([1, 1j, -1, -1j])[q]
    return out


def make_group(orders: Iterable[int]) -> FiniteAbelianGroup:
    orders = list(orders)
    if any(not isinstance(d, (int, np.integer)) or isinstance(d, bool) for d in orders):
        raise InvalidPresentation(f"cyclic orders must be integers, got {orders}")
    return FiniteAbelianGroup(tuple(orders))


def character_value(gamma: Sequence[int], u: Sequence[int], orders: Sequence[int]) -> complex:
    orders = tuple(orders)
    gamma, u = tuple(gamma), tuple(u)
    if len(gamma) != len(orders) or len(u) != len(orders):
        raise DomainError(f"character {gamma} and element {u} must both match presentation {list(orders)}")
    for x, d in zip(gamma + u, orders + orders):
        if not 0 <= x < d:
            raise DomainError(f"entry {x} out of range for order {d}")
    L = reduce(math.lcm, orders, 1)
    k = sum(g * x * (L // d) for g, x, d in zip(gamma, u, orders))
    return complex(_root_of_unity(np.array([k]), L)[0])


def fourier_matrix(G: FiniteAbelianGroup) -> np.ndarray:
    """Unitary ``F`` with ``(F f)(gamma) = |G|^{-1/2} sum_u conj(gamma(u)) f(u)``."""
    return G.dual().table.conj() / np.sqrt(G.order)


def fourier(f, G: FiniteAbelianGroup) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.shape[0] != G.order:
        raise DimensionError(f"function has {f.shape[0]} entries, group has {G.order} elements")
    return fourier_matrix(G) @ f


def inverse_fourier(fhat, G: FiniteAbelianGroup) -> np.ndarray:
    fhat = np.asarray(fhat, dtype=complex)
    if fhat.shape[0] != G.order:
        raise DimensionError(f"function has {fhat.shape[0]} entries, group has {G.order} elements")
    return fourier_matrix(G).conj().T @ fhat


def haar_mean(f, G: FiniteAbelianGroup) -> complex:
    f = np.asarray(f, dtype=complex)
    if f.shape != (G.order,):
        raise DimensionError(f"function has shape {f.shape}, expected ({G.order},)")
    return complex(f.mean())


def translate(f, G: FiniteAbelianGroup, g: Sequence[int]) -> np.ndarray:
    """``(f o shift_g)(u) = f(u + g)``."""
    f = np.asarray(f)
    return f[G.add_table[:, G.index(g)]]


def _invariant_factor_lists(n: int, smallest: int = 2) -> list[list[int]]:
    # Lists d_1 | d_2 | ... | d_k with product n and d_1 >= 2.
    if n == 1:
        return [[]]
    out = []
    for d in range(smallest, n + 1):
        if n % d:
            continue
        for rest in _invariant_factor_lists(n // d, d):
            if not rest or rest[0] % d == 0:
                out.append([d] + rest)
    return out


def abelian_groups_up_to(max_order: int) -> list[FiniteAbelianGroup]:
    """One representative per isomorphism type, orders ``1..max_order``."""
    groups = [FiniteAbelianGroup((1,))]
    for n in range(2, max_order + 1):
        for factors in _invariant_factor_lists(n):
            groups.append(FiniteAbelianGroup(tuple(factors)))
    return groups
