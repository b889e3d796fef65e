"""Symmetry breaking G -> H for finite abelian G: cosets G/H (the degenerate
vacua), the annihilator H^perp, the restriction map Ĝ -> Ĥ and the sector
bundle G x_H Ĥ over G/H.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError
from .groups import FiniteAbelianGroup

Element = tuple[int, ...]


@dataclass(frozen=True)
class SubgroupSpec:
    group: FiniteAbelianGroup
    generators: tuple[Element, ...]

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        for g in gens:
            self.group.index(g)  # raises DomainError for foreign elements
        object.__setattr__(self, "generators", gens)

    @cached_property
    def indices(self) -> frozenset[int]:
        """Closure of the generators under the group law."""
        G = self.group
        members = {0}
        frontier = [0]
        gens = [G.index(g) for g in self.generators]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = int(G.add_table[a, g])
                    if b not in members:
                        members.add(b)
                        nxt.append(b)
            frontier = nxt
        return frozenset(members)

    @property
    def elements(self) -> list[Element]:
        return [self.group.element(i) for i in sorted(self.indices)]

    @property
    def order(self) -> int:
        return len(self.indices)


def subgroup(G: FiniteAbelianGroup, generators: Sequence[Sequence[int]]) -> SubgroupSpec:
    return SubgroupSpec(G, tuple(tuple(g) for g in generators))


def all_subgroups(G: FiniteAbelianGroup) -> list[SubgroupSpec]:
    """Every subgroup, each given by a generating set, in a fixed order."""
    seen: dict[frozenset, SubgroupSpec] = {}
    trivial = SubgroupSpec(G, ())
    seen[trivial.indices] = trivial
    frontier = [trivial]
    while frontier:
        nxt = []
        for H in frontier:
            for i in range(G.order):
                if i in H.indices:
                    continue
                K = SubgroupSpec(G, H.generators + (G.element(i),))
                if K.indices not in seen:
                    seen[K.indices] = K
                    nxt.append(K)
        frontier = nxt
    return sorted(seen.values(), key=lambda H: (H.order, sorted(H.indices)))


def quotient(G: FiniteAbelianGroup, H: SubgroupSpec) -> list[list[Element]]:
    """Cosets ``g + H``, each sorted, ordered by their least (canonical) member."""
    _same_group(G, H)
    h = sorted(H.indices)
    seen, cosets = set(), []
    for i in range(G.order):
        if i in seen:
            continue
        members = sorted(int(G.add_table[i, j]) for j in h)
        seen.update(members)
        cosets.append([G.element(m) for m in members])
    return cosets


def _same_group(G, H):
    if H.group != G:
        raise DomainError("subgroup belongs to a different ambient group")


def annihilator(G: FiniteAbelianGroup, H: SubgroupSpec) -> list[Element]:
    """``H^perp = {chi : chi(h) = 1 for all h in H}``, computed on exact integer phases."""
    _same_group(G, H)
    dual = G.dual()
    k = dual.phase_table[:, sorted(H.indices)]
    return [dual.element(c) for c in np.flatnonzero(np.all(k == 0, axis=1))]


def restriction_classes(G: FiniteAbelianGroup, H: SubgroupSpec) -> dict[tuple, list[Element]]:
    """Group ``Ĝ`` by the restriction ``chi|_H`` (keyed by its integer phase vector)."""
    dual = G.dual()
    k = dual.phase_table[:, sorted(H.indices)]
    classes: dict[tuple, list[Element]] = {}
    for c in range(dual.order):
        classes.setdefault(tuple(int(x) for x in k[c]), []).append(dual.element(c))
    return classes


def restriction_exact(G: FiniteAbelianGroup, H: SubgroupSpec) -> dict:
    """Surjectivity of ``Ĝ -> Ĥ`` and ``ker = H^perp``.

    Distinct restrictions are distinct characters of H, and H has exactly |H| of
    them, so the map is onto iff there are |H| restriction classes.  They are
    also checked to be orthogonal in ``l2(H)``.
    """
    classes = restriction_classes(G, H)
    L = G.exponent
    vecs = np.array([np.exp(2j * np.pi * np.array(key) / L) for key in classes])
    gram = vecs @ vecs.conj().T
    orthogonal = bool(np.allclose(gram, H.order * np.eye(len(classes)), atol=1e-12))
    kernel = classes[tuple([0] * H.order)]
    return {"image_size": len(classes), "surjective": len(classes) == H.order and orthogonal,
            "kernel_is_annihilator": sorted(kernel) == sorted(annihilator(G, H))}


def quotient_pairing(G: FiniteAbelianGroup, H: SubgroupSpec) -> np.ndarray:
    """Character table of ``H^perp`` on the cosets ``G/H`` (well defined, square)."""
    dual = G.dual()
    ann = [dual.index(c) for c in annihilator(G, H)]
    cosets = quotient(G, H)
    T = np.empty((len(ann), len(cosets)), dtype=complex)
    for j, coset in enumerate(cosets):
        vals = dual.table[np.ix_(ann, [G.index(g) for g in coset])]
        if not np.allclose(vals, vals[:, :1], atol=1e-12):
            raise DomainError("annihilator character is not constant on a coset")
        T[:, j] = vals[:, 0]
    return T


def acts_transitively(G: FiniteAbelianGroup, H: SubgroupSpec) -> bool:
    """Translations by G reach every coset from the base coset ``H``."""
    cosets = quotient(G, H)
    which = {g: j for j, c in enumerate(cosets) for g in c}
    base = cosets[0][0]
    return {which[G.op(g, base)] for g in map(G.element, range(G.order))} == set(range(len(cosets)))


@dataclass(frozen=True)
class SectorBundle:
    base: list[list[Element]]  # cosets: degenerate vacua
    fiber: list[Element]  # Ĥ, labelled by the least character in each restriction class
    vacuum: int = 0  # the single coset realised as a sector

    @property
    def sectors(self) -> list[tuple[int, Element]]:
        return [(b, f) for b in range(len(self.base)) for f in self.fiber]

    @property
    def total(self) -> int:
        return len(self.base) * len(self.fiber)


def sector_bundle(G: FiniteAbelianGroup, H: SubgroupSpec, vacuum: int = 0) -> SectorBundle:
    base = quotient(G, H)
    if not 0 <= vacuum < len(base):
        raise DomainError(f"vacuum index {vacuum} outside 0..{len(base) - 1}")
    fiber = sorted(min(c) for c in restriction_classes(G, H).values())
    return SectorBundle(base, fiber, vacuum)
