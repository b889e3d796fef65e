import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmd.errors import DimensionError, DomainError, RepresentationError
from mmd.groups import abelian_groups_up_to, make_group
from mmd.kt import regular_rep
from mmd.operators import (UnitaryRep, apply_on_legs, character_rep, check_density, dm, embed, ket,
                           partial_trace, quasi_equivalent, random_density, random_rep, rep_multiplicities,
                           rep_power, snag_decompose, tensor, trivial_rep)

SZ = np.diag([1.0, -1.0])
SX = np.array([[0, 1], [1, 0]], dtype=complex)


def brute_multiplicities(rep):
    # m(chi) = |G|^-1 sum_u chi(u) tr U_u, from U_u = sum conj(chi(u)) E(chi)
    G = rep.group
    X = G.dual().table
    tr = np.einsum("uii->u", rep.matrices)
    m = (X @ tr) / G.order
    assert np.allclose(m, np.rint(m.real), atol=1e-9)
    return {G.dual().element(c): int(round(m[c].real)) for c in range(G.order)}


def test_tensor_examples():
    assert np.array_equal(tensor(np.eye(2), np.eye(3)), np.eye(6))
    assert tensor(np.ones((2, 2)), np.ones((3, 3))).shape == (6, 6)
    v = ket(3, 4)  # |11>
    assert np.allclose(tensor(SZ, SZ) @ v, v)


def test_embed_matches_kron_and_permutation(rng):
    A = rng.normal(size=(6, 6))
    dims = [2, 3, 2]
    assert np.allclose(embed(A, dims, [0, 1]), np.kron(A, np.eye(2)))
    # legs (0, 2): conjugate by the swap of legs 1 and 2
    B = rng.normal(size=(4, 4))
    P = np.zeros((12, 12))
    for a in range(2):
        for b in range(3):
            for c in range(2):
                P[a * 6 + c * 3 + b, a * 6 + b * 2 + c] = 1
    assert np.allclose(embed(B, dims, [0, 2]), P.T @ np.kron(B, np.eye(3)) @ P)
    x = rng.normal(size=12)
    assert np.allclose(apply_on_legs(B, x, dims, [0, 2]), embed(B, dims, [0, 2]) @ x)


def test_partial_trace_examples(rng):
    r1, r2 = random_density(2, rng), random_density(3, rng)
    assert np.allclose(partial_trace(np.kron(r1, r2), [2, 3], [0]), r1)
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(dm(bell), [2, 2], [0]), np.eye(2) / 2)
    rho = random_density(12, rng)
    red = partial_trace(rho, [2, 3, 2], [1])
    assert abs(np.trace(red) - 1) < 1e-12 and np.linalg.eigvalsh(red).min() >= -1e-10
    with pytest.raises(DomainError):
        partial_trace(rho, [2, 3, 2], [3])


def test_check_density_rejects(rng):
    with pytest.raises(DomainError):
        check_density(np.diag([1.5, -0.5]))


def test_snag_examples():
    Z2 = make_group([2])
    E = snag_decompose(UnitaryRep.from_generators(Z2, [SZ]))
    assert np.allclose(E[(0,)], np.diag([1, 0])) and np.allclose(E[(1,)], np.diag([0, 1]))
    E = snag_decompose(trivial_rep(Z2, 3))
    assert np.allclose(E[(0,)], np.eye(3)) and np.allclose(E[(1,)], 0)
    E = snag_decompose(UnitaryRep.from_generators(Z2, [np.diag([1, 1, -1])]))
    assert list(E.ranks) == [2, 1]


def test_rep_validation():
    Z2 = make_group([2])
    with pytest.raises(RepresentationError):
        UnitaryRep.from_generators(Z2, [np.diag([1, 1j])])
    with pytest.raises(RepresentationError):
        UnitaryRep.from_generators(make_group([2, 2]), [SZ, SX])
    with pytest.raises(DimensionError):
        UnitaryRep(Z2, np.zeros((3, 2, 2)))


@pytest.mark.parametrize("G", abelian_groups_up_to(8), ids=lambda G: str(list(G.orders)))
def test_snag_projection_properties(G):
    rng = np.random.default_rng(G.order)
    for dim in (1, 3, 5):
        rep = random_rep(G, dim, rng)
        E = snag_decompose(rep, seed=7)
        P = E.projections
        assert np.abs(E.reconstruct() - rep.matrices).max() <= 1e-9
        assert np.linalg.norm(P.sum(axis=0) - np.eye(dim)) <= 1e-10
        for i in range(G.order):
            assert np.linalg.norm(P[i] @ P[i] - P[i]) <= 1e-10
            assert np.linalg.norm(P[i] - P[i].conj().T) <= 1e-10
            for j in range(i + 1, G.order):
                assert np.linalg.norm(P[i] @ P[j]) <= 1e-10
        assert rep_multiplicities(rep) == brute_multiplicities(rep)


def test_multiplicity_examples():
    Z2 = make_group([2])
    lam = regular_rep(Z2)
    assert rep_multiplicities(lam) == {(0,): 1, (1,): 1}
    assert rep_multiplicities(rep_power(lam, 2)) == {(0,): 2, (1,): 2}
    assert rep_multiplicities(trivial_rep(Z2, 3)) == {(0,): 3, (1,): 0}


def test_quasi_equivalence_examples():
    Z2 = make_group([2])
    lam = regular_rep(Z2)
    assert quasi_equivalent(lam, rep_power(lam, 2))
    assert not quasi_equivalent(lam, trivial_rep(Z2))
    assert quasi_equivalent(lam, lam)
    with pytest.raises(DomainError):
        quasi_equivalent(lam, regular_rep(make_group([3])))


@given(st.sampled_from(abelian_groups_up_to(8)), st.integers(0, 2 ** 32 - 1))
def test_snag_seed_independent(G, seed):
    rep = character_rep(G, [G.dual().element(i % G.order) for i in (0, 1, 1, 3)])
    a = snag_decompose(rep, seed=seed).projections
    b = snag_decompose(rep, seed=0).projections
    assert np.abs(a - b).max() <= 1e-9
