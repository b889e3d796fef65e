import numpy as np
import pytest

from mmd.groups import abelian_groups_up_to, make_group
from mmd.kt import (coupling_uw, coupling_v, fourier_coupling, intertwining_residual, kt_v, kt_v_fourier,
                    kt_w, modified_pentagon_residual, pentagon_residual, pentagon_residual_dense,
                    regular_rep, spectral_coupling, unitarity_residual, verify_relations)
from mmd.operators import UnitaryRep, random_rep, snag_decompose, trivial_rep

SZ = np.diag([1.0, -1.0])


def delta(G, *elems):
    n = G.order
    v = np.zeros(n ** len(elems))
    idx = 0
    for e in elems:
        idx = idx * n + G.index(e)
    v[idx] = 1
    return v


def test_w_examples():
    Z2, Z3 = make_group([2]), make_group([3])
    assert np.array_equal(kt_w(Z2).matrix @ delta(Z2, (1,), (1,)), delta(Z2, (0,), (1,)))
    assert np.array_equal(kt_w(Z3).matrix @ delta(Z3, (1,), (2,)), delta(Z3, (0,), (2,)))
    G = make_group([2, 3])
    W = kt_w(G).matrix
    for a in map(G.element, range(G.order)):
        assert np.array_equal(W @ delta(G, a, G.identity), delta(G, a, G.identity))


def test_v_examples():
    G = make_group([4])
    D = G.dual()
    V = kt_v(D).matrix
    for g in map(D.element, range(D.order)):
        assert np.array_equal(V @ delta(D, g, D.identity), delta(D, g, g))
        assert np.array_equal(V @ delta(D, D.identity, g), delta(D, D.identity, g))
    D2 = make_group([2]).dual()
    assert np.array_equal(kt_v(D2).matrix @ delta(D2, (1,), (1,)), delta(D2, (1,), (0,)))


def test_regular_rep_examples():
    Z2, Z3 = make_group([2]), make_group([3])
    lam = regular_rep(Z2).matrices
    assert np.array_equal(lam[0], np.eye(2)) and np.array_equal(lam[1], [[0, 1], [1, 0]])
    assert np.array_equal(regular_rep(Z3).matrices[1] @ delta(Z3, (1,)), delta(Z3, (2,)))


def test_coupling_examples():
    Z2 = make_group([2])
    assert np.array_equal(coupling_uw(trivial_rep(Z2, 2)).matrix, np.eye(4))
    rep = UnitaryRep.from_generators(Z2, [SZ])
    UW = coupling_uw(rep).matrix
    for u in range(2):
        v = np.kron([0, 1], np.eye(2)[u])
        assert np.allclose(UW @ v, (-1) ** u * v)
    G = make_group([3])
    lam = regular_rep(G)
    UW = coupling_uw(lam).matrix.reshape(3, 3, 3, 3)
    for u in range(3):
        assert np.array_equal(UW[:, u, :, u], lam.matrices[u])


def test_fourier_coupling_examples():
    Z2 = make_group([2])
    assert np.allclose(fourier_coupling(coupling_uw(trivial_rep(Z2, 2))).matrix, np.eye(4))
    rep = UnitaryRep.from_generators(Z2, [SZ])
    UV = fourier_coupling(coupling_uw(rep)).adjoint().matrix
    assert np.allclose(UV @ np.kron([1, 0], [1, 0]), np.kron([1, 0], [1, 0]))
    assert np.allclose(UV @ np.kron([0, 1], [1, 0]), np.kron([0, 1], [0, 1]))
    plus = np.array([1, 1]) / np.sqrt(2)
    want = (np.kron([1, 0], [1, 0]) + np.kron([0, 1], [0, 1])) / np.sqrt(2)
    assert np.allclose(UV @ np.kron(plus, [1, 0]), want)
    assert np.allclose(coupling_v(rep).matrix, UV)


@pytest.mark.parametrize("G", abelian_groups_up_to(16), ids=lambda G: str(list(G.orders)))
def test_pentagons_all_groups(G):
    assert pentagon_residual(kt_w(G)) <= 1e-10
    assert pentagon_residual(kt_v(G.dual())) <= 1e-10
    assert np.linalg.norm(kt_v(G.dual()).matrix - kt_v_fourier(G)) <= 1e-10


@pytest.mark.parametrize("G", [G for G in abelian_groups_up_to(6)], ids=lambda G: str(list(G.orders)))
def test_index_pentagon_matches_dense(G):
    for K in (kt_w(G), kt_v(G.dual())):
        for form in ("W", "V"):
            assert abs(pentagon_residual(K, form) - pentagon_residual_dense(K, form)) <= 1e-9


def test_v_fails_literal_w_form_pentagon():
    # V satisfies its own (adjoint-ordered) pentagon, not the W-ordered one, once |G| has elements of order > 2.
    V3 = kt_v(make_group([3]).dual())
    assert pentagon_residual(V3, "W") == pytest.approx(6.0)
    assert pentagon_residual(V3, "V") == 0.0
    # on exponent-2 groups V = V* up to the relabelling, and both orderings hold
    V22 = kt_v(make_group([2, 2]).dual())
    assert pentagon_residual(V22, "W") == 0.0


@pytest.mark.parametrize("G", abelian_groups_up_to(8), ids=lambda G: str(list(G.orders)))
def test_coupling_relations(G):
    rng = np.random.default_rng(G.order)
    for dim in (1, 2, 3):
        rep = random_rep(G, dim, rng)
        uw = coupling_uw(rep)
        assert modified_pentagon_residual(uw) <= 1e-10
        assert intertwining_residual(uw) <= 1e-10
        assert unitarity_residual(uw.matrix) <= 1e-10
        spec = spectral_coupling(snag_decompose(rep), rep)
        assert np.linalg.norm(fourier_coupling(uw).matrix - spec.matrix) <= 1e-10


def test_verify_relations_report():
    rows = verify_relations(regular_rep(make_group([2])))
    assert {r["relation"] for r in rows} >= {"pentagon_W", "pentagon_V", "modified_pentagon", "intertwining"}
    assert all(r["pass"] and r["tolerance"] == 1e-10 for r in rows)


def test_broken_coupling_detected():
    G = make_group([3])
    rep = regular_rep(G)
    uw = coupling_uw(rep)
    bad = type(uw)(rep, "U(W)", uw.matrix @ np.kron(np.eye(3), regular_rep(G).matrices[1]))
    assert intertwining_residual(bad) > 1e-3 or modified_pentagon_residual(bad) > 1e-3
