"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and then
asserts, so a failing criterion is reported rather than hidden.
"""
import itertools
import subprocess
import sys
import time

import numpy as np

from conftest import ACCEPTANCE
from mmd.algebra import (block_algebra, commutant, conjugate, diagonal_algebra, full_algebra, generate,
                         intertwiners, is_masa, same_subspace, scalars, sector_decompose, span,
                         subspace_distance, tensor_algebra)
from mmd.amplifier import (CascadeConfig, amplify, analytic_branches, branches_to_vector,
                           consensus_offdiagonal, heisenberg_chain, heisenberg_chain_nested,
                           roundtrip_fidelity)
from mmd.crossed import (build_heisenberg, build_schrodinger, convolution_rep, convolve,
                         coupled_center_residual)
from mmd.groups import abelian_groups_up_to, make_group
from mmd.instrument import POVM, make_instrument, naimark_dilate, random_povm, trine_povm
from mmd.kt import (coupling_uw, intertwining_residual, kt_v, kt_w, modified_pentagon_residual,
                    pentagon_residual, regular_rep)
from mmd.operators import (character_rep, quasi_equivalent, random_density, random_rep, random_state,
                           random_unitary, rep_multiplicities, rep_power, tensor)
from mmd.ssb import (acts_transitively, all_subgroups, annihilator, quotient, quotient_pairing,
                     restriction_exact, sector_bundle)


def record(n: int, title: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title} ({detail})"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def character_projections(rep):
    """Independent oracle: ``E(chi) = |G|^-1 sum_u chi(u) U_u``."""
    X = rep.group.dual().table
    return np.einsum("cu,uab->cab", X, rep.matrices) / rep.group.order


def small_groups(max_order):
    return [G for G in abelian_groups_up_to(max_order)]


# --- 1 -----------------------------------------------------------------------

def test_criterion_01_pentagonal_relations():
    t0 = time.perf_counter()
    worst_p, worst_m, worst_i, n_groups = 0.0, 0.0, 0.0, 0
    for G in small_groups(16):
        n_groups += 1
        worst_p = max(worst_p, pentagon_residual(kt_w(G)), pentagon_residual(kt_v(G.dual())))
        rng = np.random.default_rng(1000 + G.order * 10 + G.rank)
        for k in range(5):
            uw = coupling_uw(random_rep(G, 1 + k % 3, rng))
            worst_m = max(worst_m, modified_pentagon_residual(uw))
            worst_i = max(worst_i, intertwining_residual(uw))
    elapsed = time.perf_counter() - t0
    ok = max(worst_p, worst_m, worst_i) <= 1e-10 and elapsed <= 60
    record(1, "pentagonal, modified pentagonal and intertwining relations", ok,
           f"{n_groups} groups, pentagon {worst_p:.1e}, modified {worst_m:.1e}, "
           f"intertwining {worst_i:.1e}, {elapsed:.1f}s")


# --- 2 -----------------------------------------------------------------------

def test_criterion_02_born_and_luders_oracles():
    worst_p = worst_post = 0.0
    cases = 0
    for G in small_groups(8):
        rng = np.random.default_rng(2000 + G.order * 10 + G.rank)
        reps = [regular_rep(G)] + [random_rep(G, d, rng) for d in range(1, 9)]
        for rep in reps:
            inst = make_instrument(rep)
            E = character_projections(rep)
            for _ in range(100):
                rho = random_density(rep.dim, rng)
                cases += 1
                for k in range(G.order):
                    p_oracle = float(np.trace(rho @ E[k]).real)
                    if k not in inst.spectral.support_indices:
                        worst_p = max(worst_p, p_oracle)
                        continue
                    chi = G.dual().element(k)
                    p = inst.probability(rho, [chi])
                    worst_p = max(worst_p, abs(p - p_oracle))
                    if p > 1e-12:
                        post = inst.posterior(rho, [chi])
                        worst_post = max(worst_post, float(np.linalg.norm(post - E[k] @ rho @ E[k] / p)))
    ok = worst_p <= 1e-10 and worst_post <= 1e-10
    record(2, "instrument matches Born and Lueders oracles", ok,
           f"{cases} states, probability {worst_p:.1e}, posterior {worst_post:.1e}")


# --- 3 and 4 (cascade part) ----------------------------------------------------

CASCADE_GROUPS = [G for G in small_groups(4)]


def cascade_scenarios():
    for G in CASCADE_GROUPS:
        for dim in range(1, 5):
            rng = np.random.default_rng(3000 + 100 * G.order + 10 * G.rank + dim)
            inst = make_instrument(random_rep(G, dim, rng))
            E = character_projections(inst.rep)
            for N in range(1, 7):
                yield inst, E, CascadeConfig(inst, N), rng


def branch_oracle(xi, E, cfg):
    """``sum_g E(g) xi (x) |g>^{x N}`` written out with explicit Kronecker products."""
    out = np.zeros(cfg.total_dim, dtype=complex)
    for k in range(cfg.n):
        e = np.zeros(cfg.n)
        e[k] = 1
        out += tensor(E[k] @ xi, *[e] * cfg.stages)
    return out


def test_criterion_03_cascade_branch_theorem():
    worst_branch = worst_overlap = worst_fid = 0.0
    runs = 0
    for inst, E, cfg, rng in cascade_scenarios():
        for _ in range(50):
            xi = random_state(inst.dim, rng)
            s = amplify(xi, cfg)
            worst_branch = max(worst_branch, float(np.linalg.norm(s.vector - branch_oracle(xi, E, cfg))))
            analytic = branches_to_vector(analytic_branches(xi, cfg), cfg)
            worst_overlap = max(worst_overlap, float(np.linalg.norm(s.vector - analytic)))
            worst_fid = max(worst_fid, 1 - roundtrip_fidelity(xi, cfg))
            runs += 1
    ok = worst_branch <= 1e-9 and worst_overlap <= 1e-9 and worst_fid <= 1e-10
    record(3, "cascade branch theorem, round trip, dense vs analytic", ok,
           f"{runs} runs, branch {worst_branch:.1e}, paths {worst_overlap:.1e}, 1-fidelity {worst_fid:.1e}")


def test_criterion_04_repeatability_and_consensus():
    worst_rep = 0.0
    checked = 0
    for G in small_groups(8):
        rng = np.random.default_rng(4000 + G.order * 10 + G.rank)
        for rep in [regular_rep(G)] + [random_rep(G, d, rng) for d in (2, 5, 8)]:
            inst = make_instrument(rep)
            for _ in range(25):
                rho = random_density(rep.dim, rng)
                for chi in inst.spectral.support:
                    if inst.probability(rho, [chi]) > 1e-6:
                        p = inst.probability(inst.posterior(rho, [chi]), [chi])
                        worst_rep = max(worst_rep, abs(p - 1))
                        checked += 1
    worst_cons = 0.0
    for inst, _, cfg, rng in cascade_scenarios():
        for _ in range(5):
            worst_cons = max(worst_cons, consensus_offdiagonal(amplify(random_state(inst.dim, rng), cfg)))
    ok = worst_rep <= 1e-10 and worst_cons <= 1e-10
    record(4, "repeatability and pointer consensus", ok,
           f"{checked} posteriors, |p-1| {worst_rep:.1e}, off-diagonal mass {worst_cons:.1e}")


# --- 5 -----------------------------------------------------------------------

def test_criterion_05_schrodinger_heisenberg_duality():
    worst = worst_nested = 0.0
    for N in range(1, 5):
        for k, G in enumerate([make_group([2]), make_group([3]), make_group([2, 2]), make_group([4])]):
            rng = np.random.default_rng(5000 + 10 * N + k)
            dim = 1 + (k + N) % 3
            inst = make_instrument(random_rep(G, dim, rng))
            cfg = CascadeConfig(inst, N)
            for _ in range(20 // 4):
                A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
                fs = [rng.normal(size=cfg.n) + 1j * rng.normal(size=cfg.n) for _ in range(N)]
                xi = random_state(dim, rng)
                s = amplify(xi, cfg).vector
                lhs = np.vdot(s, tensor(A, *[np.diag(f) for f in fs]) @ s)
                H = heisenberg_chain(A, fs, cfg)
                iota = np.zeros(cfg.n)
                iota[0] = 1
                x0 = tensor(xi, *[iota] * N)
                worst = max(worst, abs(lhs - np.vdot(x0, H @ x0)))
                worst_nested = max(worst_nested, float(np.linalg.norm(H - heisenberg_chain_nested(A, fs, cfg))))
    ok = worst <= 1e-10 and worst_nested <= 1e-10
    record(5, "Schroedinger-Heisenberg duality of the chain map", ok,
           f"N=1..4, 20 pairs each, expectation gap {worst:.1e}, nested form {worst_nested:.1e}")


# --- 6 -----------------------------------------------------------------------

def test_criterion_06_crossed_products():
    worst_eq, worst_conv, worst_center = 0.0, 0.0, 0.0
    dims_ok = True
    for G in small_groups(4):
        for n in range(1, 5):
            rng = np.random.default_rng(6000 + 100 * G.order + 10 * G.rank + n)
            rep = random_rep(G, n, rng)
            M = full_algebra(n)
            cp_s, cp_h = build_schrodinger(M, rep), build_heisenberg(M, rep)
            dims_ok &= cp_s.dim == n * n * G.order == cp_h.dim
            UW = coupling_uw(rep).matrix
            worst_eq = max(worst_eq, subspace_distance(conjugate(cp_s.algebra, UW.conj().T), cp_h.algebra),
                           subspace_distance(conjugate(cp_h.algebra, UW), cp_s.algebra))
            if n <= 2:
                for _ in range(20):
                    F1 = rng.normal(size=(G.order, n, n)) + 1j * rng.normal(size=(G.order, n, n))
                    F2 = rng.normal(size=(G.order, n, n)) + 1j * rng.normal(size=(G.order, n, n))
                    lhs = convolution_rep(F1, rep) @ convolution_rep(F2, rep)
                    worst_conv = max(worst_conv, float(np.linalg.norm(
                        lhs - convolution_rep(convolve(F1, F2, rep), rep))))
    center_cases = 0
    for n in range(1, 5):
        for A in (scalars(2), diagonal_algebra(2), diagonal_algebra(3), diagonal_algebra(4),
                  span([np.eye(3), np.diag([1, 1, 0])], 3)):
            worst_center = max(worst_center, coupled_center_residual(full_algebra(n), A))
            center_cases += 1
    ok = dims_ok and worst_eq <= 1e-9 and worst_conv <= 1e-10 and worst_center <= 1e-9
    record(6, "crossed-product equivalence, dimension, convolution, centre", ok,
           f"dims {'ok' if dims_ok else 'WRONG'}, Ad(U(W)) {worst_eq:.1e}, convolution {worst_conv:.1e}, "
           f"centre {worst_center:.1e} over {center_cases} cases")


# --- 7 -----------------------------------------------------------------------

def partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield []
        return
    for k in range(min(n, largest), 0, -1):
        for rest in partitions(n - k, k):
            yield [k] + rest


def test_criterion_07_algebra_engine():
    rng = np.random.default_rng(7000)
    worst_dc = 0.0
    for i in range(30):
        n = 2 + i % 7
        dims = list(partitions(n))[i % len(list(partitions(n)))]
        U = random_unitary(n, rng)
        A = conjugate(block_algebra(dims), U)
        G = generate([A.random_element(rng, hermitian=False) for _ in range(2)])
        worst_dc = max(worst_dc, subspace_distance(commutant(commutant(G)), G))
    planted_ok, planted = True, 0
    for n in range(1, 9):
        for dims in partitions(n):
            U = random_unitary(n, rng)
            A = conjugate(block_algebra(dims), U)
            dec = sector_decompose(generate([A.random_element(rng, hermitian=False) for _ in range(2)]), seed=1)
            planted_ok &= sorted(s.dim for s in dec.sectors) == sorted(dims)
            planted_ok &= all(s.multiplicity == 1 for s in dec.sectors)
            planted += 1
    M22 = tensor_algebra(full_algebra(2), diagonal_algebra(2))
    catalogue = [(diagonal_algebra(n), full_algebra(n), True) for n in range(2, 9)] + [
        (scalars(2), full_algebra(2), False),
        (tensor_algebra(scalars(2), diagonal_algebra(2)), M22, False),
        (tensor_algebra(diagonal_algebra(2), diagonal_algebra(2)), M22, True),
        (span([np.eye(3), np.diag([1, 1, 0])], 3), full_algebra(3), False),
        (conjugate(diagonal_algebra(4), random_unitary(4, rng)), full_algebra(4), True),
    ]
    masa_ok = all(is_masa(A, M) == want for A, M, want in catalogue)
    inter_max = 0
    for a, b in itertools.combinations(range(1, 5), 2):
        B = block_algebra([a, b])
        pa = [X[:a, :a] for X in B.basis]
        pb = [X[a:, a:] for X in B.basis]
        inter_max = max(inter_max, intertwiners(pa, pb).shape[0])
    B = block_algebra([2, 2])
    inter_max = max(inter_max, intertwiners([X[:2, :2] for X in B.basis], [X[2:, 2:] for X in B.basis]).shape[0])
    ok = worst_dc <= 1e-9 and planted_ok and masa_ok and inter_max == 0
    record(7, "algebra engine oracles", ok,
           f"double commutant {worst_dc:.1e} on 30 algebras, {planted} planted block structures "
           f"{'recovered' if planted_ok else 'MISSED'}, MASA catalogue {'ok' if masa_ok else 'WRONG'}, "
           f"max intertwiner dim {inter_max}")


# --- 8 -----------------------------------------------------------------------

def test_criterion_08_quasi_equivalence():
    quasi_ok = mult_ok = True
    for G in small_groups(8):
        lam = regular_rep(G)
        powers = {m: rep_power(lam, m) for m in (1, 2, 3)}
        for m, n in itertools.product((1, 2, 3), repeat=2):
            quasi_ok &= quasi_equivalent(powers[m], powers[n])
        for m, rep in powers.items():
            X = G.dual().table
            brute = np.rint((X @ np.einsum("uii->u", rep.matrices)).real / G.order).astype(int)
            got = rep_multiplicities(rep)
            mult_ok &= all(got[G.dual().element(c)] == brute[c] == G.order ** (m - 1) for c in range(G.order))
        quasi_ok &= not quasi_equivalent(lam, character_rep(G, [G.dual().identity])) or G.order == 1
    ok = quasi_ok and mult_ok
    record(8, "quasi-equivalence of regular-representation powers", ok,
           f"{len(small_groups(8))} groups, m,n in 1..3, multiplicity tables {'match' if mult_ok else 'DIFFER'}")


# --- 9 -----------------------------------------------------------------------

def test_criterion_09_ssb_bookkeeping():
    pairs = 0
    ok = True
    for G in small_groups(16):
        for H in all_subgroups(G):
            pairs += 1
            Q = quotient(G, H)
            ex = restriction_exact(G, H)
            T = quotient_pairing(G, H)
            ok &= H.order * len(Q) == G.order
            ok &= len(annihilator(G, H)) == len(Q)
            ok &= ex["surjective"] and ex["kernel_is_annihilator"]
            ok &= np.allclose(T @ T.conj().T, len(Q) * np.eye(len(Q)), atol=1e-12)
            ok &= acts_transitively(G, H)
            ok &= sector_bundle(G, H).total == G.order
    record(9, "SSB bookkeeping", ok, f"{pairs} (G, H) pairs with |G| <= 16")


# --- 10 ----------------------------------------------------------------------

def test_criterion_10_naimark():
    rng = np.random.default_rng(10000)
    povms = [POVM(("0", "1"), np.array([np.diag([1, 0]), np.diag([0, 1])]).astype(complex)),
             POVM(("0", "1", "2"), np.array([np.diag(e) for e in np.eye(3)]).astype(complex)),
             POVM(("a", "b"), np.array([np.eye(2) / 2] * 2, dtype=complex)),
             trine_povm()]
    povms += [random_povm(1 + k % 4, 2 + k % 4, rng) for k in range(20)]
    worst_iso = worst_comp = 0.0
    for P in povms:
        D = naimark_dilate(P)
        V = D.isometry
        worst_iso = max(worst_iso, float(np.linalg.norm(V.conj().T @ V - np.eye(P.dim))))
        for i, F in enumerate(P.effects):
            worst_comp = max(worst_comp, float(np.linalg.norm(V.conj().T @ D.projection(i) @ V - F)))
    ok = worst_iso <= 1e-10 and worst_comp <= 1e-10
    record(10, "Naimark dilation", ok,
           f"{len(povms)} POVMs, V*V-1 {worst_iso:.1e}, V*P_iV-F_i {worst_comp:.1e}")


# --- 11 ----------------------------------------------------------------------

def test_criterion_11_suite_determinism(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"suite{k}.json"
        proc = subprocess.run([sys.executable, "-m", "mmd", "suite", "--seed", "7", "--out", str(path)],
                              capture_output=True, text=True)
        outs.append((proc.returncode, path.read_bytes() if path.exists() else b""))
    ok = outs[0][1] != b"" and outs[0][1] == outs[1][1]
    record(11, "suite reports are bit-identical", ok,
           f"{len(outs[0][1])} bytes, exit codes {outs[0][0]}/{outs[1][0]}")
