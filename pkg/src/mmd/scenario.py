"""Declarative scenarios: JSON schema, decoding into package objects, and one
runner per command producing a report dict.

Reports are plain JSON data.  Every check is ``{name, value, tolerance, pass}``
and the overall ``pass`` is their conjunction.  Nothing time-dependent is
recorded unless asked for, so equal (scenario, seed) pairs give equal bytes.
"""
from __future__ import annotations

import json
from typing import Any, Callable

import jsonschema
import numpy as np

from .algebra import (commutant, full_algebra, generate, is_factor,
                      sector_decompose, subspace_distance)
from .amplifier import (CascadeConfig, amplify, analytic_branches, branches_to_vector,
                        consensus_offdiagonal, register_distribution, roundtrip_fidelity)
from .crossed import convolution_rep, convolve, coupled_center_residual, crossed_report
from .errors import MMDError
from .groups import FiniteAbelianGroup, abelian_groups_up_to, make_group
from .instrument import make_instrument, povm_effects
from .kt import regular_rep, verify_relations
from .operators import UnitaryRep, check_density, dm, random_density, random_state, trivial_rep
from .ssb import (acts_transitively, all_subgroups, annihilator, quotient_pairing,
                  restriction_exact, sector_bundle, subgroup)

SCHEMA_VERSION = 1
COMMANDS = ("verify", "measure", "amplify", "sectors", "crossed", "ssb", "suite")

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_vector = {"type": "array", "items": _complex, "minItems": 1}
_matrix = {
    "type": "object",
    "properties": {
        "matrix": {"type": "array", "items": _vector, "minItems": 1},
        "signature": {"type": "array", "items": {"type": "integer", "minimum": 1}},
    },
    "required": ["matrix"],
    "additionalProperties": False,
}
_element = {"type": "array", "items": {"type": "integer"}}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "group_orders": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "rep": {"oneOf": [{"enum": ["standard", "regular", "trivial"]},
                          {"type": "array", "items": _matrix}]},
        "dim": {"type": "integer", "minimum": 1},
        "state": {"oneOf": [_vector, _matrix]},
        "initial_state": _vector,
        "outcome_sets": {"type": "array", "items": {"type": "array", "items": _element}},
        "N": {"type": "integer", "minimum": 1},
        "path": {"enum": ["dense", "analytic"]},
        "generators": {"type": "array", "items": _matrix, "minItems": 1},
        "system_generators": {"type": "array", "items": _matrix, "minItems": 1},
        "abelian_generators": {"type": "array", "items": _matrix, "minItems": 1},
        "subgroup_generators": {"type": "array", "items": _element},
        "vacuum": {"type": "integer", "minimum": 0},
        "declare_masa": {"type": "boolean"},
        "samples": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

REQUIRED = {
    "verify": ["group_orders", "rep"],
    "measure": ["group_orders", "rep", "state"],
    "amplify": ["group_orders", "rep", "initial_state", "N"],
    "sectors": ["generators"],
    "crossed": ["group_orders", "rep"],
    "ssb": ["group_orders", "subgroup_generators"],
    "suite": [],
}

TOL = {"relation": 1e-10, "born": 1e-10, "branch": 1e-9, "fidelity": 1e-10,
       "consensus": 1e-10, "equivalence": 1e-9, "convolution": 1e-10, "center": 1e-9,
       "commutant": 1e-9}


class ScenarioError(MMDError):
    """Invalid scenario; ``pointer`` is a JSON pointer into the scenario document."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


# --- decoding ----------------------------------------------------------------

def validate(doc: Any, command: str) -> dict:
    if not isinstance(doc, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    e = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc))
    if e is not None:
        while e.context:  # descend into oneOf branches to the deepest failing path
            e = max(e.context, key=lambda c: len(c.absolute_path))
        raise ScenarioError(_pointer(e.absolute_path), e.message)
    for key in REQUIRED[command]:
        if key not in doc:
            raise ScenarioError(f"/{key}", f"required for '{command}'")
    return doc


def load(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError("", f"cannot read scenario: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return validate(doc, command)


def decode_vector(v, where: str) -> np.ndarray:
    return np.array([complex(re, im) for re, im in v])


def decode_matrix(obj: dict, where: str) -> np.ndarray:
    rows = obj["matrix"]
    n = len(rows)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise ScenarioError(f"{where}/matrix/{i}", f"row of length {len(r)} in a {n}x{n} matrix")
    sig = obj.get("signature")
    if sig is not None and int(np.prod(sig)) != n:
        raise ScenarioError(f"{where}/signature", f"factor dimensions multiply to {int(np.prod(sig))}, not {n}")
    return np.array([decode_vector(r, where) for r in rows])


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.ravel(v)]


def encode_matrix(M) -> dict:
    M = np.asarray(M)
    return {"matrix": [encode_vector(r) for r in M], "signature": [int(M.shape[0])]}


def _group(doc) -> FiniteAbelianGroup:
    try:
        return make_group(doc["group_orders"])
    except MMDError as exc:
        raise ScenarioError("/group_orders", str(exc)) from exc


def _rep(doc, G: FiniteAbelianGroup) -> UnitaryRep:
    spec = doc["rep"]
    if spec in ("standard", "regular"):
        # standard choice alpha_u = Ad(lambda_u) on l2(G)
        return regular_rep(G)
    if spec == "trivial":
        return trivial_rep(G, doc.get("dim", 1))
    mats = [decode_matrix(m, f"/rep/{i}") for i, m in enumerate(spec)]
    try:
        return UnitaryRep.from_generators(G, mats)
    except MMDError as exc:
        raise ScenarioError("/rep", str(exc)) from exc


def _matrices(doc, key) -> list[np.ndarray]:
    mats = [decode_matrix(m, f"/{key}/{i}") for i, m in enumerate(doc[key])]
    n = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape[0] != n:
            raise ScenarioError(f"/{key}/{i}", f"matrix of size {m.shape[0]}, expected {n}")
    return mats


def _state(doc, key, dim) -> np.ndarray:
    raw = doc[key]
    if isinstance(raw, dict):
        rho = decode_matrix(raw, f"/{key}")
    else:
        v = decode_vector(raw, f"/{key}")
        if abs(np.linalg.norm(v) - 1) > 1e-10:
            raise ScenarioError(f"/{key}", f"state vector has norm {np.linalg.norm(v):.12g}")
        rho = v
    if rho.shape[0] != dim:
        raise ScenarioError(f"/{key}", f"state of dimension {rho.shape[0]} for a system of dimension {dim}")
    if rho.ndim == 2:
        try:
            check_density(rho)
        except MMDError as exc:
            raise ScenarioError(f"/{key}", str(exc)) from exc
    return rho


# --- report helpers ----------------------------------------------------------

def check(name: str, value: float, tolerance: float, passed: bool | None = None, *, at_least: bool = False) -> dict:
    value = float(value)
    if passed is None:
        passed = value >= tolerance if at_least else value <= tolerance
    return {"name": name, "value": value, "tolerance": float(tolerance), "pass": bool(passed)}


def exact(name: str, ok: bool) -> dict:
    return {"name": name, "value": float(bool(ok)), "tolerance": 0.0, "pass": bool(ok)}


def finish(command: str, doc: dict, seed: int, result: dict, checks: list[dict]) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "name": doc.get("name"),
            "seed": seed, "scenario": doc, "result": result, "checks": checks,
            "pass": all(c["pass"] for c in checks), "timing": None}


# --- runners -----------------------------------------------------------------

def run_verify(doc, seed, cap=None) -> dict:
    G = _group(doc)
    rep = _rep(doc, G)
    rel = verify_relations(rep, seed=seed, tol=TOL["relation"])
    checks = [check(r["relation"], r["residual"], r["tolerance"]) for r in rel]
    return finish("verify", doc, seed, {"relations": rel}, checks)


def run_measure(doc, seed, cap=None) -> dict:
    G = _group(doc)
    rep = _rep(doc, G)
    rho = _state(doc, "state", rep.dim)
    inst = make_instrument(rep, declare_masa=doc.get("declare_masa", False), seed=seed)
    dual = inst.dual
    R = rho if rho.ndim == 2 else dm(rho)
    dist = inst.distribution(R)
    checks = [check("total_probability", abs(sum(dist.values()) - 1), TOL["born"])]
    born = max(abs(p - np.trace(R @ inst.spectral[chi]).real) for chi, p in dist.items())
    checks.append(check("born_oracle", born, TOL["born"]))
    povm = povm_effects(inst)
    checks.append(check("povm_equals_spectral",
                        max(np.linalg.norm(F - inst.spectral[l]) for l, F in zip(povm.labels, povm.effects)),
                        TOL["born"]))
    sets = doc.get("outcome_sets") or [[list(c)] for c in dist]
    outcomes, posteriors = [], []
    for i, delta in enumerate(sets):
        delta = [tuple(c) for c in delta]
        try:
            p = inst.probability(R, delta)
        except MMDError as exc:
            raise ScenarioError(f"/outcome_sets/{i}", str(exc)) from exc
        entry = {"set": [list(c) for c in delta], "probability": p, "posterior": None}
        if p > 1e-12:
            post = inst.posterior(R, delta)
            P = sum(inst.spectral[c] for c in delta)
            luders = P @ R @ P / p
            entry["posterior"] = encode_matrix(post)
            checks.append(check(f"luders_oracle[{i}]", np.linalg.norm(post - luders), TOL["born"]))
            if p > 1e-6:
                checks.append(check(f"repeatability[{i}]", abs(inst.probability(post, delta) - 1), TOL["born"]))
        outcomes.append(entry)
        posteriors.append(entry["posterior"])
    result = {"probabilities": {dual.label(c): p for c, p in dist.items()},
              "outcome_sets": outcomes, "posteriors": posteriors,
              "masa": inst.masa}
    return finish("measure", doc, seed, result, checks)


def run_amplify(doc, seed, cap=None) -> dict:
    G = _group(doc)
    rep = _rep(doc, G)
    xi = _state(doc, "initial_state", rep.dim)
    inst = make_instrument(rep, seed=seed)
    cfg = CascadeConfig(inst, doc["N"], cap)
    path = doc.get("path", "dense")
    branches = analytic_branches(xi, cfg)
    dual = inst.dual
    dist = np.zeros(dual.order)
    for b in branches:
        dist[dual.index(b.gamma)] = b.amplitude ** 2
    checks = [check("branch_weight", abs(dist.sum() - 1), TOL["fidelity"])]
    fidelity = None
    if path == "dense" or cfg.dense_ok:
        state = amplify(xi, cfg)  # raises DimensionCapExceeded when over the cap
        diff = np.linalg.norm(state.vector - branches_to_vector(branches, cfg))
        checks.append(check("dense_vs_analytic", diff, TOL["branch"]))
        fidelity = roundtrip_fidelity(xi, cfg)
        checks.append(check("roundtrip_fidelity", fidelity, 1 - TOL["fidelity"], at_least=True))
        checks.append(check("pointer_consensus", consensus_offdiagonal(state), TOL["consensus"]))
        dist_dense = register_distribution(state, 1)
        checks.append(check("register_distribution", np.abs(dist_dense - dist).max(), TOL["branch"]))
    result = {"N": cfg.stages, "path": path, "dense": bool(cfg.dense_ok), "total_dim": cfg.total_dim,
              "branches": [{"gamma": list(b.gamma), "amplitude": b.amplitude,
                            "system_component": encode_vector(b.component)} for b in branches],
              "fidelity_roundtrip": fidelity,
              "single_register_distribution": {dual.label(dual.element(k)): float(dist[k])
                                               for k in range(dual.order)}}
    return finish("amplify", doc, seed, result, checks)


def run_sectors(doc, seed, cap=None) -> dict:
    gens = _matrices(doc, "generators")
    M = generate(gens)
    dec = sector_decompose(M, seed=seed)
    n = M.n
    covered = sum(s.dim * s.multiplicity for s in dec.sectors)
    checks = [exact("sectors_cover_space", covered == n),
              check("double_commutant", subspace_distance(commutant(commutant(M)), M), TOL["commutant"]),
              exact("dimension_count", sum(s.dim ** 2 for s in dec.sectors) == M.dim)]
    result = {"algebra_dim": M.dim, "ambient": n,
              "sectors": [{"dim": s.dim, "multiplicity": s.multiplicity} for s in dec.sectors],
              "center_dim": dec.center_dim, "is_factor": dec.is_factor}
    return finish("sectors", doc, seed, result, checks)


def run_crossed(doc, seed, cap=None) -> dict:
    G = _group(doc)
    rep = _rep(doc, G)
    M = generate(_matrices(doc, "system_generators")) if "system_generators" in doc else full_algebra(rep.dim)
    if M.n != rep.dim:
        raise ScenarioError("/system_generators", f"acts on C^{M.n}, representation on C^{rep.dim}")
    A = generate(_matrices(doc, "abelian_generators")) if "abelian_generators" in doc else None
    rpt = crossed_report(M, rep, A)
    checks = [check("ad_uw_equivalence", rpt["equivalence_residual"], TOL["equivalence"]),
              exact("pictures_same_dim", rpt["dims"]["schrodinger"] == rpt["dims"]["heisenberg"])]
    if M.dim == M.n ** 2:
        checks.append(exact("crossed_dim", rpt["dims"]["schrodinger"] == M.dim * G.order))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(doc.get("samples", 20)):
        F1 = np.array([M.random_element(rng, hermitian=False) for _ in range(G.order)])
        F2 = np.array([M.random_element(rng, hermitian=False) for _ in range(G.order)])
        lhs = convolution_rep(F1, rep) @ convolution_rep(F2, rep)
        worst = max(worst, float(np.linalg.norm(lhs - convolution_rep(convolve(F1, F2, rep), rep))))
    checks.append(check("convolution_homomorphism", worst, TOL["convolution"]))
    if A is not None and is_factor(M) and A.is_abelian():
        checks.append(check("center_of_tensor", coupled_center_residual(M, A), TOL["center"]))
    result = {"dims": rpt["dims"], "equivalence_residual": rpt["equivalence_residual"],
              "center_dims": rpt["center_dims"]}
    return finish("crossed", doc, seed, result, checks)


def run_ssb(doc, seed, cap=None) -> dict:
    G = _group(doc)
    try:
        H = subgroup(G, doc["subgroup_generators"])
    except MMDError as exc:
        raise ScenarioError("/subgroup_generators", str(exc)) from exc
    try:
        bundle = sector_bundle(G, H, doc.get("vacuum", 0))
    except MMDError as exc:
        raise ScenarioError("/vacuum", str(exc)) from exc
    return finish("ssb", doc, seed, _ssb_result(G, H, bundle), _ssb_checks(G, H, bundle))


def _ssb_result(G, H, bundle) -> dict:
    return {"subgroup": [list(h) for h in H.elements],
            "cosets": [[list(g) for g in c] for c in bundle.base],
            "annihilator": [list(c) for c in annihilator(G, H)],
            "bundle": {"base": len(bundle.base), "fiber": len(bundle.fiber), "total": bundle.total,
                       "vacuum": [list(g) for g in bundle.base[bundle.vacuum]]}}


def _ssb_checks(G, H, bundle) -> list[dict]:
    ex = restriction_exact(G, H)
    T = quotient_pairing(G, H)
    k = T.shape[0]
    nondeg = T.shape[0] == T.shape[1] and np.allclose(T @ T.conj().T, k * np.eye(k), atol=1e-12)
    return [exact("lagrange", H.order * len(bundle.base) == G.order),
            exact("annihilator_order", len(annihilator(G, H)) == len(bundle.base)),
            exact("restriction_surjective", ex["surjective"]),
            exact("restriction_kernel", ex["kernel_is_annihilator"]),
            exact("quotient_pairing_nondegenerate", nondeg),
            exact("transitive_on_cosets", acts_transitively(G, H)),
            exact("bundle_total", bundle.total == G.order)]


RUNNERS: dict[str, Callable] = {"verify": run_verify, "measure": run_measure, "amplify": run_amplify,
                                "sectors": run_sectors, "crossed": run_crossed, "ssb": run_ssb}


# --- built-in catalogue ------------------------------------------------------

def catalogue(seed: int = 0, max_order: int = 8) -> list[tuple[str, dict]]:
    """Deterministic scenario list over every abelian group with ``|U| <= max_order``."""
    out = []
    rng = np.random.default_rng(seed)
    for G in abelian_groups_up_to(max_order):
        orders = list(G.orders)
        tag = "x".join(map(str, orders))
        out.append(("verify", {"name": f"verify[{tag}]", "group_orders": orders, "rep": "standard"}))
        state = encode_matrix(random_density(G.order, rng))
        out.append(("measure", {"name": f"measure[{tag}]", "group_orders": orders, "rep": "standard",
                                "state": state}))
        xi = encode_vector(random_state(G.order, rng))
        stages = max(1, min(4, int(np.floor(np.log(2 ** 12 / G.order) / np.log(max(G.order, 2))))))
        out.append(("amplify", {"name": f"amplify[{tag}]", "group_orders": orders, "rep": "standard",
                                "initial_state": xi, "N": stages}))
        if G.order <= 4:
            out.append(("crossed", {"name": f"crossed[{tag}]", "group_orders": orders, "rep": "standard",
                                    "samples": 5}))
        for H in all_subgroups(G):
            gens = [list(h) for h in H.generators]
            out.append(("ssb", {"name": f"ssb[{tag}|{gens}]", "group_orders": orders,
                                "subgroup_generators": gens}))
    return out


def run_suite(seed: int = 0, cap=None) -> dict:
    reports = []
    for i, (command, doc) in enumerate(catalogue(seed)):
        doc = {"schema_version": SCHEMA_VERSION, **doc, "seed": seed + i}
        validate(doc, command)
        r = RUNNERS[command](doc, doc["seed"], cap)
        reports.append({"command": command, "name": doc["name"], "seed": doc["seed"],
                        "pass": r["pass"], "checks": r["checks"], "result": r["result"]})
    checks = [exact(r["name"], r["pass"]) for r in reports]
    return {"schema_version": SCHEMA_VERSION, "command": "suite", "name": "catalogue", "seed": seed,
            "scenario": None, "result": {"scenarios": reports}, "checks": checks,
            "pass": all(c["pass"] for c in checks), "timing": None}


def run(command: str, doc: dict | None, seed: int | None = None, cap: int | None = None) -> dict:
    if command == "suite":
        return run_suite(0 if seed is None else seed, cap)
    doc = validate(doc, command)
    seed = doc.get("seed", 0) if seed is None else seed
    return RUNNERS[command](doc, seed, cap)


def tabular(report: dict) -> tuple[list[str], list[list]]:
    """Rows for the CSV view of a report's main table."""
    res, cmd = report["result"], report["command"]
    if cmd == "measure":
        return ["outcome", "probability"], [[k, v] for k, v in res["probabilities"].items()]
    if cmd == "amplify":
        return ["gamma", "amplitude"], [[",".join(map(str, b["gamma"])), b["amplitude"]] for b in res["branches"]]
    if cmd == "verify":
        return ["relation", "residual", "tolerance", "pass"], [
            [r["relation"], r["residual"], r["tolerance"], r["pass"]] for r in res["relations"]]
    if cmd == "suite":
        return ["command", "name", "seed", "pass"], [[r["command"], r["name"], r["seed"], r["pass"]]
                                                     for r in res["scenarios"]]
    return ["name", "value", "tolerance", "pass"], [[c["name"], c["value"], c["tolerance"], c["pass"]]
                                                    for c in report["checks"]]
