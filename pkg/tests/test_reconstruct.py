"""Reconstruction engines: objective, exhaustive oracle, annealing, I/O."""

import json

import numpy as np
import pytest

import hvconic as hv
from hvconic.errors import FormatError, GeometryMismatch, InvalidParameter, TooLarge

GEO22 = hv.GridGeometry(hv.Box(0.0, 2.0, 0.0, 2.0), 2, 2)
GEO33 = hv.GridGeometry(hv.Box(0.0, 3.0, 0.0, 3.0), 3, 3)
GEO44 = hv.GridGeometry(hv.Box(0.0, 4.0, 0.0, 4.0), 4, 4)


def problem_for(L, **kw):
    return hv.ReconstructionProblem(target=hv.conic_of(L), geometry=L.geometry, **kw)


# ---------------------------------------------------------------------------
# objective


def test_objective_frozen_and_invariance():
    geo = hv.GridGeometry(hv.Box(0, 2, 0, 1), 2, 1)
    domino = hv.GridSet.full(geo)
    cell = hv.GridSet.from_cells(geo, [(0, 0)])
    prob = problem_for(domino)
    assert hv.objective(domino, prob) == 0.0
    assert hv.objective(cell, prob) == 2.0
    # the anti-diagonal twin has the same section measures, so the same field
    diag = hv.GridSet.from_cells(GEO22, [(0, 0), (1, 1)])
    anti = hv.GridSet.from_cells(GEO22, [(0, 1), (1, 0)])
    assert hv.objective(anti, problem_for(diag)) == 0.0


def test_objective_requires_problem_geometry():
    prob = problem_for(hv.GridSet.full(GEO22))
    with pytest.raises(GeometryMismatch):
        hv.objective(hv.GridSet.full(GEO44), prob)


def test_objective_l1_is_upper_end():
    diag = hv.GridSet.from_cells(GEO22, [(0, 0), (1, 1)])
    cand = hv.GridSet.full(GEO22)
    prob = problem_for(diag, norm="l1", l1_refine=8)
    br = hv.l1_norm_diff(hv.conic_of(cand), prob.target, GEO22.box, refine=8)
    assert hv.objective(cand, prob) == br.upper


def test_problem_validation():
    with pytest.raises(InvalidParameter):
        problem_for(hv.GridSet.full(GEO22), norm="l7")
    with pytest.raises(InvalidParameter):
        problem_for(hv.GridSet.full(GEO22), feasibility="anything")
    with pytest.raises(InvalidParameter):
        hv.AnnealingParams(cooling=1.0)
    with pytest.raises(InvalidParameter):
        hv.AnnealingParams(steps=-1)
    hv.AnnealingParams(steps=0)  # explicitly allowed


# ---------------------------------------------------------------------------
# exhaustive oracle


def test_exhaustive_diag_target_two_optima():
    diag = hv.GridSet.from_cells(GEO22, [(0, 0), (1, 1)])
    res = hv.exhaustive(problem_for(diag))
    assert res.objective == 0.0
    assert res.optima is not None and len(res.optima) == 2
    anti = hv.GridSet.from_cells(GEO22, [(0, 1), (1, 0)])
    assert set(res.optima) == {diag, anti}
    assert res.thin_contact
    assert res.steps == 15  # all feasible 2x2 candidates scanned


def test_exhaustive_unique_target():
    corner = hv.GridSet.from_cells(GEO22, [(0, 0)])
    res = hv.exhaustive(problem_for(corner))
    assert res.objective == 0.0
    assert res.optima == [corner]
    assert not res.thin_contact


def test_exhaustive_full_box_constraint():
    corner = hv.GridSet.from_cells(GEO22, [(0, 0)])
    res = hv.exhaustive(problem_for(corner, feasibility="hv_connected_full_box"))
    # the corner cell itself is not admissible, so the optimum moves away
    assert res.objective > 0.0
    assert all(hv.in_level_set(L, GEO22.box) for L in res.optima)


def test_exhaustive_trace_monotone():
    L = hv.sample_hv_convex(GEO44, 5)
    res = hv.exhaustive(problem_for(L))
    vals = [v for _, v in res.trace]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert res.objective == vals[-1] == 0.0


def test_exhaustive_guard():
    geo = hv.GridGeometry(hv.Box(0, 5, 0, 4), 5, 4)
    with pytest.raises(TooLarge):
        hv.exhaustive(problem_for(hv.GridSet.full(geo)))


def test_exhaustive_l1_contains_sup_optima():
    diag = hv.GridSet.from_cells(GEO22, [(0, 0), (1, 1)])
    res = hv.exhaustive(problem_for(diag, norm="l1", l1_refine=2))
    masks = set(res.optima)
    anti = hv.GridSet.from_cells(GEO22, [(0, 1), (1, 0)])
    assert diag in masks and anti in masks


def test_exhaustive_matches_brute_force_3x3():
    # independent scan in the public objective only
    L = hv.sample_hv_convex(GEO33, 17)
    prob = problem_for(L)
    res = hv.exhaustive(prob)
    best = min(hv.objective(C, prob) for C in hv.enumerate_hv_connected(GEO33))
    assert res.objective == best == 0.0
    brute_optima = [
        C for C in hv.enumerate_hv_connected(GEO33) if hv.objective(C, prob) == best
    ]
    assert res.optima == brute_optima


# ---------------------------------------------------------------------------
# annealing


def test_zero_step_budget_returns_initial_sample():
    L = hv.sample_hv_convex(GEO44, 3)
    prob = problem_for(L)
    params = hv.AnnealingParams(steps=0, restarts=0, seed=9)
    res = hv.local_search(prob, params)
    assert res.steps == 0
    assert res.objective == hv.objective(res.best, prob)
    # with no mutation budget the best is the seeded initial sample
    expect = hv.sample_hv_convex(GEO44, [9, 0])
    assert res.best == expect


def test_local_search_deterministic():
    L = hv.sample_hv_convex(GEO44, 31)
    prob = problem_for(L)
    params = hv.AnnealingParams(steps=2000, restarts=1, seed=4)
    a = hv.local_search(prob, params)
    b = hv.local_search(prob, params)
    assert a.best == b.best and a.objective == b.objective and a.trace == b.trace
    c = hv.local_search(prob, hv.AnnealingParams(steps=2000, restarts=1, seed=5))
    assert (c.best, c.trace) != (a.best, a.trace) or c.objective == a.objective


def test_local_search_trace_monotone_and_feasible():
    L = hv.sample_hv_convex(GEO44, 41)
    prob = problem_for(L)
    res = hv.local_search(prob, hv.AnnealingParams(steps=5000, seed=1))
    vals = [v for _, v in res.trace]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    steps = [s for s, _ in res.trace]
    assert steps == sorted(steps)
    assert hv.is_hv_convex(res.best) and hv.is_connected(res.best)


def test_local_search_reaches_oracle_optimum():
    hits = 0
    for seed in range(10):
        L = hv.sample_hv_convex(GEO33, [55, seed])
        prob = problem_for(L)
        oracle = hv.exhaustive(prob)
        res = hv.local_search(prob, hv.AnnealingParams(steps=4000, seed=seed))
        assert res.objective >= oracle.objective - 1e-12
        if res.objective == oracle.objective:
            assert any(hv.xrays_equal_ae(res.best, O) for O in oracle.optima)
            hits += 1
    assert hits >= 9


def test_local_search_full_box_feasibility():
    L = hv.sample_hv_convex(GEO44, 13, require_full_box=True)
    prob = problem_for(L, feasibility="hv_connected_full_box")
    res = hv.local_search(prob, hv.AnnealingParams(steps=3000, seed=2))
    assert hv.in_level_set(res.best, GEO44.box)


def test_objective_zero_means_equal_xrays():
    L = hv.sample_hv_convex(GEO44, 19)
    prob = problem_for(L)
    res = hv.local_search(prob, hv.AnnealingParams(steps=20_000, restarts=2, seed=7))
    if res.objective == 0.0:
        assert hv.xrays_equal_ae(res.best, L)


# ---------------------------------------------------------------------------
# problem files


def write_problem(tmp_path, body):
    p = tmp_path / "problem.json"
    p.write_text(json.dumps(body), encoding="utf-8")
    return str(p)


def test_load_problem_hvset_target(tmp_path):
    L = hv.sample_hv_convex(GEO44, 23)
    gen = tmp_path / "gen.hvset"
    gen.write_text(hv.format_hvset(L), encoding="utf-8")
    path = write_problem(
        tmp_path,
        {
            "target": {"hvset": str(gen)},
            "box": [0, 4, 0, 4],
            "dims": [4, 4],
            "budget": {"steps": 50, "initial_temperature": 3.0},
            "seed": 6,
            "out_prefix": str(tmp_path / "rec"),
        },
    )
    prob, params, prefix = hv.load_problem(path)
    assert prob.geometry == GEO44 and prob.norm == "sup"
    assert params.steps == 50 and params.seed == 6
    assert params.initial_temperature == 3.0
    assert params.cooling == hv.AnnealingParams().cooling  # default fills gaps
    assert prefix.endswith("rec")
    assert hv.objective(L, prob) == 0.0


def test_load_problem_xray_target(tmp_path):
    L = hv.sample_hv_convex(GEO44, 29)
    vp = tmp_path / "v.csv"
    hp = tmp_path / "h.csv"
    vp.write_text(hv.profile_to_csv(hv.xray_v(L)), encoding="utf-8")
    hp.write_text(hv.profile_to_csv(hv.xray_h(L)), encoding="utf-8")
    path = write_problem(
        tmp_path,
        {
            "target": {"xray_csv": {"vertical": str(vp), "horizontal": str(hp)}},
            "box": [0, 4, 0, 4],
            "dims": [4, 4],
            "norm": "l1",
        },
    )
    prob, params, prefix = hv.load_problem(path)
    assert prob.norm == "l1"
    assert prefix == "reconstruction"
    assert hv.objective(L, prob) <= hv.l1_norm_diff(
        hv.conic_of(L), prob.target, GEO44.box
    ).upper + 1e-12


@pytest.mark.parametrize(
    "body",
    [
        {"box": [0, 4, 0, 4], "dims": [4, 4]},  # no target
        {"target": {}, "box": [0, 4, 0, 4], "dims": [4, 4]},
        {"target": {"xray_csv": {"vertical": "x"}}, "box": [0, 4, 0, 4], "dims": [4, 4]},
        {"target": {"hvset": "g"}, "dims": [4, 4]},  # no box
        {"target": {"hvset": "g"}, "box": [0, 4, 0, 4]},  # no dims
    ],
)
def test_load_problem_missing_fields(tmp_path, body):
    with pytest.raises(FormatError):
        hv.load_problem(write_problem(tmp_path, body))


def test_load_problem_malformed_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(FormatError):
        hv.load_problem(str(p))
    q = tmp_path / "badbudget.json"
    q.write_text(
        json.dumps(
            {
                "target": {"hvset": "missing"},
                "box": [0, 2, 0, 2],
                "dims": [2, 2],
                "budget": {"stepz": 5},
            }
        ),
        encoding="utf-8",
    )
    with pytest.raises((FormatError, FileNotFoundError)):
        hv.load_problem(str(q))


def test_write_result_files(tmp_path):
    L = hv.sample_hv_convex(GEO22, 2)
    res = hv.exhaustive(problem_for(L))
    prefix = str(tmp_path / "out")
    hv_path, js_path = hv.write_result(res, prefix)
    assert hv_path == prefix + ".hvset" and js_path == prefix + ".json"
    with open(hv_path, encoding="utf-8") as fh:
        assert hv.parse_hvset(fh.read()) == res.best
    with open(js_path, encoding="utf-8") as fh:
        summary = json.load(fh)
    assert summary["objective"] == res.objective
    assert summary["steps"] == res.steps
    assert summary["thin_contact"] == res.thin_contact
    assert summary["optima"] == len(res.optima)


def test_round_trip_problem_to_result(tmp_path):
    L = hv.sample_hv_convex(GEO44, 37)
    gen = tmp_path / "gen.hvset"
    gen.write_text(hv.format_hvset(L), encoding="utf-8")
    path = write_problem(
        tmp_path,
        {
            "target": {"hvset": str(gen)},
            "box": [0, 4, 0, 4],
            "dims": [4, 4],
            "budget": {"steps": 20000, "restarts": 1},
            "seed": 3,
            "out_prefix": str(tmp_path / "rec"),
        },
    )
    prob, params, prefix = hv.load_problem(path)
    res = hv.local_search(prob, params)
    hv.write_result(res, prefix)
    with open(prefix + ".json", encoding="utf-8") as fh:
        assert json.load(fh)["objective"] == res.objective
