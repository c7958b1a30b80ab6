"""Reconstruction of a grid set from its conic distance field.

Minimizes the norm distance between a candidate's field and a target
field over the feasible family (hv-convex connected cell unions on a
fixed partition, optionally with full-box projections).  Two engines: an
exhaustive oracle for small grids that returns every global optimum, and
seeded simulated annealing for larger ones.  Both report a best set whose
objective is recomputed through the public evaluation path at the end, so
a bug in the fast incremental scoring cannot leak into results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .conic import (
    ConicEvaluator,
    XRayProfile,
    _extrema_from_coeffs,
    _merged_points,
    _profile_coeffs,
    conic_of,
    l1_norm_diff,
    parse_profile_csv,
    sup_norm_diff,
)
from .errors import FormatError, GeometryMismatch, InvalidParameter, TooLarge
from .grid import (
    Box,
    GridGeometry,
    GridSet,
    _feasible_masks,
    _mask_connected,
    _mask_full_box,
    _mask_hv_convex,
    _mask_to_cells,
    _sample_with_rng,
    format_hvset,
    in_level_set,
    is_connected,
    is_hv_convex,
    parse_hvset,
    thin_contact,
)

__all__ = [
    "ReconstructionProblem",
    "AnnealingParams",
    "ReconstructionResult",
    "objective",
    "exhaustive",
    "local_search",
    "load_problem",
    "write_result",
]

NORM_SUP = "sup"
NORM_L1 = "l1"
FEAS_HV = "hv_connected"
FEAS_FULL = "hv_connected_full_box"


@dataclass(frozen=True)
class ReconstructionProblem:
    target: ConicEvaluator
    geometry: GridGeometry
    norm: str = NORM_SUP
    feasibility: str = FEAS_HV
    l1_refine: int = 4

    def __post_init__(self):
        if self.norm not in (NORM_SUP, NORM_L1):
            raise InvalidParameter(f"unknown norm {self.norm!r}")
        if self.feasibility not in (FEAS_HV, FEAS_FULL):
            raise InvalidParameter(f"unknown feasibility {self.feasibility!r}")
        if self.l1_refine < 1:
            raise InvalidParameter("l1_refine must be a positive integer")


@dataclass(frozen=True)
class AnnealingParams:
    initial_temperature: float = 4.0
    cooling: float = 0.9997
    steps: int = 10_000
    restarts: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.initial_temperature <= 0:
            raise InvalidParameter("initial_temperature must be positive")
        if not 0.0 < self.cooling < 1.0:
            raise InvalidParameter("cooling must lie strictly between 0 and 1")
        # zero steps allowed: the run then reports the initial sample
        if self.steps < 0 or self.restarts < 0:
            raise InvalidParameter("steps and restarts must be non-negative")


@dataclass(frozen=True)
class ReconstructionResult:
    best: GridSet
    objective: float
    trace: list
    thin_contact: bool
    steps: int
    optima: list | None = None


def _feasible(L: GridSet, problem: ReconstructionProblem) -> bool:
    ok = is_hv_convex(L) and is_connected(L)
    if ok and problem.feasibility == FEAS_FULL:
        ok = in_level_set(L, problem.geometry.box)
    return ok


def objective(L: GridSet, problem: ReconstructionProblem) -> float:
    """Norm distance of L's field to the target over the reference box.

    Exact for the sup norm; the certified upper end of the quadrature
    bracket for l1 (consistently pessimistic).
    """
    if L.geometry != problem.geometry:
        raise GeometryMismatch("candidate must live on the problem geometry")
    E = conic_of(L)
    box = problem.geometry.box
    if problem.norm == NORM_SUP:
        return sup_norm_diff(E, problem.target, box)
    return l1_norm_diff(E, problem.target, box, refine=problem.l1_refine).upper


class _SupScore:
    """Exact sup-norm objective from column/row counts alone.

    Precomputes the merged interval structure shared by every candidate on
    the fixed grid (the candidate breakpoints are always the grid lines)
    and mirrors the public evaluation formulas term for term, so its value
    is bit-identical to ``objective`` on the same candidate.
    """

    def __init__(self, target: ConicEvaluator, geometry: GridGeometry):
        box = geometry.box
        self._axes = []
        for lines, tprof, cell, lo, hi in (
            (geometry.xlines(), target.yprofile, geometry.cell_h, box.a, box.b),
            (geometry.ylines(), target.xprofile, geometry.cell_w, box.c, box.d),
        ):
            probe = XRayProfile(tprof.axis, lines, np.ones(len(lines) - 1))
            pts = _merged_points(probe, tprof, lo, hi)
            los, his = pts[:-1], pts[1:]
            mids = 0.5 * (los + his)
            tA, tB, tC = _profile_coeffs(tprof, mids)
            kidx = np.searchsorted(lines, mids, side="right") - 1
            widths = np.diff(lines)
            cmids = 0.5 * (lines[:-1] + lines[1:])
            self._axes.append(
                (lines, widths, cmids, cell, kidx, tA, tB, tC, los, his)
            )
        self._memo: tuple[dict, dict] = ({}, {})

    def _axis(self, counts: np.ndarray, axk: int) -> tuple[float, float]:
        key = counts.tobytes()
        hit = self._memo[axk].get(key)
        if hit is not None:
            return hit
        lines, widths, cmids, cell, kidx, tA, tB, tC, los, his = self._axes[axk]
        vals = counts * cell
        mass = np.concatenate([[0.0], np.cumsum(vals * widths)])
        moment = np.concatenate([[0.0], np.cumsum(vals * widths * cmids)])
        mtot, stot = mass[-1], moment[-1]
        ki = kidx
        A = vals[ki]
        B = 2.0 * mass[ki] - 2.0 * vals[ki] * lines[ki] - mtot
        C = vals[ki] * lines[ki] ** 2 - 2.0 * moment[ki] + stot
        hit = _extrema_from_coeffs(A - tA, B - tB, C - tC, los, his)
        self._memo[axk][key] = hit
        return hit

    def __call__(self, col_counts: np.ndarray, row_counts: np.ndarray) -> float:
        umin, umax = self._axis(col_counts, 0)
        vmin, vmax = self._axis(row_counts, 1)
        return max(umax + vmax, -(umin + vmin))


def exhaustive(problem: ReconstructionProblem) -> ReconstructionResult:
    """Scan every feasible set; return the best plus all global optima.

    Candidates are visited in ascending order of the bit-encoded cell
    indicator (bit ``i*n + j``), which fixes the reported order of tied
    optima.  For the l1 norm "tied" means the objective brackets overlap
    the best one; for sup ties are exact.
    """
    g = problem.geometry
    m, n = g.m, g.n
    if m * n > 16:
        raise TooLarge(f"{m}x{n} exceeds the exhaustive guard of 16 cells")
    scorer = _SupScore(problem.target, g) if problem.norm == NORM_SUP else None
    full_box = problem.feasibility == FEAS_FULL

    best_mask = None
    best_val = math.inf
    scored: list[tuple[int, float]] = []  # mask, bracket lower end
    trace = []
    scanned = 0
    for mask in _feasible_masks(m, n, full_box):
        scanned += 1
        if scorer is not None:
            cells = _mask_to_cells(mask, m, n)
            up = scorer(cells.sum(axis=1).astype(np.int64), cells.sum(axis=0).astype(np.int64))
            lo = up
        else:
            L = GridSet(g, _mask_to_cells(mask, m, n))
            br = l1_norm_diff(conic_of(L), problem.target, g.box, refine=problem.l1_refine)
            lo, up = br.lower, br.upper
        scored.append((mask, lo))
        if up < best_val:
            best_val = up
            best_mask = mask
            trace.append((scanned, up))
    optima = [mask for mask, lo in scored if lo <= best_val]
    best = GridSet(g, _mask_to_cells(best_mask, m, n))
    assert _feasible(best, problem)
    return ReconstructionResult(
        best=best,
        objective=objective(best, problem),
        trace=trace,
        thin_contact=thin_contact(best),
        steps=scanned,
        optima=[GridSet(g, _mask_to_cells(mk, m, n)) for mk in optima],
    )


def _mask_counts(mask: int, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    cells = _mask_to_cells(mask, m, n)
    return cells.sum(axis=1).astype(np.int64), cells.sum(axis=0).astype(np.int64)


def local_search(problem: ReconstructionProblem, params: AnnealingParams) -> ReconstructionResult:
    """Simulated annealing over feasible sets with single-cell toggles.

    Proposals toggling a uniformly random cell are rejected outright when
    the toggled set leaves the feasible family; otherwise improving moves
    are always taken and worsening ones with the Metropolis probability at
    the geometrically cooled temperature.  One generator stream per chain
    (``restarts + 1`` chains), all derived from the seed, so runs are
    reproducible.  Stops early once the best objective reaches exact zero,
    which no feasible set can beat.
    """
    g = problem.geometry
    m, n = g.m, g.n
    full_box = problem.feasibility == FEAS_FULL
    scorer = _SupScore(problem.target, g) if problem.norm == NORM_SUP else None

    def score(mask, cols, rows):
        if scorer is not None:
            return scorer(cols, rows)
        return objective(GridSet(g, _mask_to_cells(mask, m, n)), problem)

    best_mask = None
    best_val = math.inf
    trace = []
    total_steps = 0
    chains = params.restarts + 1
    for chain in range(chains):
        rng = np.random.default_rng([params.seed, chain])
        start = _sample_with_rng(g, rng, full_box)
        mask = 0
        for i, j in np.argwhere(start.cells):
            mask |= 1 << (int(i) * n + int(j))
        cols, rows = _mask_counts(mask, m, n)
        cur = score(mask, cols, rows)
        if cur < best_val:
            best_val = cur
            best_mask = mask
            trace.append((total_steps, cur))
        if best_val == 0.0:
            break

        toggles = rng.integers(0, m * n, size=params.steps)
        coins = rng.random(params.steps)
        T = params.initial_temperature
        for s in range(params.steps):
            total_steps += 1
            bit = int(toggles[s])
            cand = mask ^ (1 << bit)
            i, j = divmod(bit, n)
            ok = (
                cand != 0
                and _mask_hv_convex(cand, m, n)
                and _mask_connected(cand, m, n)
                and (not full_box or _mask_full_box(cand, m, n))
            )
            if ok:
                delta = 1 if (mask >> bit) & 1 == 0 else -1
                cols[i] += delta
                rows[j] += delta
                val = score(cand, cols, rows)
                accept = val <= cur or (
                    T > 0.0 and coins[s] < math.exp((cur - val) / T)
                )
                if accept:
                    mask, cur = cand, val
                    if cur < best_val:
                        best_val = cur
                        best_mask = mask
                        trace.append((total_steps, cur))
                        if best_val == 0.0:
                            break
                else:
                    cols[i] -= delta
                    rows[j] -= delta
            T *= params.cooling
        if best_val == 0.0:
            break

    best = GridSet(g, _mask_to_cells(best_mask, m, n))
    assert _feasible(best, problem)
    return ReconstructionResult(
        best=best,
        objective=objective(best, problem),
        trace=trace,
        thin_contact=thin_contact(best),
        steps=total_steps,
    )


# ---------------------------------------------------------------------------
# problem files


def _require(spec: dict, key: str):
    if key not in spec:
        raise FormatError(f"problem spec missing {key!r}")
    return spec[key]


def load_problem(path: str) -> tuple[ReconstructionProblem, AnnealingParams, str]:
    """Read a problem JSON file; relative paths resolve against the cwd.

    Layout: ``target`` is either ``{"hvset": FILE}`` or ``{"xray_csv":
    {"vertical": FILE, "horizontal": FILE}}``; plus ``box`` [a,b,c,d],
    ``dims`` [m,n], optional ``norm``/``l1_refine``/``feasibility``,
    ``budget`` (annealing fields), ``seed`` and ``out_prefix``.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed problem JSON: {exc}") from None

    box = Box(*(float(v) for v in _require(spec, "box")))
    m, n = (int(v) for v in _require(spec, "dims"))
    geometry = GridGeometry(box, m, n)

    tgt = _require(spec, "target")
    if "hvset" in tgt:
        with open(tgt["hvset"], encoding="utf-8") as fh:
            gen = parse_hvset(fh.read())
        target = conic_of(gen)
    elif "xray_csv" in tgt:
        paths = tgt["xray_csv"]
        vpath = _require(paths, "vertical")
        hpath = _require(paths, "horizontal")
        with open(vpath, encoding="utf-8") as fh:
            yprof = parse_profile_csv(fh.read(), "vertical")
        with open(hpath, encoding="utf-8") as fh:
            xprof = parse_profile_csv(fh.read(), "horizontal")
        target = ConicEvaluator(yprof, xprof)
    else:
        raise FormatError("target must provide 'hvset' or 'xray_csv'")

    problem = ReconstructionProblem(
        target=target,
        geometry=geometry,
        norm=spec.get("norm", NORM_SUP),
        feasibility=spec.get("feasibility", FEAS_HV),
        l1_refine=int(spec.get("l1_refine", 4)),
    )
    budget = dict(spec.get("budget", {}))
    if "initial_temperature" in budget:
        budget["initial_temperature"] = float(budget["initial_temperature"])
    if "cooling" in budget:
        budget["cooling"] = float(budget["cooling"])
    for key in ("steps", "restarts"):
        if key in budget:
            budget[key] = int(budget[key])
    try:
        params = AnnealingParams(seed=int(spec.get("seed", 0)), **budget)
    except TypeError as exc:
        raise FormatError(f"bad budget field: {exc}") from None
    return problem, params, str(spec.get("out_prefix", "reconstruction"))


def write_result(result: ReconstructionResult, out_prefix: str) -> tuple[str, str]:
    """Write ``<prefix>.hvset`` (best set) and ``<prefix>.json`` (summary)."""
    hvset_path = out_prefix + ".hvset"
    json_path = out_prefix + ".json"
    with open(hvset_path, "w", encoding="utf-8") as fh:
        fh.write(format_hvset(result.best))
    summary = {
        "objective": result.objective,
        "steps": result.steps,
        "thin_contact": result.thin_contact,
    }
    if result.optima is not None:
        summary["optima"] = len(result.optima)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True)
        fh.write("\n")
    return hvset_path, json_path
