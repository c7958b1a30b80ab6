"""Grid-cell models of compact planar sets.

A set is a finite union of closed axis-aligned cells taken from a uniform
partition of a reference rectangle.  All semantics are those of the closed
point set: a section along a shared grid line collects the runs of both
adjacent cell rows, and two cells that meet in a single corner point are
considered connected.

Conventions used throughout:

* cell ``(i, j)`` is the rectangle ``[x_i, x_{i+1}] x [y_j, y_{j+1}]`` with
  ``x_i = a + i * cell_w`` and ``y_j = c + j * cell_h``;
* index ``i`` runs along the x axis (columns), ``j`` along the y axis (rows);
* boolean cell masks are numpy arrays of shape ``(m, n)`` indexed ``[i, j]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    CoverageError,
    EmptySet,
    FormatError,
    GeometryMismatch,
    InvalidParameter,
    NonConvexColumn,
    TooLarge,
)

__all__ = [
    "Box",
    "GridGeometry",
    "GridSet",
    "ColumnProfile",
    "projections",
    "in_level_set",
    "in_sublevel_set",
    "is_hv_convex",
    "is_connected",
    "has_contiguous_runs",
    "thin_contact",
    "subset_of",
    "bound_functions",
    "combine",
    "dilate",
    "min_cover",
    "sample_hv_convex",
    "enumerate_hv_connected",
    "parse_hvset",
    "format_hvset",
]


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned rectangle ``[a, b] x [c, d]`` with positive sides."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a < self.b and self.c < self.d):
            raise InvalidParameter(f"degenerate box {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def height(self) -> float:
        return self.d - self.c

    def perimeter(self) -> float:
        return 2.0 * (self.width + self.height)

    def contains_box(self, other: "Box") -> bool:
        return (
            self.a <= other.a
            and other.b <= self.b
            and self.c <= other.c
            and other.d <= self.d
        )

    def contains_point(self, x: float, y: float) -> bool:
        return self.a <= x <= self.b and self.c <= y <= self.d


@dataclass(frozen=True)
class GridGeometry:
    """Uniform ``m x n`` cell partition of a reference box."""

    box: Box
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidParameter(f"grid dims must be positive, got {self.m}x{self.n}")

    @property
    def cell_w(self) -> float:
        return self.box.width / self.m

    @property
    def cell_h(self) -> float:
        return self.box.height / self.n

    def xline(self, i: int) -> float:
        return self.box.a + i * self.cell_w

    def yline(self, j: int) -> float:
        return self.box.c + j * self.cell_h

    def xlines(self) -> np.ndarray:
        return self.box.a + np.arange(self.m + 1) * self.cell_w

    def ylines(self) -> np.ndarray:
        return self.box.c + np.arange(self.n + 1) * self.cell_h

    def cell_rect(self, i: int, j: int) -> tuple[float, float, float, float]:
        return (self.xline(i), self.xline(i + 1), self.yline(j), self.yline(j + 1))

    def refined(self, k: int) -> "GridGeometry":
        if k < 1:
            raise InvalidParameter(f"refinement factor must be >= 1, got {k}")
        return GridGeometry(self.box, self.m * k, self.n * k)


class GridSet:
    """Immutable union of closed grid cells on a fixed geometry.

    The cell mask may be empty; operations that require at least one
    occupied cell raise :class:`EmptySet`.  Instances hash and compare by
    geometry plus exact cell mask.
    """

    __slots__ = ("geometry", "cells")

    def __init__(self, geometry: GridGeometry, cells: np.ndarray):
        arr = np.array(cells, dtype=bool, copy=True)
        if arr.shape != (geometry.m, geometry.n):
            raise InvalidParameter(
                f"cell mask shape {arr.shape} does not match "
                f"{geometry.m}x{geometry.n} grid"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "geometry", geometry)
        object.__setattr__(self, "cells", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GridSet is immutable")

    @classmethod
    def from_cells(cls, geometry: GridGeometry, pairs) -> "GridSet":
        arr = np.zeros((geometry.m, geometry.n), dtype=bool)
        for i, j in pairs:
            if not (0 <= i < geometry.m and 0 <= j < geometry.n):
                raise InvalidParameter(f"cell ({i}, {j}) outside grid")
            arr[i, j] = True
        return cls(geometry, arr)

    @classmethod
    def full(cls, geometry: GridGeometry) -> "GridSet":
        return cls(geometry, np.ones((geometry.m, geometry.n), dtype=bool))

    @property
    def is_empty(self) -> bool:
        return not self.cells.any()

    @property
    def count(self) -> int:
        return int(self.cells.sum())

    def area(self) -> float:
        return self.count * self.geometry.cell_w * self.geometry.cell_h

    def col_counts(self) -> np.ndarray:
        """Occupied cells per column, as integers."""
        return self.cells.sum(axis=1).astype(np.int64)

    def row_counts(self) -> np.ndarray:
        return self.cells.sum(axis=0).astype(np.int64)

    def occupied(self) -> np.ndarray:
        """``(k, 2)`` array of occupied ``(i, j)`` indices in scan order."""
        return np.argwhere(self.cells)

    def rects(self) -> np.ndarray:
        """``(k, 4)`` array of occupied cell rectangles ``[x0, x1, y0, y1]``."""
        if self.is_empty:
            raise EmptySet("no occupied cells")
        g = self.geometry
        idx = self.occupied()
        x0 = g.box.a + idx[:, 0] * g.cell_w
        y0 = g.box.c + idx[:, 1] * g.cell_h
        return np.column_stack([x0, x0 + g.cell_w, y0, y0 + g.cell_h])

    def bounding_box(self) -> Box:
        """Tight axis-parallel bounding box of the occupied cells."""
        if self.is_empty:
            raise EmptySet("empty set has no bounding box")
        cols = np.flatnonzero(self.cells.any(axis=1))
        rows = np.flatnonzero(self.cells.any(axis=0))
        g = self.geometry
        return Box(
            g.xline(int(cols[0])),
            g.xline(int(cols[-1]) + 1),
            g.yline(int(rows[0])),
            g.yline(int(rows[-1]) + 1),
        )

    def refined(self, k: int) -> "GridSet":
        """The same point set represented on the ``k``-fold refined grid."""
        mask = np.repeat(np.repeat(self.cells, k, axis=0), k, axis=1)
        return GridSet(self.geometry.refined(k), mask)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSet):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash((self.geometry, self.cells.tobytes()))

    def __repr__(self) -> str:
        g = self.geometry
        return f"GridSet({g.m}x{g.n} on {g.box.as_tuple()}, {self.count} cells)"


@dataclass(frozen=True)
class ColumnProfile:
    """Lower and upper bound values per occupied column.

    ``lower[k]``/``upper[k]`` are the y coordinates of the bottom and top of
    the contiguous cell run in column ``columns[k]``; ``row_lo``/``row_hi``
    are the matching integer bounds (``row_hi`` exclusive).
    """

    geometry: GridGeometry
    columns: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray

    def to_grid_set(self) -> GridSet:
        arr = np.zeros((self.geometry.m, self.geometry.n), dtype=bool)
        for i, lo, hi in zip(self.columns, self.row_lo, self.row_hi):
            arr[i, lo:hi] = True
        return GridSet(self.geometry, arr)


# ---------------------------------------------------------------------------
# projections and membership predicates


def _merge_runs(flags: np.ndarray, lines: np.ndarray) -> list[tuple[float, float]]:
    # maximal runs of True in flags -> closed coordinate intervals
    out = []
    i = 0
    k = len(flags)
    while i < k:
        if flags[i]:
            j = i
            while j + 1 < k and flags[j + 1]:
                j += 1
            out.append((float(lines[i]), float(lines[j + 1])))
            i = j + 1
        i += 1
    return out


def projections(L: GridSet) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Projections onto the axes as minimal lists of disjoint closed intervals."""
    if L.is_empty:
        raise EmptySet("empty set has no projections")
    g = L.geometry
    return (
        _merge_runs(L.cells.any(axis=1), g.xlines()),
        _merge_runs(L.cells.any(axis=0), g.ylines()),
    )


def in_level_set(L: GridSet, box: Box) -> bool:
    """True when both projections of ``L`` equal the full sides of ``box``."""
    pr1, pr2 = projections(L)
    return pr1 == [(box.a, box.b)] and pr2 == [(box.c, box.d)]


def in_sublevel_set(L: GridSet, box: Box) -> bool:
    """True when ``L`` (hence the product of its projections) lies inside ``box``."""
    if L.is_empty:
        raise EmptySet("empty set has no projections")
    return box.contains_box(L.bounding_box())


def _axis_sections_ok(lines: np.ndarray) -> bool:
    # lines: (nlines, length) booleans; every section along a family of
    # parallel lines must be one run, and runs on adjacent non-empty lines
    # must meet in the closed sense (index gap of at most one grid line).
    prev_run = None
    prev_nonempty = False
    for bits in lines:
        idx = np.flatnonzero(bits)
        if idx.size == 0:
            prev_nonempty = False
            continue
        lo, hi = int(idx[0]), int(idx[-1])
        if hi - lo + 1 != idx.size:
            return False
        if prev_nonempty:
            plo, phi = prev_run
            if lo > phi + 1 or plo > hi + 1:
                return False
        prev_run = (lo, hi)
        prev_nonempty = True
    return True


def is_hv_convex(L: GridSet) -> bool:
    """Every horizontal and vertical section of the closed union is convex.

    Equivalent cell-level conditions: each row and each column of occupied
    cells is one contiguous run, and the closed coordinate intervals of runs
    in adjacent non-empty rows (and columns) intersect, touching included.
    """
    if L.is_empty:
        raise EmptySet("hv-convexity is about non-empty sets")
    return _axis_sections_ok(L.cells.T) and _axis_sections_ok(L.cells)


def has_contiguous_runs(L: GridSet) -> bool:
    """Weaker predicate: every row and column is a single run (no gap)."""
    if L.is_empty:
        raise EmptySet("empty set")
    for bits in L.cells:
        idx = np.flatnonzero(bits)
        if idx.size and int(idx[-1]) - int(idx[0]) + 1 != idx.size:
            return False
    for bits in L.cells.T:
        idx = np.flatnonzero(bits)
        if idx.size and int(idx[-1]) - int(idx[0]) + 1 != idx.size:
            return False
    return True


def is_connected(L: GridSet) -> bool:
    """Connectivity of the closed cell union.

    Two cells are neighbours when their closed rectangles intersect, which
    on the grid means they share an edge or a corner.
    """
    if L.is_empty:
        raise EmptySet("connectivity is about non-empty sets")
    cells = L.cells
    m, n = cells.shape
    start = tuple(np.argwhere(cells)[0])
    seen = {start}
    stack = [start]
    while stack:
        i, j = stack.pop()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                ii, jj = i + di, j + dj
                if 0 <= ii < m and 0 <= jj < n and cells[ii, jj]:
                    if (ii, jj) not in seen:
                        seen.add((ii, jj))
                        stack.append((ii, jj))
    return len(seen) == L.count


def thin_contact(L: GridSet) -> bool:
    """True when some pair of occupied cells meets only in a corner point.

    Detected locally: a 2x2 block holding one of the two diagonal patterns
    with both off-diagonal cells free.  For hv-convex sets this is exactly
    the situation where connectivity passes through a single point.
    """
    c = L.cells
    if c.shape[0] < 2 or c.shape[1] < 2:
        return False
    a = c[:-1, :-1]
    b = c[1:, 1:]
    p = c[1:, :-1]
    q = c[:-1, 1:]
    diag = a & b & ~p & ~q
    anti = p & q & ~a & ~b
    return bool(diag.any() or anti.any())


def subset_of(inner: GridSet, outer: GridSet) -> bool:
    """Exact containment of closed cell unions, geometries may differ."""
    if inner.is_empty:
        return True
    if outer.is_empty:
        return False
    if inner.geometry == outer.geometry:
        return not (inner.cells & ~outer.cells).any()
    if not outer.geometry.box.contains_box(inner.bounding_box()):
        return False
    xov = _overlap_matrix(inner.geometry.xlines(), outer.geometry.xlines())
    yov = _overlap_matrix(inner.geometry.ylines(), outer.geometry.ylines())
    # a cell of `inner` is covered iff every outer cell overlapping it with
    # positive area is occupied
    holes = xov @ (~outer.cells).astype(np.int64) @ yov.T
    return not (inner.cells & (holes > 0)).any()


def _overlap_matrix(lines_a: np.ndarray, lines_b: np.ndarray) -> np.ndarray:
    # (len_a-1, len_b-1) booleans: cells overlap with positive length
    a_lo = lines_a[:-1, None]
    a_hi = lines_a[1:, None]
    b_lo = lines_b[None, :-1]
    b_hi = lines_b[None, 1:]
    return ((a_lo < b_hi) & (b_lo < a_hi)).astype(np.int64)


# ---------------------------------------------------------------------------
# bound functions


def bound_functions(L: GridSet) -> ColumnProfile:
    """Bottom and top bound values of every occupied column.

    Raises :class:`NonConvexColumn` when a column has a gap, because a
    single pair of bounds cannot describe it.
    """
    if L.is_empty:
        raise EmptySet("empty set has no bound functions")
    g = L.geometry
    cols, los, his = [], [], []
    for i in range(g.m):
        idx = np.flatnonzero(L.cells[i])
        if idx.size == 0:
            continue
        lo, hi = int(idx[0]), int(idx[-1]) + 1
        if hi - lo != idx.size:
            raise NonConvexColumn(i)
        cols.append(i)
        los.append(lo)
        his.append(hi)
    cols = np.array(cols, dtype=np.int64)
    row_lo = np.array(los, dtype=np.int64)
    row_hi = np.array(his, dtype=np.int64)
    return ColumnProfile(
        geometry=g,
        columns=cols,
        lower=g.box.c + row_lo * g.cell_h,
        upper=g.box.c + row_hi * g.cell_h,
        row_lo=row_lo,
        row_hi=row_hi,
    )


# ---------------------------------------------------------------------------
# convex combination


def _as_fraction(t) -> Fraction:
    if isinstance(t, Fraction):
        f = t
    elif isinstance(t, tuple) and len(t) == 2:
        f = Fraction(int(t[0]), int(t[1]))
    else:
        f = Fraction(t)
    if not 0 <= f <= 1:
        raise InvalidParameter(f"combination weight {t} outside [0, 1]")
    if f.denominator > 1024:
        raise InvalidParameter(
            f"weight denominator {f.denominator} too large; pass an exact "
            "rational such as Fraction(1, 3)"
        )
    return f


def combine(L1: GridSet, L2: GridSet, t) -> GridSet:
    """Pointwise convex combination ``t * L1 + (1 - t) * L2`` (Minkowski).

    ``t`` must be rational, ``p/q`` in lowest terms; the result lives on the
    shared geometry refined by factor ``q`` per axis and is exact: every
    combination of an occupied cell pair is a block of ``q x q`` refined
    cells whose corners land on the refined lattice.
    """
    if L1.geometry != L2.geometry:
        raise GeometryMismatch("operands live on different grids")
    if L1.is_empty or L2.is_empty:
        raise EmptySet("convex combination needs two non-empty sets")
    t = _as_fraction(t)
    p, q = t.numerator, t.denominator
    geom = L1.geometry.refined(q)
    out = np.zeros((geom.m, geom.n), dtype=bool)
    idx1 = L1.occupied()
    idx2 = L2.occupied()
    starts = (p * idx1[:, None, :] + (q - p) * idx2[None, :, :]).reshape(-1, 2)
    si = starts[:, 0]
    sj = starts[:, 1]
    for di in range(q):
        for dj in range(q):
            out[si + di, sj + dj] = True
    return GridSet(geom, out)


# ---------------------------------------------------------------------------
# dilation


def _min_dist_to_rects(points: np.ndarray, rects: np.ndarray, chunk: int = 1 << 18) -> np.ndarray:
    """Exact Euclidean distance from each point to a union of closed rectangles."""
    out = np.empty(len(points))
    x0, x1, y0, y1 = rects[:, 0], rects[:, 1], rects[:, 2], rects[:, 3]
    step = max(1, chunk // max(1, len(rects)))
    for s in range(0, len(points), step):
        px = points[s : s + step, 0][:, None]
        py = points[s : s + step, 1][:, None]
        dx = np.maximum(np.maximum(x0[None, :] - px, px - x1[None, :]), 0.0)
        dy = np.maximum(np.maximum(y0[None, :] - py, py - y1[None, :]), 0.0)
        out[s : s + step] = np.hypot(dx, dy).min(axis=1)
    return out


def dilate(L: GridSet, eps: float, refine: int = 4) -> tuple[GridSet, GridSet]:
    """Inner and outer rasterizations of the closed ``eps``-neighbourhood.

    Cells of the ``refine``-fold finer grid (extended far enough beyond the
    box to hold the neighbourhood) are classified by the exact distance of
    their centre to ``L``: within ``eps - delta`` they lie fully inside the
    neighbourhood, within ``eps + delta`` they may touch it, where ``delta``
    is half the refined cell diagonal.  Consequently

        inner  is a subset of  the eps-neighbourhood  is a subset of  outer

    and the two areas bracket its measure.  ``inner`` may be empty.
    """
    if eps <= 0:
        raise InvalidParameter(f"dilation radius must be positive, got {eps}")
    if refine < 1 or int(refine) != refine:
        raise InvalidParameter(f"refine must be a positive integer, got {refine}")
    if L.is_empty:
        raise EmptySet("cannot dilate the empty set")
    g = L.geometry
    wr = g.cell_w / refine
    hr = g.cell_h / refine
    delta = 0.5 * math.hypot(wr, hr)
    kx = math.ceil((eps + delta) / wr) + 1
    ky = math.ceil((eps + delta) / hr) + 1
    mm = g.m * refine + 2 * kx
    nn = g.n * refine + 2 * ky
    out_geom = GridGeometry(
        Box(g.box.a - kx * wr, g.box.a - kx * wr + mm * wr,
            g.box.c - ky * hr, g.box.c - ky * hr + nn * hr),
        mm,
        nn,
    )
    cx = g.box.a + (np.arange(mm) - kx + 0.5) * wr
    cy = g.box.c + (np.arange(nn) - ky + 0.5) * hr
    pts = np.column_stack([np.repeat(cx, nn), np.tile(cy, mm)])
    dist = _min_dist_to_rects(pts, L.rects()).reshape(mm, nn)
    inner = GridSet(out_geom, dist <= eps - delta)
    outer = GridSet(out_geom, dist <= eps + delta)
    return inner, outer


# ---------------------------------------------------------------------------
# minimal covers


def min_cover(L: GridSet, coarse: GridGeometry) -> GridSet:
    """Union of the cells of ``coarse`` that overlap ``L`` with positive area.

    The positive-area convention keeps the cover minimal on aligned grids:
    re-covering a set on its own geometry returns the set itself, so cover
    sequences refine all the way down to the set they cover.
    """
    if L.is_empty:
        raise EmptySet("cannot cover the empty set")
    if not coarse.box.contains_box(L.bounding_box()):
        raise CoverageError(
            f"covering box {coarse.box.as_tuple()} does not contain the set"
        )
    xov = _overlap_matrix(coarse.xlines(), L.geometry.xlines())
    yov = _overlap_matrix(coarse.ylines(), L.geometry.ylines())
    hits = xov @ L.cells.astype(np.int64) @ yov.T
    return GridSet(coarse, hits > 0)


# ---------------------------------------------------------------------------
# seeded sampling of hv-convex connected sets


def sample_hv_convex(geometry: GridGeometry, seed, require_full_box: bool = False) -> GridSet:
    """Seeded pseudo-random hv-convex connected set on ``geometry``.

    Column tops form a unimodal profile, column bottoms an anti-unimodal
    one, and adjacent columns are clamped so that their closed runs always
    meet; that construction is exactly the class of hv-convex connected
    sets with contiguous column support.  With ``require_full_box`` every
    column is used, the top profile reaches the top of the box and the
    bottom profile its bottom, which forces full projections on both axes.
    """
    rng = np.random.default_rng(seed)
    return _sample_with_rng(geometry, rng, require_full_box)


def _sample_with_rng(geometry: GridGeometry, rng, require_full_box: bool) -> GridSet:
    m, n = geometry.m, geometry.n
    if require_full_box:
        i0, i1 = 0, m - 1
    else:
        i0 = int(rng.integers(0, m))
        i1 = int(rng.integers(i0, m))
    width = i1 - i0 + 1

    h = np.zeros(width, dtype=np.int64)
    peak = int(rng.integers(0, width))
    h[peak] = n if require_full_box else int(rng.integers(1, n + 1))
    for k in range(peak - 1, -1, -1):
        h[k] = int(rng.integers(1, h[k + 1] + 1))
    for k in range(peak + 1, width):
        h[k] = int(rng.integers(1, h[k - 1] + 1))

    # suffix/prefix minima of h keep the bottom profile completable
    suff = np.minimum.accumulate(h[::-1])[::-1]
    pref = np.minimum.accumulate(h)

    g = np.zeros(width, dtype=np.int64)
    valley = int(rng.integers(0, width))
    cap0 = int(min(pref[valley], suff[valley])) - 1
    g[valley] = 0 if require_full_box else int(rng.integers(0, cap0 + 1))
    for k in range(valley + 1, width):
        cap = int(min(suff[k] - 1, h[k - 1]))
        g[k] = int(rng.integers(g[k - 1], cap + 1))
    for k in range(valley - 1, -1, -1):
        cap = int(min(pref[k] - 1, h[k + 1]))
        g[k] = int(rng.integers(g[k + 1], cap + 1))

    cells = np.zeros((m, n), dtype=bool)
    for k in range(width):
        cells[i0 + k, g[k] : h[k]] = True
    return GridSet(geometry, cells)


# ---------------------------------------------------------------------------
# exhaustive enumeration (bit-level for speed)
#
# Cell (i, j) maps to bit i * n + j.  Masks are enumerated in ascending
# integer order, which is a fixed total order on cell indicators.


def _col_bits(mask: int, i: int, n: int) -> int:
    return (mask >> (i * n)) & ((1 << n) - 1)


def _is_run(x: int) -> bool:
    y = x >> ((x & -x).bit_length() - 1)
    return (y & (y + 1)) == 0


def _run_bounds(x: int) -> tuple[int, int]:
    return (x & -x).bit_length() - 1, x.bit_length() - 1


def _mask_hv_convex(mask: int, m: int, n: int) -> bool:
    prev = None
    for i in range(m):
        col = _col_bits(mask, i, n)
        if col == 0:
            prev = None
            continue
        if not _is_run(col):
            return False
        run = _run_bounds(col)
        if prev is not None and (run[0] > prev[1] + 1 or prev[0] > run[1] + 1):
            return False
        prev = run
    prev = None
    for j in range(n):
        row = 0
        for i in range(m):
            row |= ((mask >> (i * n + j)) & 1) << i
        if row == 0:
            prev = None
            continue
        if not _is_run(row):
            return False
        run = _run_bounds(row)
        if prev is not None and (run[0] > prev[1] + 1 or prev[0] > run[1] + 1):
            return False
        prev = run
    return True


def _mask_full_box(mask: int, m: int, n: int) -> bool:
    row_any = 0
    for i in range(m):
        col = _col_bits(mask, i, n)
        if col == 0:
            return False
        row_any |= col
    return row_any == (1 << n) - 1


def _mask_connected(mask: int, m: int, n: int) -> bool:
    if mask == 0:
        return False
    full = (1 << (m * n)) - 1
    top = 0
    bot = 0
    for i in range(m):
        top |= 1 << (i * n + n - 1)
        bot |= 1 << (i * n)
    reach = mask & -mask
    while True:
        up = (reach & ~top) << 1
        down = (reach & ~bot) >> 1
        band = reach | up | down
        grown = (band | (band << n) | (band >> n)) & full & mask
        if grown == reach:
            return grown == mask
        reach = grown


def _feasible_masks(m: int, n: int, require_full_box: bool):
    for mask in range(1, 1 << (m * n)):
        if not _mask_hv_convex(mask, m, n):
            continue
        if require_full_box and not _mask_full_box(mask, m, n):
            continue
        if _mask_connected(mask, m, n):
            yield mask


def _mask_to_cells(mask: int, m: int, n: int) -> np.ndarray:
    arr = np.zeros((m, n), dtype=bool)
    for i in range(m):
        col = _col_bits(mask, i, n)
        for j in range(n):
            if (col >> j) & 1:
                arr[i, j] = True
    return arr


def enumerate_hv_connected(geometry: GridGeometry, require_full_box: bool = False):
    """Yield every hv-convex connected set on ``geometry`` exactly once.

    Guarded to ``m * n <= 20``.  Deterministic ascending order of the cell
    indicator encoded with bit ``i * n + j`` per cell ``(i, j)``.
    """
    m, n = geometry.m, geometry.n
    if m * n > 20:
        raise TooLarge(f"{m}x{n} grid exceeds the enumeration guard of 20 cells")
    for mask in _feasible_masks(m, n, require_full_box):
        yield GridSet(geometry, _mask_to_cells(mask, m, n))


# ---------------------------------------------------------------------------
# HVSET v1 text format


def format_hvset(L: GridSet) -> str:
    """Serialize to the HVSET v1 text form (rows listed top y first)."""
    g = L.geometry
    lines = [
        "HVSET v1",
        f"box {g.box.a!r} {g.box.b!r} {g.box.c!r} {g.box.d!r}",
        f"dims {g.m} {g.n}",
    ]
    for j in range(g.n - 1, -1, -1):
        lines.append("".join("1" if L.cells[i, j] else "0" for i in range(g.m)))
    return "\n".join(lines) + "\n"


def parse_hvset(text: str) -> GridSet:
    """Parse the HVSET v1 text form; raises :class:`FormatError` with a line number."""
    if not text.endswith("\n"):
        raise FormatError("missing trailing newline")
    lines = text.split("\n")[:-1]
    if len(lines) < 3:
        raise FormatError("expected header, box and dims lines", line=len(lines) + 1)
    if lines[0] != "HVSET v1":
        raise FormatError(f"bad header {lines[0]!r}", line=1)
    parts = lines[1].split()
    if len(parts) != 5 or parts[0] != "box":
        raise FormatError("expected 'box a b c d'", line=2)
    try:
        a, b, c, d = (float(p) for p in parts[1:])
    except ValueError as exc:
        raise FormatError(f"bad box value: {exc}", line=2) from None
    parts = lines[2].split()
    if len(parts) != 3 or parts[0] != "dims":
        raise FormatError("expected 'dims m n'", line=3)
    try:
        m, n = int(parts[1]), int(parts[2])
    except ValueError as exc:
        raise FormatError(f"bad dims value: {exc}", line=3) from None
    try:
        geom = GridGeometry(Box(a, b, c, d), m, n)
    except InvalidParameter as exc:
        raise FormatError(str(exc), line=2) from None
    if len(lines) != 3 + n:
        raise FormatError(
            f"expected {n} data rows, found {len(lines) - 3}", line=len(lines) + 1
        )
    cells = np.zeros((m, n), dtype=bool)
    for k, row in enumerate(lines[3:]):
        lineno = 4 + k
        if len(row) != m:
            raise FormatError(f"expected {m} characters, found {len(row)}", line=lineno)
        j = n - 1 - k
        for i, ch in enumerate(row):
            if ch == "1":
                cells[i, j] = True
            elif ch != "0":
                raise FormatError(f"bad cell character {ch!r}", line=lineno)
    return GridSet(geom, cells)
