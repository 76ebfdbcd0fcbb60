"""Maps from optimizer coordinates to knot sequences, plus occupancy repair.

A candidate knot placement is a point ``z`` in the unit box.  Two maps turn
it into a full knot sequence: the plain map sorts ``z``, the
centered-monotonic map treats each coordinate as the relative position of a
knot between its neighbors, which is degeneracy-free and needs no sort.
Either way the boundary knots are replicated to full multiplicity.

Interior knots that crowd into a single predictor interval are then either
merged into repeated knots (allowing jump discontinuities) or healed apart
so that no interval holds more than one knot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bspline import KnotVector

_CENTER_EPS = 1e-9


class UnhealableError(ValueError):
    """Interior knots cannot be dispersed to one per predictor interval."""


@dataclass(frozen=True)
class KnotMapOptions:
    map_kind: str = "plain"  # plain | centered
    end_knots: str = "fixed"  # fixed | variable
    adjust: str = "merge"  # merge | heal
    order: int = 4

    def __post_init__(self):
        if self.map_kind not in ("plain", "centered"):
            raise ValueError(f"unknown map kind {self.map_kind!r}")
        if self.end_knots not in ("fixed", "variable"):
            raise ValueError(f"unknown end-knot mode {self.end_knots!r}")
        if self.adjust not in ("merge", "heal"):
            raise ValueError(f"unknown adjust mode {self.adjust!r}")
        if self.order < 1:
            raise ValueError("order must be at least 1")

    def dimension(self, num_knots: int) -> int:
        """Search-space dimension for a model with ``num_knots`` distinct knots."""
        if num_knots < 2:
            raise ValueError("need at least two knots")
        return num_knots - 2 if self.end_knots == "fixed" else num_knots


def _replicate_ends(breaks: np.ndarray, order: int) -> np.ndarray:
    k = order
    return np.concatenate(
        [np.full(k - 1, breaks[0]), breaks, np.full(k - 1, breaks[-1])]
    )


def _plain_values(z: np.ndarray, options: KnotMapOptions) -> np.ndarray:
    s = np.sort(z)
    if options.end_knots == "fixed":
        s = np.concatenate([[0.0], s, [1.0]])
    return _replicate_ends(s, options.order)


def _plain_values_batch(z: np.ndarray, options: KnotMapOptions) -> np.ndarray:
    """Vectorized plain map for a stack of coordinate rows."""
    s = np.sort(z, axis=1)
    n = s.shape[0]
    if options.end_knots == "fixed":
        s = np.concatenate([np.zeros((n, 1)), s, np.ones((n, 1))], axis=1)
    k = options.order
    left = np.repeat(s[:, :1], k - 1, axis=1)
    right = np.repeat(s[:, -1:], k - 1, axis=1)
    return np.concatenate([left, s, right], axis=1)


def _centered_breaks(z: np.ndarray, options: KnotMapOptions) -> np.ndarray:
    """Invert the relative-position relations to distinct break points.

    Interior coordinates satisfy ``t_i = (1 - z_i) t_{i-1} + z_i t_{i+1}``,
    a tridiagonal system solved directly; interior coordinates exactly 0 or
    1 are clamped away from the boundary to keep it nonsingular.  The
    solution is monotone for interior coordinates in (0, 1).
    """
    if options.end_knots == "fixed":
        t0, t_end = 0.0, 1.0
        zi = z
    else:
        if z.size < 2:
            raise ValueError("need at least two coordinates with variable ends")
        t0 = float(z[0])
        t_end = t0 + float(z[-1]) * (1.0 - t0)
        zi = z[1:-1]
    n = zi.size
    if n == 0:
        return np.array([t0, t_end])
    zi = np.clip(zi, _CENTER_EPS, 1.0 - _CENTER_EPS)
    ab = np.zeros((3, n))
    ab[0, 1:] = -zi[:-1]  # superdiagonal
    ab[1, :] = 1.0
    ab[2, :-1] = -(1.0 - zi[1:])  # subdiagonal
    rhs = np.zeros(n)
    rhs[0] += (1.0 - zi[0]) * t0
    rhs[-1] += zi[-1] * t_end
    interior = scipy.linalg.solve_banded((1, 1), ab, rhs)
    return np.concatenate([[t0], interior, [t_end]])


def _map_values(z: np.ndarray, options: KnotMapOptions) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if options.map_kind == "plain":
        return _plain_values(z, options)
    return _replicate_ends(_centered_breaks(z, options), options.order)


def plain_map(z, options: KnotMapOptions) -> KnotVector:
    """Sort the coordinates and replicate the end knots.

    With fixed end knots ``z`` supplies only the interior break points and
    the boundaries are pinned at 0 and 1.  Any permutation of ``z`` yields
    the same knot vector.
    """
    z = np.asarray(z, dtype=float)
    num_knots = z.size + (2 if options.end_knots == "fixed" else 0)
    if num_knots < 2:
        raise ValueError("need at least two knots")
    if np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("coordinates must lie in [0, 1]")
    return KnotVector(values=_plain_values(z, options), order=options.order)


def centered_monotonic_map(z, options: KnotMapOptions) -> KnotVector:
    """Degeneracy-free map: each coordinate fixes a knot's relative position.

    Coordinate 0.5 everywhere corresponds to uniformly spaced interior
    knots.  The map is injective on strictly interior coordinates.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("coordinates must lie in [0, 1]")
    breaks = _centered_breaks(z, options)
    return KnotVector(values=_replicate_ends(breaks, options.order), order=options.order)


def _interval_bins(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Open predictor interval holding each value; -1 when on a grid point
    or outside the grid range."""
    idx = np.searchsorted(grid, values, side="left")
    bins = idx - 1
    safe = np.minimum(idx, grid.size - 1)
    on_point = grid[safe] == values
    outside = (values < grid[0]) | (values > grid[-1])
    return np.where(on_point | outside, -1, bins)


def _merge_bin(vals: np.ndarray, order: int) -> np.ndarray:
    """Equalize values to the rightmost, saturating multiplicity at the
    spline order, then to the next remaining rightmost, and so on."""
    out = vals.copy()
    hi = vals.size - 1
    while hi >= 0:
        lo = max(0, hi - order + 1)
        out[lo : hi + 1] = vals[hi]
        hi = lo - 1
    return out


def _disperse_units(
    units: list[list],
    grid: np.ndarray,
    left_end: float,
    right_end: float,
    max_sweeps: int,
) -> list[list]:
    """Move whole units (knot values with multiplicity) until every open
    predictor interval holds at most one.

    Each sweep repairs the leftmost overcrowded interval: the boundary unit
    with the larger gap to its outward neighbor moves to the midpoint of
    the nearest empty interval in that direction; if that direction has no
    room the other boundary unit tries the opposite way.
    """
    eligible = np.flatnonzero((grid[:-1] >= left_end) & (grid[1:] <= right_end))
    if len(units) > eligible.size:
        raise UnhealableError(
            f"{len(units)} interior knots cannot spread over "
            f"{eligible.size} predictor intervals"
        )
    eligible_set = set(int(j) for j in eligible)

    def grouping():
        units.sort(key=lambda u: u[0])
        vals = np.array([u[0] for u in units])
        bins = _interval_bins(vals, grid)
        occ: dict[int, list[int]] = {}
        for i, bn in enumerate(bins):
            if bn >= 0:
                occ.setdefault(int(bn), []).append(i)
        return occ

    def nearest_empty(start: int, direction: int, occ) -> int | None:
        j = start + direction
        while 0 <= j < grid.size - 1:
            if j in eligible_set and not occ.get(j):
                return j
            j += direction
        return None

    for _ in range(max_sweeps):
        occ = grouping()
        crowded = sorted(j for j, members in occ.items() if len(members) > 1)
        if not crowded:
            return units
        j = crowded[0]
        members = occ[j]
        i_left, i_right = members[0], members[-1]
        v_left, v_right = units[i_left][0], units[i_right][0]
        out_left = units[i_left - 1][0] if i_left > 0 else left_end
        out_right = units[i_right + 1][0] if i_right + 1 < len(units) else right_end
        if v_left - out_left > out_right - v_right:
            plan = [(i_left, -1), (i_right, +1)]
        else:
            plan = [(i_right, +1), (i_left, -1)]
        moved = False
        for unit_idx, direction in plan:
            target = nearest_empty(j, direction, occ)
            if target is not None:
                units[unit_idx][0] = 0.5 * (grid[target] + grid[target + 1])
                moved = True
                break
        if not moved:
            raise UnhealableError("no empty predictor interval available")
    raise UnhealableError("knot dispersal did not converge")


def _interior_parts(values: np.ndarray, order: int):
    k = order
    return values[0], values[-1], values[k : values.size - k]


def _bin_runs(bins: np.ndarray):
    """(start, stop, bin) runs of equal consecutive bins; interior knots are
    sorted, so knots sharing an open interval are always adjacent."""
    runs = []
    start = 0
    for t in range(1, bins.size + 1):
        if t == bins.size or bins[t] != bins[start]:
            runs.append((start, t, int(bins[start])))
            start = t
    return runs


def _merge_values(
    values: np.ndarray, grid: np.ndarray, order: int, bins: np.ndarray | None = None
) -> np.ndarray:
    left_end, right_end, interior = _interior_parts(values, order)
    if interior.size < 2:
        return values
    if bins is None:
        bins = _interval_bins(interior, grid)
    merged = interior.copy()
    changed = False
    leftover_groups = False
    for start, stop, bn in _bin_runs(bins):
        if bn < 0 or stop - start < 2:
            continue
        merged[start:stop] = _merge_bin(interior[start:stop], order)
        changed = True
        if stop - start > order:
            leftover_groups = True
    if not changed:
        return values
    if leftover_groups:
        units: list[list] = []
        for v in merged:
            if units and units[-1][0] == v:
                units[-1][1] += 1
            else:
                units.append([float(v), 1])
        units = _disperse_units(
            units, grid, left_end, right_end, max_sweeps=10 * max(interior.size, 1)
        )
        merged = np.repeat([u[0] for u in units], [u[1] for u in units])
    out = values.copy()
    out[order : values.size - order] = np.sort(merged)
    return out


def _heal_values(
    values: np.ndarray, grid: np.ndarray, order: int, bins: np.ndarray | None = None
) -> np.ndarray:
    left_end, right_end, interior = _interior_parts(values, order)
    if interior.size < 2:
        return values
    if bins is None:
        bins = _interval_bins(interior, grid)
    if all(bn < 0 or stop - start < 2 for start, stop, bn in _bin_runs(bins)):
        return values
    units = [[float(v), 1] for v in interior]
    units = _disperse_units(
        units, grid, left_end, right_end, max_sweeps=10 * max(interior.size, 1)
    )
    out = values.copy()
    out[order : values.size - order] = np.sort([u[0] for u in units])
    return out


def merge_knots(knots: KnotVector, grid) -> KnotVector:
    """Coalesce interior knots sharing an open predictor interval into
    repeated knots (multiplicity capped at the order); leftover groups in
    the same interval are dispersed.  Knot count is preserved."""
    grid = np.asarray(grid, dtype=float)
    return KnotVector(
        values=_merge_values(knots.values, grid, knots.order), order=knots.order
    )


def heal_knots(knots: KnotVector, grid) -> KnotVector:
    """Disperse interior knots so no open predictor interval holds more
    than one.  Knot count is preserved and repeated interior knots are
    split apart."""
    grid = np.asarray(grid, dtype=float)
    return KnotVector(
        values=_heal_values(knots.values, grid, knots.order), order=knots.order
    )


def _adjust_values(
    values: np.ndarray,
    grid: np.ndarray,
    options: KnotMapOptions,
    bins: np.ndarray | None = None,
) -> np.ndarray:
    if options.adjust == "merge":
        return _merge_values(values, grid, options.order, bins)
    return _heal_values(values, grid, options.order, bins)


def map_to_knots(z, options: KnotMapOptions) -> KnotVector:
    """Apply the configured coordinate map."""
    if options.map_kind == "plain":
        return plain_map(z, options)
    return centered_monotonic_map(z, options)


def adjust_knots(knots: KnotVector, grid, options: KnotMapOptions) -> KnotVector:
    """Apply the configured occupancy repair."""
    if options.adjust == "merge":
        return merge_knots(knots, grid)
    return heal_knots(knots, grid)
