"""B-spline basis evaluation over knot sequences with repeated knots.

Order-``k`` B-splines are built by the Cox-de Boor recursion starting from
order-1 indicator functions on the knot intervals.  Knots may repeat up to
``k`` times, which produces basis functions with jump discontinuities in
value or derivatives.  A knot sequence of length ``P`` carries ``P - k``
basis functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class KnotVectorError(ValueError):
    """Malformed knot sequence."""


class BasisDomainError(ValueError):
    """Evaluation point outside the knot range."""


class IllPosedBasisError(ValueError):
    """Design matrix cannot support a least-squares fit."""


def _as_knot_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise KnotVectorError("knot values must be one-dimensional")
    return arr


def _check_multiplicity(values: np.ndarray, order: int) -> None:
    run = 1
    for i in range(1, len(values)):
        if values[i] == values[i - 1]:
            run += 1
            if run > order:
                raise KnotVectorError(
                    f"knot {values[i]!r} repeated {run} times, more than order {order}"
                )
        else:
            if values[i] < values[i - 1]:
                raise KnotVectorError("knot values must be nondecreasing")
            run = 1


@dataclass(frozen=True)
class KnotVector:
    """Nondecreasing knot sequence in [0, 1] with replicated end knots.

    The first and last ``order`` entries collapse onto the boundary break
    points, no value repeats more than ``order`` times, and the total length
    is at least ``2 * order``.
    """

    values: np.ndarray
    order: int

    def __post_init__(self):
        arr = _as_knot_array(self.values)
        object.__setattr__(self, "values", arr)
        k = self.order
        if k < 1:
            raise KnotVectorError("order must be at least 1")
        if arr.size < 2 * k:
            raise KnotVectorError(f"need at least {2 * k} knots, got {arr.size}")
        if arr[0] < 0.0 or arr[-1] > 1.0:
            raise KnotVectorError("knot values must lie in [0, 1]")
        _check_multiplicity(arr, k)
        if np.any(arr[:k] != arr[0]) or np.any(arr[-k:] != arr[-1]):
            raise KnotVectorError(
                f"first and last {k} knots must replicate the boundary values"
            )
        if arr[0] == arr[-1]:
            raise KnotVectorError("knot range is degenerate")

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def num_basis(self) -> int:
        return self.values.size - self.order

    def interior(self) -> np.ndarray:
        """Knots strictly between the replicated end blocks."""
        k = self.order
        return self.values[k:-k]


@dataclass(frozen=True)
class BasisMatrix:
    """Rows are B-spline basis functions sampled on a predictor grid."""

    entries: np.ndarray
    knots: KnotVector
    grid: np.ndarray
    end_bsplines_dropped: bool = field(default=False)

    @property
    def num_rows(self) -> int:
        return self.entries.shape[0]


def _order1_batch(tau: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Order-1 indicator values, shape (n, P-1, N).

    Intervals are half-open on the right except the last nonempty interval of
    each row, which is closed so that the partition of unity extends to the
    right end of the knot range.  Points outside the knot range get all
    zeros.
    """
    n, P = tau.shape
    lo = tau[:, :-1, None]
    hi = tau[:, 1:, None]
    b = ((lo <= x) & (x < hi)).astype(float)
    nonempty = tau[:, 1:] > tau[:, :-1]
    has_span = nonempty.any(axis=1)
    if has_span.any():
        jstar = P - 2 - np.argmax(nonempty[:, ::-1], axis=1)
        at_max = x[None, :] == tau[:, -1:]
        rows = np.arange(n)
        sel = b[rows, jstar, :]
        b[rows, jstar, :] = np.where(at_max & has_span[:, None], 1.0, sel)
    return b


def _basis_batch(tau: np.ndarray, x: np.ndarray, order: int) -> np.ndarray:
    """Cox-de Boor recursion for a batch of knot rows.

    Parameters
    ----------
    tau : (n, P) nondecreasing knot rows
    x : (N,) evaluation points
    order : spline order k >= 1

    Returns
    -------
    (n, P - k, N) array of basis values.  Degenerate 0/0 branches follow the
    zero convention: terms whose knot span collapses contribute nothing.
    """
    tau = np.atleast_2d(np.asarray(tau, dtype=float))
    x = np.asarray(x, dtype=float)
    n, P = tau.shape
    if P < order + 1:
        raise KnotVectorError(f"need at least {order + 1} knots for order {order}")
    b = _order1_batch(tau, x)
    for kp in range(2, order + 1):
        nb = P - kp
        span = tau[:, kp - 1 :] - tau[:, : P - kp + 1]  # (n, nb + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = (x[None, None, :] - tau[:, : P - kp + 1, None]) / span[:, :, None]
        ok = span[:, :, None] > 0
        w = np.where(ok, w, 0.0)
        gamma = np.where(ok[:, 1:, :], 1.0 - w[:, 1:, :], 0.0)
        b = w[:, :nb, :] * b[:, :nb, :] + gamma * b[:, 1:, :]
    return b


def _basis_batch_clamped(tau: np.ndarray, x: np.ndarray, order: int) -> np.ndarray:
    """Local-support evaluation for clamped knot rows (boundary multiplicity
    equal to the order, no multiplicity above it).

    At any point only ``order`` basis functions are nonzero; the triangular
    recursion computes exactly those, so the cost per point is quadratic in
    the order instead of linear in the knot count.  Agrees with
    :func:`_basis_batch` on its (clamped) domain; points outside the knot
    range get zero columns.
    """
    tau = np.atleast_2d(np.asarray(tau, dtype=float))
    x = np.asarray(x, dtype=float)
    n, P = tau.shape
    k = order
    nb = P - k
    N = x.size

    # interval index m with tau[m] <= x < tau[m+1], found by counting, for
    # every row at once, how many knots sit at or below each grid point
    first_ge = np.searchsorted(x, tau.ravel(), side="left").reshape(n, P)
    counts = np.zeros((n, N + 1))
    np.add.at(counts, (np.repeat(np.arange(n), P), first_ge.ravel()), 1.0)
    m = counts[:, :N].cumsum(axis=1).astype(np.int64) - 1
    at_top = x[None, :] == tau[:, -1:]
    if at_top.any():
        first_top = (tau < tau[:, -1:]).sum(axis=1) - 1
        m = np.where(at_top, first_top[:, None], m)
    valid = (x[None, :] >= tau[:, :1]) & (x[None, :] <= tau[:, -1:])
    m = np.clip(m, k - 1, P - k - 1)

    rows = np.arange(n)[:, None]
    left = [None] * k
    right = [None] * k
    for i in range(1, k):
        right[i] = tau[rows, m + i] - x[None, :]
        left[i] = x[None, :] - tau[rows, m + 1 - i]
    lanes = [np.where(valid, 1.0, 0.0)] + [None] * (k - 1)
    for j in range(1, k):
        saved = 0.0
        for i in range(1, j + 1):
            term = lanes[i - 1] / (right[i] + left[j + 1 - i])
            lanes[i - 1] = saved + right[i] * term
            saved = left[j + 1 - i] * term
        lanes[j] = saved

    out = np.zeros((n, nb, N))
    base = m - (k - 1)
    cols = np.arange(N)[None, :]
    for i in range(k):
        out[rows, base + i, cols] = lanes[i]
    return out


def evaluate_basis(knots, x: float) -> np.ndarray:
    """Evaluate all order-k basis functions at a single point.

    ``knots`` may be a :class:`KnotVector` or a ``(values, order)`` pair with
    a raw nondecreasing sequence (useful for unclamped test cases).  Returns
    a length ``P - k`` vector.  Raises :class:`BasisDomainError` when ``x``
    lies outside the knot range.
    """
    if isinstance(knots, KnotVector):
        values, order = knots.values, knots.order
    else:
        values, order = knots
        values = _as_knot_array(values)
        _check_multiplicity(values, order)
    if x < values[0] or x > values[-1]:
        raise BasisDomainError(
            f"x={x} outside knot range [{values[0]}, {values[-1]}]"
        )
    out = _basis_batch(values[None, :], np.array([x]), order)
    return out[0, :, 0]


def build_basis_matrix(
    knots: KnotVector, grid, drop_end_bsplines: bool = False
) -> BasisMatrix:
    """Sample every basis function on a predictor grid.

    The result has one row per retained basis function and one column per
    grid point.  Grid points outside the knot range produce zero columns
    (the spline vanishes off its support).  With ``drop_end_bsplines`` the
    first and last rows, which carry jump discontinuities at the boundary
    knots, are removed.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise IllPosedBasisError("grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise IllPosedBasisError("grid must be strictly increasing")
    entries = _basis_batch(knots.values[None, :], grid, knots.order)[0]
    if drop_end_bsplines:
        if entries.shape[0] < 3:
            raise IllPosedBasisError("too few basis functions to drop the ends")
        entries = entries[1:-1]
    if grid.size <= entries.shape[0]:
        raise IllPosedBasisError(
            f"{grid.size} grid points cannot determine {entries.shape[0]} coefficients"
        )
    return BasisMatrix(
        entries=entries,
        knots=knots,
        grid=grid,
        end_bsplines_dropped=drop_end_bsplines,
    )
