"""Ridge-penalized least-squares spline coefficients and fit quality.

For a design matrix ``B`` (one row per basis function, one column per
sample) the coefficients minimize ``||y - a B||^2 + lam * ||a||^2``.  The
minimizer solves ``(B B^T + lam I) a = B y`` and the attained objective
value is the quantity the knot optimizer drives down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bspline import BasisMatrix, KnotVector, build_basis_matrix


class SingularFitError(ValueError):
    """Normal equations are rank deficient and not recoverable."""


@dataclass(frozen=True)
class FitCoefficients:
    alpha: np.ndarray
    jittered: bool = False


@dataclass(frozen=True)
class PenalizedFitResult:
    alpha: FitCoefficients
    fitness: float
    rss: float
    penalty: float


def _solve_gram(gram: np.ndarray, rhs: np.ndarray, lam: float):
    """Cholesky solve with a one-shot jitter retry for lam == 0.

    Knot optimizers explore degenerate placements where ``B B^T`` loses
    rank, so an unpenalized solve must stay evaluable: on failure the
    diagonal is nudged by ``1e-12 * trace / n`` and the result is flagged.
    """
    try:
        c, low = scipy.linalg.cho_factor(gram)
        return scipy.linalg.cho_solve((c, low), rhs), False
    except scipy.linalg.LinAlgError:
        if lam > 0:
            raise SingularFitError("penalized normal equations not positive definite")
    n = gram.shape[0]
    jitter = 1e-12 * np.trace(gram) / n
    if jitter <= 0:
        raise SingularFitError("normal equations are identically singular")
    try:
        c, low = scipy.linalg.cho_factor(gram + jitter * np.eye(n))
        return scipy.linalg.cho_solve((c, low), rhs), True
    except scipy.linalg.LinAlgError as exc:
        raise SingularFitError("normal equations singular even with jitter") from exc


def solve_coefficients(basis: BasisMatrix, y, lam: float) -> FitCoefficients:
    """Solve ``(B B^T + lam I) alpha = B y`` by Cholesky factorization."""
    if lam < 0:
        raise ValueError("penalty gain must be nonnegative")
    b = basis.entries
    y = np.asarray(y, dtype=float)
    if y.shape != (b.shape[1],):
        raise ValueError(
            f"data length {y.shape} does not match {b.shape[1]} grid points"
        )
    gram = b @ b.T
    if lam > 0:
        gram = gram + lam * np.eye(b.shape[0])
    alpha, jittered = _solve_gram(gram, b @ y, lam)
    return FitCoefficients(alpha=alpha, jittered=jittered)


def fitness(
    knots: KnotVector,
    y,
    grid,
    lam: float,
    drop_end_bsplines: bool = False,
) -> PenalizedFitResult:
    """Penalized objective at the optimal coefficients for fixed knots.

    Returns the residual sum of squares, the coefficient penalty, and their
    ``rss + lam * penalty`` combination.
    """
    basis = build_basis_matrix(knots, grid, drop_end_bsplines=drop_end_bsplines)
    coeffs = solve_coefficients(basis, y, lam)
    resid = np.asarray(y, dtype=float) - coeffs.alpha @ basis.entries
    rss = float(resid @ resid)
    penalty = float(coeffs.alpha @ coeffs.alpha)
    return PenalizedFitResult(
        alpha=coeffs,
        fitness=rss + lam * penalty,
        rss=rss,
        penalty=penalty,
    )


def batch_fitness(basis_batch: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Objective values for a stack of design matrices sharing one grid.

    ``basis_batch`` has shape ``(n, rows, N)``.  Rows whose normal equations
    cannot be solved come back as ``inf``.  The fast path uses one batched
    LAPACK solve; it matches :func:`solve_coefficients` to roundoff and is
    cross-checked against it in the test suite.
    """
    n, rows, _ = basis_batch.shape
    gram = basis_batch @ basis_batch.transpose(0, 2, 1)
    if lam > 0:
        idx = np.arange(rows)
        gram[:, idx, idx] += lam
    rhs = basis_batch @ y
    out = np.full(n, np.inf)
    if lam > 0:
        try:
            alpha = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            alpha = None
        if alpha is not None:
            resid = y[None, :] - np.einsum("ij,ijk->ik", alpha, basis_batch)
            out = np.einsum("ij,ij->i", resid, resid) + lam * np.einsum(
                "ij,ij->i", alpha, alpha
            )
            return out
    for i in range(n):
        try:
            alpha, _ = _solve_gram(gram[i], rhs[i], lam)
        except SingularFitError:
            continue
        resid = y - alpha @ basis_batch[i]
        out[i] = resid @ resid + lam * (alpha @ alpha)
    return out
