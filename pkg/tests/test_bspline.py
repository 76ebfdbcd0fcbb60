"""Basis evaluation against an exact-arithmetic oracle and its invariants."""

from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest

from swarmspline.bspline import (
    BasisDomainError,
    IllPosedBasisError,
    KnotVector,
    KnotVectorError,
    _basis_batch,
    _basis_batch_clamped,
    build_basis_matrix,
    evaluate_basis,
)


def oracle_basis(tau, order, x):
    """Direct recursive definition evaluated in exact rational arithmetic.

    Intervals are half-open, so this oracle is valid for x strictly below
    the last knot.
    """
    tau = [Fraction(float(t)) for t in tau]
    xf = Fraction(float(x))

    def b(j, kp):
        if kp == 1:
            return Fraction(1) if tau[j] <= xf < tau[j + 1] else Fraction(0)
        first = Fraction(0)
        if tau[j + kp - 1] != tau[j]:
            first = (xf - tau[j]) / (tau[j + kp - 1] - tau[j]) * b(j, kp - 1)
        second = Fraction(0)
        if tau[j + kp] != tau[j + 1]:
            second = (tau[j + kp] - xf) / (tau[j + kp] - tau[j + 1]) * b(j + 1, kp - 1)
        return first + second

    return np.array([float(b(j, order)) for j in range(len(tau) - order)])


def random_clamped_knots(rng, order=4, max_interior=8):
    """Random valid knot vector, possibly with repeated interior knots."""
    n_distinct = rng.integers(0, max_interior + 1)
    interior_vals = np.sort(rng.uniform(0.05, 0.95, size=n_distinct))
    mult = rng.integers(1, order + 1, size=n_distinct)
    interior = np.repeat(interior_vals, mult)
    values = np.concatenate([np.zeros(order), interior, np.ones(order)])
    return KnotVector(values=values, order=order)


class TestKnotVector:
    def test_valid(self):
        kv = KnotVector(values=[0, 0, 0, 0, 0.5, 1, 1, 1, 1], order=4)
        assert kv.size == 9
        assert kv.num_basis == 5
        npt.assert_array_equal(kv.interior(), [0.5])

    def test_rejects_decreasing(self):
        with pytest.raises(KnotVectorError):
            KnotVector(values=[0, 0, 0, 0, 0.6, 0.5, 1, 1, 1, 1], order=4)

    def test_rejects_excess_multiplicity(self):
        with pytest.raises(KnotVectorError):
            KnotVector(values=[0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0.5, 1, 1, 1, 1], order=4)

    def test_rejects_unclamped_ends(self):
        with pytest.raises(KnotVectorError):
            KnotVector(values=[0, 0.1, 0.2, 0.3, 0.5, 1, 1, 1, 1], order=4)

    def test_rejects_too_short(self):
        with pytest.raises(KnotVectorError):
            KnotVector(values=[0, 0, 0, 0, 1, 1, 1], order=4)

    def test_rejects_out_of_range(self):
        with pytest.raises(KnotVectorError):
            KnotVector(values=[0, 0, 0, 0, 0.5, 1.2, 1.2, 1.2, 1.2], order=4)

    def test_rejects_degenerate_span(self):
        with pytest.raises(KnotVectorError):
            KnotVector(values=[0.5] * 4, order=2)


class TestEvaluateBasis:
    def test_order1_indicator(self):
        kv = KnotVector(values=[0, 0.5, 1], order=1)
        npt.assert_array_equal(evaluate_basis(kv, 0.25), [1.0, 0.0])
        npt.assert_array_equal(evaluate_basis(kv, 0.75), [0.0, 1.0])

    def test_cardinal_cubic_center(self):
        # uniform knots rescaled to [0,1]; value at the central knot is 2/3
        knots = (np.array([0, 0.25, 0.5, 0.75, 1.0]), 4)
        val = evaluate_basis(knots, 0.5)
        npt.assert_allclose(val, [2.0 / 3.0], atol=1e-14)
        npt.assert_allclose(val, oracle_basis(knots[0], 4, 0.5), atol=1e-14)

    def test_domain_error(self):
        kv = KnotVector(values=[0, 0, 0, 0, 0.5, 1, 1, 1, 1], order=4)
        with pytest.raises(BasisDomainError):
            evaluate_basis(kv, 1.5)
        with pytest.raises(BasisDomainError):
            evaluate_basis(kv, -0.1)

    def test_malformed_raw_knots(self):
        with pytest.raises(KnotVectorError):
            evaluate_basis((np.array([0.0, 0.5, 0.2, 1.0]), 2), 0.3)

    def test_partition_of_unity_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            kv = random_clamped_knots(rng)
            x = rng.uniform(0.0, 1.0)
            vals = evaluate_basis(kv, x)
            assert abs(vals.sum() - 1.0) < 1e-12

    def test_partition_of_unity_at_right_edge(self):
        kv = KnotVector(values=[0, 0, 0, 0, 0.3, 0.7, 1, 1, 1, 1], order=4)
        vals = evaluate_basis(kv, 1.0)
        assert abs(vals.sum() - 1.0) < 1e-12

    def test_nonnegativity_and_local_support(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            kv = random_clamped_knots(rng)
            x = rng.uniform(0.0, 1.0)
            vals = evaluate_basis(kv, x)
            assert np.all(vals >= 0.0)
            tau, k = kv.values, kv.order
            for j, v in enumerate(vals):
                if x < tau[j] or x > tau[j + k]:
                    assert v == 0.0

    def test_oracle_agreement(self):
        rng = np.random.default_rng(13)
        checked = 0
        while checked < 100:
            kv = random_clamped_knots(rng, order=int(rng.integers(1, 5)))
            x = rng.uniform(0.0, 0.999)
            npt.assert_allclose(
                evaluate_basis(kv, x),
                oracle_basis(kv.values, kv.order, x),
                atol=1e-10,
            )
            checked += 1

    def test_oracle_agreement_unclamped(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            order = int(rng.integers(1, 5))
            values = np.sort(rng.uniform(0, 1, size=order + 1 + rng.integers(1, 6)))
            x = rng.uniform(values[0], values[-1] * 0.999)
            npt.assert_allclose(
                evaluate_basis((values, order), x),
                oracle_basis(values, order, x),
                atol=1e-10,
            )


class TestBuildBasisMatrix:
    def test_row_count(self):
        # 5 distinct knots, cubic: 5 + 2*3 = 11 knots, 7 basis functions
        values = np.concatenate([np.zeros(4), [0.3, 0.5, 0.7], np.ones(4)])
        kv = KnotVector(values=values, order=4)
        grid = np.linspace(0, 1, 64)
        bm = build_basis_matrix(kv, grid)
        assert bm.entries.shape == (7, 64)

    def test_drop_end_bsplines(self):
        values = np.concatenate([np.zeros(4), [0.3, 0.5, 0.7], np.ones(4)])
        kv = KnotVector(values=values, order=4)
        bm = build_basis_matrix(kv, np.linspace(0, 1, 64), drop_end_bsplines=True)
        assert bm.entries.shape == (5, 64)
        assert bm.end_bsplines_dropped

    def test_column_sums(self):
        rng = np.random.default_rng(15)
        grid = np.linspace(0, 1, 128)
        for _ in range(10):
            kv = random_clamped_knots(rng)
            bm = build_basis_matrix(kv, grid)
            npt.assert_allclose(bm.entries.sum(axis=0), 1.0, atol=1e-12)

    def test_zero_columns_outside_span(self):
        values = np.concatenate([np.full(4, 0.3), [0.4, 0.5], np.full(4, 0.7)])
        kv = KnotVector(values=values, order=4)
        grid = np.linspace(0, 1, 101)
        bm = build_basis_matrix(kv, grid)
        outside = (grid < 0.3) | (grid > 0.7)
        npt.assert_array_equal(bm.entries[:, outside], 0.0)
        inside = (grid >= 0.3) & (grid <= 0.7)
        npt.assert_allclose(bm.entries[:, inside].sum(axis=0), 1.0, atol=1e-12)

    def test_errors(self):
        values = np.concatenate([np.zeros(4), [0.3, 0.5, 0.7], np.ones(4)])
        kv = KnotVector(values=values, order=4)
        with pytest.raises(IllPosedBasisError):
            build_basis_matrix(kv, np.array([]))
        with pytest.raises(IllPosedBasisError):
            build_basis_matrix(kv, np.linspace(0, 1, 7))  # too few points
        with pytest.raises(IllPosedBasisError):
            build_basis_matrix(kv, np.array([0.0, 0.5, 0.5, 1.0]))


class TestFastPathEquivalence:
    def test_matches_reference_recursion(self):
        rng = np.random.default_rng(16)
        grid = np.linspace(0, 1, 256)
        for _ in range(40):
            kv = random_clamped_knots(rng)
            dense = _basis_batch(kv.values[None, :], grid, kv.order)
            local = _basis_batch_clamped(kv.values[None, :], grid, kv.order)
            npt.assert_allclose(local, dense, atol=1e-13)

    def test_matches_on_partial_span(self):
        values = np.concatenate([np.full(4, 0.2), [0.3], np.full(4, 0.6)])
        grid = np.linspace(0, 1, 100)
        dense = _basis_batch(values[None, :], grid, 4)
        local = _basis_batch_clamped(values[None, :], grid, 4)
        npt.assert_allclose(local, dense, atol=1e-14)
