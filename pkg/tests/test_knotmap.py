"""Coordinate-to-knot maps and interval occupancy repair."""

import numpy as np
import numpy.testing as npt
import pytest

from swarmspline.bspline import KnotVector
from swarmspline.knotmap import (
    KnotMapOptions,
    UnhealableError,
    centered_monotonic_map,
    heal_knots,
    merge_knots,
    plain_map,
)

VAR = KnotMapOptions(end_knots="variable")
FIX = KnotMapOptions(end_knots="fixed")


def forward_centered(tau):
    """Forward relative-position relations (test-local oracle)."""
    tau = np.asarray(tau, dtype=float)
    m = tau.size
    z = np.empty(m)
    z[0] = tau[0]
    for i in range(1, m - 1):
        z[i] = (tau[i] - tau[i - 1]) / (tau[i + 1] - tau[i - 1])
    z[m - 1] = (tau[m - 1] - tau[0]) / (1.0 - tau[0])
    return z


class TestPlainMap:
    def test_sort_and_replicate(self):
        kv = plain_map([0.7, 0.2, 0.5], VAR)
        npt.assert_allclose(
            kv.values, [0.2, 0.2, 0.2, 0.2, 0.5, 0.7, 0.7, 0.7, 0.7]
        )
        assert kv.values.size == 9

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            z = rng.random(6)
            ref = plain_map(z, VAR)
            perm = plain_map(rng.permutation(z), VAR)
            npt.assert_array_equal(ref.values, perm.values)

    def test_fixed_ends(self):
        # a 5-knot model supplies 3 interior coordinates; ends pinned
        kv = plain_map([0.3, 0.6, 0.9], FIX)
        assert kv.values[0] == 0.0 and kv.values[-1] == 1.0
        npt.assert_allclose(kv.interior(), [0.3, 0.6, 0.9])
        assert kv.values.size == 5 + 2 * 3

    def test_too_few_knots(self):
        with pytest.raises(ValueError):
            plain_map([0.4], VAR)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            plain_map([0.2, 1.4], VAR)


class TestCenteredMonotonicMap:
    def test_half_coordinates_give_uniform_spacing(self):
        z = np.full(5, 0.5)
        z[0], z[-1] = 0.0, 1.0  # variable-end coordinates pin [0, 1] here
        kv = centered_monotonic_map(z, VAR)
        npt.assert_allclose(kv.interior(), [0.25, 0.5, 0.75], atol=1e-12)
        # fixed-end flavor: interior coordinates only
        kv2 = centered_monotonic_map([0.5, 0.5, 0.5], FIX)
        npt.assert_allclose(kv2.interior(), [0.25, 0.5, 0.75], atol=1e-12)

    def test_three_knot_hand_solution(self):
        kv = centered_monotonic_map([0.2, 0.5, 1.0], VAR)
        assert kv.values[0] == pytest.approx(0.2)
        npt.assert_allclose(kv.interior(), [0.6], atol=1e-12)
        assert kv.values[-1] == pytest.approx(1.0)

    def test_roundtrip_against_forward_relations(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            m = int(rng.integers(3, 12))
            lo = rng.uniform(0.0, 0.4)
            hi = rng.uniform(lo + 0.2, 1.0)
            breaks = np.concatenate(
                [[lo], np.sort(rng.uniform(lo, hi, size=m - 2)), [hi]]
            )
            z = forward_centered(breaks)
            kv = centered_monotonic_map(z, VAR)
            distinct = np.concatenate([[kv.values[0]], kv.interior(), [kv.values[-1]]])
            npt.assert_allclose(distinct, breaks, atol=1e-10)

    def test_monotone_for_random_coordinates(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            z = rng.random(int(rng.integers(2, 14)))
            kv = centered_monotonic_map(z, VAR)
            assert np.all(np.diff(kv.values) >= 0)

    def test_degenerate_coordinates_clamped(self):
        kv = centered_monotonic_map([0.0, 1.0, 0.0, 1.0], VAR)
        assert np.all(np.diff(kv.values) >= 0)

    def test_injective_on_interior(self):
        rng = np.random.default_rng(3)
        z1 = rng.uniform(0.05, 0.95, size=5)
        z2 = z1.copy()
        z2[2] += 0.01
        kv1 = centered_monotonic_map(z1, VAR)
        kv2 = centered_monotonic_map(z2, VAR)
        assert not np.array_equal(kv1.values, kv2.values)


class TestMergeKnots:
    def test_two_knots_equalized_to_rightmost(self):
        grid = np.linspace(0, 1, 11)
        kv = plain_map([0.52, 0.55], FIX)
        merged = merge_knots(kv, grid)
        npt.assert_allclose(merged.interior(), [0.55, 0.55])
        assert merged.size == kv.size

    def test_five_knots_saturate_then_heal(self):
        grid = np.linspace(0, 1, 11)
        kv = plain_map([0.51, 0.52, 0.53, 0.54, 0.55], FIX)
        merged = merge_knots(kv, grid)
        # rightmost knot saturates at multiplicity 4; the leftover knot is
        # dispersed into the empty neighbor interval (larger outward gap on
        # the left: 0.51 - 0 > 1 - 0.55)
        npt.assert_allclose(merged.interior(), [0.45, 0.55, 0.55, 0.55, 0.55])
        assert merged.size == kv.size

    def test_noop_without_overcrowding(self):
        grid = np.linspace(0, 1, 11)
        kv = plain_map([0.15, 0.55, 0.85], FIX)
        merged = merge_knots(kv, grid)
        npt.assert_array_equal(merged.values, kv.values)

    def test_count_and_multiplicity_random(self):
        rng = np.random.default_rng(4)
        grid = np.linspace(0, 1, 17)
        for _ in range(100):
            m = int(rng.integers(2, 15))
            kv = plain_map(rng.random(m), VAR)
            merged = merge_knots(kv, grid)
            assert merged.size == kv.size  # count conserved
            _, counts = np.unique(merged.values, return_counts=True)
            assert counts.max() <= 4


class TestHealKnots:
    def test_two_knots_dispersed_by_gap_rule(self):
        grid = np.linspace(0, 1, 11)
        kv = plain_map([0.52, 0.55], FIX)
        healed = heal_knots(kv, grid)
        # left gap 0.52 - 0 beats right gap 1 - 0.55: the left knot moves to
        # the midpoint of the nearest empty interval on the left
        npt.assert_allclose(healed.interior(), [0.45, 0.55])

    def test_identity_when_spread(self):
        grid = np.linspace(0, 1, 11)
        kv = plain_map([0.12, 0.35, 0.78], FIX)
        npt.assert_array_equal(heal_knots(kv, grid).values, kv.values)

    def test_count_preserved_and_one_per_interval(self):
        rng = np.random.default_rng(5)
        grid = np.linspace(0, 1, 33)
        for _ in range(100):
            m = int(rng.integers(2, 15))
            kv = plain_map(rng.random(m), VAR)
            healed = heal_knots(kv, grid)
            assert healed.size == kv.size
            inner = healed.interior()
            bins = np.searchsorted(grid, inner, side="left") - 1
            strict = (inner != grid[np.clip(np.searchsorted(grid, inner), 0, 32)])
            occupied = bins[strict]
            assert occupied.size == np.unique(occupied).size

    def test_breaks_up_repeated_interior_knots(self):
        grid = np.linspace(0, 1, 11)
        values = np.concatenate([np.zeros(4), [0.33, 0.33, 0.61], np.ones(4)])
        kv = KnotVector(values=values, order=4)
        healed = heal_knots(kv, grid)
        inner = healed.interior()
        assert np.unique(inner).size == inner.size

    def test_unhealable(self):
        grid = np.array([0.0, 0.5, 1.0])  # two predictor intervals
        kv = plain_map([0.1, 0.2, 0.3], FIX)
        with pytest.raises(UnhealableError):
            heal_knots(kv, grid)


class TestMapsProduceValidKnots:
    def test_randomized_pipeline_validity(self):
        rng = np.random.default_rng(6)
        grid = np.linspace(0, 1, 64)
        for _ in range(200):
            m = int(rng.integers(2, 19))
            z = rng.random(m)
            for options, adjuster in (
                (KnotMapOptions(end_knots="variable", adjust="merge"), merge_knots),
                (KnotMapOptions(end_knots="variable", adjust="heal"), heal_knots),
            ):
                kv = plain_map(z, options)
                out = adjuster(kv, grid)
                KnotVector(values=out.values, order=out.order)  # re-validates

    def test_centered_pipeline_validity(self):
        rng = np.random.default_rng(7)
        grid = np.linspace(0, 1, 64)
        options = KnotMapOptions(map_kind="centered", end_knots="fixed")
        for _ in range(100):
            m = int(rng.integers(4, 16))
            kv = centered_monotonic_map(rng.random(m - 2), options)
            out = merge_knots(kv, grid)
            KnotVector(values=out.values, order=out.order)


class TestOptions:
    def test_dimension(self):
        assert FIX.dimension(5) == 3
        assert VAR.dimension(5) == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            KnotMapOptions(map_kind="spiral")
        with pytest.raises(ValueError):
            KnotMapOptions(end_knots="loose")
        with pytest.raises(ValueError):
            KnotMapOptions(adjust="shuffle")
        with pytest.raises(ValueError):
            FIX.dimension(1)
