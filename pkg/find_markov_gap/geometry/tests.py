import numpy as np
from django.test import SimpleTestCase

from find_markov_gap.geometry import (
    REGION_A,
    REGION_B,
    REGION_C,
    Lattice,
    SmootherShape,
    build_tripartition,
    default_anchor,
    smoother_support,
)
from find_markov_gap.utils.errors import GeometryError


class LatticeTests(SimpleTestCase):
    def test_mode_of_and_site_of_are_inverse(self):
        lat = Lattice(6, 4, layers=2)
        modes = np.arange(lat.n_modes)
        x, y, layer = lat.site_of(modes)
        np.testing.assert_array_equal(lat.mode_of(x, y, layer), modes)

    def test_modes_of_sites_covers_every_layer(self):
        lat = Lattice(4, 4, layers=2)
        self.assertEqual(lat.modes_of_sites([0, 5]).indices, (0, 5, 16, 21))

    def test_non_positive_dimensions(self):
        with self.assertRaises(GeometryError):
            Lattice(0, 4)


class TripartitionTests(SimpleTestCase):
    def setUp(self):
        self.lat = Lattice(32, 24)

    def test_blocks_and_interface_points(self):
        tp = build_tripartition(self.lat, 8, 8, anchor=(8, 8))
        self.assertEqual(len(tp.a_mask), 64)
        self.assertEqual(len(tp.b_mask), 64)
        self.assertEqual(len(tp.c_mask), self.lat.n_sites - 128)
        self.assertEqual(tp.N, (15.5, 15.5))
        self.assertEqual(tp.S, (15.5, 7.5))
        x, y, _ = self.lat.site_of(np.array(tp.b_mask.indices))
        self.assertEqual((x.min(), x.max(), y.min(), y.max()), (16, 23, 8, 15))

    def test_unequal_blocks_share_the_bottom_row(self):
        tp = build_tripartition(self.lat, 8, 4, anchor=(4, 4))
        self.assertEqual(tp.interface_length, 4)
        self.assertEqual(tp.N, (11.5, 7.5))
        self.assertEqual(len(tp.b_mask), 16)

    def test_default_anchor_centres_the_blocks(self):
        self.assertEqual(default_anchor(self.lat, 8, 8), (8, 8))
        tp = build_tripartition(self.lat, 8, 8)
        self.assertEqual(tp.anchor, (8, 8))

    def test_regions_partition_every_mode(self):
        tp = build_tripartition(Lattice(32, 24, layers=2), 8, 8)
        counts = np.bincount(tp.region_of, minlength=3)
        self.assertEqual(counts[REGION_A], 128)
        self.assertEqual(counts[REGION_B], 128)
        self.assertEqual(counts.sum(), 2 * self.lat.n_sites)
        self.assertEqual(counts[REGION_C], 2 * self.lat.n_sites - 256)

    def test_blocks_outside_the_lattice(self):
        with self.assertRaises(GeometryError):
            build_tripartition(self.lat, 16, 16, anchor=(8, 8))

    def test_margin_below_minimum(self):
        with self.assertRaises(GeometryError):
            build_tripartition(self.lat, 8, 8, anchor=(2, 8), margin_min=4)


class SmootherSupportTests(SimpleTestCase):
    def setUp(self):
        self.lat = Lattice(40, 32)
        self.tp = build_tripartition(self.lat, 12, 12, anchor=(8, 10))

    def test_radius_four_disks_hold_52_sites(self):
        support = smoother_support(self.tp, self.lat, SmootherShape.TWO_CIRCLES, 4)
        self.assertEqual(support.names, ("N", "S"))
        self.assertEqual([len(m) for m in support.masks], [52, 52])
        self.assertTrue(support.masks[0].isdisjoint(support.masks[1]))

    def test_joint_support_is_the_union_of_both_disks(self):
        circles = smoother_support(self.tp, self.lat, "two_circles", 3)
        joint = smoother_support(self.tp, self.lat, "joint", 3)
        self.assertEqual(joint.names, ("NS",))
        self.assertEqual(joint.masks[0], circles.union)

    def test_overlapping_circles(self):
        tp = build_tripartition(self.lat, 4, 4, anchor=(10, 10))
        with self.assertRaises(GeometryError):
            smoother_support(tp, self.lat, "two_circles", 3)
        joint = smoother_support(tp, self.lat, "joint", 3)
        self.assertEqual(len(joint.masks), 1)

    def test_strip_straddles_the_interface(self):
        tp = build_tripartition(self.lat, 4, 4, anchor=(10, 10))
        strip = smoother_support(tp, self.lat, "strip", 1)
        x, y, _ = self.lat.site_of(np.array(strip.masks[0].indices))
        self.assertEqual(len(strip.masks[0]), 8)
        self.assertEqual(set(x.tolist()), {13, 14})
        self.assertEqual(set(y.tolist()), {10, 11, 12, 13})

    def test_zero_radius_is_empty(self):
        support = smoother_support(self.tp, self.lat, "two_circles", 0)
        self.assertTrue(support.is_empty)
        self.assertEqual(len(support.masks), 2)

    def test_negative_radius(self):
        with self.assertRaises(GeometryError):
            smoother_support(self.tp, self.lat, "joint", -1)
