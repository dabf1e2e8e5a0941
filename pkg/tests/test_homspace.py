import numpy as np
import pytest

from homfm import homspace as hs
from homfm import liealg, matcore
from homfm.errors import InvalidPoint, NonProjectable, NorthPoleExcluded
from oracles import random_rotation, random_sl2

G = np.array([[2.0, 1.0], [0.0, 0.5]])


def random_h2(rng, n):
    return np.stack([rng.uniform(-5, 5, n), np.exp(rng.uniform(-3, 3, n))], axis=1)


def random_s2(rng, n, zmax=0.99):
    p = rng.normal(size=(n, 3))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    return p[p[:, 2] < zmax]


class TestMobius:
    def test_identity(self):
        np.testing.assert_array_equal(hs.mobius_act(np.eye(2), [0.3, 2.0]), [0.3, 2.0])

    def test_example(self):
        np.testing.assert_allclose(hs.mobius_act(G, [0.0, 1.0]), [2.0, 4.0], atol=1e-15)

    def test_associative_and_preserves_upper_half_plane(self, rng):
        g, h = random_sl2(rng, 10_000), random_sl2(rng, 10_000)
        p = random_h2(rng, 10_000)
        hp = hs.mobius_act(h, p)
        assert np.all(hp[:, 1] > 0)
        lhs = hs.mobius_act(g @ h, p)
        rhs = hs.mobius_act(g, hp)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


class TestH2Section:
    def test_examples(self):
        np.testing.assert_array_equal(hs.section_h2([0.0, 1.0]), np.eye(2))
        np.testing.assert_allclose(hs.section_h2([2.0, 4.0]), G, atol=0)
        np.testing.assert_array_equal(hs.project_sl2_to_h2(np.eye(2)), [0.0, 1.0])
        np.testing.assert_allclose(hs.project_sl2_to_h2(G), [2.0, 4.0], atol=1e-15)

    def test_invalid(self):
        with pytest.raises(InvalidPoint):
            hs.section_h2([0.0, 0.0])

    def test_section_properties(self, rng):
        p = random_h2(rng, 10_000)
        g = hs.section_h2(p)
        assert np.all(g[:, 1, 0] == 0)
        assert np.abs(matcore.det(g) - 1).max() <= 1e-12
        assert matcore.trace(g).min() >= 2 - 1e-12
        np.testing.assert_allclose(hs.project_sl2_to_h2(g), p, rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(hs.mobius_act(g, np.array([0.0, 1.0])), p, rtol=1e-10, atol=1e-10)

    def test_fiber_invariance(self, rng):
        g = random_sl2(rng, 10_000)
        k = hs.so2_block(rng.uniform(-np.pi, np.pi, 10_000))
        np.testing.assert_allclose(hs.project_sl2_to_h2(g @ k), hs.project_sl2_to_h2(g), rtol=1e-10, atol=1e-10)

    def test_normalize_det(self):
        np.testing.assert_array_equal(hs.normalize_det_sl2(G), G)
        np.testing.assert_array_equal(hs.normalize_det_sl2(2 * np.eye(2)), np.eye(2))
        with pytest.raises(NonProjectable):
            hs.normalize_det_sl2(np.diag([1.0, -1.0]))


class TestS2Section:
    def test_north_pole_excluded(self):
        with pytest.raises(NorthPoleExcluded):
            hs.section_s2([0.0, 0.0, 1.0])

    def test_equator_point(self):
        r = hs.section_s2([1.0, 0.0, 0.0])
        expected = liealg.exp_so3(liealg.hat([0.0, np.pi / 2, 0.0]))
        np.testing.assert_allclose(r, expected, atol=1e-15)
        np.testing.assert_allclose(r @ hs.E3, [1.0, 0.0, 0.0], atol=1e-15)

    def test_south_pole_convention(self):
        r = hs.section_s2([0.0, 0.0, -1.0])
        np.testing.assert_allclose(r, np.diag([1.0, -1.0, -1.0]), atol=1e-15)

    def test_defining_property(self, rng):
        p = random_s2(rng, 12_000)
        r = hs.section_s2(p)
        assert np.all(liealg.is_so3(r))
        assert matcore.norm(r @ hs.E3 - p).max() <= 1e-10

    def test_near_poles(self):
        for z in (1 - 1e-7, -1 + 1e-12, -1 + 1e-15):
            s = np.sqrt(1 - z * z)
            p = np.array([s * 0.6, s * 0.8, z])
            assert matcore.norm(hs.section_s2(p) @ hs.E3 - p) <= 1e-9

    def test_projection(self, rng):
        np.testing.assert_array_equal(hs.project_so3_to_s2(np.eye(3)), [0.0, 0.0, 1.0])
        r = liealg.exp_so3(liealg.hat([0.0, np.pi / 2, 0.0]))
        np.testing.assert_allclose(hs.project_so3_to_s2(r), [1.0, 0.0, 0.0], atol=1e-15)
        p = random_s2(rng, 10_000)
        np.testing.assert_allclose(hs.project_so3_to_s2(hs.section_s2(p)), p, atol=1e-10)

    def test_fiber_invariance(self, rng):
        r = random_rotation(rng, 10_000)
        k = hs.so2_block(rng.uniform(-np.pi, np.pi, 10_000), n=3)
        q = hs.project_so3_to_s2(r @ k)
        np.testing.assert_allclose(q, hs.project_so3_to_s2(r), atol=1e-10)
        assert np.abs(np.linalg.norm(q, axis=1) - 1).max() <= 1e-10


class TestStereo:
    def test_examples(self):
        np.testing.assert_array_equal(hs.stereo([0.0, 0.0, -1.0]), [0.0, 0.0])
        np.testing.assert_array_equal(hs.stereo([1.0, 0.0, 0.0]), [1.0, 0.0])
        with pytest.raises(NorthPoleExcluded):
            hs.stereo([0.0, 0.0, 1.0])

    def test_roundtrip(self, rng):
        p = random_s2(rng, 10_000, zmax=0.9)
        np.testing.assert_allclose(hs.stereo_inv(hs.stereo(p)), p, atol=1e-12)
        u = rng.normal(size=(1000, 2))
        np.testing.assert_allclose(hs.stereo(hs.stereo_inv(u)), u, atol=1e-12)


def test_space_registry():
    assert hs.get_space("h2") is hs.H2 and hs.get_space("S2") is hs.S2
    assert hs.H2.group is liealg.SL2 and hs.S2.group is liealg.SO3
