import math

import numpy as np
import pytest

from homfm import datagen as dg
from homfm import liealg, matcore
from homfm.errors import InvalidSpec
from homfm.metrics import cell_occupancy

H2 = dg.CheckerboardSpec.default("H2")
S2 = dg.CheckerboardSpec.default("S2")
REPS = ["ambient", "algmatrix", "coords"]


def test_defaults():
    assert H2.populated().sum() == 8
    assert S2.populated().sum() == 16
    assert S2.v_range[1] <= 1 - dg.POLE_CAP


@pytest.mark.parametrize("kw", [
    {"space": "H2", "v_range": (0.0, 1.0)},
    {"space": "S2", "v_range": (-1.0, 0.9995)},
    {"space": "H2", "n_u": 0},
    {"space": "H2", "parity": 2},
])
def test_invalid_specs(kw):
    with pytest.raises(InvalidSpec):
        dg.CheckerboardSpec.from_dict(kw)


def test_spec_dict_roundtrip():
    assert dg.CheckerboardSpec.from_dict(S2.to_dict()) == S2
    with pytest.raises(InvalidSpec):
        dg.CheckerboardSpec.from_dict({"space": "H2", "colour": 1})


@pytest.mark.parametrize("spec", [H2, S2], ids=["H2", "S2"])
def test_checkerboard_support(spec):
    p = dg.sample_checkerboard(spec, 20_000, 3)
    assert cell_occupancy(p, spec).leakage == 0
    if spec.space == "H2":
        assert np.all(p[:, 1] > 0)
    else:
        np.testing.assert_allclose(np.linalg.norm(p, axis=1), 1, atol=1e-12)


def test_checkerboard_cell_occupancy_binomial():
    n = 100_000
    counts = cell_occupancy(dg.sample_checkerboard(H2, n, 5), H2).counts[H2.populated()]
    sd = math.sqrt(n * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - n / 8) <= 4 * sd)


def test_s2_cells_area_uniform():
    # uniform in z means each z-band carries area-proportional mass
    p = dg.sample_uniform_domain(S2, 100_000, 1)
    z = p[:, 2]
    frac = np.mean(z < 0)
    assert abs(frac - 1 / 1.995) <= 4 * math.sqrt(0.25 / 100_000)


def test_determinism_and_seed_independence():
    a = dg.sample_checkerboard(H2, 1000, 7)
    np.testing.assert_array_equal(a, dg.sample_checkerboard(H2, 1000, 7))
    x = dg.sample_noise_coords(3, 1.0, 10_000, 1)
    y = dg.sample_noise_coords(3, 1.0, 10_000, 2)
    for k in range(3):
        assert abs(np.corrcoef(x[:, k], y[:, k])[0, 1]) < 0.05
    np.testing.assert_array_equal(x, dg.sample_noise_coords(3, 1.0, 10_000, 1))


def test_noise_moments():
    n, sigma = 100_000, 0.7
    x = dg.sample_noise_coords(3, sigma, n, 11)
    assert np.all(np.abs(x.mean(axis=0)) <= 4 * sigma / math.sqrt(n))
    np.testing.assert_allclose(x.var(axis=0), sigma**2, rtol=0.05)
    with pytest.raises(InvalidSpec):
        dg.sample_noise_coords(3, 0.0, 10, 1)


def test_lift_examples():
    np.testing.assert_array_equal(dg.lift([[0.0, 1.0]], "H2", "coords"), [[0, 0, 0]])
    np.testing.assert_array_equal(dg.lift([[2.0, 4.0]], "H2", "ambient"), [[2, 1, 0, 0.5]])
    pts, rej = dg.unlift([[0.0, 0.0, 0.0]], "H2", "coords")
    np.testing.assert_array_equal(pts, [[0.0, 1.0]])
    pts, rej = dg.unlift([[2.0, 1.0, 0.0, 0.5]], "H2", "ambient")
    np.testing.assert_allclose(pts, [[2.0, 4.0]], atol=1e-15)


def test_unlift_rejects_negative_det():
    pts, rej = dg.unlift([[1.0, 0.0, 0.0, -1.0], [2.0, 1.0, 0.0, 0.5]], "H2", "ambient")
    assert rej == 1 and len(pts) == 1
    v = np.diag([1.0, 1.0, -1.0]).reshape(1, 9)
    pts, rej = dg.unlift(v, "S2", "ambient")
    assert rej == 1 and len(pts) == 0


def test_unlift_raw_mode():
    pts, rej = dg.unlift([[4.0, 2.0, 0.0, 1.0]], "H2", "ambient", raw=True)
    np.testing.assert_allclose(pts, [[2.0, 4.0]], atol=1e-15)
    pts, rej = dg.unlift([[1.0, 0.0, 0.0, -1.0]], "H2", "ambient", raw=True)
    assert rej == 1


def test_unlift_dimension_mismatch():
    with pytest.raises(InvalidSpec):
        dg.unlift(np.zeros((3, 4)), "S2", "ambient")


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("spec", [H2, S2], ids=["H2", "S2"])
def test_lift_unlift_roundtrip(spec, rep):
    p = dg.sample_checkerboard(spec, 10_000, 9)
    v = dg.lift(p, spec.space, rep)
    assert v.shape == (10_000, dg.rep_dim(spec.space, rep))
    back, rej = dg.unlift(v, spec.space, rep)
    assert rej == 0
    np.testing.assert_allclose(back, p, atol=1e-8)


def test_lifted_h2_stays_in_exp_image():
    p = dg.sample_checkerboard(H2, 50_000, 13)
    from homfm.homspace import section_h2

    assert matcore.trace(section_h2(p)).min() >= 2 - 1e-12
    dg.lift(p, "H2", "coords")


@pytest.mark.parametrize("space", ["H2", "S2"])
def test_shared_noise_across_representations(space):
    c = dg.sample_noise_coords(3, 1.0, 2000, 4)
    pts = [dg.unlift(dg.coords_to_rep(c, space, r), space, r)[0] for r in REPS]
    np.testing.assert_allclose(pts[0], pts[2], atol=1e-8)
    np.testing.assert_allclose(pts[1], pts[2], atol=1e-8)


def test_unlift_projects_off_algebra_matrices():
    m = np.array([[0.3, 0.5, -0.2, 0.1]])
    pts, rej = dg.unlift(m, "H2", "algmatrix")
    expected = dg.unlift(liealg.encode_sl2(liealg.project_sl2_algebra(m.reshape(1, 2, 2))), "H2", "coords")[0]
    np.testing.assert_allclose(pts, expected, atol=1e-15)
