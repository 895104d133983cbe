"""Grid geometry, test functions, norms, pairings, serialization."""

import math

import numpy as np
import pytest

from sphmax import grid
from sphmax.errors import DomainError, GeometryError


@pytest.fixture
def unit_box2():
    return grid.Box.cube(1.0, 2)


class TestBox:
    def test_cube_geometry(self):
        b = grid.Box.cube(4.0, 2)
        assert b.lo == (-4.0, -4.0)
        assert b.side == (8.0, 8.0)
        assert b.hi == (4.0, 4.0)
        assert b.diameter == pytest.approx(8.0 * math.sqrt(2))


class TestGridFunction:
    def test_spacing_and_cell_volume(self, unit_box2):
        f = grid.sample(grid.constant(1.0), unit_box2, 8)
        assert f.spacing == pytest.approx((0.25, 0.25))
        assert f.cell_volume == pytest.approx(0.0625)

    def test_axis_centers_are_cell_midpoints(self, unit_box2):
        f = grid.sample(grid.constant(1.0), unit_box2, 4)
        assert np.allclose(f.axis_centers(0), [-0.75, -0.25, 0.25, 0.75])

    def test_index_coords_roundtrip(self, unit_box2):
        f = grid.sample(grid.constant(1.0), unit_box2, 16)
        pts = np.array([[-0.3, 0.7], [0.0, 0.0]])
        ij = f.index_coords(pts)
        centers0 = f.axis_centers(0)
        back = np.stack([np.interp(ij[:, k], np.arange(16), f.axis_centers(k))
                         for k in range(2)], axis=1)
        assert np.allclose(back, pts)
        assert centers0[0] == pytest.approx(f.box.lo[0] + f.spacing[0] / 2)


class TestEvaluators:
    def test_ball_mass(self, unit_box2):
        f = grid.sample(grid.ball(0.5), unit_box2, 512)
        mass = f.values.sum() * f.cell_volume
        assert mass == pytest.approx(math.pi * 0.25, rel=5e-3)

    def test_annulus_mass(self):
        # half-width delta around radius 1
        box = grid.Box.cube(2.0, 2)
        f = grid.sample(grid.annulus(0.1), box, 1024)
        mass = f.values.sum() * f.cell_volume
        exact = math.pi * (1.1**2 - 0.9**2)
        assert mass == pytest.approx(exact, rel=5e-3)

    def test_knapp_boxes_shapes(self):
        delta = 1 / 16
        box = grid.Box.cube(2.0, 2)
        r1 = grid.sample(grid.knapp_box_r1(delta, C=1.0), box, 1024)
        r2 = grid.sample(grid.knapp_box_r2(delta), box, 1024)
        m1 = r1.values.sum() * r1.cell_volume
        m2 = r2.values.sum() * r2.cell_volume
        assert m1 == pytest.approx(2 * math.sqrt(delta) * 2 * delta, rel=0.05)
        assert m2 == pytest.approx(2 * math.sqrt(delta) * (1 / 3), rel=0.05)

    def test_log_weight_support_and_values(self):
        box = grid.Box.cube(1.0, 2)
        f = grid.sample(grid.log_weight(), box, 256)
        mesh = f.center_mesh()
        r = np.hypot(mesh[0], mesh[1])
        assert np.all(f.values[r >= 0.75] == 0.0)
        inside = (r < 0.74) & (r > 0.01)
        expected = r[inside] ** (-1) / np.log(1.0 / r[inside])
        assert np.allclose(f.values[inside], expected)

    def test_power_weight(self):
        box = grid.Box.cube(1.0, 2)
        w = grid.sample(grid.power(2.0), box, 64)
        mesh = w.center_mesh()
        assert np.allclose(w.values, mesh[0] ** 2 + mesh[1] ** 2)

    def test_indicator_box(self):
        box = grid.Box.cube(2.0, 2)
        f = grid.sample(grid.indicator_box([(-1.0, 0.5), (0.0, 2.0)]), box, 256)
        mass = f.values.sum() * f.cell_volume
        assert mass == pytest.approx(1.5 * 2.0, rel=0.02)


class TestNormsAndPairing:
    def test_lp_norm_of_indicator(self):
        box = grid.Box.cube(2.0, 2)
        f = grid.sample(grid.ball(1.0), box, 512)
        for p in (1.0, 2.0, 4.0):
            expected = math.pi ** (1 / p)
            assert grid.weighted_lp_norm(f, p) == pytest.approx(expected, rel=5e-3)

    def test_weighted_norm(self):
        box = grid.Box.cube(1.0, 1)
        f = grid.sample(grid.constant(1.0), box, 4096)
        w = grid.sample(grid.power(2.0), box, 4096)
        # integral of x^2 on [-1,1] = 2/3
        assert grid.weighted_lp_norm(f, 1.0, weight=w) == pytest.approx(2 / 3, rel=1e-4)

    def test_sup_norm(self):
        box = grid.Box.cube(1.0, 1)
        f = grid.sample(grid.power(1.0), box, 64)
        assert grid.weighted_lp_norm(f, math.inf) == pytest.approx(
            np.abs(f.values).max())

    def test_pairing_is_integral(self):
        box = grid.Box.cube(1.0, 2)
        f = grid.sample(grid.ball(0.8), box, 128)
        h = grid.sample(grid.constant(2.0), box, 128)
        assert grid.pairing(f, h) == pytest.approx(2 * f.values.sum() * f.cell_volume)

    def test_geometry_mismatch_raises(self):
        a = grid.sample(grid.constant(1.0), grid.Box.cube(1.0, 2), 32)
        b = grid.sample(grid.constant(1.0), grid.Box.cube(2.0, 2), 32)
        with pytest.raises(GeometryError):
            grid.pairing(a, b)


class TestTranslate:
    def test_translate_shifts_support(self):
        box = grid.Box.cube(2.0, 2)
        f = grid.sample(grid.ball(0.5), box, 64)
        g = grid.translate(f, (4, -2))
        assert np.array_equal(g.values[4:, :-2], f.values[:-4, 2:])
        assert np.all(g.values[:4, :] == 0)


class TestSerialization:
    def test_csv_roundtrip_values(self, tmp_path):
        box = grid.Box.cube(1.0, 2)
        f = grid.sample(grid.power(2.0), box, 8)
        path = tmp_path / "f.csv"
        grid.to_csv(f, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0].split(",") == ["i0", "i1", "x0", "x1", "value"]
        assert len(rows) == 1 + 64
        first = rows[1].split(",")
        assert float(first[4]) == pytest.approx(f.values[0, 0], rel=1e-10)

    def test_raw_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(9)
        box = grid.Box((-1.5, 0.0), (3.0, 2.0))
        f = grid.GridFunction(box, rng.standard_normal((16, 8)))
        path = tmp_path / "f.raw"
        grid.to_raw(f, path)
        g = grid.from_raw(path)
        assert g.box == f.box
        assert np.array_equal(g.values, f.values)

    def test_raw_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "junk.raw"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
        with pytest.raises(DomainError):
            grid.from_raw(path)


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            grid.TestFunctionSpec("wavelet", {})

    def test_bad_params(self):
        with pytest.raises(DomainError):
            grid.ball(-1.0)
        with pytest.raises(DomainError):
            grid.annulus(0.0)
