"""Dyadic machinery: stopping cubes vs exhaustive oracle, sparsity, CZ."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from sphmax import dyadic, grid
from sphmax.dyadic import DyadicCube, DyadicLattice
from sphmax.errors import DomainError, GeometryError


def _step_function(rng, box, cells, max_depth):
    """Random positive step function, constant on the finest dyadic cells.

    Values are quantized to multiples of 2^-12 so that cube means and the
    good/bad splitting stay exact in double precision.
    """
    ndim = box.ndim
    per = cells >> max_depth
    coarse = rng.lognormal(0.0, 1.0, size=(1 << max_depth,) * ndim)
    coarse = np.maximum(np.round(coarse * 4096.0), 1.0) / 4096.0
    values = coarse
    for axis in range(ndim):
        values = np.repeat(values, per, axis=axis)
    return grid.GridFunction(box, values)


def _oracle_stopping(f1, f2, h, exps, lattice, root, C0):
    """Exhaustive enumeration: maximal strict subcubes whose local average

    exceeds C0 times the root's, with no triggering strict ancestor."""
    fns = ((f1, exps[0]), (f2, exps[1]), (h, exps[2]))
    base = [dyadic.local_average(g, root, p, lattice) for g, p in fns]

    def hits(q):
        return any(dyadic.local_average(g, q, p, lattice) > float(C0) * b
                   for (g, p), b in zip(fns, base))

    out = []
    for d in range(root.depth + 1, lattice.max_depth + 1):
        for idx in itertools.product(range(1 << d), repeat=lattice.ndim):
            q = DyadicCube(d, idx)
            if not root.contains(q) or not hits(q):
                continue
            if any(hits(q.ancestor(a)) for a in range(root.depth + 1, d)):
                continue
            out.append(q)
    return out


class TestDyadicCube:
    def test_children_cover_parent(self):
        q = DyadicCube(1, (0, 1))
        kids = q.children()
        assert len(kids) == 4
        assert all(k.depth == 2 and q.contains(k) for k in kids)
        assert {k.index for k in kids} == {(0, 2), (0, 3), (1, 2), (1, 3)}

    def test_ancestor_and_contains(self):
        q = DyadicCube(3, (5, 6))
        assert q.ancestor(1) == DyadicCube(1, (1, 1))
        assert DyadicCube(0, (0, 0)).contains(q)
        assert not DyadicCube(1, (0, 0)).contains(q)
        with pytest.raises(DomainError):
            q.ancestor(4)


class TestLattice:
    def test_geometry_accounting_exact(self):
        f = grid.sample(grid.constant(1.0), grid.Box.cube(2.0, 2), 32)
        lat = DyadicLattice(f, 3)
        q = DyadicCube(2, (1, 3))
        assert lat.side(q) == Fraction(1)
        assert lat.measure(q) == Fraction(1)
        assert lat.cube_lo(q) == (-1.0, 1.0)
        assert lat.grid_slices(q) == (slice(8, 16), slice(24, 32))
        assert len(lat.finest_cells(q)) == 4
        assert lat.finest_cell_measure() * 64 == lat.measure(lat.root())

    def test_rejects_bad_geometry(self):
        f = grid.GridFunction(grid.Box((0.0, 0.0), (1.0, 2.0)), np.ones((8, 8)))
        with pytest.raises(GeometryError):
            DyadicLattice(f, 1)
        g = grid.sample(grid.constant(1.0), grid.Box.cube(1.0, 1), 8)
        with pytest.raises(GeometryError):
            DyadicLattice(g, 3)  # only one cell per finest cube

    def test_iter_cubes_counts(self):
        f = grid.sample(grid.constant(1.0), grid.Box.cube(1.0, 2), 16)
        lat = DyadicLattice(f, 2)
        assert sum(1 for _ in lat.iter_cubes()) == 1 + 4 + 16


class TestLocalAverage:
    def test_matches_direct_mean(self):
        rng = np.random.default_rng(2)
        box = grid.Box.cube(1.0, 1)
        f = grid.GridFunction(box, rng.lognormal(size=16))
        lat = DyadicLattice(f, 2)
        q = DyadicCube(2, (1,))
        block = f.values[4:8]
        for r in (1.0, 1.5, 2.0):
            expected = np.mean(block ** r) ** (1 / r)
            assert dyadic.local_average(f, q, r, lat) == pytest.approx(expected)


class TestStoppingCubes:
    def _spike(self):
        # f = 8 on the first of 8 cells of [0,1], zero elsewhere
        box = grid.Box((0.0,), (1.0,))
        values = np.zeros(8)
        values[0] = 8.0
        f = grid.GridFunction(box, values)
        one = grid.GridFunction(box, np.ones(8))
        return f, one, DyadicLattice(f, 2)

    def test_hand_worked_spike(self):
        f, one, lat = self._spike()
        cubes = dyadic.stopping_cubes(f, one, one, (1, 1, 1), lat, C0=1.5)
        # <f>_root = 1, left depth-1 half has average 2 > 1.5: selected,
        # recursion does not look below it
        assert cubes == [DyadicCube(1, (0,))]

    def test_ties_are_not_selected(self):
        f, one, lat = self._spike()
        cubes = dyadic.stopping_cubes(f, one, one, (1, 1, 1), lat, C0=2.0)
        # depth-1 average equals the threshold exactly -> skipped; the
        # depth-2 quarter with average 4 triggers instead
        assert cubes == [DyadicCube(2, (0,))]

    def test_choose_C0_hand_worked(self):
        f, one, lat = self._spike()
        c0, cubes = dyadic.choose_C0(f, one, one, (1, 1, 1), lat)
        # schedule passes 65/64, ..., 31/16: all select the depth-1 half
        # (measure exactly 1/2, not strictly less); first success is c0 = 2
        assert c0 == Fraction(2)
        assert cubes == [DyadicCube(2, (0,))]

    @pytest.mark.parametrize("ndim,cells,depth", [(1, 128, 6), (2, 64, 4)])
    def test_matches_exhaustive_oracle(self, ndim, cells, depth):
        rng = np.random.default_rng(100 + ndim)
        box = grid.Box.cube(1.0, ndim)
        for _ in range(10):
            f1 = _step_function(rng, box, cells, depth)
            f2 = _step_function(rng, box, cells, depth)
            h = _step_function(rng, box, cells, depth)
            lat = DyadicLattice(f1, depth)
            exps = (1.0, 2.0, 1.5)
            c0, cubes = dyadic.choose_C0(f1, f2, h, exps, lat)
            oracle = _oracle_stopping(f1, f2, h, exps, lat, lat.root(), c0)
            assert sorted(cubes, key=lambda q: (q.depth, q.index)) == \
                sorted(oracle, key=lambda q: (q.depth, q.index))


class TestSparseFamily:
    def test_verify_sparsity_on_random_corpus(self):
        rng = np.random.default_rng(77)
        box = grid.Box.cube(1.0, 1)
        for _ in range(20):
            f1 = _step_function(rng, box, 128, 6)
            f2 = _step_function(rng, box, 128, 6)
            h = _step_function(rng, box, 128, 6)
            lat = DyadicLattice(f1, 6)
            fam = dyadic.build_sparse_family(f1, f2, h, lat, (1.0, 2.0, 1.5))
            assert fam.eta == Fraction(1, 2)
            assert dyadic.verify_sparsity(fam, lat)

    def test_tampered_family_fails(self):
        rng = np.random.default_rng(5)
        box = grid.Box.cube(1.0, 1)
        f = _step_function(rng, box, 128, 6)
        lat = DyadicLattice(f, 6)
        fam = dyadic.build_sparse_family(f, f, f, lat, (1.0, 1.0, 1.0))
        assert dyadic.verify_sparsity(fam, lat)
        # duplicate a node: witnesses now overlap
        bad = dyadic.SparseFamily(nodes=fam.nodes + [fam.nodes[0]], eta=fam.eta)
        assert not dyadic.verify_sparsity(bad, lat)
        # shrink a witness below eta |S|
        starved = dyadic.SparseFamily(
            nodes=[dyadic.SparseNode(fam.nodes[0].cube, fam.nodes[0].C0,
                                     frozenset(list(fam.nodes[0].witness)[:2]))],
            eta=fam.eta)
        assert not dyadic.verify_sparsity(starved, lat)

    def test_sparse_form_single_cube(self):
        box = grid.Box((0.0,), (1.0,))
        f = grid.GridFunction(box, np.full(8, 3.0))
        lat = DyadicLattice(f, 2)
        fam = dyadic.SparseFamily(
            nodes=[dyadic.SparseNode(lat.root(), Fraction(2),
                                     lat.finest_cells(lat.root()))])
        val = dyadic.sparse_form(fam, f, f, f, (1.0, 2.0, 4.0), lat)
        assert val == pytest.approx(27.0)

    def test_family_csv_header(self, tmp_path):
        rng = np.random.default_rng(6)
        box = grid.Box.cube(1.0, 1)
        f = _step_function(rng, box, 128, 6)
        lat = DyadicLattice(f, 6)
        fam = dyadic.build_sparse_family(f, f, f, lat, (1.0, 1.0, 1.0))
        path = tmp_path / "fam.csv"
        dyadic.family_to_csv(fam, lat, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "depth,corner0,C0,witness_measure,cube_measure"
        assert len(lines) == 1 + len(fam.nodes)


class TestCZ:
    def test_hand_worked_spike(self):
        box = grid.Box((0.0,), (1.0,))
        values = np.zeros(8)
        values[0] = 8.0
        f = grid.GridFunction(box, values)
        lat = DyadicLattice(f, 2)
        cz = dyadic.cz_decompose(f, lat, r=1.0, C0=1.0)
        assert cz.threshold == pytest.approx(2.0)
        assert cz.cubes == [DyadicCube(2, (0,))]
        assert np.allclose(cz.good.values, [4, 4, 0, 0, 0, 0, 0, 0])
        # sup bound 2^{n/r} 2 C0 <f> = 4, attained here
        assert np.abs(cz.good.values).max() <= 2.0 ** (1 / 1.0) * 2.0 * 1.0 * 1.0

    def test_exact_recombination_random(self):
        rng = np.random.default_rng(8)
        box = grid.Box.cube(1.0, 2)
        for _ in range(10):
            f = _step_function(rng, box, 64, 4)
            lat = DyadicLattice(f, 4)
            cz = dyadic.cz_decompose(f, lat, r=1.5, C0=1.25)
            assert np.array_equal(cz.good.values + cz.bad_total(), f.values)
            for cube in cz.cubes:
                block_bad = sum(part.values[lat.grid_slices(cube)]
                                for part in cz.bad_by_depth.values())
                scale = np.abs(f.values[lat.grid_slices(cube)]).mean() or 1.0
                assert abs(block_bad.mean()) <= 1e-12 * scale
