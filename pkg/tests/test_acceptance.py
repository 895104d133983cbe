"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest -v tests/test_acceptance.py``; every criterion below
asserts its stated tolerance and prints a single summary line.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from sphmax import cli, dyadic, experiments, grid, spherical, weights
from sphmax import exponents as expo
from sphmax.dyadic import DyadicCube, DyadicLattice


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d} ({name}): {status} {detail}".rstrip())
    return ok


# ---------------------------------------------------------------- criterion 1

def test_criterion_01_arc_length_oracle():
    started = time.time()
    box = grid.Box.cube(4.0, 2)
    f = grid.sample(grid.ball(1.0), box, 256)
    quad = spherical.sphere_quadrature(2, 512)
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0],
                    [math.sqrt(0.5), math.sqrt(0.5)]])
    got = spherical.average_at_points(f, pts, 1.0, quad)
    # circle of radius 1 around |x| = 1 meets B(0,1) in an arc of angle
    # 2*arccos(1/2): exactly one third of the circle
    want = math.acos((1.0 + 1.0 - 1.0) / 2.0) / math.pi
    err = float(np.max(np.abs(got - want)))
    elapsed = time.time() - started
    ok = err <= 1e-3 and elapsed < 5.0
    assert _report(1, "arc-length oracle", ok,
                   f"err={err:.2e} time={elapsed:.2f}s"), (err, elapsed)
    assert want == pytest.approx(1 / 3)


# ------------------------------------------------------------ criteria 2 & 3

KNAPP_EXPS = (1 / 0.45, 1 / 0.45, 10 / 3)  # (1/r_i, 1/s_i) = (0.45, 0.65)
KNAPP_DELTAS = [2.0 ** -j for j in range(3, 8)]


def test_criterion_02_knapp_annulus_ball():
    started = time.time()
    run = experiments.knapp_run("lac_annulus_ball", 2, KNAPP_DELTAS, KNAPP_EXPS)
    elapsed = time.time() - started
    want_sparse = 0.45 + 0.45 + 2 * 0.3
    ok = (
        abs(run.pairing_slope - 2.0) <= 0.10
        and abs(run.sparse_slope - want_sparse) <= 0.15
        and experiments.slope_consistency(run)
        and elapsed < 120.0
    )
    assert _report(2, "Knapp annulus/ball slopes", ok,
                   f"pairing={run.pairing_slope:.3f} sparse={run.sparse_slope:.3f} "
                   f"time={elapsed:.1f}s"), run


def test_criterion_03_knapp_ball_annulus():
    started = time.time()
    run = experiments.knapp_run("lac_ball_annulus", 2, KNAPP_DELTAS, KNAPP_EXPS)
    elapsed = time.time() - started
    ok = abs(run.pairing_slope - 3.0) <= 0.15 and elapsed < 120.0
    assert _report(3, "Knapp ball/annulus slope", ok,
                   f"pairing={run.pairing_slope:.3f} time={elapsed:.1f}s"), run


# ------------------------------------------------------------ criteria 4 & 5

def _dyadic_step(rng, box, cells, max_depth):
    """Positive step function constant on finest cells, dyadic values."""
    ndim = box.ndim
    per = cells >> max_depth
    coarse = rng.lognormal(0.0, 1.0, size=(1 << max_depth,) * ndim)
    coarse = np.maximum(np.round(coarse * 4096.0), 1.0) / 4096.0
    values = coarse
    for axis in range(ndim):
        values = np.repeat(values, per, axis=axis)
    return grid.GridFunction(box, values)


def _oracle_stopping(f1, f2, h, exps, lattice, root, C0):
    """Exhaustive enumeration of maximal triggering subcubes."""
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


def _corpus():
    box1, box2 = grid.Box.cube(1.0, 1), grid.Box.cube(1.0, 2)
    rng = np.random.default_rng(20240817)
    for i in range(200):
        if i < 100:
            box, cells, depth = box1, 128, 6
        else:
            box, cells, depth = box2, 64, 4
        yield (
            _dyadic_step(rng, box, cells, depth),
            _dyadic_step(rng, box, cells, depth),
            _dyadic_step(rng, box, cells, depth),
            depth,
        )


EXPS_STOPPING = (1.0, 2.0, 1.5)


def test_criterion_04_stopping_time_corpus():
    mismatches = 0
    sparsity_failures = 0
    for f1, f2, h, depth in _corpus():
        lattice = DyadicLattice(f1, depth)
        c0, cubes = dyadic.choose_C0(f1, f2, h, EXPS_STOPPING, lattice)
        oracle = _oracle_stopping(f1, f2, h, EXPS_STOPPING, lattice,
                                  lattice.root(), c0)
        key = lambda q: (q.depth, q.index)
        if sorted(cubes, key=key) != sorted(oracle, key=key):
            mismatches += 1
        family = dyadic.build_sparse_family(f1, f2, h, lattice, EXPS_STOPPING)
        if family.eta != Fraction(1, 2) or not dyadic.verify_sparsity(family, lattice):
            sparsity_failures += 1
    ok = mismatches == 0 and sparsity_failures == 0
    assert _report(4, "stopping-time corpus", ok,
                   f"oracle mismatches={mismatches}/200 "
                   f"sparsity failures={sparsity_failures}/200")


def test_criterion_05_cz_decomposition_corpus():
    exact_failures = 0
    mean_failures = 0
    sup_failures = 0
    r = 1.5
    for f1, f2, h, depth in _corpus():
        lattice = DyadicLattice(f1, depth)
        c0, _ = dyadic.choose_C0(f1, f2, h, EXPS_STOPPING, lattice)
        cz = dyadic.cz_decompose(f1, lattice, r=r, C0=float(c0))
        if not np.array_equal(cz.good.values + cz.bad_total(), f1.values):
            exact_failures += 1
        for cube in cz.cubes:
            sl = lattice.grid_slices(cube)
            block_bad = sum(part.values[sl] for part in cz.bad_by_depth.values())
            scale = float(np.abs(f1.values[sl]).mean())
            if abs(float(block_bad.mean())) > 1e-12 * scale:
                mean_failures += 1
        base = dyadic.local_average(f1, lattice.root(), r, lattice)
        bound = 2.0 ** (f1.ndim / r) * 2.0 * float(c0) * base
        if float(np.abs(cz.good.values).max()) > bound * (1 + 1e-12):
            sup_failures += 1
    ok = exact_failures == 0 and mean_failures == 0 and sup_failures == 0
    assert _report(5, "CZ decomposition corpus", ok,
                   f"exactness={exact_failures} mean-zero={mean_failures} "
                   f"sup-bound={sup_failures} (failures/200)")


# ---------------------------------------------------------------- criterion 6

def test_criterion_06_exponent_arithmetic():
    params = expo.lmo_params(4, 4, 3, 3, Fraction(3, 2))
    lmo_ok = (
        params.theta1 == 4
        and 1 / params.r3 == Fraction(2, 3)
        and 1 / params.r == Fraction(4, 3)
    )
    r = expo.section5_ranges(2, 2, 1, 1)
    ranges_ok = (
        r.theorem == (Fraction(-2), Fraction(2, 3))
        and r.product == (Fraction(-2, 3), Fraction(2, 3))
        and r.in_theorem_only is not None
    )
    phi_ok = True
    eps = Fraction(1, 10**13)
    for n in range(2, 9):
        b_lac = Fraction(n, n + 1)
        if abs(float(expo.phi("lacunary", n, b_lac - eps))
               - float(expo.phi("lacunary", n, b_lac + eps))) > 1e-12:
            phi_ok = False
        b_full = Fraction(n * n - n, n * n + 1)
        if abs(float(expo.phi("full", n, b_full - eps))
               - float(expo.phi("full", n, b_full + eps))) > 1e-12:
            phi_ok = False
    ok = lmo_ok and ranges_ok and phi_ok
    assert _report(6, "exponent arithmetic", ok,
                   f"lmo={lmo_ok} ranges={ranges_ok} breakpoints={phi_ok}")


# ---------------------------------------------------------------- criterion 7

def test_criterion_07_ap_boundary():
    fam = weights.nested_centered(2)
    levels = (2, 3, 4, 5, 6, 7)  # six nested refinements
    scan_in = weights.characteristic_scan(
        lambda f: weights.ap_characteristic_numeric(weights.PowerWeight(1.0), 2.0, f),
        fam, levels)
    scan_out = weights.characteristic_scan(
        lambda f: weights.ap_characteristic_numeric(weights.PowerWeight(2.2), 2.0, f),
        fam, levels)
    rel_change = abs(scan_in[-1] - scan_in[-2]) / scan_in[-1]
    growth = scan_out[-1] / scan_out[0]
    ok = rel_change < 0.05 and growth >= 10.0
    assert _report(7, "A_p boundary behavior", ok,
                   f"in-class change={rel_change:.3%} out-of-class growth={growth:.1f}x")


# ---------------------------------------------------------------- criterion 8

def test_criterion_08_pointwise_lattice():
    box = grid.Box.cube(2.0, 2)
    cells = 96
    rng = np.random.default_rng(5)
    corpus = [grid.sample(s, box, cells) for s in (
        grid.ball(0.5),
        grid.ball(1.0),
        grid.ball(0.4, center=(0.5, 0.5)),
        grid.annulus(0.2),
        grid.annulus(0.1, center_radius=0.7),
        grid.indicator_box([(-1.0, 0.0), (-0.5, 1.0)]),
        grid.knapp_box_r1(0.125, C=1.0),
        grid.log_weight(),
        grid.power(0.5),
        grid.constant(1.0),
    )]
    corpus[0] = corpus[0].like(corpus[0].values + rng.random((cells, cells)) * 0.1)
    quad = spherical.sphere_quadrature(2, 256)
    rad_lac = spherical.dyadic_radii(-3, 2)
    rad_full = spherical.geometric_radii(-3, 2, 8)
    lattice = DyadicLattice(corpus[0], 4)
    violations = 0
    for i in range(10):
        f1, f2 = corpus[i], corpus[(i + 3) % 10]
        m_lac = spherical.maximal(f1, f2, quad, rad_lac).values
        m_full = spherical.maximal(f1, f2, quad, rad_full).values
        prod = (spherical.linear_maximal(f1, quad, rad_full).values
                * spherical.linear_maximal(f2, quad, rad_full).values)
        bi = spherical.bilinear_hl(f1, f2, lattice).values
        hl_prod = (spherical.hl_maximal(f1, lattice).values
                   * spherical.hl_maximal(f2, lattice).values)
        if not (np.all(m_lac <= m_full) and np.all(m_full <= prod)
                and np.all(bi <= hl_prod)):
            violations += 1
    ok = violations == 0
    assert _report(8, "pointwise operator lattice", ok,
                   f"violating pairs={violations}/10")


# ---------------------------------------------------------------- criterion 9

def test_criterion_09_radial_dilation():
    started = time.time()
    run = experiments.radial_run(
        2, -0.9, -0.9, [2.0 ** j for j in range(-3, 4)], cells=256)
    elapsed = time.time() - started
    ok = abs(run.trend_slope) <= 0.2 and elapsed < 60.0 and run.in_range
    assert _report(9, "radial dilation invariance", ok,
                   f"slope={run.trend_slope:.2e} time={elapsed:.1f}s"), run


# --------------------------------------------------------------- criterion 10

def test_criterion_10_unboundedness_probe():
    probe = experiments.unboundedness_probe(resolutions=(128, 256, 512))
    ok = (probe.strictly_increasing and probe.growth >= 2.0
          and probe.control_stable)
    assert _report(10, "unboundedness probe", ok,
                   f"values={[f'{v:.2f}' for v in probe.values]} "
                   f"growth={probe.growth:.2f} control_stable={probe.control_stable}")


# --------------------------------------------------------------- criterion 11

def test_criterion_11_thread_determinism(tmp_path):
    results = {}
    for threads in ("1", "8"):
        out = tmp_path / f"t{threads}"
        rc = cli.main(["--out", str(out), "--threads", threads,
                       "maximal", "--cells", "96", "--quad", "256",
                       "--fn1", "annulus:delta=0.2", "--fn2", "ball:rho=1"])
        assert rc == 0
        results[threads] = (out / "maximal.csv").read_bytes()
    ok = results["1"] == results["8"]
    assert _report(11, "thread determinism", ok,
                   f"bytes={len(results['1'])} identical={ok}")
