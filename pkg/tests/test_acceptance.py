"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest

from biharmonic_steklov.ball import mode_eigenvalue_raw, mode_eigenvalue_simplified
from biharmonic_steklov.geometry import Disk, Ellipse
from biharmonic_steklov.params import AdmissibilityError, PlateParams, SolverError
from biharmonic_steklov.solver import assemble, quotient_min_eigenvalue, solve_pencil, solve_steklov
from biharmonic_steklov.special import bessel_i_ultra, recursion_residuals, ultra_i
from biharmonic_steklov.verification import (
    default_family,
    isoperimetric_sweep,
    mass_concentration_sweep,
    reciprocal_sum_bound,
    scaling_check,
)

from conftest import ACCEPTANCE_LINES


def _grid():
    out = []
    for n in (2, 3, 4, 5):
        lo = -1.0 / (n - 1)
        for tau in (0.1, 1.0, 5.0, 25.0):
            for s in (lo + 0.01 * (1 - lo), 0.0, 0.99):
                out.append(PlateParams(n, tau, s))
    return out


GRID = _grid()


@pytest.fixture
def report(capsys):
    start = time.perf_counter()
    lines = []

    def emit(num, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title} ({detail}; {time.perf_counter() - start:.1f}s)"
        lines.append(line)
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def test_01_first_mode_equals_tau(report):
    assert len(GRID) == 48
    # 60 combinations: the 48-point grid plus 12 interior sigma values
    combos = GRID + [PlateParams(n, tau, 0.5) for n in (2, 3, 4, 5) for tau in (0.1, 1.0, 5.0)]
    assert len(combos) == 60
    worst = max(abs(mode_eigenvalue_raw(p, 1) - p.tau) / p.tau for p in combos)
    assert report(1, "lambda_(1) = tau on 60 parameter combos", worst <= 1e-12, f"max rel err {worst:.2e} <= 1e-12")


def test_02_spectral_gap(report):
    margins = [
        (mode_eigenvalue_simplified(p, l) - mode_eigenvalue_simplified(p, 1)) / p.tau
        for p in GRID
        for l in range(2, 21)
    ]
    worst = min(margins)
    assert report(2, "lambda_(l) > lambda_(1) for l = 2..20", worst > 0.0, f"min relative gap {worst:.3e} > 0")


def test_03_raw_vs_simplified(report):
    worst = 0.0
    for p in GRID:
        for l in range(0, 21):
            raw, simp = mode_eigenvalue_raw(p, l), mode_eigenvalue_simplified(p, l)
            if simp != 0.0:
                worst = max(worst, abs(raw - simp) / abs(simp))
            else:
                worst = max(worst, abs(raw))
    assert report(3, "raw and simplified eigenvalue formulas agree", worst <= 1e-10, f"max rel err {worst:.2e} <= 1e-10")


def test_04_bessel_recursions(report):
    worst = 0.0
    for n in range(2, 7):
        for l in range(0, 13):
            for z in np.geomspace(1e-3, 50.0, 25):
                worst = max(worst, max(map(abs, recursion_residuals(n, l, float(z), relative=True))))
    ratios = []
    for n in (2, 3, 5):
        for l in (0, 2, 6):
            for z in (0.3, 2.0, 9.0):
                d1 = bessel_i_ultra(n, l, z).d1
                errs = []
                for h in (2e-2 * z, 1e-2 * z):
                    fd = (ultra_i(n, l, z + h) - ultra_i(n, l, z - h)) / (2 * h)
                    errs.append(abs(fd - d1))
                ratios.append(errs[0] / errs[1])
    second_order = all(3.6 <= r <= 4.4 for r in ratios)
    ok = worst <= 1e-11 and second_order
    detail = f"max rel residual {worst:.2e} <= 1e-11; FD error ratio on halving h in [{min(ratios):.3f}, {max(ratios):.3f}]"
    assert report(4, "Bessel recursions and O(h^2) finite differences", ok, detail)


def test_05_disk_ritz(report):
    disk = Disk()
    worst, sizes = 0.0, []
    for tau in (0.5, 1.0, 5.0):
        for sigma in (-0.3, 0.0, 0.5):
            spec = solve_steklov(disk, PlateParams(2, tau, sigma), degree=14)
            worst = max(worst, abs(spec.lam(2) - tau) / tau)
            sizes.append(len(spec.cluster_of(1)))
    ok = worst <= 1e-3 and all(s == 2 for s in sizes)
    assert report(5, "disk Ritz lambda_2 = tau at degree 14", ok, f"max rel err {worst:.2e} <= 1e-3; cluster sizes {set(sizes)}")


def test_06_isoperimetric_sweep(report):
    reports = isoperimetric_sweep(default_family(), PlateParams(2, 1.0, 0.3), threads=4)
    margins = [r.margin / r.lam2_ball for r in reports]
    disk = reports[0]
    ok = (
        len(reports) == 12
        and all(r.error is None for r in reports)
        and min(margins) >= -1e-3
        and abs(disk.margin) <= 1e-3 * disk.lam2_ball
    )
    detail = f"min margin/lambda_2(ball) {min(margins):.3e} >= -1e-3; disk margin {disk.margin:.1e}"
    assert report(6, "stability inequality on 12 shapes of area pi", ok, detail)


def test_07_reciprocal_sum(report):
    worst = 0.0
    for tau in (1.0, 4.0):
        res = reciprocal_sum_bound(Disk(), PlateParams(2, tau, 0.0))
        target = 2.0 / tau
        worst = max(worst, abs(res.bound - target) / target, abs(res.total - target) / target)
    assert report(7, "reciprocal sum tight on the disk", worst <= 1e-3, f"max rel err {worst:.2e} <= 1e-3")


def test_08_scaling_law(report):
    worst = 0.0
    for dom in (Disk(), Ellipse(1.3, 0.7)):
        for s in (0.5, 2.0):
            worst = max(worst, scaling_check(dom, PlateParams(2, 1.5, 0.2), s).rel_error)
    assert report(8, "dilation law for lambda_2", worst <= 1e-6, f"max rel err {worst:.2e} <= 1e-6")


def test_09_mass_concentration(report):
    disk = Disk()
    try:
        _, rows = mass_concentration_sweep(disk, PlateParams(2, 1.0, 0.0), 2 * math.pi, [0.2, 0.1, 0.05, 0.025])
    except AssertionError as exc:
        report(9, "mass-concentration gaps strictly decreasing", False, str(exc))
        raise
    gaps = [r.gap for r in rows]
    ok = all(b < a for a, b in zip(gaps, gaps[1:]))
    assert report(9, "mass-concentration gaps strictly decreasing", ok, "gaps " + ", ".join(f"{g:.4f}" for g in gaps))


def test_10_inadmissible_sigma(report):
    checks = []
    for sigma in (1.5, -1.5):
        p = PlateParams(2, 1.0, sigma)
        try:
            p.validate()
            rejected = False
        except AdmissibilityError:
            rejected = True
        op = assemble(Disk(), None, p, degree=8, validate=False)
        indefinite = quotient_min_eigenvalue(op) < 0.0
        try:
            solve_pencil(op)
            raised = False
        except SolverError:
            raised = True
        checks.append(rejected and indefinite and raised)
    assert report(10, "inadmissible sigma rejected and detected as indefinite", all(checks), "sigma = 1.5, -1.5")
