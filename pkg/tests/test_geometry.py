import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from biharmonic_steklov.geometry import (
    Disk,
    Ellipse,
    Scaled,
    Star,
    area,
    boundary_moment,
    centroid_shift,
    distance_to_boundary,
    domain_from_dict,
    domain_from_json,
    focal_epsilon,
    fraenkel_asymmetry,
    make_quadrature,
    make_shell_quadrature,
    perimeter,
    stability_constants,
    symmetric_difference,
)
from biharmonic_steklov.verification import default_family, normalize_area

SHAPES = default_family()


def ellipse_perimeter(a, b):
    big, small = max(a, b), min(a, b)
    return 4 * big * special.ellipe(1 - (small / big) ** 2)


def mc_symmetric_difference(domain, center, radius, samples, seed):
    """Monte-Carlo ``|Omega Delta B|`` over a box containing both sets."""
    rng = np.random.default_rng(seed)
    th = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    bp = domain.boundary_points(th)
    lo = np.minimum(bp.min(axis=0), np.asarray(center) - radius)
    hi = np.maximum(bp.max(axis=0), np.asarray(center) + radius)
    total = 0
    chunk = 1_000_000
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        pts = lo + rng.random((m, 2)) * (hi - lo)
        a = domain.contains(pts)
        b = np.hypot(*(pts - center).T) < radius
        total += np.count_nonzero(a ^ b)
    return total / samples * float(np.prod(hi - lo))


# --- measures -----------------------------------------------------------------


@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_disk_measures(R):
    assert area(Disk(R)) == pytest.approx(math.pi * R * R, rel=1e-13)
    assert perimeter(Disk(R)) == pytest.approx(2 * math.pi * R, rel=1e-13)


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, 0.5), (1.3, 1 / 1.3), (0.4, 1.7)])
def test_ellipse_measures(a, b):
    e = Ellipse(a, b)
    assert area(e) == pytest.approx(math.pi * a * b, rel=1e-12)
    assert perimeter(e) == pytest.approx(ellipse_perimeter(a, b), rel=1e-12)


def test_star_area_matches_closed_form():
    # |Omega| = (1/2) int r^2 = pi (base^2 + sum c_k^2 / 2)
    s = Star(1.0, (0.0, 0.2, 0.1), (0.05,))
    expect = math.pi * (1.0 + 0.5 * (0.2**2 + 0.1**2 + 0.05**2))
    assert area(s) == pytest.approx(expect, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.sampled_from([name for name, _ in SHAPES]))
def test_scaled_measures(s, name):
    dom = dict(SHAPES)[name]
    assert area(dom.scaled(s)) == pytest.approx(s * s * area(dom), rel=1e-10)
    assert perimeter(dom.scaled(s)) == pytest.approx(s * perimeter(dom), rel=1e-10)


@pytest.mark.parametrize("name, dom", SHAPES)
def test_quadrature_converges(name, dom):
    q1 = make_quadrature(dom)
    q2 = make_quadrature(dom, 128, 512, 2048)
    for f in (lambda q: q.area, lambda q: q.perimeter, lambda q: boundary_moment(dom, q, 2.0, check=False)):
        assert f(q1) == pytest.approx(f(q2), rel=1e-8)


def test_translated_domain_measures():
    e = Ellipse(1.5, 0.7, center=(2.0, -1.0))
    assert area(e) == pytest.approx(math.pi * 1.05, rel=1e-12)
    pts = make_quadrature(e).interior_points
    assert np.all(e.contains(pts * 0.999 + 0.001 * np.array([2.0, -1.0])))


# --- moments and constants ---------------------------------------------------


def test_moment_examples():
    assert boundary_moment(Disk(), None, 2.0) == pytest.approx(2 * math.pi, rel=1e-13)
    assert boundary_moment(Disk(2.0), None, 2.0) == pytest.approx(16 * math.pi, rel=1e-13)


def test_moment_rejects_small_exponent():
    with pytest.raises(ValueError):
        boundary_moment(Disk(), None, 1.0)


def test_moment_underresolution_warns():
    wavy = Star(1.0, tuple([0.0] * 39 + [0.02]))
    with pytest.warns(RuntimeWarning):
        boundary_moment(wavy, make_quadrature(wavy, 8, 16, 24), 2.0)


def test_stability_constant_examples():
    c22, d2 = stability_constants(2)
    assert c22 == pytest.approx(3 * (math.sqrt(2) - 1) / 8, rel=1e-15)
    assert c22 == pytest.approx(0.155330, abs=5e-7)
    assert d2 == pytest.approx(3 * (math.sqrt(2) - 1) / 16, rel=1e-15)
    assert d2 == pytest.approx(0.0776650, abs=5e-8)
    c32, _ = stability_constants(3)
    assert c32 == pytest.approx((2 ** (1 / 3) - 1) / 3, rel=1e-15)
    assert c32 == pytest.approx(0.0866403, abs=5e-8)
    with pytest.raises(ValueError):
        stability_constants(1)


@pytest.mark.parametrize("name, dom", SHAPES)
def test_boundary_moment_inequality(name, dom):
    shape = normalize_area(dom)
    x0 = centroid_shift(shape)
    moment = boundary_moment(shape, None, 2.0, center=x0)
    ratio = symmetric_difference(shape, x0, 1.0, resolution=1024) / math.pi
    c22, _ = stability_constants(2)
    assert moment >= 2 * math.pi * (1 + c22 * ratio**2) * (1 - 1e-9)


def test_ellipse_moment_inequality_example():
    e = Ellipse(1.2, 1 / 1.2)
    ratio = symmetric_difference(e, (0.0, 0.0), 1.0, resolution=1024) / math.pi
    c22, _ = stability_constants(2)
    assert boundary_moment(e, None, 2.0) >= 2 * math.pi * (1 + c22 * ratio**2)


# --- centroid -----------------------------------------------------------------


@pytest.mark.parametrize("center", [(0.0, 0.0), (1.0, 3.0)])
def test_disk_centroid(center):
    assert centroid_shift(Disk(1.0, center)) == pytest.approx(np.array(center), abs=1e-13)


def test_star_centroid_matches_adaptive_quadrature():
    s = Star(1.0, (0.3,))

    def speed(t):
        r, dr = 1 + 0.3 * math.cos(t), -0.3 * math.sin(t)
        return math.hypot(r, dr)

    L = integrate.quad(speed, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    mx = integrate.quad(lambda t: (1 + 0.3 * math.cos(t)) * math.cos(t) * speed(t), 0, 2 * math.pi,
                        epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    c = centroid_shift(s)
    assert c[0] == pytest.approx(mx / L, abs=1e-8)
    assert abs(c[0]) > 0.1
    assert abs(c[1]) < 1e-14


# --- asymmetry ----------------------------------------------------------------


@pytest.mark.parametrize("dom", [Disk(), Disk(1.0, (0.37, -1.2)), Disk(2.5)])
def test_disk_asymmetry_vanishes(dom):
    res = fraenkel_asymmetry(dom, resolution=512)
    assert 0.0 <= res.value <= 2 / 512


def test_ellipse_asymmetry_matches_monte_carlo():
    e = Ellipse(2.0, 0.5)
    res = fraenkel_asymmetry(e, resolution=2048)
    mc = mc_symmetric_difference(e, res.center, 1.0, 10_000_000, seed=12345) / math.pi
    assert res.value == pytest.approx(mc, abs=0.005)
    assert res.value > 0.3
    assert res.radius == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize("name, dom", SHAPES[1:7])
def test_asymmetry_translation_and_scale_invariant(name, dom):
    base = fraenkel_asymmetry(dom, resolution=768)
    shifted = type(dom)(**{**dom.__dict__, "center": (0.7, -0.4)})
    moved = fraenkel_asymmetry(shifted, resolution=768)
    scaled = fraenkel_asymmetry(dom.scaled(2.3), resolution=768)
    tol = 2 * base.error
    assert moved.value == pytest.approx(base.value, abs=tol)
    assert scaled.value == pytest.approx(base.value, abs=tol)


# --- serialization ------------------------------------------------------------


@pytest.mark.parametrize(
    "dom",
    [Disk(2.0, (1.0, 0.5)), Ellipse(2.0, 0.5), Star(1.0, (0.0, 0.2), (0.1,), (0.5, 0.0)), Scaled(Ellipse(1.2, 0.8), 1.7)],
)
def test_json_round_trip(dom):
    back = domain_from_json(dom.to_json())
    assert back == dom
    th = np.linspace(0, 2 * np.pi, 17)
    np.testing.assert_array_equal(back.radial(th)[0], dom.radial(th)[0])


def test_json_schema_example():
    e = domain_from_json('{"kind": "ellipse", "a": 2.0, "b": 0.5, "center": [0, 0]}')
    assert e == Ellipse(2.0, 0.5)
    s = domain_from_dict({"kind": "star", "fourier_cos": [0.0, 0.0, 0.25], "fourier_sin": [], "base": 1.0})
    assert s.radial(np.array([0.0]))[0][0] == pytest.approx(1.25)


@pytest.mark.parametrize("bad", [{"kind": "polygon"}, {"kind": "disk", "center": [0, 0, 0]}])
def test_bad_domain_json(bad):
    with pytest.raises(ValueError):
        domain_from_dict(bad)


@pytest.mark.parametrize("make", [lambda: Disk(-1.0), lambda: Ellipse(1.0, 0.0), lambda: Star(1.0, (1.5,))])
def test_invalid_domains_rejected(make):
    with pytest.raises(ValueError):
        make().check()


# --- Neumann support ----------------------------------------------------------


def test_distance_to_boundary_on_disk():
    pts = np.array([[0.0, 0.0], [0.5, 0.0], [0.3, -0.4], [0.0, 0.95]])
    np.testing.assert_allclose(distance_to_boundary(Disk(), pts), 1 - np.hypot(*pts.T), atol=1e-12)


def test_focal_epsilon():
    assert focal_epsilon(Disk(2.0)) == pytest.approx(1.0, rel=1e-12)
    # ellipse minimal radius of curvature b**2 / a
    assert focal_epsilon(Ellipse(2.0, 1.0)) == pytest.approx(0.25, rel=1e-6)


@pytest.mark.parametrize("eps", [0.2, 0.05])
def test_shell_quadrature_areas(eps):
    quad, shell = make_shell_quadrature(Disk(), eps, 32, 128)
    assert quad.area == pytest.approx(math.pi, rel=1e-12)
    assert quad.interior_weights[shell].sum() == pytest.approx(math.pi * (1 - (1 - eps) ** 2), rel=1e-10)


def test_shell_rejects_large_eps():
    with pytest.raises(ValueError):
        make_shell_quadrature(Disk(), 1.5, 16, 32)


def test_no_warning_on_resolved_moment():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        boundary_moment(Ellipse(1.3, 0.7), None, 2.0)
