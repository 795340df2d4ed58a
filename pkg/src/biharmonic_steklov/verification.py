"""End-to-end numerical checks of the isoperimetric results.

Each check returns plain data (dataclasses / lists of rows) so that the CLI
can serialize it; assertions that encode theorems raise
:class:`TheoremViolation`.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .ball import ball_spectrum
from .geometry import (
    DEFAULT_RESOLUTION,
    Disk,
    Domain,
    Ellipse,
    Star,
    area,
    boundary_moment,
    centroid_shift,
    fraenkel_asymmetry,
    make_quadrature,
    stability_constants,
)
from .params import PlateParams
from .solver import RitzBasis, assemble, monomial_coefficients, solve_neumann_eps, solve_steklov

log = logging.getLogger(__name__)

RELATIVE_SOLVER_TOL = 1e-3


class TheoremViolation(AssertionError):
    """A theorem-backed inequality failed numerically."""


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("STEKLOV_THREADS", "1"))
    return max(1, threads)


def _map(fn: Callable, items: Sequence, threads: int | None) -> list:
    n = _threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def ball_lambda2(params: PlateParams, measure: float) -> float:
    """``lambda_2`` of the planar disk of area ``measure``.

    With ``R = sqrt(measure / pi)`` the scaling law gives
    ``lambda_2(tau, B_R) = R**-3 lambda_2(R**2 tau, B_1)``.
    """
    R = math.sqrt(measure / math.pi)
    unit = PlateParams(params.n, params.tau * R * R, params.sigma)
    return float(ball_spectrum(unit, 2).eigenvalues[1]) / R**3


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReciprocalSum:
    bound: float
    total: float
    lam2: float
    lam3: float

    @property
    def gap(self) -> float:
        return self.total - self.bound


def reciprocal_sum_bound(
    domain: Domain,
    params: PlateParams,
    degree: int = 14,
    quad=None,
    tol: float = RELATIVE_SOLVER_TOL,
) -> ReciprocalSum:
    """Compare ``1/lambda_2 + 1/lambda_3`` with the coordinate-trial bound.

    The bound ``int |x - x0|**2 dS / (tau |Omega|)`` uses coordinates about
    the boundary centroid ``x0``, so the trial functions have zero boundary
    mean.  Raises :class:`TheoremViolation` if the sum falls below the bound
    by more than ``tol`` relatively.
    """
    params.validate()
    quad = quad or make_quadrature(domain)
    x0 = centroid_shift(domain, quad)
    bound = boundary_moment(domain, quad, 2.0, center=x0) / (params.tau * quad.area)
    spec = solve_steklov(domain, params, degree=degree, quad=quad)
    lam2, lam3 = spec.lam(2), spec.lam(3)
    total = 1.0 / lam2 + 1.0 / lam3
    if total < bound * (1.0 - tol):
        raise TheoremViolation(f"reciprocal sum {total!r} below bound {bound!r}")
    return ReciprocalSum(bound=bound, total=total, lam2=lam2, lam3=lam3)


def coordinate_trial_check(domain: Domain, params: PlateParams, quad=None) -> tuple[np.ndarray, np.ndarray]:
    """Energy Gram matrix and boundary means of ``v_k = (tau |Omega|)**-1/2 (x_k - x0_k)``.

    Both come from the assembled forms (degree-1 basis about the boundary
    centroid ``x0``): the Gram matrix should be the identity and the means zero.
    """
    quad = quad or make_quadrature(domain)
    basis = RitzBasis.for_domain(domain, 1, quad)
    op = assemble(domain, quad, params, density=1.0, basis=basis)
    x0 = centroid_shift(domain, quad)
    scale = 1.0 / math.sqrt(params.tau * quad.area)
    coords = np.array(
        [monomial_coefficients(basis, {(1, 0): 1.0, (0, 0): -x0[0]}),
         monomial_coefficients(basis, {(0, 1): 1.0, (0, 0): -x0[1]})]
    ) * scale
    gram = coords @ op.stiffness @ coords.T
    means = (coords @ op.mass[:, 0]) / quad.perimeter
    return gram, means


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingResult:
    s: float
    lam2: float
    lam2_scaled: float
    rel_error: float


def scaling_check(domain: Domain, params: PlateParams, s: float, degree: int = 14) -> ScalingResult:
    """Check ``lambda(tau, sigma, Omega) = s**3 lambda(tau / s**2, sigma, s Omega)``."""
    params.validate()
    if not s > 0.0:
        raise ValueError("s must be positive")
    lam = solve_steklov(domain, params, degree=degree).lam(2)
    if s == 1.0:
        return ScalingResult(s=s, lam2=lam, lam2_scaled=lam, rel_error=0.0)
    scaled_params = PlateParams(params.n, params.tau / s**2, params.sigma)
    lam_s = solve_steklov(domain.scaled(s), scaled_params, degree=degree).lam(2)
    rhs = s**3 * lam_s
    return ScalingResult(s=s, lam2=lam, lam2_scaled=lam_s, rel_error=abs(lam - rhs) / abs(lam))


# ---------------------------------------------------------------------------


@dataclass
class IsoperimetricReport:
    domain_id: str
    measure: float
    asymmetry: float
    asymmetry_error: float
    lam2: float
    lam2_ball: float
    stability_bound: float
    margin: float
    tolerance: float
    degree: int
    degree_change: float
    ok: bool = True
    error: str | None = None
    domain: dict[str, Any] = field(default_factory=dict)

    @property
    def weak_margin(self) -> float:
        return self.lam2_ball - self.lam2

    def row(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("domain")
        d["weak_margin"] = self.weak_margin
        return d


def normalize_area(domain: Domain, target: float = math.pi) -> Domain:
    """Dilate ``domain`` so that its area equals ``target``."""
    s = math.sqrt(target / area(domain))
    return domain if abs(s - 1.0) < 1e-15 else domain.scaled(s)


def isoperimetric_report(
    domain: Domain,
    params: PlateParams,
    degrees: Sequence[int] = (12, 14),
    resolution: int = DEFAULT_RESOLUTION,
    domain_id: str = "",
) -> IsoperimetricReport:
    """Stability margin ``lambda_2(ball)(1 - delta_2 A**2) - lambda_2(Omega)`` for one shape."""
    params.validate()
    shape = normalize_area(domain)
    measure = area(shape)
    degrees = sorted(degrees)
    lams = [solve_steklov(shape, params, degree=d).lam(2) for d in degrees]
    lam2 = lams[-1]
    change = abs(lams[-1] - lams[-2]) if len(lams) > 1 else 0.0
    asym = fraenkel_asymmetry(shape, resolution=resolution)
    _, delta = stability_constants(params.n, 2.0)
    lam_ball = ball_lambda2(params, measure)
    bound = lam_ball * (1.0 - delta * asym.value**2)
    tol = max(RELATIVE_SOLVER_TOL * lam_ball, change)
    margin = bound - lam2
    return IsoperimetricReport(
        domain_id=domain_id or domain.to_dict()["kind"],
        measure=measure,
        asymmetry=asym.value,
        asymmetry_error=asym.error,
        lam2=lam2,
        lam2_ball=lam_ball,
        stability_bound=bound,
        margin=margin,
        tolerance=tol,
        degree=degrees[-1],
        degree_change=change,
        ok=margin >= -tol,
        domain=domain.to_dict(),
    )


def isoperimetric_sweep(
    shapes: Iterable[Domain] | Iterable[tuple[str, Domain]],
    params: PlateParams,
    degrees: Sequence[int] = (12, 14),
    resolution: int = DEFAULT_RESOLUTION,
    threads: int | None = None,
) -> list[IsoperimetricReport]:
    """Run :func:`isoperimetric_report` on every shape; failures are recorded, not raised."""
    items = [s if isinstance(s, tuple) else (f"shape{k}", s) for k, s in enumerate(shapes)]

    def one(item):
        name, dom = item
        try:
            return isoperimetric_report(dom, params, degrees, resolution, domain_id=name)
        except Exception as exc:  # noqa: BLE001 - sweep keeps going
            log.warning("shape %s failed: %s", name, exc)
            nan = float("nan")
            return IsoperimetricReport(
                domain_id=name, measure=nan, asymmetry=nan, asymmetry_error=nan, lam2=nan,
                lam2_ball=nan, stability_bound=nan, margin=nan, tolerance=nan,
                degree=max(degrees), degree_change=nan, ok=False, error=str(exc),
                domain=dom.to_dict(),
            )

    return _map(one, items, threads)


def assert_margins(reports: Iterable[IsoperimetricReport]) -> None:
    bad = [r for r in reports if not r.ok]
    if bad:
        names = ", ".join(f"{r.domain_id} (margin {r.margin:.3e}, tol {r.tolerance:.3e})" for r in bad)
        raise TheoremViolation(f"stability inequality violated for: {names}")


def default_family() -> list[tuple[str, Domain]]:
    """Twelve smooth star-shaped test shapes (normalized to area pi by the sweep)."""
    fam: list[tuple[str, Domain]] = [("disk", Disk())]
    for e in (0.3, 0.5, 0.7, 0.8, 0.9):
        b = math.sqrt(1.0 - e * e)
        fam.append((f"ellipse_e{e}", Ellipse(1.0, b)))
    fam += [
        ("star_c2_0.2", Star(1.0, (0.0, 0.2))),
        ("star_c3_0.25", Star(1.0, (0.0, 0.0, 0.25))),
        ("star_c3_0.1", Star(1.0, (0.0, 0.0, 0.1))),
        ("star_c4_0.1", Star(1.0, (0.0, 0.0, 0.0, 0.1))),
        ("star_c1_0.3", Star(1.0, (0.3,))),
        ("star_mixed", Star(1.0, (0.0, 0.1, 0.05), (0.0, 0.0, 0.05))),
    ]
    return fam


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassConcentrationRow:
    eps: float
    lam1: float
    lam2: float
    gap: float


def mass_concentration_sweep(
    domain: Domain,
    params: PlateParams,
    total_mass: float,
    eps_list: Sequence[float],
    degree: int = 14,
    threads: int | None = None,
) -> tuple[float, list[MassConcentrationRow]]:
    """Neumann ``lambda_2(rho_eps)`` against the Steklov ``lambda_2`` with ``rho = M / |dOmega|``.

    Returns the Steklov reference and one row per ``eps``; raises
    :class:`TheoremViolation` unless the gap column is strictly decreasing.
    """
    params.validate()
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    quad = make_quadrature(domain)
    rho = total_mass / quad.perimeter
    ref = solve_steklov(domain, params, rho=rho, degree=degree, quad=quad).lam(2)

    def one(eps):
        spec = solve_neumann_eps(domain, params, total_mass, eps, degree=degree)
        return MassConcentrationRow(eps=eps, lam1=spec.lam(1), lam2=spec.lam(2), gap=abs(spec.lam(2) - ref))

    rows = _map(one, eps_list, threads)
    gaps = [r.gap for r in rows]
    if any(b >= a for a, b in zip(gaps, gaps[1:])):
        raise TheoremViolation(f"mass-concentration gaps not strictly decreasing: {gaps}")
    return ref, rows
